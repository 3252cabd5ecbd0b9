"""
Result files. Reals are written with the shortest round-trip representation so
reruns are byte-identical and the CSVs parse back to the same doubles.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import django
import numpy as np
import rest_framework
import scipy
from django.conf import settings

from .exceptions import OutputError

RUN_CSV = 'run.csv'
METADATA_JSON = 'metadata.json'
LADDER_CSV = 'ladder.csv'
SERIES_NPY = 'u_series.npy'
SWEEP_JSON = 'sweep.json'
SWEEP_METADATA_JSON = 'sweep_metadata.json'


def format_real(value):
    return repr(float(value))


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return format_real(value)
    if isinstance(value, dict):
        return {str(key): _json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(item) for item in value]
    return value


def versions():
    return {
        'quimiotaxis': settings.SIMULACION_VERSION,
        'numpy': np.__version__,
        'scipy': scipy.__version__,
        'django': django.get_version(),
        'djangorestframework': rest_framework.VERSION,
    }


def _ensure_dir(path):
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f'no se puede crear el directorio {path}: {exc}') from exc
    return path


def _write_text(path, writer):
    try:
        with open(path, 'w', newline='', encoding='utf-8') as handle:
            writer(handle)
    except OSError as exc:
        raise OutputError(f'no se puede escribir {path}: {exc}') from exc


def write_json(path, payload):
    text = json.dumps(_json_safe(payload), indent=2, sort_keys=True)
    _write_text(path, lambda handle: handle.write(text + '\n'))


def run_csv_header(p_list):
    return (['t', 'mass', 'sup_u', 'sup_v', 'sup_grad_v']
            + [f'lp_u:p={format_real(p)}' for p in p_list]
            + ['energy_s', 'grad_energy_running', 'ratio_fr1', 'ratio_s14'])


def run_csv_row(record, p_list):
    values = ([record.t, record.mass, record.sup_u, record.sup_v, record.sup_grad_v]
              + [record.lp_u[float(p)] for p in p_list]
              + [record.energy_s, record.grad_energy_running, record.ratio_fr1, record.ratio_s14])
    return [format_real(value) for value in values]


def write_run_csv(path, records, p_list):
    def write(handle):
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(run_csv_header(p_list))
        for record in records:
            writer.writerow(run_csv_row(record, p_list))
    _write_text(path, write)


def write_ladder_csv(path, ladder):
    def write(handle):
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(['n', 'K_n', 'A_n_measure', 'y_n'])
        rows = zip(ladder.levels, ladder.level_set_measures, ladder.truncation_energies)
        for n, (level, measure, energy) in enumerate(rows):
            writer.writerow([n, format_real(level), format_real(measure), format_real(energy)])
    _write_text(path, write)


def decay_payload(decay):
    if decay is None:
        return None
    return {
        'monotone': decay.monotone,
        'measures_monotone': decay.measures_monotone,
        'empirical_decay_exponents': [
            'not-applicable' if value is None else value
            for value in decay.empirical_decay_exponents
        ],
    }


def run_metadata(artifacts, config_document):
    resolved = artifacts.resolved
    records = artifacts.records
    return {
        'config': config_document,
        'versions': versions(),
        'termination': artifacts.termination.value,
        'classification': artifacts.verdict.classification.value,
        'monotone_growth': artifacts.verdict.monotone_growth,
        'regime': artifacts.regime,
        'steps': artifacts.steps,
        't_end': artifacts.t_end,
        'sample_times': [record.t for record in records],
        'analysis': {
            'N': resolved.N,
            's': resolved.s,
            'p': resolved.p_fr1,
            'm_s': resolved.m_s,
            's14_exponent': resolved.s14_exponent,
            'lemma_conditions': resolved.lemma_conditions,
        },
        'v_w1inf_0': records[0].v_w1inf_0,
        'max_sup_hess_v': max(record.sup_hess_v for record in records),
        'ladder': None if artifacts.ladder is None else {
            'K': artifacts.ladder.K, 'n_max': len(artifacts.ladder.levels) - 1,
        },
        'decay': decay_payload(artifacts.decay),
    }


def save_series(directory, series):
    path = Path(directory) / SERIES_NPY
    try:
        np.save(path, series.values)
    except OSError as exc:
        raise OutputError(f'no se puede escribir {path}: {exc}') from exc


def emit_run_outputs(out_dir, artifacts, config_document):
    out = _ensure_dir(out_dir)
    p_list = artifacts.config.diagnostics.p_list
    write_run_csv(out / RUN_CSV, artifacts.records, p_list)
    write_json(out / METADATA_JSON, run_metadata(artifacts, config_document))
    if artifacts.ladder is not None:
        write_ladder_csv(out / LADDER_CSV, artifacts.ladder)
    if artifacts.series is not None:
        save_series(out, artifacts.series)
    return out


def point_payload(point):
    return {
        'i': point.i,
        'j': point.j,
        'm': point.m,
        'q': point.q,
        'regime': point.regime,
        'classification': point.classification,
        'termination': point.termination,
        'final_sup_u': point.final_sup_u,
        't_end': point.t_end,
        'max_ratio_s14': point.max_ratio_s14,
        'monotone_growth': point.monotone_growth,
        'error': point.error,
    }


def emit_sweep_outputs(out_dir, result, config_document, point_documents):
    out = _ensure_dir(out_dir)
    write_json(out / SWEEP_JSON, [point_payload(point) for point in result.points])
    write_json(out / SWEEP_METADATA_JSON, {'config': config_document, 'versions': versions()})
    for (i, j), artifacts in sorted(result.artifacts.items()):
        emit_run_outputs(out / 'points' / f'i{i}_j{j}', artifacts, point_documents[(i, j)])
    return out


def read_json(path):
    try:
        with open(path, encoding='utf-8') as handle:
            return json.load(handle)
    except (OSError, ValueError) as exc:
        raise OutputError(f'no se puede leer {path}: {exc}') from exc


def load_run_artifact(run_dir):
    """(metadata, u series array) of a directory written by emit_run_outputs."""
    run_dir = Path(run_dir)
    metadata = read_json(run_dir / METADATA_JSON)
    try:
        values = np.load(run_dir / SERIES_NPY)
    except (OSError, ValueError) as exc:
        raise OutputError(f'no se puede leer {run_dir / SERIES_NPY}: {exc}') from exc
    return metadata, values


def emit_json_report(out_dir, name, payload):
    out = _ensure_dir(out_dir)
    write_json(out / name, payload)
    return out / name


def emit_ladder_csv(out_dir, name, ladder):
    out = _ensure_dir(out_dir)
    write_ladder_csv(out / name, ladder)
    return out / name
