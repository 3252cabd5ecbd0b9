import json
import math

import numpy as np
import pytest

from quimiotaxis import outputs
from quimiotaxis.config import SweepConfig
from quimiotaxis.exceptions import OutputError
from quimiotaxis.serializers import dump_config, parse_document
from quimiotaxis.sweep import execute_run, run_sweep
from quimiotaxis.tests.csv_files import read_csv

RUN_FILES = (outputs.RUN_CSV, outputs.METADATA_JSON, outputs.LADDER_CSV, outputs.SERIES_NPY)


def steady_config(**overrides):
    document = {
        'grid': {'cells': [16, 16], 'extent': [1.0, 1.0]},
        'model': {'m': 1.5, 'q': 1.0},
        'initial': {'preset': 'constant', 'value': 1.0, 'v_value': 1.0},
        'horizon': 0.01,
        'samples': 3,
    }
    document.update(overrides)
    return parse_document(document)


def gaussian_config():
    return parse_document({
        'grid': {'cells': [20, 20], 'extent': [1.0, 1.0]},
        'model': {'m': 2.0, 'q': 1.0, 'sigma': 0.001},
        'initial': {'preset': 'gaussian-bump', 'mass': 1.0, 'width': 0.15},
        'diagnostics': {'p_list': [1, 2, 4]},
        'horizon': 0.002,
        'samples': 4,
    })


def emit(cfg, out):
    return outputs.emit_run_outputs(out, execute_run(cfg), dump_config(cfg))


# FORMATO

def test_format_real_round_trips():
    for value in (0.1, 1 / 3, 1e-300, 2.0**60, -0.0, math.pi):
        assert float(outputs.format_real(value)) == value
    assert outputs.format_real(1) == '1.0'


def test_json_safe_non_finite():
    assert outputs._json_safe({'a': math.inf, 'b': [math.nan, 1.0]}) == {'a': 'inf', 'b': ['nan', 1.0]}


def test_run_csv_header():
    assert outputs.run_csv_header((1.0, 2.0)) == [
        't', 'mass', 'sup_u', 'sup_v', 'sup_grad_v', 'lp_u:p=1.0', 'lp_u:p=2.0',
        'energy_s', 'grad_energy_running', 'ratio_fr1', 'ratio_s14',
    ]


# SALIDAS DE UNA CORRIDA

def test_steady_run_writes_identical_rows(tmp_path):
    emit(steady_config(), tmp_path)
    header, rows = read_csv(tmp_path / outputs.RUN_CSV)
    assert header == outputs.run_csv_header((1.0, 2.0))
    assert [row[0] for row in rows] == [0.0, 0.005, 0.01]
    assert rows[0][1:] == rows[1][1:] == rows[2][1:]
    assert rows[0][1] == pytest.approx(1.0)


def test_every_run_file_is_written(tmp_path):
    emit(gaussian_config(), tmp_path / 'run')
    for name in RUN_FILES:
        assert (tmp_path / 'run' / name).is_file()


def test_csv_parses_back_to_records(tmp_path):
    cfg = gaussian_config()
    artifacts = execute_run(cfg)
    outputs.emit_run_outputs(tmp_path, artifacts, dump_config(cfg))
    header, rows = read_csv(tmp_path / outputs.RUN_CSV)
    assert 'lp_u:p=4.0' in header
    assert len(rows) == len(artifacts.records)
    for row, record in zip(rows, artifacts.records):
        assert row == [float(cell) for cell in outputs.run_csv_row(record, (1.0, 2.0, 4.0))]
        assert row[header.index('lp_u:p=4.0')] == record.lp_u[4.0]


def test_metadata_contents(tmp_path):
    cfg = gaussian_config()
    emit(cfg, tmp_path)
    metadata = outputs.read_json(tmp_path / outputs.METADATA_JSON)
    assert metadata['config'] == json.loads(json.dumps(dump_config(cfg)))
    assert parse_document(metadata['config']) == cfg
    assert metadata['termination'] == 'reached_T'
    assert metadata['classification'] == 'Bounded'
    assert metadata['regime'] == 'H3'
    assert metadata['sample_times'] == pytest.approx([0.0, 2e-3 / 3, 4e-3 / 3, 2e-3])
    assert metadata['analysis']['N'] == 2
    assert metadata['analysis']['p'] == 4.0
    assert metadata['analysis']['lemma_conditions']['all'] is True
    assert set(metadata['versions']) == {'quimiotaxis', 'numpy', 'scipy', 'django',
                                         'djangorestframework'}
    assert metadata['decay']['monotone'] is True
    assert metadata['ladder']['n_max'] == 10


def test_ladder_csv_columns(tmp_path):
    emit(gaussian_config(), tmp_path)
    header, rows = read_csv(tmp_path / outputs.LADDER_CSV)
    assert header == ['n', 'K_n', 'A_n_measure', 'y_n']
    assert [row[0] for row in rows] == list(range(11))
    energies = [row[3] for row in rows]
    assert all(later <= earlier for earlier, later in zip(energies, energies[1:]))


def test_series_reloads(tmp_path):
    cfg = gaussian_config()
    artifacts = execute_run(cfg)
    outputs.emit_run_outputs(tmp_path, artifacts, dump_config(cfg))
    metadata, values = outputs.load_run_artifact(tmp_path)
    np.testing.assert_array_equal(values, artifacts.series.values)
    assert len(metadata['sample_times']) == values.shape[0]


def test_reruns_are_byte_identical(tmp_path):
    cfg = gaussian_config()
    emit(cfg, tmp_path / 'a')
    emit(cfg, tmp_path / 'b')
    for name in RUN_FILES:
        assert (tmp_path / 'a' / name).read_bytes() == (tmp_path / 'b' / name).read_bytes()


def test_unwritable_directory_raises_output_error(tmp_path):
    blocker = tmp_path / 'blocker'
    blocker.write_text('x')
    with pytest.raises(OutputError):
        emit(steady_config(), blocker / 'run')


def test_missing_artifact_raises_output_error(tmp_path):
    with pytest.raises(OutputError):
        outputs.load_run_artifact(tmp_path)


# SALIDAS DE UN BARRIDO

def test_sweep_outputs(tmp_path):
    template = steady_config()
    cfg = SweepConfig(m_grid=(1.5, 2.0), q_grid=(0.5, 1.0), template=template)
    result = run_sweep(cfg, workers=1)
    documents = {(i, j): dump_config(job) for i, j, job in cfg.jobs()}
    outputs.emit_sweep_outputs(tmp_path, result, dump_config(cfg), documents)

    points = outputs.read_json(tmp_path / outputs.SWEEP_JSON)
    assert len(points) == 4
    assert [(p['i'], p['j']) for p in points] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert all(p['classification'] == 'Bounded' and p['error'] is None for p in points)

    metadata = outputs.read_json(tmp_path / outputs.SWEEP_METADATA_JSON)
    assert parse_document(metadata['config']) == cfg

    point_dir = tmp_path / 'points' / 'i1_j0'
    assert (point_dir / outputs.RUN_CSV).is_file()
    assert not (point_dir / outputs.SERIES_NPY).exists()
    point_metadata = outputs.read_json(point_dir / outputs.METADATA_JSON)
    assert point_metadata['config']['model']['m'] == 2.0
    assert point_metadata['config']['model']['q'] == 0.5


def test_sweep_files_do_not_depend_on_worker_count(tmp_path):
    template = parse_document({
        'grid': {'cells': [16], 'extent': [1.0]},
        'model': {'m': 1.5, 'q': 1.0, 'sigma': 0.01},
        'initial': {'preset': 'random-nonneg', 'amplitude': 2.0},
        'horizon': 0.005,
        'samples': 3,
        'seed': 3,
    })
    cfg = SweepConfig(m_grid=(1.0, 2.0), q_grid=(0.5, 1.0), template=template)
    documents = {(i, j): dump_config(job) for i, j, job in cfg.jobs()}
    for workers in (1, 2):
        result = run_sweep(cfg, workers=workers)
        outputs.emit_sweep_outputs(tmp_path / f'w{workers}', result, dump_config(cfg), documents)

    serial, parallel = tmp_path / 'w1', tmp_path / 'w2'
    assert (serial / outputs.SWEEP_JSON).read_bytes() == (parallel / outputs.SWEEP_JSON).read_bytes()
    point_files = sorted(path.relative_to(serial) for path in (serial / 'points').rglob('*')
                         if path.is_file())
    assert len(point_files) == 4 * 3
    for name in point_files:
        assert (serial / name).read_bytes() == (parallel / name).read_bytes()
