import json
from io import StringIO

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from quimiotaxis import outputs
from quimiotaxis.tests.csv_files import read_csv

STEADY = {
    'grid': {'cells': [16, 16], 'extent': [1.0, 1.0]},
    'model': {'m': 1.5, 'q': 1.0},
    'initial': {'preset': 'constant', 'value': 1.0, 'v_value': 1.0},
    'horizon': 0.01,
    'samples': 3,
}

RANDOM_LINE = {
    'grid': {'cells': [16], 'extent': [1.0]},
    'model': {'m': 1.5, 'q': 1.0, 'sigma': 0.01},
    'initial': {'preset': 'random-nonneg', 'amplitude': 2.0},
    'horizon': 0.005,
    'samples': 3,
}


def write_config(tmp_path, document, name='config.json'):
    path = tmp_path / name
    path.write_text(json.dumps(document))
    return str(path)


def command(*args):
    stdout, stderr = StringIO(), StringIO()
    call_command(*args, stdout=stdout, stderr=stderr)
    return stdout.getvalue()


def failing_command(*args):
    stderr = StringIO()
    with pytest.raises(CommandError) as excinfo:
        call_command(*args, stdout=StringIO(), stderr=stderr)
    return excinfo.value.returncode, stderr.getvalue()


# RUN

def test_run_writes_outputs(tmp_path):
    out = tmp_path / 'out'
    printed = command('run', write_config(tmp_path, STEADY), '--out', str(out))
    assert 'Bounded (reached_T)' in printed
    for name in (outputs.RUN_CSV, outputs.METADATA_JSON, outputs.LADDER_CSV, outputs.SERIES_NPY):
        assert (out / name).is_file()


def test_run_defaults_to_output_setting(tmp_path, settings):
    settings.SIMULACION_OUTPUT_DIR = tmp_path / 'resultados'
    command('run', write_config(tmp_path, STEADY, name='estable.json'))
    assert (tmp_path / 'resultados' / 'estable' / outputs.RUN_CSV).is_file()


def test_run_seed_override(tmp_path):
    out = tmp_path / 'out'
    command('run', write_config(tmp_path, RANDOM_LINE), '--out', str(out), '--seed', '11')
    metadata = outputs.read_json(out / outputs.METADATA_JSON)
    assert metadata['config']['seed'] == 11


def test_run_invalid_config_exits_one(tmp_path):
    document = dict(STEADY, model={'m': -1, 'q': 1})
    returncode, stderr = failing_command('run', write_config(tmp_path, document))
    assert returncode == 1
    assert 'model.m: debe cumplir m > 0' in stderr


def test_run_rejects_sweep_document(tmp_path):
    document = {'sweep': {'m_grid': [1], 'q_grid': [1]}, 'run': STEADY}
    returncode, _ = failing_command('run', write_config(tmp_path, document))
    assert returncode == 1


def test_run_missing_file_exits_one(tmp_path):
    returncode, _ = failing_command('run', str(tmp_path / 'nada.json'))
    assert returncode == 1


def test_run_unwritable_out_exits_one(tmp_path):
    blocker = tmp_path / 'blocker'
    blocker.write_text('x')
    returncode, _ = failing_command('run', write_config(tmp_path, STEADY), '--out', str(blocker))
    assert returncode == 1


def test_run_failure_exits_two(tmp_path):
    document = dict(RANDOM_LINE, control={'v_solve_max_iters': 1})
    returncode, _ = failing_command('run', write_config(tmp_path, document),
                                    '--out', str(tmp_path / 'out'))
    assert returncode == 2


# SWEEP

def test_sweep_writes_results(tmp_path):
    document = {'sweep': {'m_grid': [1.0, 2.0], 'q_grid': [1.0], 'workers': 1}, 'run': RANDOM_LINE}
    out = tmp_path / 'out'
    printed = command('sweep', write_config(tmp_path, document), '--out', str(out))
    assert '2 puntos' in printed
    points = outputs.read_json(out / outputs.SWEEP_JSON)
    assert [p['m'] for p in points] == [1.0, 2.0]
    assert (out / 'points' / 'i1_j0' / outputs.RUN_CSV).is_file()


def test_sweep_with_failed_points_exits_two(tmp_path):
    run_document = dict(RANDOM_LINE, control={'v_solve_max_iters': 1})
    document = {'sweep': {'m_grid': [1.0, 2.0], 'q_grid': [1.0]}, 'run': run_document}
    out = tmp_path / 'out'
    returncode, _ = failing_command('sweep', write_config(tmp_path, document), '--out', str(out))
    assert returncode == 2
    points = outputs.read_json(out / outputs.SWEEP_JSON)
    assert all(p['classification'] == 'Inconclusive' and p['error'] for p in points)


def test_sweep_invalid_grid_exits_one(tmp_path):
    document = {'sweep': {'m_grid': [2.0, 1.0], 'q_grid': [1.0]}, 'run': RANDOM_LINE}
    returncode, stderr = failing_command('sweep', write_config(tmp_path, document))
    assert returncode == 1
    assert 'sweep.m_grid' in stderr


# KERNELS

def test_kernels_report(tmp_path):
    report = json.loads(command('kernels', '--out', str(tmp_path)))
    assert report['passed']
    assert outputs.read_json(tmp_path / 'kernels.json') == report


# LADDER

def test_ladder_rebuilds_from_saved_run(tmp_path):
    out = tmp_path / 'run'
    command('run', write_config(tmp_path, RANDOM_LINE), '--out', str(out))
    printed = command('ladder', str(out), '--K', '0.5', '--n-max', '4')
    assert 'monotona=True' in printed
    header, rows = read_csv(out / 'ladder_K=0.5.csv')
    assert header == ['n', 'K_n', 'A_n_measure', 'y_n']
    assert len(rows) == 5
    assert rows[0][1] == 0.25


def test_ladder_rejects_non_positive_level(tmp_path):
    out = tmp_path / 'run'
    command('run', write_config(tmp_path, RANDOM_LINE), '--out', str(out))
    returncode, _ = failing_command('ladder', str(out), '--K', '0')
    assert returncode == 1


def test_ladder_requires_run_directory(tmp_path):
    returncode, _ = failing_command('ladder', str(tmp_path), '--K', '1.0')
    assert returncode == 1


# SIGMA_LADDER

def test_sigma_ladder_report(tmp_path):
    out = tmp_path / 'out'
    command('sigma_ladder', write_config(tmp_path, RANDOM_LINE), '--sigmas', '0.1', '0.0',
            '--out', str(out))
    report = outputs.read_json(out / 'sigma_ladder.json')
    assert [entry['sigma'] for entry in report['runs']] == [0.1, 0.0]
    assert all(entry['error'] is None for entry in report['runs'])


def test_sigma_ladder_rejects_invalid_sigma(tmp_path):
    returncode, _ = failing_command('sigma_ladder', write_config(tmp_path, RANDOM_LINE),
                                    '--sigmas', '1.5')
    assert returncode == 1
