import dataclasses
import math

import numpy as np
import pytest

from quimiotaxis.config import SweepConfig, Thresholds
from quimiotaxis.diagnostics import DiagnosticsConfig, DiagnosticsMonitor, DiagnosticsRecord
from quimiotaxis.grid import GridSpec
from quimiotaxis.model import InitialData, InitialSpec, ModelParams, Preset, make_initial_data
from quimiotaxis.serializers import parse_document
from quimiotaxis.solver import StepControl, Termination, run
from quimiotaxis.sweep import (
    Classification, classify_run, execute_run, run_sigma_ladder, run_sweep,
)


def record(t, sup_u):
    return DiagnosticsRecord(t=t, mass=1.0, sup_u=sup_u, lp_u={}, sup_grad_v=0.0, sup_v=0.0,
                             energy_s=0.0, grad_energy_running=0.0, v_w1inf_0=0.0,
                             ratio_fr1=0.0, ratio_s14=0.0)


def small_run(**overrides):
    document = {
        'grid': {'cells': [16], 'extent': [1.0]},
        'model': {'m': 1.5, 'q': 1.0, 'sigma': 0.01},
        'initial': {'preset': 'random-nonneg', 'amplitude': 2.0},
        'horizon': 0.005,
        'samples': 3,
        'seed': 3,
    }
    document.update(overrides)
    return parse_document(document)


def small_sweep(**plan):
    return SweepConfig(m_grid=plan.pop('m_grid', (1.0, 2.0)), q_grid=plan.pop('q_grid', (0.5, 1.0)),
                       template=small_run(), **plan)


# CLASSIFY_RUN

def test_constant_steady_run_is_bounded():
    verdict = classify_run([record(0.0, 1.0), record(0.5, 1.0), record(1.0, 1.0)],
                           Termination.REACHED_T, 50.0)
    assert verdict.classification is Classification.BOUNDED
    assert not verdict.monotone_growth


@pytest.mark.parametrize("termination", [
    Termination.NONFINITE, Termination.DT_COLLAPSED, Termination.SUP_THRESHOLD,
])
def test_blow_up_sentinels(termination):
    verdict = classify_run([record(0.0, 1.0), record(0.1, 2.0)], termination, 50.0)
    assert verdict.classification is Classification.BLOW_UP


def test_growth_just_below_threshold_is_flagged():
    sups = [1.0, 10.0, 30.0, 49.5]
    records = [record(float(k), sup) for k, sup in enumerate(sups)]
    verdict = classify_run(records, Termination.REACHED_T, 50.0)
    assert verdict.classification is Classification.BOUNDED
    assert verdict.monotone_growth


def test_growth_above_threshold_is_inconclusive():
    records = [record(0.0, 1.0), record(1.0, 60.0), record(2.0, 20.0)]
    verdict = classify_run(records, 'reached_T', 50.0)
    assert verdict.classification is Classification.INCONCLUSIVE
    assert not verdict.monotone_growth


def test_classify_requires_records():
    with pytest.raises(ValueError):
        classify_run([], Termination.REACHED_T, 50.0)


# DICOTOMIA RAPIDA

def concentrated_data(grid, mass):
    # Signal aligned with the density, so aggregation starts at t = 0.
    u0 = make_initial_data(InitialSpec(Preset.GAUSSIAN, mass=mass, width=0.08), grid).u0
    return InitialData(spec=InitialSpec(Preset.GAUSSIAN, mass=mass, width=0.08), u0=u0, v0=u0)


def dichotomy_run(m, horizon):
    grid = GridSpec((32, 32), (1.0, 1.0))
    initial = concentrated_data(grid, 1.5 * 8 * math.pi)
    params = ModelParams(m=m, q=1.0)
    monitor = DiagnosticsMonitor(params, DiagnosticsConfig(), initial.v0)
    ctrl = StepControl(sup_multiple=5.0, dt_max=horizon)
    result = run(initial, params, ctrl, horizon, 3, monitor)
    return result, classify_run(result.records, result.termination, 50.0)


def test_classical_supercritical_mass_blows_up():
    result, verdict = dichotomy_run(1.0, 1e-2)
    assert result.termination in (Termination.SUP_THRESHOLD, Termination.DT_COLLAPSED)
    assert result.final_state.t < 1e-2
    assert verdict.classification is Classification.BLOW_UP


def test_porous_medium_side_stays_bounded():
    result, verdict = dichotomy_run(2.0, 1e-5)
    assert result.termination is Termination.REACHED_T
    assert verdict.classification is Classification.BOUNDED
    assert np.all(np.isfinite(result.final_state.u.values))


# EXECUTE_RUN

def test_execute_run_collects_artifacts():
    cfg = small_run()
    artifacts = execute_run(cfg)
    assert artifacts.termination is Termination.REACHED_T
    assert [r.t for r in artifacts.records] == [0.0, 0.0025, 0.005]
    assert artifacts.regime == 'H3'
    assert artifacts.series.values.shape == (3, 16)
    assert artifacts.ladder.K == pytest.approx(max(r.sup_u for r in artifacts.records))
    assert artifacts.decay.monotone
    assert execute_run(cfg, keep_series=False).series is None


def test_execute_run_is_reproducible():
    first, second = execute_run(small_run()), execute_run(small_run())
    assert first.records == second.records
    assert first.ladder == second.ladder


# RUN_SWEEP

def test_single_point_sweep_matches_single_run():
    cfg = small_sweep(m_grid=(1.5,), q_grid=(1.0,))
    result = run_sweep(cfg, workers=1)
    single = execute_run(cfg.template)
    [point] = result.points
    assert (point.i, point.j) == (0, 0)
    assert point.classification == single.verdict.classification.value
    assert point.termination == single.termination.value
    assert point.final_sup_u == single.records[-1].sup_u
    assert point.t_end == single.t_end
    assert result.artifacts[(0, 0)].records == single.records


def test_sweep_points_are_in_grid_order():
    result = run_sweep(small_sweep(), workers=1)
    assert [(p.i, p.j, p.m, p.q) for p in result.points] == [
        (0, 0, 1.0, 0.5), (0, 1, 1.0, 1.0), (1, 0, 2.0, 0.5), (1, 1, 2.0, 1.0)]
    assert not result.failures


def test_sweep_does_not_depend_on_worker_count():
    cfg = small_sweep()
    serial = run_sweep(cfg, workers=1)
    parallel = run_sweep(cfg, workers=2)
    assert serial.points == parallel.points
    for key, artifacts in serial.artifacts.items():
        assert parallel.artifacts[key].records == artifacts.records


def test_sweep_thresholds_reach_every_point():
    cfg = small_sweep(thresholds=Thresholds(bounded_multiple=1.0 + 1e-12))
    result = run_sweep(cfg, workers=1)
    for artifacts in result.artifacts.values():
        assert artifacts.config.bounded_multiple == 1.0 + 1e-12


def test_failed_points_are_reported_not_raised():
    template = small_run()
    template = dataclasses.replace(template, control=dataclasses.replace(
        template.control, v_solve_max_iters=1))
    cfg = SweepConfig(m_grid=(1.0, 2.0), q_grid=(1.0,), template=template)
    result = run_sweep(cfg, workers=1)
    assert len(result.failures) == 2
    for point in result.points:
        assert point.classification == Classification.INCONCLUSIVE.value
        assert point.error.startswith('SolverDivergence')
        assert point.termination is None
    assert result.artifacts == {}


# RUN_SIGMA_LADDER

def test_sigma_ladder_runs_every_sigma():
    summaries = run_sigma_ladder(small_run(), sigmas=(0.1, 0.01, 0.0))
    assert [entry['sigma'] for entry in summaries] == [0.1, 0.01, 0.0]
    for entry in summaries:
        assert entry['error'] is None
        assert entry['termination'] == 'reached_T'
        assert entry['max_sup_u'] >= entry['final_sup_u']
        assert entry['t_end'] == 0.005


def test_sigma_ladder_is_worker_independent():
    cfg = small_run()
    assert run_sigma_ladder(cfg, sigmas=(0.1, 0.0), workers=2) == run_sigma_ladder(
        cfg, sigmas=(0.1, 0.0), workers=1)
