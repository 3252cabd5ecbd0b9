"""
Run orchestration: single runs, the (m, q) phase-diagram sweep and the
sigma ladder. Jobs are independent; results are merged by grid index, so the
output does not depend on the worker count or the completion order.
"""

from __future__ import annotations

import enum
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .diagnostics import DiagnosticsMonitor, build_ladder, check_decay
from .model import classify_regime, make_initial_data
from .solver import Termination, run

logger = logging.getLogger(__name__)

DEFAULT_SIGMAS = (1e-1, 1e-2, 1e-3, 0.0)


class Classification(str, enum.Enum):
    BOUNDED = 'Bounded'
    BLOW_UP = 'BlowUp'
    INCONCLUSIVE = 'Inconclusive'


@dataclass(frozen=True)
class RunVerdict:
    classification: Classification
    monotone_growth: bool


@dataclass(frozen=True)
class RunArtifacts:
    config: object
    records: list
    termination: Termination
    steps: int
    t_end: float
    regime: str
    verdict: RunVerdict
    resolved: object
    ladder: object
    decay: object
    series: object = None


@dataclass(frozen=True)
class SweepPoint:
    i: int
    j: int
    m: float
    q: float
    regime: str | None
    classification: str
    termination: str | None
    final_sup_u: float | None
    t_end: float | None
    max_ratio_s14: float | None
    monotone_growth: bool
    error: str | None = None


@dataclass(frozen=True)
class SweepResult:
    points: list
    artifacts: dict

    @property
    def failures(self):
        return [point for point in self.points if point.error is not None]


_BLOW_UP_REASONS = {Termination.DT_COLLAPSED, Termination.NONFINITE, Termination.SUP_THRESHOLD}


def classify_run(records, termination, bounded_multiple):
    if not records:
        raise ValueError('se requiere al menos un registro')
    sups = [record.sup_u for record in records]
    growth = len(sups) > 1 and sups[-1] > sups[0] and all(
        later >= earlier for earlier, later in zip(sups, sups[1:]))
    if Termination(termination) in _BLOW_UP_REASONS:
        label = Classification.BLOW_UP
    elif max(sups) <= bounded_multiple * sups[0]:
        label = Classification.BOUNDED
    else:
        label = Classification.INCONCLUSIVE
    return RunVerdict(classification=label, monotone_growth=growth)


def execute_run(cfg, keep_series=True):
    grid = cfg.grid
    initial = make_initial_data(cfg.initial, grid)
    monitor = DiagnosticsMonitor(cfg.params, cfg.diagnostics, initial.v0)
    result = run(initial, cfg.params, cfg.control, cfg.horizon, cfg.samples, monitor)

    regime = classify_regime(cfg.params, monitor.resolved.N)
    verdict = classify_run(result.records, result.termination, cfg.bounded_multiple)

    ladder = decay = None
    K = cfg.diagnostics.ladder.level(max(record.sup_u for record in result.records))
    if K > 0:
        ladder = build_ladder(result.series, K, cfg.diagnostics.n_max, monitor.resolved.m_s)
        decay = check_decay(ladder)
    else:
        logger.warning('escalera omitida: K=%r no es positivo', K)

    return RunArtifacts(
        config=cfg,
        records=result.records,
        termination=result.termination,
        steps=result.steps,
        t_end=result.final_state.t,
        regime=regime.value,
        verdict=verdict,
        resolved=monitor.resolved,
        ladder=ladder,
        decay=decay,
        series=result.series if keep_series else None,
    )


def _point_job(job):
    i, j, cfg = job
    try:
        return i, j, execute_run(cfg, keep_series=False), None
    except Exception as exc:
        return i, j, None, f'{type(exc).__name__}: {exc}'


def _map_jobs(jobs, workers):
    if workers <= 1:
        return [_point_job(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_point_job, jobs))


def _summarize(i, j, cfg, artifacts, error):
    if error is not None:
        logger.error('punto (%d, %d) m=%r q=%r fallo: %s', i, j, cfg.params.m, cfg.params.q, error)
        return SweepPoint(i=i, j=j, m=cfg.params.m, q=cfg.params.q, regime=None,
                          classification=Classification.INCONCLUSIVE.value, termination=None,
                          final_sup_u=None, t_end=None, max_ratio_s14=None,
                          monotone_growth=False, error=error)
    logger.info('punto (%d, %d) m=%r q=%r -> %s', i, j, cfg.params.m, cfg.params.q,
                artifacts.verdict.classification.value)
    return SweepPoint(
        i=i, j=j, m=cfg.params.m, q=cfg.params.q,
        regime=artifacts.regime,
        classification=artifacts.verdict.classification.value,
        termination=artifacts.termination.value,
        final_sup_u=artifacts.records[-1].sup_u,
        t_end=artifacts.t_end,
        max_ratio_s14=max(record.ratio_s14 for record in artifacts.records),
        monotone_growth=artifacts.verdict.monotone_growth,
    )


def run_sweep(cfg, workers=None):
    jobs = cfg.jobs()
    workers = cfg.workers if workers is None else workers
    logger.info('barrido de %d puntos con %d procesos', len(jobs), workers)
    configs = {(i, j): job_cfg for i, j, job_cfg in jobs}

    outcomes = sorted(_map_jobs(jobs, workers), key=lambda item: (item[0], item[1]))
    points, artifacts = [], {}
    for i, j, point_artifacts, error in outcomes:
        points.append(_summarize(i, j, configs[(i, j)], point_artifacts, error))
        if point_artifacts is not None:
            artifacts[(i, j)] = point_artifacts
    return SweepResult(points=points, artifacts=artifacts)


def run_sigma_ladder(cfg, sigmas=DEFAULT_SIGMAS, workers=1):
    """The same run across a list of sigma values, for the empirical sigma -> 0 study."""
    jobs = [(k, 0, cfg.with_sigma(sigma)) for k, sigma in enumerate(sigmas)]
    outcomes = sorted(_map_jobs(jobs, workers), key=lambda item: item[0])
    summaries = []
    for k, _, artifacts, error in outcomes:
        entry = {'sigma': sigmas[k], 'error': error}
        if artifacts is not None:
            entry.update(
                termination=artifacts.termination.value,
                classification=artifacts.verdict.classification.value,
                final_sup_u=artifacts.records[-1].sup_u,
                max_sup_u=max(record.sup_u for record in artifacts.records),
                max_ratio_fr1=max(record.ratio_fr1 for record in artifacts.records),
                max_ratio_s14=max(record.ratio_s14 for record in artifacts.records),
                t_end=artifacts.t_end,
            )
        summaries.append(entry)
    return summaries
