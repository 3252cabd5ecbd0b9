"""
Proof-tracked quantities per output time and the truncation-level ladder.

Space-time integrals use piecewise-constant-in-time quadrature at the output
samples: the running accumulators and the ladder take the value at a sample
times the interval since the previous sample.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .exceptions import ContractViolation
from .grid import Field, face_gradient, integrate, lp_norm, second_differences

logger = logging.getLogger(__name__)

MAX_LADDER_LEVELS = 50


@dataclass(frozen=True)
class LadderPolicy:
    mode: str = 'sup_multiple'
    value: float = 1.0

    def level(self, sup_u):
        if self.mode == 'fixed':
            return self.value
        return self.value * sup_u


@dataclass(frozen=True)
class DiagnosticsConfig:
    p_list: tuple[float, ...] = (1.0, 2.0)
    p_fr1: float | None = None
    s: float | None = None
    ladder: LadderPolicy = field(default_factory=LadderPolicy)
    n_max: int = 10
    n_analytic: int | None = None


@dataclass(frozen=True)
class ResolvedDiagnostics:
    """Config knobs with the defaults that depend on (m, q, N) filled in."""
    N: int
    s: float
    p_fr1: float
    s14_exponent: float
    m_s: float
    lemma_conditions: dict

    @classmethod
    def build(cls, params, config):
        N = config.n_analytic or max(2, params.dim)
        s = config.s if config.s is not None else float(kernels.default_s(params.m, params.q, N))
        p_fr1 = config.p_fr1 if config.p_fr1 is not None else float(N + 2)
        if not p_fr1 > (N + 2) / 2:
            raise ContractViolation(f'p debe cumplir p > (N+2)/2, recibido {p_fr1}')
        conditions = kernels.lemma_conditions(s, params.m, params.q, N)
        if not conditions['all']:
            logger.warning('s=%r no cumple todas las condiciones del lema de energia: %s',
                           s, conditions)
        m_s, _ = kernels.exponent_ms_qs(kernels.ExponentInputs(s=s, m=params.m, q=params.q, N=N))
        return cls(
            N=N,
            s=s,
            p_fr1=p_fr1,
            s14_exponent=kernels.sup_bound_exponent(params.m, params.q, N, s),
            m_s=m_s,
            lemma_conditions=conditions,
        )


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass: float
    sup_u: float
    lp_u: dict
    sup_grad_v: float
    sup_v: float
    energy_s: float
    grad_energy_running: float
    v_w1inf_0: float
    ratio_fr1: float
    ratio_s14: float
    sup_hess_v: float = 0.0


@dataclass(frozen=True, eq=False)
class SpaceTimeSeries:
    times: np.ndarray
    values: np.ndarray
    cell_volume: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or len(times) == 0:
            raise ContractViolation('la serie espacio-temporal esta vacia')
        if values.shape[0] != len(times):
            raise ContractViolation('times y values deben tener el mismo numero de muestras')
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'values', values)

    def weights(self):
        """Interval since the previous sample; a single snapshot counts as a unit slab."""
        t = self.times
        if len(t) == 1:
            return np.ones(1)
        return np.concatenate(([0.0], np.diff(t)))


@dataclass(frozen=True)
class DeGiorgiLadder:
    K: float
    m_s: float
    levels: tuple[float, ...]
    level_set_measures: tuple[float, ...]
    truncation_energies: tuple[float, ...]


@dataclass(frozen=True)
class DecayReport:
    monotone: bool
    measures_monotone: bool
    empirical_decay_exponents: tuple


def _sup_grad(f):
    return max(float(np.abs(face_gradient(f, axis)).max()) for axis in range(f.grid.dim))


def _sup_hess(f):
    return max(float(np.abs(second_differences(f, axis)).max()) for axis in range(f.grid.dim))


def _gradient_energy(u, exponent):
    """Discrete integral of |grad u^exponent|^2 over the domain."""
    grid = u.grid
    powered = Field.derived(grid, u.values**exponent)
    total = 0.0
    for axis in range(grid.dim):
        total += float(np.sum(face_gradient(powered, axis) ** 2)) * grid.cell_volume
    return total


def _ratio(numerator, denominator):
    if numerator == 0:
        return 0.0
    if denominator == 0:
        return math.inf
    return numerator / denominator


class DiagnosticsMonitor:
    """Records one DiagnosticsRecord per call, carrying the running integrals."""

    def __init__(self, params, config, initial_v):
        self.params = params
        self.config = config
        self.resolved = ResolvedDiagnostics.build(params, config)
        self.grid = initial_v.grid
        self.v_w1inf_0 = _sup_grad(initial_v) + lp_norm(initial_v, math.inf)
        self.records = []
        self._snapshots = []
        self._times = []
        self._norm_2p_accum = 0.0
        self._grad_energy = 0.0
        self._sup_grad_elapsed = 0.0

    @property
    def last_time(self):
        return self._times[-1] if self._times else None

    def record(self, state):
        params, resolved = self.params, self.resolved
        u, v = state.u, state.v
        interval = state.t - self._times[-1] if self._times else 0.0
        p2 = 2 * resolved.p_fr1

        with np.errstate(over='ignore'):
            self._norm_2p_accum += interval * float(np.sum(u.values**p2)) * u.grid.cell_volume
            self._grad_energy += interval * _gradient_energy(u, (params.m + resolved.s) / 2)
            energy_s = float(np.sum(u.values ** (resolved.s + 1))) * u.grid.cell_volume

        sup_u = u.max()
        sup_grad_v = _sup_grad(v)
        self._sup_grad_elapsed = max(self._sup_grad_elapsed, sup_grad_v)
        running_norm = self._norm_2p_accum ** (1.0 / p2)

        record = DiagnosticsRecord(
            t=float(state.t),
            mass=integrate(u),
            sup_u=sup_u,
            lp_u={float(p): lp_norm(u, p) for p in self.config.p_list},
            sup_grad_v=sup_grad_v,
            sup_v=v.max(),
            energy_s=energy_s,
            grad_energy_running=self._grad_energy,
            v_w1inf_0=self.v_w1inf_0,
            ratio_fr1=_ratio(sup_grad_v, self.v_w1inf_0 + running_norm),
            ratio_s14=_ratio(sup_u, self._sup_grad_elapsed**resolved.s14_exponent + 1.0),
            sup_hess_v=_sup_hess(v),
        )
        self.records.append(record)
        self._snapshots.append(u.values.copy())
        self._times.append(float(state.t))
        return record

    def series(self):
        if not self._snapshots:
            return None
        return SpaceTimeSeries(
            times=np.array(self._times),
            values=np.stack(self._snapshots),
            cell_volume=self.grid.cell_volume,
        )


def ladder_levels(K, n_max):
    return tuple(K - K / 2 ** (n + 1) for n in range(n_max + 1))


def build_ladder(series, K, n_max, m_s):
    if series is None or len(series.times) == 0:
        raise ContractViolation('la serie espacio-temporal esta vacia')
    if not K > 0:
        raise ContractViolation(f'K debe ser positivo, recibido {K}')
    if not m_s > 1:
        raise ContractViolation(f'm_s debe ser mayor que 1, recibido {m_s}')
    if not 0 <= n_max <= MAX_LADDER_LEVELS:
        raise ContractViolation(f'n_max debe estar en [0, {MAX_LADDER_LEVELS}]')

    weights = series.weights() * series.cell_volume
    axes = tuple(range(1, series.values.ndim))
    levels = ladder_levels(K, n_max)
    measures, energies = [], []
    for level in levels:
        excess = np.maximum(series.values - level, 0.0)
        inside = (series.values >= level).sum(axis=axes)
        measures.append(float(np.dot(weights, inside)))
        energies.append(float(np.dot(weights, (excess**m_s).sum(axis=axes))))
    return DeGiorgiLadder(
        K=float(K),
        m_s=float(m_s),
        levels=levels,
        level_set_measures=tuple(measures),
        truncation_energies=tuple(energies),
    )


def check_decay(ladder):
    y = ladder.truncation_energies
    a = ladder.level_set_measures
    exponents = []
    for current, following in zip(y, y[1:]):
        if current > 0 and following > 0:
            exponents.append(math.log(following / current))
        else:
            exponents.append(None)
    return DecayReport(
        monotone=all(b <= a_ for a_, b in zip(y, y[1:])),
        measures_monotone=all(b <= a_ for a_, b in zip(a, a[1:])),
        empirical_decay_exponents=tuple(exponents),
    )
