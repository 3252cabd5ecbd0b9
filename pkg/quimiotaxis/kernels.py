"""
Closed-form pieces of the boundedness argument: the geometric recursion lemma,
the absorption lemma and the exponent formulas. Plain double precision; tests
compare against rational oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import optimize

from .exceptions import KernelDomainError

_LOG_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class RecursionParams:
    c: float
    b: float
    alpha: float
    y0: float

    def __post_init__(self):
        _check_recursion(self.c, self.b, self.alpha)
        if self.y0 < 0:
            raise KernelDomainError('y0 debe ser no negativo')


@dataclass(frozen=True)
class RecursionResult:
    sequence: tuple[float, ...]
    diverged: bool


@dataclass(frozen=True)
class AbsorptionParams:
    eps: float
    delta: float
    b: float

    def __post_init__(self):
        if not (self.eps > 0 and self.delta > 0 and self.b > 0):
            raise KernelDomainError('eps, delta y b deben ser positivos')

    def f(self, s):
        return self.eps * s ** (1 + self.delta) - s + self.b

    @property
    def tolerance(self):
        return 1e-12 * (1 + self.b)


@dataclass(frozen=True)
class AbsorptionBound:
    s0: float
    condition_f1_holds: bool
    f1_bound: float
    f_at_s0: float
    roots: tuple[float, float] | None


@dataclass(frozen=True)
class AbsorptionVerdict:
    premises_hold: bool
    failed_premise: str | None
    failed_index: int | None
    conclusion_checked: bool
    conclusion_holds: bool | None


@dataclass(frozen=True)
class ExponentInputs:
    s: float
    m: float
    q: float
    N: int

    def __post_init__(self):
        if not (self.m > 0 and self.q > 0):
            raise KernelDomainError('m y q deben ser positivos')
        if int(self.N) != self.N or self.N < 2:
            raise KernelDomainError(f'N debe ser un entero >= 2, recibido {self.N}')


# Recursion lemma

def _check_recursion(c, b, alpha):
    if not (c > 0 and b > 1 and alpha > 0):
        raise KernelDomainError(f'se requiere c > 0, b > 1, alpha > 0 (c={c}, b={b}, alpha={alpha})')


def recursion_threshold(c, b, alpha):
    _check_recursion(c, b, alpha)
    return c ** (-1.0 / alpha) * b ** (-1.0 / alpha**2)


def iterate_recursion(params, n_steps):
    """Extremal sequence y_{n+1} = c b^n y_n^{1+alpha}, evaluated in log space."""
    log_c, log_b = math.log(params.c), math.log(params.b)
    sequence = [float(params.y0)]
    y = float(params.y0)
    for n in range(n_steps):
        if y == 0.0:
            sequence.append(0.0)
            continue
        log_next = log_c + n * log_b + (1 + params.alpha) * math.log(y)
        if log_next > _LOG_MAX:
            return RecursionResult(tuple(sequence), diverged=True)
        y = math.exp(log_next)
        sequence.append(y)
    return RecursionResult(tuple(sequence), diverged=False)


# Absorption lemma

def absorption_bound(params):
    eps, delta, b = params.eps, params.delta, params.b
    s0 = (eps * (1 + delta)) ** (-1.0 / delta)
    f1_bound = delta**delta / ((b + delta) ** delta * (1 + delta) ** (1 + delta))
    f_at_s0 = b - delta / (eps ** (1.0 / delta) * (1 + delta) ** ((1 + delta) / delta))
    roots = _bracket_roots(params, s0) if f_at_s0 < 0 else None
    return AbsorptionBound(
        s0=s0,
        condition_f1_holds=eps <= f1_bound,
        f1_bound=f1_bound,
        f_at_s0=f_at_s0,
        roots=roots,
    )


def _bracket_roots(params, s0):
    # f is convex with f(0) = b > 0 and f(s0) < 0.
    f = params.f
    if f(s0) >= 0:
        return None
    s_hi = 2.0 * s0
    while f(s_hi) <= 0:
        s_hi *= 2.0
        if not math.isfinite(s_hi):
            return None
    rtol = 4 * np.finfo(float).eps
    s1 = optimize.bisect(f, 0.0, s0, xtol=1e-300, rtol=rtol, maxiter=4000)
    s2 = optimize.bisect(f, s0, s_hi, xtol=1e-300, rtol=rtol, maxiter=4000)
    return s1, s2


def absorption_check(h_samples, params):
    """
    Check a sampled continuous h against the absorption lemma.

    Premises: h(0) <= s0, f(h) >= 0 at every sample, and no linear segment
    between samples crossing the band (s1, s2) where f < 0. The conclusion
    h <= s1 is only asserted when condition (f1) holds.
    """
    taus = [float(tau) for tau, _ in h_samples]
    values = [float(h) for _, h in h_samples]
    if not values:
        raise KernelDomainError('se requiere al menos una muestra')
    if any(later <= earlier for earlier, later in zip(taus, taus[1:])):
        raise KernelDomainError('los tiempos deben estar ordenados estrictamente')

    bound = absorption_bound(params)
    tol = params.tolerance

    def verdict(premise, index):
        return AbsorptionVerdict(False, premise, index, False, None)

    if values[0] > bound.s0:
        return verdict('initial_above_s0', 0)
    for index, h in enumerate(values):
        if params.f(h) < -tol:
            return verdict('f_negative_at_sample', index)
    if bound.roots is not None:
        s1, s2 = bound.roots
        for index, (a, b) in enumerate(zip(values, values[1:])):
            if min(a, b) <= s1 and max(a, b) >= s2:
                return verdict('segment_crosses_forbidden_band', index)

    if not bound.condition_f1_holds or bound.roots is None:
        return AbsorptionVerdict(True, None, None, False, None)
    s1 = bound.roots[0]
    holds = all(h <= s1 * (1 + 1e-12) + tol for h in values)
    return AbsorptionVerdict(True, None, None, True, holds)


# Exponent formulas

def exponent_ms_qs(inputs):
    s, m, q, N = inputs.s, inputs.m, inputs.q, inputs.N
    m_s = (s + 1) * 2.0 / N + m + s
    q_s = m_s - (2 * q - m + s)
    return m_s, q_s


def qs_simplified(inputs):
    return 2.0 * (inputs.s + 1) / inputs.N + 2.0 * (inputs.m - inputs.q)


def gamma_exponent(inputs):
    s, m, q, N = inputs.s, inputs.m, inputs.q, inputs.N
    if not m > q:
        raise KernelDomainError(f'gamma requiere m > q (m={m}, q={q})')
    d = m - q
    numerator = ((s + 1) * (N + 2) + N * max(m - 1, 0.0)) * (m + s) + (s + 1) * N * d * (N + 2)
    denominator = (s + 1) * d * ((N + 2) * (s + 1) + 2 * N * d)
    return numerator / denominator


def beta_exponent(inputs):
    gamma = gamma_exponent(inputs)
    if not gamma > 1:
        raise KernelDomainError(f'beta solo existe para gamma > 1 (gamma={gamma})')
    return gamma - 1


def energy_bound_exponent(s, m, q):
    if not m > q:
        raise KernelDomainError(f'el exponente de energia requiere m > q (m={m}, q={q})')
    return (m + s) / (m - q)


def h4_equivalence(m, q, N, s):
    """
    Both sides of the (H4) reformulation, compared in exact rationals.

    ``lhs`` is 2 m_s < (N+2) q_s; ``rhs`` adds the standing q < 1 clause.
    """
    if not s > 0:
        raise KernelDomainError('s debe ser positivo')
    m, q, s = Fraction(m), Fraction(q), Fraction(s)
    m_s = (s + 1) * Fraction(2, N) + m + s
    q_s = m_s - (2 * q - m + s)
    lhs = 2 * m_s < (N + 2) * q_s
    rhs = q < 1 and m > q + (q - 1) / (N + 1)
    return {'lhs': lhs, 'rhs': rhs}


def h4_threshold_holds(m, q, N):
    """The s-free form m > q + (q-1)/(N+1), exact."""
    m, q = Fraction(m), Fraction(q)
    return m > q + (q - 1) / (N + 1)


def h4_bound_exponent(m, q, N):
    denominator = (N + 1) * m - (N + 2) * q + 1
    if not denominator > 0:
        raise KernelDomainError(
            f'(N+1)m - (N+2)q + 1 debe ser positivo, recibido {denominator}')
    return (N + 2) / denominator


def interpolation_mu(s, m, q):
    low, high = (m + s) / 2, 2 * q - m + s
    if not low < high:
        raise KernelDomainError(f'se requiere (m+s)/2 < 2q-m+s, es decir s > 3m-4q (s={s})')
    return (1 - 2 / (m + s)) / (2 / (m + s) - 1 / high)


def lemma_conditions(s, m, q, N):
    positive_part = s > max(0.0, m - 2 * q)
    sobolev = s >= ((2 * q - m) * (N - 2) - N * m) / 2
    interpolation = s > 3 * m - 4 * q
    above_one = s > 1
    return {
        'positive_part': positive_part,
        'sobolev': sobolev,
        'interpolation': interpolation,
        'above_one': above_one,
        'all': positive_part and sobolev and interpolation and above_one,
    }


def default_s(m, q, N):
    return max(
        3,
        math.ceil(m - 2 * q) + 1,
        math.ceil(3 * m - 4 * q) + 1,
        math.ceil(((2 * q - m) * (N - 2) - N * m) / 2) + 1,
    )


def sup_bound_exponent(m, q, N, s):
    """Exponent of |grad v| in the sup-norm bound for the regime (m, q) falls in."""
    if m > q:
        return gamma_exponent(ExponentInputs(s=s, m=m, q=q, N=N))
    if q < 1 and h4_threshold_holds(m, q, N):
        return h4_bound_exponent(m, q, N)
    # H4 boundary (m = q = 1 included) and points outside both hypotheses.
    return float(N + 2)
