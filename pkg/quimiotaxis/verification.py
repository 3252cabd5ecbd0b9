"""Randomized self-checks of the analytic kernels (the ``kernels`` command)."""

import logging

import numpy as np

from . import kernels

logger = logging.getLogger(__name__)

RECURSION_STEPS = 200
# Start just below the threshold: the extremal sequence at the exact value
# amplifies rounding by (1 + alpha) per step.
THRESHOLD_MARGIN = 1.0 - 1e-9
GAMMA_LIMIT_S = 1e6
GAMMA_LIMIT_GAPS = (0.25, 0.5, 1.0, 2.0)


def _at_f1_bound(delta, b):
    """Absorption parameters with eps equal to the (f1) bound."""
    f1_bound = delta**delta / ((b + delta) ** delta * (1 + delta) ** (1 + delta))
    return kernels.AbsorptionParams(eps=f1_bound, delta=delta, b=b)


def check_recursion(rng, samples=1000):
    failures = []
    worst = 0.0
    for _ in range(samples):
        c = rng.uniform(0.1, 10.0)
        b = 8.0 - rng.uniform(0.0, 7.0)
        alpha = rng.uniform(0.2, 3.0)
        y0 = kernels.recursion_threshold(c, b, alpha) * THRESHOLD_MARGIN
        result = kernels.iterate_recursion(kernels.RecursionParams(c, b, alpha, y0), RECURSION_STEPS)
        ratio = result.sequence[-1] / y0
        worst = max(worst, ratio)
        if result.diverged or not ratio < 1e-12:
            failures.append({'c': c, 'b': b, 'alpha': alpha, 'ratio': ratio})
    return {
        'passed': not failures,
        'details': {'samples': samples, 'worst_ratio': worst, 'failures': failures[:5]},
    }


def check_absorption(rng, samples=1000, h_samples=100):
    failures = []
    for _ in range(samples):
        params = _at_f1_bound(rng.uniform(0.1, 3.0), rng.uniform(0.1, 10.0))
        bound = kernels.absorption_bound(params)
        if bound.roots is None or not bound.f_at_s0 <= -params.delta + 1e-12:
            failures.append({'delta': params.delta, 'b': params.b, 'f_at_s0': bound.f_at_s0})
            continue
        s1, s2 = bound.roots
        if not (s1 <= bound.s0 <= s2 and abs(params.f(s1)) <= params.tolerance
                and abs(params.f(s2)) <= params.tolerance):
            failures.append({'delta': params.delta, 'b': params.b, 'roots': [s1, s2]})

    admissible = 0
    for _ in range(h_samples):
        params = _at_f1_bound(rng.uniform(0.1, 3.0), rng.uniform(0.1, 10.0))
        s1 = kernels.absorption_bound(params).roots[0]
        taus = np.sort(rng.uniform(0.0, 1.0, size=20))
        values = rng.uniform(0.0, s1, size=20)
        verdict = kernels.absorption_check(list(zip(taus, values)), params)
        if verdict.premises_hold and verdict.conclusion_holds:
            admissible += 1
        else:
            failures.append({'delta': params.delta, 'b': params.b,
                             'failed_premise': verdict.failed_premise})
    return {
        'passed': not failures,
        'details': {'samples': samples, 'h_samples': h_samples,
                    'admissible_passed': admissible, 'failures': failures[:5]},
    }


def check_gamma_limit(N=3, q=1.0):
    errors = {}
    for gap in GAMMA_LIMIT_GAPS:
        inputs = kernels.ExponentInputs(s=GAMMA_LIMIT_S, m=q + gap, q=q, N=N)
        errors[repr(gap)] = abs(kernels.gamma_exponent(inputs) - 1.0 / gap)
    return {
        'passed': all(error <= 1e-3 for error in errors.values()),
        'details': {'s': GAMMA_LIMIT_S, 'errors': errors},
    }


def _random_tuple(rng):
    return (rng.uniform(0.01, 3.0), rng.uniform(0.01, 1.5),
            int(rng.integers(2, 7)), rng.uniform(0.01, 100.0))


def check_h4_equivalence(rng, samples=10_000):
    mismatches = 0
    s_dependent = 0
    for _ in range(samples):
        m, q, N, s = _random_tuple(rng)
        lhs = kernels.h4_equivalence(m, q, N, s)['lhs']
        if lhs != kernels.h4_threshold_holds(m, q, N):
            mismatches += 1
        if lhs != kernels.h4_equivalence(m, q, N, 10 * s)['lhs']:
            s_dependent += 1
    return {
        'passed': mismatches == 0 and s_dependent == 0,
        'details': {'samples': samples, 'mismatches': mismatches, 's_dependent': s_dependent},
    }


def check_qs_identity(rng, samples=10_000):
    worst = 0.0
    for _ in range(samples):
        m, q, N, s = _random_tuple(rng)
        inputs = kernels.ExponentInputs(s=s, m=m, q=q, N=N)
        m_s, q_s = kernels.exponent_ms_qs(inputs)
        # Relative to the size of the terms, q_s itself can cancel to near 0.
        scale = abs(m_s) + abs(2 * q - m + s)
        worst = max(worst, abs(q_s - kernels.qs_simplified(inputs)) / scale)
    return {
        'passed': worst <= 1e-13,
        'details': {'samples': samples, 'worst_relative_error': worst},
    }


def run_kernel_checks(seed=0):
    """Every check with its own seeded stream; the report is deterministic in ``seed``."""
    streams = np.random.SeedSequence(seed).spawn(4)
    rngs = [np.random.default_rng(stream) for stream in streams]
    checks = {
        'recursion_sufficiency': check_recursion(rngs[0]),
        'absorption': check_absorption(rngs[1]),
        'gamma_limit': check_gamma_limit(),
        'h4_equivalence': check_h4_equivalence(rngs[2]),
        'qs_identity': check_qs_identity(rngs[3]),
    }
    for name, outcome in checks.items():
        log = logger.info if outcome['passed'] else logger.error
        log('verificacion %s: %s', name, 'ok' if outcome['passed'] else 'FALLO')
    return {
        'seed': seed,
        'passed': all(outcome['passed'] for outcome in checks.values()),
        'checks': checks,
    }
