"""Parametros del modelo, clasificacion de hipotesis y datos iniciales."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exceptions import ContractViolation, UnderResolvedError
from .grid import Field, integrate


@dataclass(frozen=True)
class ModelParams:
    m: float
    q: float
    sigma: float = 0.0
    dim: int = 2

    def __post_init__(self):
        if not (math.isfinite(self.m) and self.m > 0):
            raise ContractViolation(f'm debe cumplir m > 0, recibido {self.m}')
        if not (math.isfinite(self.q) and self.q > 0):
            raise ContractViolation(f'q debe cumplir q > 0, recibido {self.q}')
        if not 0 <= self.sigma < 1:
            raise ContractViolation(f'sigma debe cumplir 0 <= sigma < 1, recibido {self.sigma}')


class RegimeLabel(str, enum.Enum):
    H3 = 'H3'
    H4 = 'H4'
    CRITICAL_CLASSICAL = 'CriticalClassical'
    OUTSIDE = 'Outside'


def regime_flags(params, N):
    """Every label that applies; H4 and CriticalClassical can hold together."""
    # Exact rational comparisons on the given doubles.
    m, q = Fraction(params.m), Fraction(params.q)
    flags = set()
    if m > q:
        flags.add(RegimeLabel.H3)
    if q <= 1 and q + (q - 1) / (N + 1) <= m <= q:
        flags.add(RegimeLabel.H4)
    if m == 1 and q == 1:
        flags.add(RegimeLabel.CRITICAL_CLASSICAL)
    return frozenset(flags) or frozenset({RegimeLabel.OUTSIDE})


def classify_regime(params, N):
    flags = regime_flags(params, N)
    for label in (RegimeLabel.CRITICAL_CLASSICAL, RegimeLabel.H3, RegimeLabel.H4):
        if label in flags:
            return label
    return RegimeLabel.OUTSIDE


class Preset(str, enum.Enum):
    CONSTANT = 'constant'
    GAUSSIAN = 'gaussian-bump'
    TWO_BUMPS = 'two-bumps'
    RANDOM = 'random-nonneg'


@dataclass(frozen=True)
class InitialSpec:
    preset: Preset
    value: float = 1.0
    mass: float | None = None
    width: float = 0.1
    center: tuple[float, ...] | None = None
    amplitude: float = 1.0
    v_value: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class InitialData:
    spec: InitialSpec
    u0: Field
    v0: Field


def _bump(grid, center, width):
    coords = grid.mesh()
    r2 = sum((x - c) ** 2 for x, c in zip(coords, center))
    return np.exp(-r2 / (2.0 * width**2))


def _normalized(profile, grid, mass):
    total = integrate(Field(grid, profile))
    return profile * (mass / total)


def make_initial_data(spec, grid):
    preset = Preset(spec.preset)
    if min(spec.value, spec.amplitude, spec.v_value, spec.width) < 0:
        raise ContractViolation('los parametros del preset deben ser no negativos')

    if preset is Preset.CONSTANT:
        u0 = np.full(grid.shape, float(spec.value))
    elif preset is Preset.RANDOM:
        rng = np.random.default_rng(spec.seed)
        u0 = rng.uniform(0.0, spec.amplitude, size=grid.shape)
    else:
        if spec.mass is None or not spec.mass > 0:
            raise ContractViolation(f'la masa debe ser positiva, recibido {spec.mass}')
        if spec.width < 2 * max(grid.spacing):
            raise UnderResolvedError(
                f'ancho {spec.width} menor que 2 celdas ({2 * max(grid.spacing)})')
        middle = tuple(length / 2 for length in grid.extent)
        if preset is Preset.GAUSSIAN:
            profile = _bump(grid, spec.center or middle, spec.width)
        else:
            # Two equal bumps at 1/3 and 2/3 of the first axis.
            first = (grid.extent[0] / 3,) + middle[1:]
            second = (2 * grid.extent[0] / 3,) + middle[1:]
            profile = _bump(grid, first, spec.width) + _bump(grid, second, spec.width)
        u0 = _normalized(profile, grid, spec.mass)

    v0 = np.full(grid.shape, float(spec.v_value))
    return InitialData(spec=spec, u0=Field(grid, u0), v0=Field(grid, v0))
