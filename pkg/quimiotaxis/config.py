"""Configuraciones validadas (ver serializers.py para el esquema JSON)."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .diagnostics import DiagnosticsConfig
from .grid import GridSpec
from .model import InitialSpec, ModelParams
from .solver import StepControl


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    grid: GridSpec
    initial: InitialSpec
    control: StepControl
    horizon: float
    samples: int = 11
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    bounded_multiple: float = 50.0
    seed: int = 0

    def with_point(self, m, q):
        return dataclasses.replace(self, params=dataclasses.replace(self.params, m=m, q=q))

    def with_sigma(self, sigma):
        return dataclasses.replace(self, params=dataclasses.replace(self.params, sigma=sigma))

    def with_seed(self, seed):
        return dataclasses.replace(
            self, seed=seed, initial=dataclasses.replace(self.initial, seed=seed))


@dataclass(frozen=True)
class Thresholds:
    """Overrides applied to every sweep point; None keeps the template value."""
    sup_multiple: float | None = None
    dt_min: float | None = None
    bounded_multiple: float | None = None


@dataclass(frozen=True)
class SweepConfig:
    m_grid: tuple[float, ...]
    q_grid: tuple[float, ...]
    template: RunConfig
    thresholds: Thresholds = field(default_factory=Thresholds)
    workers: int = 1

    def jobs(self):
        """(i, j, RunConfig) for every grid point, thresholds applied."""
        control = self.template.control
        overrides = {}
        if self.thresholds.sup_multiple is not None:
            overrides['sup_multiple'] = self.thresholds.sup_multiple
        if self.thresholds.dt_min is not None:
            overrides['dt_min'] = self.thresholds.dt_min
        template = dataclasses.replace(self.template, control=dataclasses.replace(control, **overrides))
        if self.thresholds.bounded_multiple is not None:
            template = dataclasses.replace(template, bounded_multiple=self.thresholds.bounded_multiple)
        return [
            (i, j, template.with_point(m, q))
            for i, m in enumerate(self.m_grid)
            for j, q in enumerate(self.q_grid)
        ]
