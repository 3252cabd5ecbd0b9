"""
Time integration of the sigma-regularized system.

u: explicit Euler in flux form (diffusion in potential form, donor-cell
chemotaxis, outflow limiter). v: backward Euler solved by conjugate gradients.
Splitting order: u first with v^old, then v with u^old.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

from .exceptions import ContractViolation, InvariantViolation, SolverDivergence
from .grid import Field, divergence, face_gradient, integrate, left_right, pad_boundary_faces

logger = logging.getLogger(__name__)

# Keeps a fully drained cell strictly above round-off after the update.
LIMITER_MARGIN = 1.0 - 1e-12
MASS_TOLERANCE = 1e-10
MAX_PRINCIPLE_ROUNDOFF = 1e-10


@dataclass(frozen=True)
class SimState:
    u: Field
    v: Field
    t: float = 0.0
    step: int = 0


@dataclass(frozen=True)
class StepControl:
    safety: float = 0.4
    dt_min: float = 1e-12
    dt_max: float = 1.0
    v_solve_tol: float = 1e-10
    v_solve_max_iters: int = 10_000
    sup_multiple: float = 1e4
    resolution_floor: float = math.sqrt(np.finfo(float).eps)
    disable_chemotaxis: bool = False
    check_invariants: bool = True

    def __post_init__(self):
        if not 0 < self.safety <= 1:
            raise ContractViolation(f'safety debe estar en (0, 1], recibido {self.safety}')
        if not 0 < self.dt_min < self.dt_max:
            raise ContractViolation('se requiere 0 < dt_min < dt_max')
        if not (self.v_solve_tol > 0 and self.v_solve_max_iters > 0):
            raise ContractViolation('v_solve_tol y v_solve_max_iters deben ser positivos')
        if not self.sup_multiple > 1:
            raise ContractViolation('sup_multiple debe ser mayor que 1')


@dataclass(frozen=True)
class StepOutcome:
    state: SimState
    dt_used: float
    v_solve_iters: int
    dt_collapsed: bool = False
    nonfinite_detected: bool = False


@dataclass(frozen=True)
class StabilityLimits:
    diffusion: float
    advection: float
    dt_max: float

    @property
    def bound(self):
        return min(self.diffusion, self.advection, self.dt_max)


class Termination(str, enum.Enum):
    REACHED_T = 'reached_T'
    DT_COLLAPSED = 'dt_collapsed'
    NONFINITE = 'nonfinite'
    SUP_THRESHOLD = 'sup_threshold'


@dataclass(frozen=True)
class RunResult:
    records: list
    final_state: SimState
    termination: Termination
    series: object
    steps: int


def _require_nonnegative(u):
    if u.min() < 0:
        raise ContractViolation(f'u debe ser no negativo (min={u.min()!r})')


def diffusive_flux(u, params, axis):
    """Face flux -[(u_R+sigma)^m - (u_L+sigma)^m]/h; zero on boundary faces."""
    _require_nonnegative(u)
    potential = Field.derived(u.grid, (u.values + params.sigma) ** params.m)
    return -face_gradient(potential, axis)


def _donor_values(u_values, grad_interior, axis):
    left, right = left_right(u_values, axis)
    return np.where(grad_interior > 0, left, right)


def _interior(faces, axis):
    index = [slice(None)] * faces.ndim
    index[axis] = slice(1, -1)
    return faces[tuple(index)]


def chemotactic_flux(u, v, params, axis):
    """Face flux u_donor^q (v_R - v_L)/h with the donor taken upstream of grad v."""
    _require_nonnegative(u)
    grad = _interior(face_gradient(v, axis), axis)
    donor = _donor_values(u.values, grad, axis)
    return pad_boundary_faces(donor**params.q * grad, axis)


def _floor(u, ctrl):
    return ctrl.resolution_floor * max(u.max(), 1.0)


def stability_limits(state, params, ctrl):
    grid = state.u.grid
    h_min = min(grid.spacing)
    u = state.u.values
    floor = _floor(state.u, ctrl)

    if params.m == 1:
        d_max = 1.0
    else:
        point = u
        if params.sigma == 0 and params.m < 1:
            point = np.maximum(u, floor)
        mobility = params.m * (point + params.sigma) ** (params.m - 1)
        d_max = float(mobility.max())
    dt_diffusion = h_min**2 / (2 * grid.dim * d_max) if d_max > 0 else math.inf

    speed = 0.0
    if not ctrl.disable_chemotaxis:
        for axis in range(grid.dim):
            grad = _interior(face_gradient(state.v, axis), axis)
            donor = _donor_values(u, grad, axis)
            if params.q < 1:
                # Donors below the floor are left to the outflow limiter.
                active = donor >= floor
                donor = np.where(active, donor, 1.0)
                face_speed = np.where(active, donor ** (params.q - 1) * np.abs(grad), 0.0)
            else:
                face_speed = donor ** (params.q - 1) * np.abs(grad)
            if face_speed.size:
                speed = max(speed, float(face_speed.max()))
    dt_advection = h_min / (2 * grid.dim * speed) if speed > 0 else math.inf

    return StabilityLimits(diffusion=dt_diffusion, advection=dt_advection, dt_max=ctrl.dt_max)


def compute_dt(state, params, ctrl):
    return ctrl.safety * stability_limits(state, params, ctrl).bound


@lru_cache(maxsize=32)
def neumann_operator(grid):
    """Sparse -Laplacian with zero-flux closure, C-ordered unknowns."""
    blocks = []
    for n, h in zip(grid.cells, grid.spacing):
        main = np.full(n, 2.0)
        main[0] = main[-1] = 1.0
        off = -np.ones(n - 1)
        blocks.append(sparse.diags([off, main, off], [-1, 0, 1]) / h**2)
    if grid.dim == 1:
        return blocks[0].tocsr()
    eye_x, eye_y = sparse.identity(grid.cells[0]), sparse.identity(grid.cells[1])
    return (sparse.kron(blocks[0], eye_y) + sparse.kron(eye_x, blocks[1])).tocsr()


def advance_v(v, u, dt, ctrl):
    """Backward Euler for v_t - Lap v + v = u; returns (v_new, iterations)."""
    if not dt > 0:
        raise ContractViolation(f'dt debe ser positivo, recibido {dt}')
    grid = v.grid
    size = v.values.size
    operator = (1.0 + dt) * sparse.identity(size, format='csr') + dt * neumann_operator(grid)
    rhs = v.values.ravel() + dt * u.values.ravel()
    atol = ctrl.v_solve_tol * (1.0 + float(np.linalg.norm(rhs)))

    iterations = 0

    def count(_):
        nonlocal iterations
        iterations += 1

    solution, info = sparse_linalg.cg(
        operator, rhs, x0=v.values.ravel().copy(), rtol=0.0, atol=atol,
        maxiter=ctrl.v_solve_max_iters, callback=count)
    if info != 0:
        residual = float(np.linalg.norm(rhs - operator @ solution))
        raise SolverDivergence('el gradiente conjugado no convergio', residual, iterations)

    # The exact M-matrix solution lies in [0, max(max v, max u)]; the CG error is
    # at most atol over the smallest eigenvalue of the operator, 1 + dt.
    upper = max(v.max(), u.max())
    slack = atol / (1.0 + dt) + MAX_PRINCIPLE_ROUNDOFF * max(upper, 1.0)
    if solution.max() > upper + slack or solution.min() < -slack:
        raise InvariantViolation(
            f'principio del maximo violado en la ecuacion de v: rango '
            f'[{solution.min()!r}, {solution.max()!r}] fuera de [0, {upper!r}] (holgura {slack!r})')
    values = np.clip(solution.reshape(grid.shape), 0.0, upper)
    return Field(grid, values), iterations


def _total_fluxes(state, params, ctrl):
    fluxes = []
    for axis in range(state.u.grid.dim):
        flux = diffusive_flux(state.u, params, axis)
        if not ctrl.disable_chemotaxis:
            flux = flux + chemotactic_flux(state.u, state.v, params, axis)
        fluxes.append(flux)
    return fluxes


def _limit_outflow(u, fluxes, dt, grid):
    """Scale each face flux by its donor's budget so no cell is overdrawn."""
    outflow = np.zeros(grid.shape)
    for axis, flux in enumerate(fluxes):
        before, after = left_right(flux, axis)
        outflow += (np.maximum(after, 0.0) + np.maximum(-before, 0.0)) / grid.spacing[axis]

    demand = dt * outflow
    with np.errstate(divide='ignore', invalid='ignore'):
        theta = np.where(demand > LIMITER_MARGIN * u, LIMITER_MARGIN * u / demand, 1.0)
    if np.any(theta < 1.0):
        logger.debug('limitador de salida activo en %d celdas', int(np.sum(theta < 1.0)))

    limited = []
    for axis, flux in enumerate(fluxes):
        left, right = left_right(theta, axis)
        inner = _interior(flux, axis)
        scale = np.where(inner > 0, left, right)
        limited.append(pad_boundary_faces(inner * scale, axis))
    return limited


def step(state, params, ctrl, dt_cap=None):
    dt = compute_dt(state, params, ctrl)
    if not dt >= ctrl.dt_min:
        return StepOutcome(state=state, dt_used=0.0, v_solve_iters=0, dt_collapsed=True)
    if dt_cap is not None:
        dt = min(dt, dt_cap)

    grid = state.u.grid
    u = state.u.values
    with np.errstate(over='ignore', invalid='ignore'):
        fluxes = _limit_outflow(u, _total_fluxes(state, params, ctrl), dt, grid)
        u_new = u - dt * divergence(fluxes, grid)

    if not np.all(np.isfinite(u_new)):
        bad = SimState(Field.derived(grid, u_new), state.v, state.t + dt, state.step + 1)
        return StepOutcome(state=bad, dt_used=dt, v_solve_iters=0, nonfinite_detected=True)

    v_new, iterations = advance_v(state.v, state.u, dt, ctrl)
    new_state = SimState(Field(grid, u_new), v_new, state.t + dt, state.step + 1)
    if ctrl.check_invariants:
        _check_step_invariants(state, new_state)
    return StepOutcome(state=new_state, dt_used=dt, v_solve_iters=iterations)


def _check_step_invariants(old, new):
    if new.u.min() < 0:
        raise InvariantViolation(f'u negativo tras el paso {new.step}: {new.u.min()!r}')
    if new.v.min() < 0:
        raise InvariantViolation(f'v negativo tras el paso {new.step}: {new.v.min()!r}')
    before, after = integrate(old.u), integrate(new.u)
    if abs(after - before) > MASS_TOLERANCE * abs(before):
        raise InvariantViolation(f'masa no conservada en el paso {new.step}: {before!r} -> {after!r}')
    if new.v.max() > max(old.v.max(), old.u.max()):
        raise InvariantViolation(f'principio de comparacion violado en el paso {new.step}')


def sample_times(horizon, samples):
    times = np.linspace(0.0, horizon, samples)
    times[-1] = horizon
    return times


def run(initial, params, ctrl, horizon, samples, monitor):
    """
    Integrate to ``horizon`` or until a blow-up sentinel fires.

    ``monitor`` is a diagnostics.DiagnosticsMonitor; it records the state at
    every sample time and at early termination.
    """
    if not horizon > 0:
        raise ContractViolation(f'el horizonte debe ser positivo, recibido {horizon}')
    if samples < 2:
        raise ContractViolation('se requieren al menos 2 muestras')

    state = SimState(u=initial.u0, v=initial.v0)
    initial_sup = state.u.max()
    sup_limit = ctrl.sup_multiple * initial_sup
    monitor.record(state)
    times = sample_times(horizon, samples)
    termination = Termination.REACHED_T

    logger.info('inicio de simulacion m=%r q=%r sigma=%r T=%r', params.m, params.q,
                params.sigma, horizon)
    k = 1
    while k < len(times):
        target = times[k]
        outcome = step(state, params, ctrl, dt_cap=target - state.t)
        if outcome.dt_collapsed:
            termination = Termination.DT_COLLAPSED
            break
        if outcome.nonfinite_detected:
            termination = Termination.NONFINITE
            break
        state = outcome.state
        if state.t >= target or target - state.t <= 1e-14 * horizon:
            state = dataclasses.replace(state, t=float(target))
            monitor.record(state)
            k += 1
        if initial_sup > 0 and state.u.max() > sup_limit:
            termination = Termination.SUP_THRESHOLD
            break

    if termination is not Termination.REACHED_T and monitor.last_time != state.t:
        monitor.record(state)
    logger.info('fin de simulacion t=%r pasos=%d motivo=%s', state.t, state.step,
                termination.value)
    return RunResult(records=list(monitor.records), final_state=state,
                     termination=termination, series=monitor.series(), steps=state.step)
