"""Time steppers for the slip-film model family.

Six velocity-based kinds (strong slip, its rescaled form, free film,
quasi-static, zero-capillarity, and the high-order regularized system)
share one IMEX step: the Trouton viscosity, slip friction, and the
velocity-smoothing term are backward-Euler implicit with coefficients
frozen at the current height, convection and the pressure force are
explicit, and the height transport is then implicit in the new height
with the new velocity.  Each step therefore costs one symmetric banded
solve for the velocity and one tridiagonal solve for the height.  The two
mobility-form fourth-order kinds use a linearized-implicit step with one
pentadiagonal solve.

The accepted height update is always re-expressed in explicit flux form
with a boundary-vanishing flux, so the discrete mass telescopes exactly
and constant states are bit-exact fixed points.

``advance`` wraps any single step with energy-guarded adaptive time
stepping; ``reference_integrate`` is a fully explicit cross-validation
path living in :mod:`._kernels`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .banded import banded_from_apply, solve_banded_system
from .constitutive import PhysParams, mobility, pressure_pi, pressure_pi_prime
from .diagnostics import energy, record_from_state
from .discretization import (
    CENTERS,
    NODES,
    Field,
    State,
    div_values,
    grad_values,
    interp_node_values,
    interp_values,
    lap_values,
)

__all__ = [
    "ModelKind",
    "StepControl",
    "VELOCITY_KINDS",
    "THINFILM_KINDS",
    "PositivityLossError",
    "DivergenceError",
    "NonConvergenceError",
    "as_kind",
    "model_coefficients",
    "explicit_force_dt_cap",
    "step_velocity_models",
    "step_thinfilm",
    "advance",
    "integrate_fixed",
    "reference_integrate",
]

DEFAULT_H_FLOOR = 1e-8


class ModelKind(Enum):
    """Tags for the model family."""

    STRONG_SLIP = "strong_slip"
    SCALED_STRONG_SLIP = "scaled_strong_slip"
    FREE_FILM = "free_film"
    STOKES = "stokes"
    NO_CAPILLARITY = "no_capillarity"
    REGULARIZED = "regularized"
    INTERMEDIATE_SLIP = "intermediate_slip"
    WEAK_SLIP = "weak_slip"


VELOCITY_KINDS = frozenset(
    {
        ModelKind.STRONG_SLIP,
        ModelKind.SCALED_STRONG_SLIP,
        ModelKind.FREE_FILM,
        ModelKind.STOKES,
        ModelKind.NO_CAPILLARITY,
        ModelKind.REGULARIZED,
    }
)
THINFILM_KINDS = frozenset({ModelKind.INTERMEDIATE_SLIP, ModelKind.WEAK_SLIP})


def as_kind(kind) -> ModelKind:
    """Coerce a ModelKind or its string tag to a ModelKind."""
    if isinstance(kind, ModelKind):
        return kind
    return ModelKind(str(kind))


class PositivityLossError(RuntimeError):
    """The film height dropped to the floor; carries time and location."""

    def __init__(self, t: float, x: float, value: float):
        self.t = t
        self.x = x
        self.value = value
        super().__init__(
            f"height positivity lost at t={t:.8g} near x={x:.6g} (min h = {value:.6g})"
        )


class DivergenceError(RuntimeError):
    """A step or explicit run produced non-finite values."""


class NonConvergenceError(RuntimeError):
    """Adaptive stepping hit the minimum step size; carries the last state."""

    def __init__(self, message: str, state: State):
        self.state = state
        super().__init__(message)


@dataclass(frozen=True)
class StepControl:
    """Adaptive step-size policy for :func:`advance`."""

    dt: float = 1e-5
    dt_min: float = 1e-14
    dt_max: float = 1e-3
    cfl_factor: float = 0.5
    energy_guard_tol: float = 1e-8
    h_floor: float = DEFAULT_H_FLOOR

    def __post_init__(self):
        if not (0.0 < self.dt_min <= self.dt <= self.dt_max):
            raise ValueError(
                f"need 0 < dt_min <= dt <= dt_max, got {self.dt_min}, {self.dt}, {self.dt_max}"
            )
        if not 0.0 < self.cfl_factor <= 1.0:
            raise ValueError(f"cfl_factor must be in (0, 1], got {self.cfl_factor}")
        if not self.h_floor > 0.0:
            raise ValueError("h_floor must be positive")


@dataclass(frozen=True)
class ModelCoefficients:
    """Effective coefficients of the common momentum balance.

    inertia * (d_t(hu) + d_x(h u^2)) =
        visc * d_x(h d_x u) + h d_x(sigma d_xx h - Pi(h)) - slip * u
        + eps * h d_x^7 h - eps^2 d_x^4 u
    """

    inertia: float
    visc: float
    slip: float
    sigma: float
    eps: float


def model_coefficients(params: PhysParams, kind) -> ModelCoefficients:
    """Coefficients for a velocity-based kind.

    The kind overrides parameters where its definition demands it: the free
    film drops slip friction, the quasi-static kind drops inertia, the
    zero-capillarity kind drops surface tension, and the rescaled system
    carries beta^2 * Re inertia, 4 * beta * nu viscosity and unit friction.
    """
    kind = as_kind(kind)
    if kind not in VELOCITY_KINDS:
        raise ValueError(f"{kind.value} has no velocity-model coefficients")
    if kind is ModelKind.SCALED_STRONG_SLIP:
        if math.isinf(params.beta):
            raise ValueError("the rescaled system needs a finite beta")
        return ModelCoefficients(
            params.beta**2 * params.re, 4.0 * params.beta * params.nu, 1.0, params.sigma, 0.0
        )
    if kind is ModelKind.FREE_FILM:
        return ModelCoefficients(params.re, 4.0 * params.nu, 0.0, params.sigma, 0.0)
    if kind is ModelKind.STOKES:
        return ModelCoefficients(0.0, 4.0 * params.nu, params.inv_beta, params.sigma, 0.0)
    if kind is ModelKind.NO_CAPILLARITY:
        return ModelCoefficients(params.re, 4.0 * params.nu, params.inv_beta, 0.0, 0.0)
    if kind is ModelKind.REGULARIZED:
        if not params.eps > 0.0:
            raise ValueError("the regularized model requires eps > 0")
        return ModelCoefficients(
            params.re, 4.0 * params.nu, params.inv_beta, params.sigma, params.eps
        )
    return ModelCoefficients(params.re, 4.0 * params.nu, params.inv_beta, params.sigma, 0.0)


def explicit_force_dt_cap(params: PhysParams, kind, hmax: float, dx: float) -> float:
    """Largest stable step for the explicitly treated forces.

    After the implicit viscous filter, the explicit pressure force acts on
    the height like second-order diffusion of strength sigma*h/visc and the
    seventh-order smoothing force like sixth-order diffusion of strength
    eps*h/visc; forward-Euler stability then caps dt at 2/lambda_max on the
    highest grid mode.  Thin-film kinds are fully implicit: no cap.
    """
    kind = as_kind(kind)
    if kind in THINFILM_KINDS:
        return math.inf
    c = model_coefficients(params, kind)
    k2 = 4.0 / (dx * dx)
    cap = math.inf
    if c.sigma > 0.0:
        cap = min(cap, 2.0 * c.visc / (c.sigma * hmax * k2))
    if c.eps > 0.0:
        cap = min(cap, 2.0 * c.visc / (c.eps * hmax * k2**3))
    return cap


def _check_positive(h_new: np.ndarray, grid, t_new: float, h_floor: float):
    if not np.all(np.isfinite(h_new)):
        raise DivergenceError(f"non-finite height after step to t={t_new:.8g}")
    i = int(np.argmin(h_new))
    if h_new[i] <= h_floor:
        raise PositivityLossError(t_new, float(grid.centers[i]), float(h_new[i]))


def _implicit_transport(h: np.ndarray, u_new: np.ndarray, dx: float, dt: float) -> np.ndarray:
    """Backward-Euler height transport with the new velocity.

    Solves (I + dt*T) h_new = h with T g = div(u * interp(g)), then rewrites
    the accepted update in explicit flux form from the solved height so the
    cell sums telescope exactly.
    """
    n = h.shape[0]

    def t_apply(g):
        return div_values(u_new * interp_values(g), dx)

    ab = banded_from_apply(lambda g: g + dt * t_apply(g), n, 1, 1)
    delta = solve_banded_system(1, 1, ab, -dt * t_apply(h))
    h_mid = h + delta
    return h - dt * div_values(u_new * interp_values(h_mid), dx)


def step_velocity_models(
    state: State, params: PhysParams, kind, dt: float, h_floor: float = DEFAULT_H_FLOOR
) -> State:
    """One IMEX step of a velocity-based kind.

    Viscosity, slip and (for the regularized kind) the velocity-smoothing
    term are implicit with coefficients frozen at the current height;
    convection and the pressure force are explicit.  The quasi-static kind
    replaces the momentum update by the elliptic balance of viscosity, slip
    and pressure force.  Velocity boundary values are eliminated, so they
    stay exactly zero.
    """
    kind = as_kind(kind)
    c = model_coefficients(params, kind)
    grid = state.grid
    n, dx = grid.n, grid.dx
    h = state.h.values
    u = state.u.values
    t_new = state.t + dt

    hn = interp_values(h)
    lap = lap_values(h, dx)
    p = c.sigma * lap - pressure_pi(h, params.alpha)
    force = hn * grad_values(p, dx)
    if c.eps > 0.0:
        force = force + c.eps * hn * grad_values(
            lap_values(lap_values(lap, dx), dx), dx
        )
    uc = interp_node_values(u)
    conv = grad_values(h * uc * uc, dx)
    eps2 = c.eps * c.eps

    def stiff_apply(v: np.ndarray) -> np.ndarray:
        """slip*v - visc*d_x(h d_x v) + eps^2 d_x^4 v on full node arrays."""
        w = h * ((v[1:] - v[:-1]) / dx)
        out = np.zeros(n + 1)
        out[1:-1] = c.slip * v[1:-1] - c.visc * (w[1:] - w[:-1]) / dx
        if eps2 > 0.0:
            vxx = np.zeros(n + 1)
            vxx[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (dx * dx)
            out[1:-1] += eps2 * (vxx[2:] - 2.0 * vxx[1:-1] + vxx[:-2]) / (dx * dx)
        return out

    def embed(v_int: np.ndarray) -> np.ndarray:
        v = np.zeros(n + 1)
        v[1:-1] = v_int
        return v

    bw = 2 if eps2 > 0.0 else 1
    u_new = np.zeros(n + 1)
    if kind is ModelKind.STOKES:
        ab = banded_from_apply(lambda v: stiff_apply(embed(v))[1:-1], n - 1, bw, bw)
        u_new[1:-1] = solve_banded_system(bw, bw, ab, force[1:-1])
    else:
        def mass_apply(v_int: np.ndarray) -> np.ndarray:
            v = embed(v_int)
            return c.inertia * hn[1:-1] * v_int + dt * stiff_apply(v)[1:-1]

        ab = banded_from_apply(mass_apply, n - 1, bw, bw)
        rhs = dt * (force - c.inertia * conv - stiff_apply(u))[1:-1]
        u_new[1:-1] = u[1:-1] + solve_banded_system(bw, bw, ab, rhs)

    h_new = _implicit_transport(h, u_new, dx, dt)
    _check_positive(h_new, grid, t_new, h_floor)
    if not np.all(np.isfinite(u_new)):
        raise DivergenceError(f"non-finite velocity after step to t={t_new:.8g}")
    return State(Field(h_new, CENTERS, grid), Field(u_new, NODES, grid), t_new)


def step_thinfilm(
    h_field: Field, params: PhysParams, kind, dt: float, h_floor: float = DEFAULT_H_FLOOR
) -> Field:
    """One linearized-implicit step of a mobility-form fourth-order kind.

    Mobility and the pressure derivative are frozen at the current height;
    both the fourth-order capillary term and the second-order pressure term
    are implicit in the new height.  One pentadiagonal solve.
    """
    kind = as_kind(kind)
    if kind not in THINFILM_KINDS:
        raise ValueError(f"step_thinfilm handles {sorted(k.value for k in THINFILM_KINDS)}")
    grid = h_field.grid
    n, dx = grid.n, grid.dx
    h = h_field.values

    hn = interp_values(h)
    mob = mobility(hn, kind, params.b)
    pip = pressure_pi_prime(hn, params.alpha)
    sigma = params.sigma

    def flux_of(g: np.ndarray) -> np.ndarray:
        return mob * (sigma * grad_values(lap_values(g, dx), dx) - pip * grad_values(g, dx))

    def t_apply(g: np.ndarray) -> np.ndarray:
        return div_values(flux_of(g), dx)

    ab = banded_from_apply(lambda g: g + dt * t_apply(g), n, 2, 2)
    delta = solve_banded_system(2, 2, ab, -dt * t_apply(h))
    h_new = h - dt * div_values(flux_of(h + delta), dx)
    _check_positive(h_new, grid, math.nan, h_floor)  # a Field carries no time
    return Field(h_new, CENTERS, grid)


def _single_step(state: State, params: PhysParams, kind: ModelKind, dt: float, h_floor: float) -> State:
    if kind in THINFILM_KINDS:
        try:
            h_new = step_thinfilm(state.h, params, kind, dt, h_floor)
        except PositivityLossError as exc:
            raise PositivityLossError(state.t + dt, exc.x, exc.value) from None
        return State(h_new, state.u, state.t + dt)
    return step_velocity_models(state, params, kind, dt, h_floor)


def _at_time(state: State, t: float) -> State:
    return State(state.h, state.u, t)


def advance(
    state: State,
    params: PhysParams,
    kind,
    t_end: float,
    control: Optional[StepControl] = None,
    sink: Optional[Callable] = None,
    store_states: bool = True,
) -> State:
    """Advance to t_end with energy-guarded adaptive steps.

    A trial step is rejected (and dt halved) when the discrete energy rises
    by more than ``energy_guard_tol * (1 + |E|)``, or when positivity or
    finiteness fail.  After ten consecutive accepted steps dt grows by 1.2x,
    capped by dt_max, the advective CFL bound, and the stability cap of the
    explicitly treated forces (marginally unstable steps can slip past the
    energy guard for a while, and their high-mode transients would pollute
    the entropy balance).  One DiagnosticsRecord per accepted step goes to
    ``sink``.  Deterministic for identical inputs.
    """
    kind = as_kind(kind)
    control = control if control is not None else StepControl()
    if t_end < state.t:
        raise ValueError(f"t_end={t_end} is before the state time {state.t}")
    grid = state.grid
    tiny = 1e-15 * max(1.0, abs(t_end))
    if t_end - state.t <= tiny:
        return state

    current = state
    e_old = energy(current, params, kind)
    dt = min(max(control.dt, control.dt_min), control.dt_max)
    accepted_in_row = 0

    while t_end - current.t > tiny:
        dt_try = min(dt, control.dt_max, t_end - current.t)
        umax = float(np.max(np.abs(current.u.values)))
        if umax > 0.0:
            dt_try = min(dt_try, control.cfl_factor * grid.dx / umax)
        hmax = float(np.max(current.h.values))
        cap = explicit_force_dt_cap(params, kind, hmax, grid.dx)
        if math.isfinite(cap):
            dt_try = min(dt_try, 0.8 * cap)
        closing = dt_try >= (t_end - current.t) - tiny

        trial = None
        try:
            trial = _single_step(current, params, kind, dt_try, control.h_floor)
            e_new = energy(trial, params, kind)
            accept = np.isfinite(e_new) and (
                e_new <= e_old + control.energy_guard_tol * (1.0 + abs(e_old))
            )
        except (PositivityLossError, DivergenceError):
            accept = False

        if not accept:
            dt = 0.5 * dt_try
            accepted_in_row = 0
            if dt < control.dt_min:
                raise NonConvergenceError(
                    f"step size fell below dt_min={control.dt_min:g} at t={current.t:.8g}",
                    current,
                )
            continue

        current = _at_time(trial, t_end) if closing else trial
        e_old = e_new
        if sink is not None:
            sink(record_from_state(current, params, kind, dt_try, store_state=store_states))
        accepted_in_row += 1
        if accepted_in_row >= 10:
            dt = min(dt_try * 1.2, control.dt_max)
            accepted_in_row = 0

    return current


def integrate_fixed(
    state: State,
    params: PhysParams,
    kind,
    dt: float,
    nsteps: int,
    sink: Optional[Callable] = None,
    store_states: bool = True,
    h_floor: float = DEFAULT_H_FLOOR,
) -> State:
    """Take nsteps IMEX steps of fixed size, without the adaptive guard.

    Convergence and limit studies use this so member runs see identical
    step sequences.
    """
    kind = as_kind(kind)
    current = state
    for _ in range(nsteps):
        current = _single_step(current, params, kind, dt, h_floor)
        if sink is not None:
            sink(record_from_state(current, params, kind, dt, store_state=store_states))
    return current


def reference_integrate(
    state: State, params: PhysParams, kind, t_end: float, dt_fixed: float
) -> State:
    """Fully explicit forward-Euler cross-check on the same spatial operators.

    The caller owns stability: for the fourth-order kinds the usable step
    is roughly dx^4 / (8 * sigma * max mobility).  The quasi-static kind has
    no velocity time derivative, so its velocity stays the banded elliptic
    balance; everything else is matrix-free.
    """
    kind = as_kind(kind)
    if t_end < state.t:
        raise ValueError(f"t_end={t_end} is before the state time {state.t}")
    total = t_end - state.t
    if total == 0.0:
        return state
    if dt_fixed <= 0.0:
        raise ValueError("dt_fixed must be positive")

    nfull = int(math.floor(total / dt_fixed))
    rem = total - nfull * dt_fixed
    if rem <= dt_fixed * 1e-9:
        rem = 0.0

    grid = state.grid
    h = state.h.values.copy()
    u = state.u.values.copy()

    if kind in THINFILM_KINDS:
        weak = kind is ModelKind.WEAK_SLIP
        ok = _kernels.thinfilm_loop(h, grid.dx, dt_fixed, nfull, params.sigma, params.alpha, weak, params.b)
        if ok and rem > 0.0:
            ok = _kernels.thinfilm_loop(h, grid.dx, rem, 1, params.sigma, params.alpha, weak, params.b)
        if not ok:
            raise DivergenceError("explicit reference run diverged")
        return State(Field(h, CENTERS, grid), Field(u, NODES, grid), t_end)

    c = model_coefficients(params, kind)
    if kind is ModelKind.STOKES or c.inertia == 0.0:
        current = State(Field(h, CENTERS, grid), Field(u, NODES, grid), state.t)
        for k in range(nfull + (1 if rem > 0.0 else 0)):
            dt_k = dt_fixed if k < nfull else rem
            u_new = _elliptic_velocity(current.h.values, params, c, grid)
            dh = -div_values(interp_values(current.h.values) * u_new, grid.dx)
            h_next = current.h.values + dt_k * dh
            if not np.all(np.isfinite(h_next)) or np.any(h_next <= 0.0):
                raise DivergenceError("explicit reference run diverged")
            current = State(
                Field(h_next, CENTERS, grid), Field(u_new, NODES, grid), current.t + dt_k
            )
        return _at_time(current, t_end)

    ok = _kernels.velocity_loop(
        h, u, grid.dx, dt_fixed, nfull, c.inertia, c.visc, c.slip, c.sigma, params.alpha, c.eps
    )
    if ok and rem > 0.0:
        ok = _kernels.velocity_loop(
            h, u, grid.dx, rem, 1, c.inertia, c.visc, c.slip, c.sigma, params.alpha, c.eps
        )
    if not ok or np.any(h <= 0.0):
        raise DivergenceError("explicit reference run diverged")
    return State(Field(h, CENTERS, grid), Field(u, NODES, grid), t_end)


def _elliptic_velocity(h: np.ndarray, params: PhysParams, c: ModelCoefficients, grid) -> np.ndarray:
    """Quasi-static velocity from viscosity/slip balance against the pressure force."""
    n, dx = grid.n, grid.dx
    hn = interp_values(h)
    p = c.sigma * lap_values(h, dx) - pressure_pi(h, params.alpha)
    force = hn * grad_values(p, dx)

    def apply_int(v_int: np.ndarray) -> np.ndarray:
        v = np.zeros(n + 1)
        v[1:-1] = v_int
        w = h * ((v[1:] - v[:-1]) / dx)
        return c.slip * v_int - c.visc * (w[1:] - w[:-1]) / dx

    ab = banded_from_apply(apply_int, n - 1, 1, 1)
    u_new = np.zeros(n + 1)
    u_new[1:-1] = solve_banded_system(1, 1, ab, force[1:-1])
    return u_new
