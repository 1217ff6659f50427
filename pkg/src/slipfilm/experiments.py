"""Parameter-limit studies and convergence measurements.

Each study integrates the full model over a ladder of parameter values,
integrates the corresponding limit model once from the same initial data,
and tabulates error norms of the final states.  The theory guarantees
convergence without rates, so tables assert only what is checkable:
monotone error decrease down the ladder; empirical orders are reported,
not promised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .constitutive import PhysParams, pressure_pi
from .diagnostics import center_integral, node_integral
from .discretization import (
    CENTERS,
    Field,
    Grid,
    State,
    div_values,
    grad_values,
    interp_values,
    lap_values,
    make_state,
)
from .dynamics import (
    ModelKind,
    StepControl,
    advance,
    as_kind,
    explicit_force_dt_cap,
    integrate_fixed,
    THINFILM_KINDS,
)

__all__ = [
    "StateDiff",
    "ConvergenceRow",
    "ConvergenceTable",
    "StudyConfig",
    "cosine_state",
    "compare_states",
    "reconstructed_mobility_velocity",
    "limit_beta_to_zero",
    "limit_re_to_zero",
    "limit_beta_to_infinity",
    "limit_sigma_to_zero",
    "limit_epsilon_to_zero",
    "self_convergence",
    "STUDIES",
]


def cosine_state(
    n: int, mean: float = 1.0, amplitude: float = 0.1, wavenumber: int = 1, t: float = 0.0
) -> State:
    """Cosine film over a resting fluid: h = mean + amplitude*cos(k*pi*x), u = 0.

    Requires |amplitude| < mean (positivity) and integer wavenumber >= 1
    so the profile is compatible with the zero-slope boundary condition.
    """
    if not abs(amplitude) < mean:
        raise ValueError("cosine initial data needs |amplitude| < mean for positivity")
    if int(wavenumber) != wavenumber or wavenumber < 1:
        raise ValueError("wavenumber must be an integer >= 1")
    grid = Grid(n)
    h = mean + amplitude * np.cos(wavenumber * math.pi * grid.centers)
    return make_state(n, h, t=t)


@dataclass(frozen=True)
class StateDiff:
    """Discrete norms of the difference of two states or center fields."""

    h_l2: float
    h_linf: float
    h_h1: float
    u_l2: Optional[float] = None
    u_linf: Optional[float] = None
    u_h1: Optional[float] = None


def _field_diff(a: Field, b: Field) -> tuple:
    d = a.values - b.values
    dx = a.grid.dx
    if a.location == CENTERS:
        l2 = math.sqrt(center_integral(d * d, dx))
        g = grad_values(d, dx)
        h1 = math.sqrt(node_integral(g * g, dx))
    else:
        l2 = math.sqrt(node_integral(d * d, dx))
        g = div_values(d, dx)
        h1 = math.sqrt(center_integral(g * g, dx))
    return l2, float(np.max(np.abs(d))), h1


def compare_states(a, b) -> StateDiff:
    """Error norms between two states, or two fields at the same location."""
    if isinstance(a, State) and isinstance(b, State):
        if a.grid.n != b.grid.n:
            raise ValueError("compare_states needs a common grid")
        hl2, hlinf, hh1 = _field_diff(a.h, b.h)
        ul2, ulinf, uh1 = _field_diff(a.u, b.u)
        return StateDiff(hl2, hlinf, hh1, ul2, ulinf, uh1)
    if isinstance(a, Field) and isinstance(b, Field):
        if a.grid.n != b.grid.n or a.location != b.location:
            raise ValueError("compare_states needs fields on a common grid and location")
        l2, linf, h1 = _field_diff(a, b)
        return StateDiff(l2, linf, h1)
    raise ValueError("compare_states takes two States or two Fields")


@dataclass
class ConvergenceRow:
    param: float
    error_l2: float
    error_linf: float
    error_h1: float
    observed_order: Optional[float] = None
    extras: dict = field(default_factory=dict)
    failed: bool = False
    note: str = ""


@dataclass
class ConvergenceTable:
    """Rows of (parameter, error norms, observed order) against a limit model."""

    parameter_name: str
    rows: list
    reference_description: str

    def compute_orders(self):
        """Fill observed_order between consecutive non-failed rows.

        Positive order means the max-norm error shrinks in the limit
        direction; indeterminate ratios (zero or failed errors) stay None.
        """
        for prev, cur in zip(self.rows[:-1], self.rows[1:]):
            cur.observed_order = None
            if prev.failed or cur.failed:
                cur.note = cur.note or "order skipped: failed member"
                continue
            if prev.error_linf <= 0.0 or cur.error_linf <= 0.0:
                cur.note = cur.note or "order indeterminate: error at round-off"
                continue
            denom = abs(math.log(cur.param / prev.param))
            if denom == 0.0:
                continue
            cur.observed_order = math.log(prev.error_linf / cur.error_linf) / denom

    def errors_strictly_decreasing(self) -> bool:
        vals = [r.error_linf for r in self.rows if not r.failed]
        return all(b < a for a, b in zip(vals[:-1], vals[1:]))

    def to_csv(self) -> str:
        lines = ["param,error_L2,error_Linf,error_H1,order"]
        for r in self.rows:
            order = "" if r.observed_order is None else repr(float(r.observed_order))
            lines.append(
                f"{r.param!r},{float(r.error_l2)!r},{float(r.error_linf)!r},"
                f"{float(r.error_h1)!r},{order}"
            )
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        head = f"{self.parameter_name:>12}  {'error_L2':>12}  {'error_Linf':>12}  {'error_H1':>12}  {'order':>8}"
        lines = [f"reference: {self.reference_description}", head, "-" * len(head)]
        for r in self.rows:
            order = "  --  " if r.observed_order is None else f"{r.observed_order:6.2f}"
            status = "  FAILED " + r.note if r.failed else (("  " + r.note) if r.note else "")
            extras = "".join(f"  {k}={v:.3e}" for k, v in r.extras.items())
            lines.append(
                f"{r.param:12.6g}  {r.error_l2:12.4e}  {r.error_linf:12.4e}  "
                f"{r.error_h1:12.4e}  {order}{extras}{status}"
            )
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class StudyConfig:
    """Shared knobs of a limit study; values is the parameter ladder."""

    values: tuple = ()
    n: int = 64
    t_end: float = 0.05
    params: PhysParams = PhysParams()
    mean: float = 1.0
    amplitude: float = 0.1
    wavenumber: int = 1
    dt: Optional[float] = None

    def initial(self) -> State:
        return cosine_state(self.n, self.mean, self.amplitude, self.wavenumber)


def _stable_velocity_dt(params: PhysParams, kind, n: int, hmax: float) -> float:
    """Fixed step well inside the explicit-force stability region."""
    cap = explicit_force_dt_cap(params, kind, hmax, 1.0 / n)
    return min(1e-3, 0.5 * cap)


def _run_member(state: State, params: PhysParams, kind, t_end: float, dt: float):
    nsteps = max(1, int(round(t_end / dt)))
    return integrate_fixed(state, params, kind, t_end / nsteps, nsteps)


def reconstructed_mobility_velocity(h_field: Field, params: PhysParams) -> np.ndarray:
    """Limit velocity h * d_x(sigma*d_xx h - pi(h)) on nodes, from a height field."""
    dx = h_field.grid.dx
    h = h_field.values
    p = params.sigma * lap_values(h, dx) - pressure_pi(h, params.alpha)
    return interp_values(h) * grad_values(p, dx)


def _limit_study(
    name: str,
    config: StudyConfig,
    member_kind,
    member_params,
    reference_kind,
    reference_params: PhysParams,
    reference_description: str,
    direction: str,
    member_dt=None,
    reference_dt: Optional[float] = None,
    extras_fn=None,
) -> ConvergenceTable:
    values = sorted(config.values, reverse=(direction == "decreasing"))
    hmax = config.mean + abs(config.amplitude)
    h0 = config.initial()

    ref_kind = as_kind(reference_kind)
    if ref_kind in THINFILM_KINDS:
        dt_ref = reference_dt or 1e-5 * (64.0 / config.n) ** 2
    else:
        dt_ref = reference_dt or _stable_velocity_dt(reference_params, ref_kind, config.n, hmax)
    reference = _run_member(h0, reference_params, ref_kind, config.t_end, dt_ref)

    rows = []
    for value in values:
        params_v = member_params(value)
        dt_v = config.dt or (member_dt(value) if member_dt else None)
        if dt_v is None:
            dt_v = _stable_velocity_dt(params_v, member_kind, config.n, hmax)
        try:
            final = _run_member(h0, params_v, member_kind, config.t_end, dt_v)
            diff = compare_states(final.h, reference.h)
            row = ConvergenceRow(value, diff.h_l2, diff.h_linf, diff.h_h1)
            if extras_fn is not None:
                row.extras.update(extras_fn(value, params_v, final, reference))
        except Exception as exc:  # study continues past failed members
            row = ConvergenceRow(value, math.nan, math.nan, math.nan, failed=True, note=str(exc))
        rows.append(row)

    table = ConvergenceTable(name, rows, reference_description)
    table.compute_orders()
    return table


def limit_beta_to_zero(config: Optional[StudyConfig] = None) -> ConvergenceTable:
    """Rescaled strong-slip runs against the mobility-h^2 limit model.

    Also checks the limit identity for the velocity: the reference velocity
    is recomputed as h * d_x(sigma*d_xx h - pi(h)) from the limit-model
    height, never copied from a strong-slip run.
    """
    config = config or StudyConfig(values=(0.1, 0.03, 0.01, 0.003))
    if not config.params.sigma > 0.0:
        raise ValueError("the beta -> 0 study requires sigma > 0")

    def extras(value, params_v, final, reference):
        u_ref = reconstructed_mobility_velocity(reference.h, config.params)
        d = final.u.values - u_ref
        return {"u_error_l2": math.sqrt(node_integral(d * d, final.grid.dx))}

    return _limit_study(
        "beta",
        config,
        ModelKind.SCALED_STRONG_SLIP,
        lambda b: replace(config.params, beta=b),
        ModelKind.INTERMEDIATE_SLIP,
        config.params,
        "mobility-h^2 limit model from the same initial height",
        "decreasing",
        extras_fn=extras,
    )


def limit_re_to_zero(config: Optional[StudyConfig] = None) -> ConvergenceTable:
    """Strong-slip runs over decreasing Reynolds number against the quasi-static kind."""
    config = config or StudyConfig(values=(1.0, 0.3, 0.1, 0.03))

    def extras(value, params_v, final, reference):
        d = final.u.values - reference.u.values
        return {"u_error_l2": math.sqrt(node_integral(d * d, final.grid.dx))}

    return _limit_study(
        "re",
        config,
        ModelKind.STRONG_SLIP,
        lambda re: replace(config.params, re=re),
        ModelKind.STOKES,
        config.params,
        "quasi-static (zero-inertia) solution at the same time",
        "decreasing",
        extras_fn=extras,
    )


def limit_beta_to_infinity(config: Optional[StudyConfig] = None) -> ConvergenceTable:
    """Strong-slip runs over growing slip length against the free-film kind."""
    config = config or StudyConfig(values=(1.0, 10.0, 100.0, 1000.0))
    return _limit_study(
        "beta",
        config,
        ModelKind.STRONG_SLIP,
        lambda b: replace(config.params, beta=b),
        ModelKind.FREE_FILM,
        config.params,
        "free-film (no substrate friction) solution at the same time",
        "increasing",
    )


def limit_sigma_to_zero(config: Optional[StudyConfig] = None) -> ConvergenceTable:
    """Strong-slip runs over decreasing capillarity against the sigma = 0 kind.

    Each row reports the smallest height seen anywhere along the member
    run; the checkable claim in this limit is that it stays positive.
    """
    config = config or StudyConfig(values=(1.0, 0.3, 0.1, 0.03))
    hmax = config.mean + abs(config.amplitude)
    h0 = config.initial()

    dt_ref = _stable_velocity_dt(config.params, ModelKind.NO_CAPILLARITY, config.n, hmax)
    reference = _run_member(h0, config.params, ModelKind.NO_CAPILLARITY, config.t_end, dt_ref)

    rows = []
    for sigma in sorted(config.values, reverse=True):
        params_v = replace(config.params, sigma=sigma)
        dt_v = config.dt or _stable_velocity_dt(params_v, ModelKind.STRONG_SLIP, config.n, hmax)
        try:
            inf_min = [math.inf]

            def track(record, inf_min=inf_min):
                inf_min[0] = min(inf_min[0], record.min_h)

            nsteps = max(1, int(round(config.t_end / dt_v)))
            final = integrate_fixed(
                h0,
                params_v,
                ModelKind.STRONG_SLIP,
                config.t_end / nsteps,
                nsteps,
                sink=track,
                store_states=False,
            )
            diff = compare_states(final.h, reference.h)
            rows.append(
                ConvergenceRow(
                    sigma, diff.h_l2, diff.h_linf, diff.h_h1, extras={"inf_min_h": inf_min[0]}
                )
            )
        except Exception as exc:
            rows.append(
                ConvergenceRow(sigma, math.nan, math.nan, math.nan, failed=True, note=str(exc))
            )

    table = ConvergenceTable("sigma", rows, "zero-capillarity solution at the same time")
    table.compute_orders()
    return table


def limit_epsilon_to_zero(config: Optional[StudyConfig] = None) -> ConvergenceTable:
    """Regularized runs over decreasing smoothing strength against strong slip.

    The seventh-order smoothing force is explicit in the stepper, so the
    stable step scales like dx^6/eps; the default ladder therefore runs on
    a coarse grid over a short horizon with the adaptive driver.
    """
    config = config or StudyConfig(values=(1e-2, 1e-3, 1e-4), n=32, t_end=3e-4)
    values = sorted(config.values, reverse=True)
    h0 = config.initial()
    hmax = config.mean + abs(config.amplitude)

    dt_ref = _stable_velocity_dt(config.params, ModelKind.STRONG_SLIP, config.n, hmax)
    dt_ref = min(dt_ref, config.t_end / 50.0)
    reference = _run_member(h0, config.params, ModelKind.STRONG_SLIP, config.t_end, dt_ref)

    rows = []
    for eps in values:
        params_v = replace(config.params, eps=eps)
        dt_cap = min(
            _stable_velocity_dt(params_v, ModelKind.REGULARIZED, config.n, hmax),
            config.t_end / 50.0,
        )
        control = StepControl(dt=dt_cap, dt_max=dt_cap, dt_min=1e-16)
        try:
            final = advance(h0, params_v, ModelKind.REGULARIZED, config.t_end, control)
            diff = compare_states(final.h, reference.h)
            d3 = grad_values(lap_values(final.h.values, final.grid.dx), final.grid.dx)
            eps_energy = 0.5 * eps * node_integral(d3 * d3, final.grid.dx)
            row = ConvergenceRow(
                eps, diff.h_l2, diff.h_linf, diff.h_h1, extras={"eps_energy": eps_energy}
            )
        except Exception as exc:
            row = ConvergenceRow(eps, math.nan, math.nan, math.nan, failed=True, note=str(exc))
        rows.append(row)

    table = ConvergenceTable(
        "eps", rows, "strong-slip solution from the same initial data",
    )
    table.compute_orders()
    return table


def _restrict_centers(fine: np.ndarray) -> np.ndarray:
    return 0.5 * (fine[0::2] + fine[1::2])


def _restrict_nodes(fine: np.ndarray) -> np.ndarray:
    return fine[::2]


def self_convergence(config: Optional[StudyConfig] = None, kind=ModelKind.STRONG_SLIP) -> ConvergenceTable:
    """Richardson triple (n, 2n, 4n) with a fixed dt law dt ~ dx^2.

    Errors compare each grid against the next finer one restricted to it
    (cell-pair averages for heights, node injection for velocities); the
    observed order between the two rows is log2 of the error ratio.
    """
    config = config or StudyConfig(values=(), n=64, t_end=0.01)
    kind = as_kind(kind)
    grids = [config.n, 2 * config.n, 4 * config.n]
    hmax = config.mean + abs(config.amplitude)

    if kind in THINFILM_KINDS:
        dt0 = config.dt or 2e-4 * (64.0 / config.n) ** 2
    else:
        dt0 = config.dt or min(
            2e-4 * (64.0 / config.n) ** 2,
            _stable_velocity_dt(config.params, kind, config.n, hmax),
        )

    finals = []
    for m in grids:
        dt = dt0 * (config.n / m) ** 2
        state0 = cosine_state(m, config.mean, config.amplitude, config.wavenumber)
        finals.append(_run_member(state0, config.params, kind, config.t_end, dt))

    rows = []
    for coarse, fine in zip(finals[:-1], finals[1:]):
        n_c = coarse.grid.n
        restricted = make_state(
            n_c,
            _restrict_centers(fine.h.values),
            _restrict_nodes(fine.u.values),
            fine.t,
        )
        diff = compare_states(coarse, restricted)
        rows.append(ConvergenceRow(n_c, diff.h_l2, diff.h_linf, diff.h_h1))

    table = ConvergenceTable(
        "n", rows, f"next-finer grid solution restricted, kind={kind.value}"
    )
    table.compute_orders()
    return table


STUDIES = {
    "beta_to_zero": limit_beta_to_zero,
    "re_to_zero": limit_re_to_zero,
    "beta_to_infinity": limit_beta_to_infinity,
    "sigma_to_zero": limit_sigma_to_zero,
    "epsilon_to_zero": limit_epsilon_to_zero,
    "self_convergence": self_convergence,
}
