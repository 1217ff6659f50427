"""Operational shell: config files, CLI commands, snapshots, CSV output.

Config files are flat sectioned key = value text ([model], [params],
[grid], [initial], [time], [output], optional [study]); unknown sections
or keys are rejected with the offending line number.  Snapshots and
diagnostics serialize floats via repr, so write/read round-trips are
bit-exact and identical configs produce byte-identical CSVs.

Commands: ``run <config>``, ``limits <config>``, ``verify``,
``resume <snapshot> --t-end T``.  Every failure path prints a single
machine-parseable ``error: <code>`` line before any human-readable detail
and exits nonzero.  The environment variable ``SLIPFILM_OUTPUT_DIR``
overrides the output directory.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .banded import SolverError
from .constitutive import (
    PhysParams,
    pi_prime_lower_bound,
    pressure_pi,
    pressure_pi1,
    pressure_pi_prime,
    u_pot,
    u_pot_floor,
)
from .diagnostics import (
    check_coercivity,
    check_energy_balance,
    check_entropy_balance,
    csv_header,
    positivity_report,
    record_from_state,
    record_to_csv_row,
)
from .discretization import (
    CENTERS,
    NODES,
    Field,
    Grid,
    State,
    div_node_to_center,
    grad_center_to_node,
    laplacian_neumann,
    make_state,
)
from .dynamics import (
    ModelKind,
    NonConvergenceError,
    PositivityLossError,
    DivergenceError,
    StepControl,
    VELOCITY_KINDS,
    advance,
    as_kind,
    integrate_fixed,
    reference_integrate,
)
from .experiments import STUDIES, StudyConfig, cosine_state

__all__ = [
    "ConfigError",
    "SnapshotError",
    "Config",
    "InitialSpec",
    "OutputSpec",
    "StudySpec",
    "parse_config",
    "load_config",
    "initial_state",
    "write_snapshot",
    "read_snapshot",
    "write_diagnostics_csv",
    "cmd_run",
    "cmd_limits",
    "cmd_verify",
    "cmd_resume",
    "main",
]

SNAPSHOT_MAGIC = "slipfilm-snapshot"
SNAPSHOT_VERSION = 1
OUTPUT_DIR_ENV = "SLIPFILM_OUTPUT_DIR"


class ConfigError(ValueError):
    """Config text failed to parse or validate; message names key and line."""


class SnapshotError(ValueError):
    """Snapshot file is malformed, truncated, or of the wrong version."""


@dataclass(frozen=True)
class InitialSpec:
    family: str = "cosine"
    mean: float = 1.0
    amplitude: float = 0.1
    wavenumber: int = 1
    snapshot: Optional[str] = None


@dataclass(frozen=True)
class OutputSpec:
    directory: str = "out"
    snapshot_every: int = 0
    diagnostics_every: int = 1


@dataclass(frozen=True)
class StudySpec:
    name: str = ""
    values: tuple = ()
    n: Optional[int] = None
    t_end: Optional[float] = None
    dt: Optional[float] = None


@dataclass(frozen=True)
class Config:
    model: ModelKind = ModelKind.STRONG_SLIP
    params: PhysParams = PhysParams()
    grid_n: int = 128
    initial: InitialSpec = InitialSpec()
    t_end: float = 0.1
    control: StepControl = StepControl()
    output: OutputSpec = OutputSpec()
    study: Optional[StudySpec] = None


_SCHEMA = {
    "model": {"kind"},
    "params": {"re", "beta", "sigma", "nu", "alpha", "b", "eps"},
    "grid": {"n"},
    "initial": {"family", "mean", "amplitude", "wavenumber", "snapshot"},
    "time": {"t_end", "dt", "dt_min", "dt_max", "cfl_factor", "energy_guard_tol", "h_floor"},
    "output": {"directory", "snapshot_every", "diagnostics_every"},
    "study": {"name", "values", "n", "t_end", "dt"},
}

_INT_KEYS = {("grid", "n"), ("initial", "wavenumber"), ("output", "snapshot_every"),
             ("output", "diagnostics_every"), ("study", "n")}
_STR_KEYS = {("model", "kind"), ("initial", "family"), ("initial", "snapshot"),
             ("output", "directory"), ("study", "name")}


def _parse_sections(text: str):
    """Split config text into {(section, key): (value, line_no)}."""
    entries = {}
    section = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in _SCHEMA:
                raise ConfigError(f"line {line_no}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {raw!r}")
        if section is None:
            raise ConfigError(f"line {line_no}: key outside any section")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in _SCHEMA[section]:
            raise ConfigError(f"line {line_no}: unknown key {key!r} in section [{section}]")
        if (section, key) in entries:
            raise ConfigError(f"line {line_no}: duplicate key {key!r} in section [{section}]")
        entries[(section, key)] = (value, line_no)
    return entries


def _pop_float(entries, section, key, default):
    item = entries.pop((section, key), None)
    if item is None:
        return default
    value, line_no = item
    if section == "params" and key == "beta" and value.lower() == "inf":
        return math.inf
    try:
        out = float(value)
    except ValueError:
        raise ConfigError(f"line {line_no}: key {key!r} expects a number, got {value!r}") from None
    if not math.isfinite(out):
        raise ConfigError(
            f"line {line_no}: key {key!r} must be finite ('inf' is only valid for beta)"
        )
    return out


def _pop_int(entries, section, key, default):
    item = entries.pop((section, key), None)
    if item is None:
        return default
    value, line_no = item
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"line {line_no}: key {key!r} expects an integer, got {value!r}") from None


def _pop_str(entries, section, key, default):
    item = entries.pop((section, key), None)
    if item is None:
        return default
    return item[0]


def parse_config(text: str) -> Config:
    """Parse and validate config text; errors name the key and line."""
    entries = _parse_sections(text)

    kind_text = _pop_str(entries, "model", "kind", "strong_slip")
    try:
        model = as_kind(kind_text)
    except ValueError:
        valid = ", ".join(k.value for k in ModelKind)
        raise ConfigError(f"key 'kind': unknown model {kind_text!r}; expected one of {valid}") from None

    try:
        params = PhysParams(
            re=_pop_float(entries, "params", "re", 1.0),
            beta=_pop_float(entries, "params", "beta", 1.0),
            sigma=_pop_float(entries, "params", "sigma", 1.0),
            nu=_pop_float(entries, "params", "nu", 1.0),
            alpha=_pop_float(entries, "params", "alpha", 0.1),
            b=_pop_float(entries, "params", "b", 0.0),
            eps=_pop_float(entries, "params", "eps", 0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"section [params]: {exc}") from None

    if model is ModelKind.REGULARIZED and not params.eps > 0.0:
        raise ConfigError("key 'eps': the regularized model requires eps > 0")

    grid_n = _pop_int(entries, "grid", "n", 128)
    if grid_n < 8:
        raise ConfigError(f"key 'n': simulations need n >= 8, got {grid_n}")

    initial = InitialSpec(
        family=_pop_str(entries, "initial", "family", "cosine"),
        mean=_pop_float(entries, "initial", "mean", 1.0),
        amplitude=_pop_float(entries, "initial", "amplitude", 0.1),
        wavenumber=_pop_int(entries, "initial", "wavenumber", 1),
        snapshot=_pop_str(entries, "initial", "snapshot", None),
    )
    if initial.snapshot is None:
        if initial.family != "cosine":
            raise ConfigError(f"key 'family': unknown initial family {initial.family!r}")
        if not abs(initial.amplitude) < initial.mean:
            raise ConfigError(
                "key 'amplitude': initial height would lose positivity "
                f"(|{initial.amplitude}| >= {initial.mean})"
            )
        if initial.wavenumber < 1:
            raise ConfigError("key 'wavenumber': must be an integer >= 1")

    t_end = _pop_float(entries, "time", "t_end", 0.1)
    if not t_end >= 0.0:
        raise ConfigError(f"key 't_end': must be nonnegative, got {t_end}")
    try:
        control = StepControl(
            dt=_pop_float(entries, "time", "dt", 1e-5),
            dt_min=_pop_float(entries, "time", "dt_min", 1e-14),
            dt_max=_pop_float(entries, "time", "dt_max", 1e-3),
            cfl_factor=_pop_float(entries, "time", "cfl_factor", 0.5),
            energy_guard_tol=_pop_float(entries, "time", "energy_guard_tol", 1e-8),
            h_floor=_pop_float(entries, "time", "h_floor", 1e-8),
        )
    except ValueError as exc:
        raise ConfigError(f"section [time]: {exc}") from None

    output = OutputSpec(
        directory=_pop_str(entries, "output", "directory", "out"),
        snapshot_every=_pop_int(entries, "output", "snapshot_every", 0),
        diagnostics_every=_pop_int(entries, "output", "diagnostics_every", 1),
    )
    if output.diagnostics_every < 1:
        raise ConfigError("key 'diagnostics_every': must be >= 1")
    if output.snapshot_every < 0:
        raise ConfigError("key 'snapshot_every': must be >= 0")

    study = None
    study_keys = [k for k in entries if k[0] == "study"]
    if study_keys or ("study", "name") in entries:
        name_item = entries.pop(("study", "name"), None)
        if name_item is None:
            raise ConfigError("section [study]: missing required key 'name'")
        name = name_item[0]
        if name not in STUDIES:
            raise ConfigError(
                f"key 'name': unknown study {name!r}; expected one of {', '.join(sorted(STUDIES))}"
            )
        values_item = entries.pop(("study", "values"), None)
        values = ()
        if values_item is not None:
            value_text, line_no = values_item
            try:
                values = tuple(float(v) for v in value_text.split(",") if v.strip())
            except ValueError:
                raise ConfigError(f"line {line_no}: key 'values' expects comma-separated numbers") from None
        study_n = _pop_int(entries, "study", "n", None)
        study = StudySpec(
            name=name,
            values=values,
            n=study_n,
            t_end=_pop_float(entries, "study", "t_end", None),
            dt=_pop_float(entries, "study", "dt", None),
        )

    if entries:
        (section, key), (_, line_no) = next(iter(entries.items()))
        raise ConfigError(f"line {line_no}: unhandled key {key!r} in section [{section}]")

    return Config(
        model=model,
        params=params,
        grid_n=grid_n,
        initial=initial,
        t_end=t_end,
        control=control,
        output=output,
        study=study,
    )


def load_config(path) -> Config:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def initial_state(config: Config):
    """Initial (state, model, params); a snapshot source overrides the family."""
    if config.initial.snapshot is not None:
        return read_snapshot(config.initial.snapshot)
    state = cosine_state(
        config.grid_n, config.initial.mean, config.initial.amplitude, config.initial.wavenumber
    )
    return state, config.model, config.params


def write_snapshot(path, state: State, model, params: PhysParams) -> None:
    """Full-precision text snapshot; round-trips bit-exactly."""
    kind = as_kind(model)
    lines = [f"{SNAPSHOT_MAGIC} v{SNAPSHOT_VERSION}"]
    lines.append(f"model = {kind.value}")
    for name in ("re", "beta", "sigma", "nu", "alpha", "b", "eps"):
        lines.append(f"{name} = {float(getattr(params, name))!r}")
    lines.append(f"n = {state.grid.n}")
    lines.append(f"t = {float(state.t)!r}")
    lines.append("[h]")
    for x, v in zip(state.grid.centers, state.h.values):
        lines.append(f"{float(x)!r} {float(v)!r}")
    lines.append("[u]")
    for x, v in zip(state.grid.nodes, state.u.values):
        lines.append(f"{float(x)!r} {float(v)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_snapshot(path):
    """Read a snapshot; returns (state, model kind, params)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SnapshotError(f"cannot read snapshot {path}: {exc}") from None
    lines = text.splitlines()
    if not lines or not lines[0].startswith(SNAPSHOT_MAGIC):
        raise SnapshotError(f"{path} is not a slipfilm snapshot")
    version = lines[0][len(SNAPSHOT_MAGIC):].strip()
    if version != f"v{SNAPSHOT_VERSION}":
        raise SnapshotError(
            f"snapshot version mismatch: file has {version!r}, reader supports v{SNAPSHOT_VERSION}"
        )
    header = {}
    idx = 1
    while idx < len(lines) and lines[idx].strip() != "[h]":
        line = lines[idx].strip()
        if line:
            if "=" not in line:
                raise SnapshotError(f"malformed header line {idx + 1}: {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            header[key] = value
        idx += 1
    required = {"model", "re", "beta", "sigma", "nu", "alpha", "b", "eps", "n", "t"}
    missing = required - set(header)
    if missing:
        raise SnapshotError(f"snapshot header missing keys: {sorted(missing)}")
    try:
        model = as_kind(header["model"])
        params = PhysParams(
            re=float(header["re"]),
            beta=float(header["beta"]),
            sigma=float(header["sigma"]),
            nu=float(header["nu"]),
            alpha=float(header["alpha"]),
            b=float(header["b"]),
            eps=float(header["eps"]),
        )
        n = int(header["n"])
        t = float(header["t"])
    except ValueError as exc:
        raise SnapshotError(f"snapshot header invalid: {exc}") from None

    def read_block(start, count, marker):
        if start >= len(lines) or lines[start].strip() != marker:
            raise SnapshotError(f"snapshot missing {marker} block")
        vals = []
        for k in range(count):
            row = start + 1 + k
            if row >= len(lines):
                raise SnapshotError(f"snapshot truncated inside {marker} block")
            parts = lines[row].split()
            if len(parts) != 2:
                raise SnapshotError(f"malformed data line {row + 1}: {lines[row]!r}")
            vals.append(float(parts[1]))
        return np.array(vals), start + 1 + count

    h_vals, idx = read_block(idx, n, "[h]")
    u_vals, idx = read_block(idx, n + 1, "[u]")
    try:
        state = make_state(n, h_vals, u_vals, t)
    except ValueError as exc:
        raise SnapshotError(f"snapshot state invalid: {exc}") from None
    return state, model, params


def write_diagnostics_csv(path, records, every: int = 1) -> None:
    lines = [csv_header()]
    for i, rec in enumerate(records):
        if i % every == 0 or i == len(records) - 1:
            lines.append(record_to_csv_row(rec))
    Path(path).write_text("\n".join(lines) + "\n")


def _fail(code: str, detail: str) -> int:
    print(f"error: {code}")
    print(detail)
    return 1


def _resolve_outdir(config_dir: str, override: Optional[str]) -> Path:
    outdir = Path(override or os.environ.get(OUTPUT_DIR_ENV) or config_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def _run_checks(records, params, kind, control) -> list:
    """Inequality reports for a finished trajectory.

    The entropy balance applies to the velocity kinds whose entropy fits
    the common template; the rescaled system carries slip-weighted entropy
    terms the template does not represent, so it is checked for energy,
    positivity, and coercivity only.
    """
    reports = [
        check_energy_balance(records, tol=control.energy_guard_tol),
        positivity_report(records, h_floor=control.h_floor),
        check_coercivity(records, params, kind=kind),
    ]
    kind = as_kind(kind)
    if kind in VELOCITY_KINDS and kind is not ModelKind.SCALED_STRONG_SLIP:
        reports.append(check_entropy_balance(records, params, kind=kind))
    return reports


def cmd_run(config: Config, out_override: Optional[str] = None) -> int:
    """Advance to t_end, writing diagnostics and snapshots; verify inequalities."""
    if config.study is not None:
        return _fail("config", "config has a [study] section; use the limits command")
    outdir = _resolve_outdir(config.output.directory, out_override)
    try:
        state, model, params = initial_state(config)
    except (SnapshotError, ValueError) as exc:
        return _fail("snapshot" if isinstance(exc, SnapshotError) else "config", str(exc))

    records = [record_from_state(state, params, model, dt=0.0)]
    snap_counter = [0]

    def sink(record):
        records.append(record)
        snap_counter[0] += 1
        if config.output.snapshot_every > 0 and snap_counter[0] % config.output.snapshot_every == 0:
            write_snapshot(
                outdir / f"snap_{snap_counter[0]:08d}.snapshot", record.state, model, params
            )

    status = 0
    try:
        final = advance(state, params, model, config.t_end, config.control, sink=sink)
    except PositivityLossError as exc:
        status = _fail("positivity-loss", str(exc))
        final = None
    except NonConvergenceError as exc:
        status = _fail("non-convergence", str(exc))
        final = exc.state
    except (SolverError, DivergenceError) as exc:
        status = _fail("solver", str(exc))
        final = None

    write_diagnostics_csv(outdir / "diagnostics.csv", records, config.output.diagnostics_every)
    if final is not None:
        write_snapshot(outdir / "final.snapshot", final, model, params)
    if status != 0:
        print(f"partial outputs retained in {outdir}")
        return status

    reports = _run_checks(records, params, model, config.control)
    mass0, mass1 = records[0].mass, records[-1].mass
    print(f"run finished: t = {final.t!r}, {len(records) - 1} accepted steps")
    print(f"  mass drift      : {abs(mass1 - mass0) / abs(mass0):.3e} (relative)")
    print(f"  energy drop     : {records[0].energy - records[-1].energy:.6e}")
    print(f"  min h           : {min(r.min_h for r in records):.6g}")
    failed = [r for r in reports if not r.verdict]
    for rep in reports:
        verdict = "pass" if rep.verdict else "FAIL"
        print(f"  {rep.name:<16}: {verdict} (worst violation {rep.worst_violation:.3e})")
    if failed:
        print("error: inequality")
        for rep in failed:
            print(f"{rep.name} violated by {rep.worst_violation:.3e} at t={rep.location:.6g}")
        return 1
    print(f"outputs written to {outdir}")
    return 0


_STUDY_DEFAULTS = {
    "beta_to_zero": ((0.1, 0.03, 0.01, 0.003), 64, 0.05),
    "re_to_zero": ((1.0, 0.3, 0.1, 0.03), 64, 0.05),
    "beta_to_infinity": ((1.0, 10.0, 100.0, 1000.0), 64, 0.05),
    "sigma_to_zero": ((1.0, 0.3, 0.1, 0.03), 64, 0.05),
    "epsilon_to_zero": ((1e-2, 1e-3, 1e-4), 32, 3e-4),
    "self_convergence": ((), 64, 0.01),
}


def cmd_limits(config: Config, out_override: Optional[str] = None) -> int:
    """Run the configured limit study and write its table."""
    if config.study is None:
        return _fail("config", "limits needs a [study] section in the config")
    spec = config.study
    defaults = _STUDY_DEFAULTS[spec.name]
    study_config = StudyConfig(
        values=spec.values or defaults[0],
        n=spec.n or defaults[1],
        t_end=spec.t_end if spec.t_end is not None else defaults[2],
        params=config.params,
        mean=config.initial.mean,
        amplitude=config.initial.amplitude,
        wavenumber=config.initial.wavenumber,
        dt=spec.dt,
    )
    outdir = _resolve_outdir(config.output.directory, out_override)
    try:
        if spec.name == "self_convergence":
            table = STUDIES[spec.name](study_config, kind=config.model)
        else:
            table = STUDIES[spec.name](study_config)
    except Exception as exc:
        return _fail("study", f"{type(exc).__name__}: {exc}")

    (outdir / f"study_{spec.name}.csv").write_text(table.to_csv())
    (outdir / f"study_{spec.name}.txt").write_text(table.to_text())
    print(table.to_text())
    if len(table.rows) < 2:
        print("warning: single-value ladder, no order computable")
    if any(r.failed for r in table.rows):
        print("error: study")
        print("one or more study members failed")
        return 1
    if not table.errors_strictly_decreasing():
        print("error: inequality")
        print("errors do not decrease monotonically down the ladder")
        return 1
    print(f"study outputs written to {outdir}")
    return 0


def _verify_battery():
    """The built-in property battery; returns [(name, ok, detail)]."""
    rng = np.random.default_rng(20260808)
    checks = []

    def add(name, ok, detail=""):
        checks.append((name, bool(ok), detail))

    # constitutive identities against centered finite differences
    hs = rng.uniform(0.05, 20.0, size=100)
    worst_pi = worst_pi1 = 0.0
    for alpha in (0.05, 0.1, 0.5):
        for h in hs:
            d = 1e-6 * h
            fd = (u_pot(h + d, alpha) - u_pot(h - d, alpha)) / (2 * d)
            worst_pi = max(worst_pi, abs(fd - pressure_pi(h, alpha)) / max(1e-30, abs(fd)))
            fd1 = (pressure_pi1(h + d, alpha) - pressure_pi1(h - d, alpha)) / (2 * d)
            target = h * pressure_pi_prime(h, alpha)
            worst_pi1 = max(worst_pi1, abs(fd1 - target) / max(1e-30, abs(target)))
    add("pressure = potential derivative", worst_pi < 1e-8, f"rel err {worst_pi:.2e}")
    add("integrated-pressure derivative identity", worst_pi1 < 1e-7, f"rel err {worst_pi1:.2e}")

    import scipy.integrate

    worst_q = 0.0
    for alpha in (0.05, 0.1, 0.5):
        for h in rng.uniform(0.05, 20.0, size=5):
            val, _ = scipy.integrate.quad(
                lambda tau: -tau * pressure_pi_prime(tau, alpha), h, np.inf, limit=200
            )
            worst_q = max(worst_q, abs(val - pressure_pi1(h, alpha)) / max(1e-30, abs(val)))
    add("integrated pressure matches quadrature", worst_q < 1e-9, f"rel err {worst_q:.2e}")

    grid_h = np.linspace(1e-3, 100.0, 400_000)
    floor_ok = True
    for alpha in (0.05, 0.1, 0.3):
        vals = u_pot(grid_h, alpha)
        floor_ok &= bool(np.all(vals >= u_pot_floor(alpha) - 1e-12))
        floor_ok &= abs(u_pot(alpha, alpha) - u_pot_floor(alpha)) < 1e-12
    add("potential floor attained at h = alpha", floor_ok)

    bound_ok = True
    for alpha in (0.05, 0.1, 0.5):
        lhs = pressure_pi_prime(grid_h, alpha)
        bound_ok &= bool(np.all(lhs >= pi_prime_lower_bound(grid_h, alpha) - 1e-12))
    add("pressure-derivative lower bound", bound_ok)

    # discrete operator orders
    def op_order(op, exact):
        errs = []
        for n in (32, 64, 128, 256):
            grid = Grid(n)
            f = Field(np.cos(np.pi * grid.centers), CENTERS, grid)
            approx = op(f)
            x = grid.nodes if approx.location == NODES else grid.centers
            errs.append(np.max(np.abs(approx.values - exact(x))))
        orders = [np.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
        return min(orders)

    o1 = op_order(grad_center_to_node, lambda x: -np.pi * np.sin(np.pi * x))
    o2 = op_order(laplacian_neumann, lambda x: -np.pi**2 * np.cos(np.pi * x))
    add("operator convergence order >= 1.9", o1 >= 1.9 and o2 >= 1.9, f"orders {o1:.2f}, {o2:.2f}")

    grid = Grid(64)
    f = Field(rng.normal(size=64), CENTERS, grid)
    F_vals = rng.normal(size=65)
    F_vals[0] = F_vals[-1] = 0.0
    F = Field(F_vals, NODES, grid)
    sbp = (
        np.sum(div_node_to_center(F).values * f.values) * grid.dx
        + np.sum(F.values[1:-1] * grad_center_to_node(f).values[1:-1]) * grid.dx
    )
    add("summation by parts", abs(sbp) < 1e-13, f"residual {abs(sbp):.2e}")

    params = PhysParams(eps=1e-3)
    all_fixed = True
    for kind in ModelKind:
        state = make_state(32, np.full(32, 0.7))
        final = integrate_fixed(state, params, kind, 1e-5, 50)
        drift = np.max(np.abs(final.h.values - 0.7)) + np.max(np.abs(final.u.values))
        all_fixed &= drift == 0.0
    add("constant states are exact fixed points", all_fixed)

    from .dynamics import explicit_force_dt_cap

    mass_ok = True
    worst_drift = 0.0
    for kind in ModelKind:
        state = cosine_state(64)
        dt_k = min(2e-6, 0.5 * explicit_force_dt_cap(params, kind, 1.1, 1.0 / 64))
        recs = []
        integrate_fixed(state, params, kind, dt_k, 200, sink=recs.append, store_states=False)
        m0 = record_from_state(state, params, kind).mass
        drift = max(abs(r.mass - m0) / m0 for r in recs)
        worst_drift = max(worst_drift, drift)
        mass_ok &= drift <= 1e-12
    add("mass conservation", mass_ok, f"worst drift {worst_drift:.2e}")

    state = cosine_state(64)
    records = [record_from_state(state, params, ModelKind.STRONG_SLIP, dt=0.0)]
    control = StepControl(dt=1e-5, dt_max=5e-5)
    advance(state, params, ModelKind.STRONG_SLIP, 0.02, control, sink=records.append)
    energy_rep = check_energy_balance(records, tol=control.energy_guard_tol)
    add("energy monotone on cosine run", energy_rep.verdict,
        f"worst {energy_rep.worst_violation:.2e}")
    entropy_rep = check_entropy_balance(records, params)
    add("entropy inequality on cosine run", entropy_rep.verdict,
        f"worst {entropy_rep.worst_violation:.2e}")
    coercivity_rep = check_coercivity(records, params)
    add("coercivity at every stored state", coercivity_rep.verdict,
        f"worst {coercivity_rep.worst_violation:.2e}")

    beta = 0.5
    scaled = reference_integrate(
        cosine_state(32), PhysParams(beta=beta), ModelKind.SCALED_STRONG_SLIP, 5e-3, 1e-5
    )
    plain = reference_integrate(
        cosine_state(32), PhysParams(beta=beta), ModelKind.STRONG_SLIP, 5e-3 / beta, 1e-5 / beta
    )
    d_h = np.max(np.abs(scaled.h.values - plain.h.values))
    d_u = np.max(np.abs(scaled.u.values - plain.u.values / beta))
    add("scaling equivalence", d_h <= 1e-12 and d_u <= 1e-12, f"dh {d_h:.2e}, du {d_u:.2e}")

    return checks


def cmd_verify() -> int:
    """Run the built-in property battery, print the table, exit 0 iff all pass."""
    checks = _verify_battery()
    width = max(len(name) for name, _, _ in checks)
    all_ok = True
    for name, ok, detail in checks:
        mark = "pass" if ok else "FAIL"
        all_ok &= ok
        print(f"{name:<{width}}  {mark}  {detail}")
    if not all_ok:
        print("error: verify")
        print("one or more battery checks failed")
        return 1
    print(f"{len(checks)} checks passed")
    return 0


def cmd_resume(snapshot_path, t_end: float, out_override: Optional[str] = None) -> int:
    """Resume a snapshot and advance it to t_end with default control."""
    try:
        state, model, params = read_snapshot(snapshot_path)
    except SnapshotError as exc:
        return _fail("snapshot", str(exc))
    if t_end < state.t:
        return _fail("config", f"--t-end {t_end} is before the snapshot time {state.t}")
    config = Config(model=model, params=params, grid_n=state.grid.n, t_end=t_end)
    outdir = _resolve_outdir(config.output.directory, out_override)

    records = [record_from_state(state, params, model, dt=0.0)]
    try:
        final = advance(state, params, model, t_end, config.control, sink=records.append)
    except PositivityLossError as exc:
        return _fail("positivity-loss", str(exc))
    except NonConvergenceError as exc:
        return _fail("non-convergence", str(exc))
    except (SolverError, DivergenceError) as exc:
        return _fail("solver", str(exc))
    write_diagnostics_csv(outdir / "diagnostics.csv", records, config.output.diagnostics_every)
    write_snapshot(outdir / "final.snapshot", final, model, params)
    print(f"resumed run finished at t = {final.t!r}; outputs in {outdir}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="slipfilm", description="1D dewetting film solvers with slippage"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="advance a configured run and verify inequalities")
    run_p.add_argument("config", help="path to a config file")
    limits_p = sub.add_parser("limits", help="run the configured parameter-limit study")
    limits_p.add_argument("config", help="path to a config file with a [study] section")
    sub.add_parser("verify", help="run the built-in property battery")
    resume_p = sub.add_parser("resume", help="continue a run from a snapshot")
    resume_p.add_argument("snapshot", help="path to a snapshot file")
    resume_p.add_argument("--t-end", type=float, required=True, help="new final time")
    for p in (run_p, limits_p, resume_p):
        p.add_argument("--output-dir", default=None, help="override the output directory")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(load_config(args.config), args.output_dir)
        if args.command == "limits":
            return cmd_limits(load_config(args.config), args.output_dir)
        if args.command == "verify":
            return cmd_verify()
        return cmd_resume(args.snapshot, args.t_end, args.output_dir)
    except ConfigError as exc:
        print("error: config")
        print(str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
