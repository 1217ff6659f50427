"""Config parsing, snapshots, CLI commands, determinism."""

import math

import numpy as np
import pytest

import slipfilm.interface as iface
from slipfilm import (
    ConfigError,
    ModelKind,
    PhysParams,
    SnapshotError,
    cosine_state,
    parse_config,
    read_snapshot,
    write_snapshot,
)
from slipfilm.interface import (
    cmd_limits,
    cmd_resume,
    cmd_run,
    cmd_verify,
    load_config,
    main,
)

MINIMAL = "[model]\nkind = strong_slip\n"

FAST_RUN = """
[model]
kind = strong_slip
[grid]
n = 64
[time]
t_end = 0.005
dt_max = 2e-4
[output]
directory = {out}
"""


def test_parse_defaults():
    config = parse_config(MINIMAL)
    assert config.model is ModelKind.STRONG_SLIP
    assert config.params == PhysParams(re=1.0, beta=1.0, sigma=1.0, nu=1.0, alpha=0.1)
    assert config.grid_n == 128
    assert config.initial.mean == 1.0
    assert config.initial.amplitude == 0.1
    assert config.initial.wavenumber == 1
    assert config.t_end == 0.1
    assert config.study is None
    assert parse_config("").model is ModelKind.STRONG_SLIP


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("[model]\nkind = bogus\n", "unknown model"),
        ("[initial]\namplitude = 2.0\n", "positivity"),
        ("[grid]\nm = 3\n", "unknown key"),
        ("[grid]\nn = 4\n", "n >= 8"),
        ("[bogus]\nx = 1\n", "unknown section"),
        ("key = 1\n", "outside any section"),
        ("[params]\nre = fast\n", "expects a number"),
        ("[params]\nre = 1\nre = 2\n", "duplicate"),
        ("[params]\nnu = -1\n", "nu"),
        ("[params]\neps = inf\n", "only valid for beta"),
        ("[model]\nkind = regularized\n", "eps > 0"),
        ("[study]\nvalues = 1, 2\n", "missing required key 'name'"),
        ("[study]\nname = bogus_study\n", "unknown study"),
        ("[grid]\nn\n", "expected 'key = value'"),
    ],
)
def test_parse_rejections(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(text)


def test_parse_beta_inf_and_study():
    config = parse_config(
        "[params]\nbeta = inf\n[study]\nname = beta_to_zero\nvalues = 0.1, 0.01\nn = 16\n"
    )
    assert math.isinf(config.params.beta)
    assert config.params.inv_beta == 0.0
    assert config.study.name == "beta_to_zero"
    assert config.study.values == (0.1, 0.01)
    assert config.study.n == 16


def test_snapshot_round_trip(tmp_path):
    state = cosine_state(32, mean=1.3, amplitude=0.4, wavenumber=2)
    params = PhysParams(beta=math.inf, alpha=0.37)
    path = tmp_path / "state.snapshot"
    write_snapshot(path, state, ModelKind.FREE_FILM, params)
    loaded, model, loaded_params = read_snapshot(path)
    assert model is ModelKind.FREE_FILM
    assert loaded_params == params
    assert np.array_equal(loaded.h.values, state.h.values)
    assert np.array_equal(loaded.u.values, state.u.values)
    assert loaded.t == state.t

    second = tmp_path / "copy.snapshot"
    write_snapshot(second, loaded, model, loaded_params)
    assert path.read_bytes() == second.read_bytes()


def test_snapshot_error_paths(tmp_path):
    path = tmp_path / "state.snapshot"
    write_snapshot(path, cosine_state(16), ModelKind.STRONG_SLIP, PhysParams())

    truncated = tmp_path / "trunc.snapshot"
    truncated.write_text(path.read_text()[:120])
    with pytest.raises(SnapshotError, match="truncated|missing|malformed"):
        read_snapshot(truncated)
    half = tmp_path / "half.snapshot"
    half.write_text("\n".join(path.read_text().splitlines()[:20]) + "\n")
    with pytest.raises(SnapshotError, match="truncated|missing"):
        read_snapshot(half)

    other = tmp_path / "version.snapshot"
    other.write_text(path.read_text().replace("v1", "v9", 1))
    with pytest.raises(SnapshotError, match="version"):
        read_snapshot(other)

    with pytest.raises(SnapshotError, match="not a slipfilm snapshot"):
        bad = tmp_path / "junk.snapshot"
        bad.write_text("hello\n")
        read_snapshot(bad)

    with pytest.raises(SnapshotError, match="cannot read"):
        read_snapshot(tmp_path / "absent.snapshot")


def test_cmd_run_and_determinism(tmp_path, capsys):
    cfg_a = tmp_path / "a.cfg"
    cfg_a.write_text(FAST_RUN.format(out=tmp_path / "a"))
    cfg_b = tmp_path / "b.cfg"
    cfg_b.write_text(FAST_RUN.format(out=tmp_path / "b"))
    assert cmd_run(load_config(cfg_a)) == 0
    assert cmd_run(load_config(cfg_b)) == 0
    bytes_a = (tmp_path / "a" / "diagnostics.csv").read_bytes()
    bytes_b = (tmp_path / "b" / "diagnostics.csv").read_bytes()
    assert bytes_a == bytes_b
    assert (tmp_path / "a" / "final.snapshot").exists()
    out = capsys.readouterr().out
    assert "mass drift" in out and "pass" in out


def test_cmd_run_constant_state(tmp_path, capsys):
    cfg = tmp_path / "const.cfg"
    cfg.write_text(
        f"[grid]\nn = 32\n[initial]\namplitude = 0.0\n[time]\nt_end = 0.001\n"
        f"[output]\ndirectory = {tmp_path / 'out'}\n"
    )
    assert cmd_run(load_config(cfg)) == 0
    csv_lines = (tmp_path / "out" / "diagnostics.csv").read_text().strip().split("\n")
    header = csv_lines[0].split(",")
    visc_col = header.index("diss_visc")
    assert all(float(line.split(",")[visc_col]) == 0.0 for line in csv_lines[1:])


def test_cmd_run_positivity_failure(tmp_path, capsys):
    cfg = tmp_path / "fail.cfg"
    cfg.write_text(
        f"[grid]\nn = 32\n[time]\nt_end = 0.01\nh_floor = 0.99\ndt_min = 1e-9\n"
        f"[output]\ndirectory = {tmp_path / 'out'}\n"
    )
    code = cmd_run(load_config(cfg))
    assert code != 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("error: ")
    # partial outputs retained
    assert (tmp_path / "out" / "diagnostics.csv").exists()


def test_cmd_run_rejects_study_config(tmp_path, capsys):
    cfg = parse_config("[study]\nname = re_to_zero\n")
    assert cmd_run(cfg) == 1
    assert capsys.readouterr().out.startswith("error: config")


def test_env_output_override(tmp_path, monkeypatch):
    monkeypatch.setenv(iface.OUTPUT_DIR_ENV, str(tmp_path / "env_out"))
    cfg = tmp_path / "c.cfg"
    cfg.write_text(FAST_RUN.format(out=tmp_path / "ignored"))
    assert cmd_run(load_config(cfg)) == 0
    assert (tmp_path / "env_out" / "diagnostics.csv").exists()
    assert not (tmp_path / "ignored").exists()


def test_cmd_resume_mass_continuity(tmp_path, capsys):
    cfg = tmp_path / "a.cfg"
    cfg.write_text(FAST_RUN.format(out=tmp_path / "a"))
    assert cmd_run(load_config(cfg)) == 0
    snap = tmp_path / "a" / "final.snapshot"

    state, model, params = read_snapshot(snap)
    mass_before = float(np.sum(state.h.values)) * state.grid.dx
    assert cmd_resume(snap, 0.008, str(tmp_path / "resumed")) == 0
    resumed, _, _ = read_snapshot(tmp_path / "resumed" / "final.snapshot")
    mass_after = float(np.sum(resumed.h.values)) * resumed.grid.dx
    assert resumed.t == 0.008
    assert mass_after == pytest.approx(mass_before, rel=1e-13)

    capsys.readouterr()
    assert cmd_resume(snap, 0.001) == 1  # before snapshot time
    assert capsys.readouterr().out.startswith("error: config")


def test_cmd_limits(tmp_path, capsys):
    cfg = parse_config(
        f"[grid]\nn = 16\n[output]\ndirectory = {tmp_path / 'study'}\n"
        "[study]\nname = beta_to_infinity\nvalues = 1, 100\nt_end = 0.002\n"
    )
    assert cmd_limits(cfg) == 0
    out = capsys.readouterr().out
    assert "error_Linf" in out
    csv_text = (tmp_path / "study" / "study_beta_to_infinity.csv").read_text()
    assert csv_text.startswith("param,error_L2,error_Linf,error_H1,order")
    assert (tmp_path / "study" / "study_beta_to_infinity.txt").exists()


def test_cmd_limits_single_value_warns(tmp_path, capsys):
    cfg = parse_config(
        f"[grid]\nn = 16\n[output]\ndirectory = {tmp_path / 'study1'}\n"
        "[study]\nname = re_to_zero\nvalues = 0.5\nt_end = 0.002\n"
    )
    assert cmd_limits(cfg) == 0
    assert "no order computable" in capsys.readouterr().out


def test_cmd_limits_requires_study(capsys):
    assert cmd_limits(parse_config(MINIMAL)) == 1
    assert capsys.readouterr().out.startswith("error: config")


def test_cmd_verify_passes_and_prints_battery(capsys):
    assert cmd_verify() == 0
    out = capsys.readouterr().out
    assert "summation by parts" in out
    assert "scaling equivalence" in out
    assert out.count("pass") >= 12


def test_cmd_verify_detects_tampered_constant(monkeypatch, capsys):
    tampered = lambda h, alpha: 1.5 / h**2 - (4.0 * alpha / 3.0) / h**3 + 1e-3
    monkeypatch.setattr(iface, "pressure_pi1", tampered)
    assert cmd_verify() == 1
    out = capsys.readouterr().out
    assert "FAIL" in out and out.rstrip().endswith("failed")


def test_main_dispatch(tmp_path, capsys):
    cfg = tmp_path / "a.cfg"
    cfg.write_text(FAST_RUN.format(out=tmp_path / "a"))
    assert main(["run", str(cfg)]) == 0
    assert main(["resume", str(tmp_path / "a" / "final.snapshot"), "--t-end", "0.006",
                 "--output-dir", str(tmp_path / "r")]) == 0
    capsys.readouterr()
    assert main(["run", str(tmp_path / "missing.cfg")]) == 2
    assert capsys.readouterr().out.startswith("error: config")
    with pytest.raises(SystemExit):
        main(["bogus"])
