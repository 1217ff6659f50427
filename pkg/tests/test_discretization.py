"""Staggered grid operators: stencils, orders, summation by parts, symmetry."""

import numpy as np
import pytest

from slipfilm import (
    CENTERS,
    NODES,
    Field,
    Grid,
    LocationError,
    div_node_to_center,
    grad_center_to_node,
    high_derivative,
    interp_center_to_node,
    laplacian_neumann,
    make_state,
)


def center_field(n, fn):
    grid = Grid(n)
    return Field(fn(grid.centers), CENTERS, grid)


def observed_order(op, exact, location, ns=(32, 64, 128, 256)):
    errs = []
    for n in ns:
        grid = Grid(n)
        f = Field(np.cos(np.pi * grid.centers), CENTERS, grid)
        got = op(f)
        x = grid.nodes if location == NODES else grid.centers
        errs.append(np.max(np.abs(got.values - exact(x))))
    return [np.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]


def test_grid_basics():
    grid = Grid(128)
    assert grid.dx * grid.n == 1.0
    assert grid.centers.shape == (128,) and grid.nodes.shape == (129,)
    assert grid.nodes[0] == 0.0 and grid.nodes[-1] == 1.0
    with pytest.raises(ValueError):
        Grid(1)


def test_field_validation_and_immutability():
    grid = Grid(16)
    f = Field(np.ones(16), CENTERS, grid)
    with pytest.raises(ValueError):
        f.values[0] = 2.0
    with pytest.raises(LocationError):
        Field(np.ones(17), CENTERS, grid)
    with pytest.raises(LocationError):
        Field(np.ones(16), NODES, grid)
    with pytest.raises(LocationError):
        Field(np.ones(16), "faces", grid)


def test_state_validation():
    state = make_state(16, np.ones(16))
    assert state.t == 0.0 and np.all(state.u.values == 0.0)
    with pytest.raises(ValueError, match="positive"):
        make_state(16, np.linspace(-0.1, 1.0, 16))
    u_bad = np.ones(17)
    with pytest.raises(ValueError, match="boundary"):
        make_state(16, np.ones(16), u_bad)


def test_grad_stencil_and_constants():
    grid = Grid(2)
    f = Field(np.array([0.0, 1.0]), CENTERS, grid)
    np.testing.assert_array_equal(
        grad_center_to_node(f).values, [0.0, 1.0 / grid.dx, 0.0]
    )
    const = center_field(32, lambda x: np.full_like(x, 3.7))
    assert np.all(grad_center_to_node(const).values == 0.0)


def test_grad_convergence_and_boundary_zeros():
    orders = observed_order(
        grad_center_to_node, lambda x: -np.pi * np.sin(np.pi * x), NODES
    )
    assert min(orders) >= 1.9
    f = center_field(64, lambda x: np.exp(x))
    g = grad_center_to_node(f).values
    assert g[0] == 0.0 and g[-1] == 0.0


def test_div_telescopes_and_converges():
    grid = Grid(64)
    rng = np.random.default_rng(7)
    F_vals = rng.normal(size=65)
    F_vals[0] = F_vals[-1] = 0.0
    F = Field(F_vals, NODES, grid)
    total = np.sum(div_node_to_center(F).values) * grid.dx
    assert abs(total) < 1e-14

    errs = []
    for n in (32, 64, 128, 256):
        g = Grid(n)
        F = Field(np.sin(np.pi * g.nodes), NODES, g)
        got = div_node_to_center(F).values
        errs.append(np.max(np.abs(got - np.pi * np.cos(np.pi * g.centers))))
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(3)]
    assert min(orders) >= 1.9

    const = Field(np.full(65, 2.0), NODES, grid)
    assert np.all(div_node_to_center(const).values == 0.0)


def test_laplacian_matches_composition_and_is_symmetric():
    grid = Grid(48)
    rng = np.random.default_rng(11)
    f = Field(rng.normal(size=48), CENTERS, grid)
    composed = div_node_to_center(grad_center_to_node(f))
    # same stencil up to association order of the three-term sum
    np.testing.assert_allclose(
        laplacian_neumann(f).values, composed.values, rtol=1e-12, atol=1e-10
    )
    g = Field(rng.normal(size=48), CENTERS, grid)
    lhs = np.sum(laplacian_neumann(f).values * g.values) * grid.dx
    rhs = np.sum(f.values * laplacian_neumann(g).values) * grid.dx
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    orders = observed_order(
        laplacian_neumann, lambda x: -np.pi**2 * np.cos(np.pi * x), CENTERS
    )
    assert min(orders) >= 1.9


def test_interp():
    grid = Grid(16)
    const = Field(np.full(16, 0.3), CENTERS, grid)
    assert np.all(interp_center_to_node(const).values == 0.3)

    linear = Field(np.arange(16.0), CENTERS, grid)
    vals = interp_center_to_node(linear).values
    np.testing.assert_array_equal(vals[1:-1], np.arange(15.0) + 0.5)
    assert vals[0] == 0.0 and vals[-1] == 15.0

    rng = np.random.default_rng(3)
    pos = Field(rng.uniform(0.5, 2.0, size=16), CENTERS, grid)
    assert np.min(interp_center_to_node(pos).values) >= np.min(pos.values)


def test_high_derivative():
    const = center_field(32, lambda x: np.full_like(x, 1.0))
    for order in (3, 5):
        vals = high_derivative(const, order).values
        assert np.all(vals == 0.0)

    errs = []
    for n in (64, 128, 256):
        f = center_field(n, lambda x: np.cos(np.pi * x))
        got = high_derivative(f, 3).values
        exact = np.pi**3 * np.sin(np.pi * Grid(n).nodes)
        errs.append(np.max(np.abs(got - exact)))
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) >= 0.9

    f = center_field(64, lambda x: np.exp(np.sin(x)))
    for order in (3, 5):
        vals = high_derivative(f, order).values
        assert vals[0] == 0.0 and vals[-1] == 0.0
    with pytest.raises(ValueError, match="order"):
        high_derivative(f, 4)


def test_location_errors():
    grid = Grid(16)
    node_f = Field(np.zeros(17), NODES, grid)
    center_f = Field(np.zeros(16), CENTERS, grid)
    with pytest.raises(LocationError):
        grad_center_to_node(node_f)
    with pytest.raises(LocationError):
        div_node_to_center(center_f)
    with pytest.raises(LocationError):
        laplacian_neumann(node_f)
    with pytest.raises(LocationError):
        interp_center_to_node(node_f)


def test_summation_by_parts():
    rng = np.random.default_rng(23)
    for n in (16, 64, 256):
        grid = Grid(n)
        f = Field(rng.normal(size=n), CENTERS, grid)
        F_vals = rng.normal(size=n + 1)
        F_vals[0] = F_vals[-1] = 0.0
        F = Field(F_vals, NODES, grid)
        lhs = np.sum(div_node_to_center(F).values * f.values) * grid.dx
        rhs = np.sum(F.values * grad_center_to_node(f).values) * grid.dx
        assert abs(lhs + rhs) < 1e-13


def test_mirror_symmetry():
    """Even center data maps to even (laplacian) / odd (gradient) output."""
    grid = Grid(64)
    raw = np.cos(2.0 * np.pi * grid.centers) + 0.3
    f = Field(0.5 * (raw + raw[::-1]), CENTERS, grid)  # exactly even in bits
    assert np.array_equal(f.values, f.values[::-1])
    g = grad_center_to_node(f).values
    np.testing.assert_allclose(g, -g[::-1], atol=1e-14)
    lap = laplacian_neumann(f).values
    np.testing.assert_allclose(lap, lap[::-1], atol=1e-11)
    hn = interp_center_to_node(f).values
    np.testing.assert_allclose(hn, hn[::-1], atol=1e-14)
