"""Staggered uniform grid on (0,1) and mimetic difference operators.

Heights live at cell centers, velocities at nodes.  All operators use
mirror (even-extension) ghost cells for center fields, which realises a
zero normal derivative for every even derivative and forces every odd
derivative to vanish at the endpoints.  Divergence and gradient are exact
summation-by-parts adjoints for node fields that vanish on the boundary,
so flux-form updates conserve mass by telescoping.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LocationError",
    "CENTERS",
    "NODES",
    "Grid",
    "Field",
    "State",
    "grad_center_to_node",
    "div_node_to_center",
    "laplacian_neumann",
    "interp_center_to_node",
    "high_derivative",
]

CENTERS = "centers"
NODES = "nodes"


class LocationError(ValueError):
    """Raised when a field is on the wrong grid location for an operator."""


@dataclass(frozen=True)
class Grid:
    """Uniform staggered grid on (0,1): n cells, n+1 nodes."""

    n: int
    dx: float = field(init=False)
    centers: np.ndarray = field(init=False, repr=False)
    nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"grid needs at least 2 cells, got n={self.n}")
        object.__setattr__(self, "n", int(self.n))
        dx = 1.0 / self.n
        nodes = np.linspace(0.0, 1.0, self.n + 1)
        centers = 0.5 * (nodes[:-1] + nodes[1:])
        nodes.setflags(write=False)
        centers.setflags(write=False)
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "nodes", nodes)


@dataclass(frozen=True)
class Field:
    """Immutable 1D array tagged with its grid location."""

    values: np.ndarray
    location: str
    grid: Grid

    def __post_init__(self):
        if self.location not in (CENTERS, NODES):
            raise LocationError(f"unknown location {self.location!r}")
        vals = np.array(self.values, dtype=float, copy=True)
        expected = self.grid.n if self.location == CENTERS else self.grid.n + 1
        if vals.shape != (expected,):
            raise LocationError(
                f"{self.location} field on n={self.grid.n} grid needs length "
                f"{expected}, got shape {vals.shape}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class State:
    """Film height at centers, velocity at nodes, current time.

    The height must be strictly positive and the velocity must vanish
    exactly at both boundary nodes.
    """

    h: Field
    u: Field
    t: float = 0.0

    def __post_init__(self):
        if self.h.location != CENTERS:
            raise LocationError("state height must live at cell centers")
        if self.u.location != NODES:
            raise LocationError("state velocity must live at nodes")
        if self.h.grid.n != self.u.grid.n:
            raise LocationError("height and velocity grids disagree")
        if not np.all(self.h.values > 0.0):
            raise ValueError(f"state height must be positive, min {self.h.values.min()}")
        if self.u.values[0] != 0.0 or self.u.values[-1] != 0.0:
            raise ValueError("boundary velocity nodes must be exactly zero")

    @property
    def grid(self) -> Grid:
        return self.h.grid


def make_state(n: int, h_values, u_values=None, t: float = 0.0) -> State:
    """Assemble a State from raw arrays on a fresh n-cell grid."""
    grid = Grid(n)
    if u_values is None:
        u_values = np.zeros(n + 1)
    return State(Field(h_values, CENTERS, grid), Field(u_values, NODES, grid), t)


# Raw-array kernels.  The Field wrappers below and the time steppers both
# build on these; keeping them separate avoids per-call Field construction
# in inner loops.

def grad_values(f: np.ndarray, dx: float) -> np.ndarray:
    """Centers -> nodes first derivative; mirror ghosts zero the endpoints."""
    out = np.zeros(f.shape[0] + 1)
    out[1:-1] = (f[1:] - f[:-1]) / dx
    return out


def div_values(F: np.ndarray, dx: float) -> np.ndarray:
    """Nodes -> centers conservative divergence."""
    return (F[1:] - F[:-1]) / dx


def lap_values(f: np.ndarray, dx: float) -> np.ndarray:
    """Centers -> centers second derivative with mirror ghost cells."""
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (dx * dx)
    out[0] = (f[1] - f[0]) / (dx * dx)
    out[-1] = (f[-2] - f[-1]) / (dx * dx)
    return out


def interp_values(f: np.ndarray) -> np.ndarray:
    """Centers -> nodes arithmetic mean; boundary nodes copy the edge cell."""
    out = np.empty(f.shape[0] + 1)
    out[1:-1] = 0.5 * (f[1:] + f[:-1])
    out[0] = f[0]
    out[-1] = f[-1]
    return out


def interp_node_values(F: np.ndarray) -> np.ndarray:
    """Nodes -> centers arithmetic mean."""
    return 0.5 * (F[:-1] + F[1:])


def _require(f: Field, location: str, op: str):
    if f.location != location:
        raise LocationError(f"{op} expects a {location} field, got {f.location}")


def grad_center_to_node(f: Field) -> Field:
    """First derivative of a center field, landing on nodes.

    Interior node i receives (f[i] - f[i-1])/dx; the boundary nodes are
    exactly zero, which encodes the zero-slope height condition through a
    mirror ghost cell.
    """
    _require(f, CENTERS, "grad_center_to_node")
    return Field(grad_values(f.values, f.grid.dx), NODES, f.grid)


def div_node_to_center(F: Field) -> Field:
    """Conservative divergence of a node flux, landing on centers.

    Cell sums of the result telescope to the boundary flux difference, so
    any flux vanishing at the boundary conserves the cell integral exactly.
    """
    _require(F, NODES, "div_node_to_center")
    return Field(div_values(F.values, F.grid.dx), CENTERS, F.grid)


def laplacian_neumann(f: Field) -> Field:
    """Three-point second derivative with mirror ghost cells.

    Identical to div_node_to_center(grad_center_to_node(f)); symmetric with
    respect to the cell inner product.
    """
    _require(f, CENTERS, "laplacian_neumann")
    return Field(lap_values(f.values, f.grid.dx), CENTERS, f.grid)


def interp_center_to_node(f: Field) -> Field:
    """Average a center field onto nodes; min/max bounds are preserved."""
    _require(f, CENTERS, "interp_center_to_node")
    return Field(interp_values(f.values), NODES, f.grid)


def high_derivative(f: Field, order: int) -> Field:
    """Third or fifth derivative of a center field, landing on nodes.

    Built by composing the mirror-ghost laplacian with the gradient, so the
    result vanishes identically at the boundary nodes: odd derivatives of
    the even extension are zero there by construction.
    """
    _require(f, CENTERS, "high_derivative")
    if order not in (3, 5):
        raise ValueError(f"high_derivative supports order 3 or 5, got {order}")
    dx = f.grid.dx
    vals = lap_values(f.values, dx)
    if order == 5:
        vals = lap_values(vals, dx)
    return Field(grad_values(vals, dx), NODES, f.grid)
