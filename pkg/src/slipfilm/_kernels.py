"""Explicit forward-Euler kernels for the reference integrator.

These re-express the staggered-grid stencils of :mod:`.discretization`
inline so the hot loops can be jit-compiled.  They exist only to
cross-validate the semi-implicit steppers; nothing here does an implicit
solve.  numba is optional: without it the same code runs as plain numpy.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(fn):
            return fn

        return deco


@njit(cache=True)
def velocity_rhs(h, u, dx, inertia, visc, slip, sigma, alpha, eps):
    """Rates (dh/dt, du/dt) for the velocity-based models.

    Conservative inertia form: the momentum balance is divided through by
    the node height after subtracting the transport contribution, so the
    discrete operators match the semi-implicit stepper exactly.  Requires
    inertia > 0; the quasi-static model is integrated outside this kernel.
    """
    n = h.shape[0]
    dx2 = dx * dx

    hn = np.empty(n + 1)
    hn[1:-1] = 0.5 * (h[1:] + h[:-1])
    hn[0] = h[0]
    hn[-1] = h[-1]

    lap = np.empty(n)
    lap[1:-1] = (h[2:] - 2.0 * h[1:-1] + h[:-2]) / dx2
    lap[0] = (h[1] - h[0]) / dx2
    lap[-1] = (h[-2] - h[-1]) / dx2

    p = sigma * lap - (1.0 / h**3 - alpha / h**4)

    force = np.zeros(n + 1)
    force[1:-1] = hn[1:-1] * (p[1:] - p[:-1]) / dx
    if eps > 0.0:
        l2 = np.empty(n)
        l2[1:-1] = (lap[2:] - 2.0 * lap[1:-1] + lap[:-2]) / dx2
        l2[0] = (lap[1] - lap[0]) / dx2
        l2[-1] = (lap[-2] - lap[-1]) / dx2
        l3 = np.empty(n)
        l3[1:-1] = (l2[2:] - 2.0 * l2[1:-1] + l2[:-2]) / dx2
        l3[0] = (l2[1] - l2[0]) / dx2
        l3[-1] = (l2[-2] - l2[-1]) / dx2
        force[1:-1] += eps * hn[1:-1] * (l3[1:] - l3[:-1]) / dx

    du_c = (u[1:] - u[:-1]) / dx
    w = h * du_c
    viscous = np.zeros(n + 1)
    viscous[1:-1] = visc * (w[1:] - w[:-1]) / dx

    uc = 0.5 * (u[:-1] + u[1:])
    cflux = h * uc * uc
    conv = np.zeros(n + 1)
    conv[1:-1] = (cflux[1:] - cflux[:-1]) / dx

    smooth = np.zeros(n + 1)
    if eps > 0.0:
        uxx = np.zeros(n + 1)
        uxx[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dx2
        smooth[1:-1] = (eps * eps) * (uxx[2:] - 2.0 * uxx[1:-1] + uxx[:-2]) / dx2

    flux = hn * u
    dh = -(flux[1:] - flux[:-1]) / dx

    hndot = np.empty(n + 1)
    hndot[1:-1] = 0.5 * (dh[1:] + dh[:-1])
    hndot[0] = dh[0]
    hndot[-1] = dh[-1]

    du = np.zeros(n + 1)
    du[1:-1] = (
        viscous[1:-1]
        + force[1:-1]
        - slip * u[1:-1]
        - smooth[1:-1]
        - inertia * conv[1:-1]
        - inertia * u[1:-1] * hndot[1:-1]
    ) / (inertia * hn[1:-1])
    return dh, du


@njit(cache=True)
def velocity_loop(h, u, dx, dt, nsteps, inertia, visc, slip, sigma, alpha, eps):
    """Advance (h, u) in place by nsteps explicit Euler steps.

    Returns False as soon as any value stops being finite.
    """
    for _ in range(nsteps):
        dh, du = velocity_rhs(h, u, dx, inertia, visc, slip, sigma, alpha, eps)
        h += dt * dh
        u += dt * du
        ok = True
        for i in range(h.shape[0]):
            if not np.isfinite(h[i]):
                ok = False
        for i in range(u.shape[0]):
            if not np.isfinite(u[i]):
                ok = False
        if not ok:
            return False
    return True


@njit(cache=True)
def thinfilm_rhs(h, dx, sigma, alpha, weak, b):
    """Rate dh/dt for the mobility-form fourth-order models."""
    n = h.shape[0]
    dx2 = dx * dx

    lap = np.empty(n)
    lap[1:-1] = (h[2:] - 2.0 * h[1:-1] + h[:-2]) / dx2
    lap[0] = (h[1] - h[0]) / dx2
    lap[-1] = (h[-2] - h[-1]) / dx2

    p = sigma * lap - (1.0 / h**3 - alpha / h**4)

    hn = np.empty(n + 1)
    hn[1:-1] = 0.5 * (h[1:] + h[:-1])
    hn[0] = h[0]
    hn[-1] = h[-1]
    if weak:
        mob = hn**3 + b * hn**2
    else:
        mob = hn**2

    flux = np.zeros(n + 1)
    flux[1:-1] = mob[1:-1] * (p[1:] - p[:-1]) / dx
    return -(flux[1:] - flux[:-1]) / dx


@njit(cache=True)
def thinfilm_loop(h, dx, dt, nsteps, sigma, alpha, weak, b):
    """Advance h in place by nsteps explicit Euler steps."""
    for _ in range(nsteps):
        dh = thinfilm_rhs(h, dx, sigma, alpha, weak, b)
        h += dt * dh
        ok = True
        for i in range(h.shape[0]):
            if not np.isfinite(h[i]):
                ok = False
        if not ok:
            return False
    return True
