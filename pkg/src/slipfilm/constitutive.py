"""Constitutive laws for thin-film lubrication with slippage.

Disjoining pressure, its potential and derivative, the integrated pressure
used in flux-form momentum balances, the logarithmic entropy function, and
the scalar mobilities of the single-equation slip models.  Everything here
is a pure function of strictly positive film heights; non-positive heights
are treated as a hard error because the whole solver stack presumes a
positive film.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DomainError",
    "PhysParams",
    "pressure_pi",
    "pressure_pi_prime",
    "pressure_pi1",
    "u_pot",
    "u_pot_floor",
    "pi_prime_lower_bound",
    "entropy_phi",
    "mobility",
]


class DomainError(ValueError):
    """Raised when a constitutive law is evaluated at a non-positive height."""


@dataclass(frozen=True)
class PhysParams:
    """Physical constants of the film models.

    Attributes
    ----------
    re : float
        Reynolds number, >= 0.
    beta : float
        Slip length, in (0, inf].  ``math.inf`` encodes the free-film case;
        ``inv_beta`` evaluates to 0 there.
    sigma : float
        Capillarity coefficient, >= 0.
    nu : float
        Viscosity coefficient, > 0.
    alpha : float
        Short-range repulsion strength, > 0.  Positivity is essential: the
        height lower bound degenerates as ``alpha -> 0``.
    b : float
        Weak-slip length, >= 0.  Only the weak-slip mobility uses it.
    eps : float
        Regularization strength, >= 0.  Only the regularized model uses it.
    """

    re: float = 1.0
    beta: float = 1.0
    sigma: float = 1.0
    nu: float = 1.0
    alpha: float = 0.1
    b: float = 0.0
    eps: float = 0.0

    def __post_init__(self):
        if not self.nu > 0.0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.re >= 0.0:
            raise ValueError(f"re must be nonnegative, got {self.re}")
        if not self.sigma >= 0.0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if not self.beta > 0.0:
            raise ValueError(f"beta must be positive or inf, got {self.beta}")
        if not self.b >= 0.0:
            raise ValueError(f"b must be nonnegative, got {self.b}")
        if not self.eps >= 0.0:
            raise ValueError(f"eps must be nonnegative, got {self.eps}")

    @property
    def inv_beta(self) -> float:
        """1/beta, exactly 0.0 for the free-film value beta = inf."""
        return 0.0 if math.isinf(self.beta) else 1.0 / self.beta


def _checked(h):
    """Return ``h`` as float array/scalar, rejecting non-positive values."""
    arr = np.asarray(h, dtype=float)
    if np.any(arr <= 0.0) or not np.all(np.isfinite(arr)):
        bad = float(np.min(arr)) if arr.size else float("nan")
        raise DomainError(f"height must be strictly positive, min was {bad}")
    return arr


def pressure_pi(h, alpha: float):
    """Disjoining pressure 1/h^3 - alpha/h^4.

    Changes sign at h = alpha: attractive thinning below, repulsive above.
    """
    h = _checked(h)
    return 1.0 / h**3 - alpha / h**4


def pressure_pi_prime(h, alpha: float):
    """Derivative of the disjoining pressure, -3/h^4 + 4*alpha/h^5."""
    h = _checked(h)
    return -3.0 / h**4 + 4.0 * alpha / h**5


def pressure_pi1(h, alpha: float):
    """Integrated pressure 3/(2 h^2) - 4 alpha/(3 h^3).

    Antiderivative normalised to vanish as h -> inf and chosen so that
    ``d/dh pressure_pi1(h) == h * pressure_pi_prime(h)``, the identity that
    lets h * d/dx pi(h) be written as a perfect x-derivative in weak forms.
    """
    h = _checked(h)
    return 1.5 / h**2 - (4.0 * alpha / 3.0) / h**3


def u_pot(h, alpha: float):
    """Potential of the disjoining pressure, -1/(2 h^2) + alpha/(3 h^3).

    ``pressure_pi`` is its derivative.  Bounded below by
    ``u_pot_floor(alpha)`` with equality exactly at h = alpha.
    """
    h = _checked(h)
    return -0.5 / h**2 + (alpha / 3.0) / h**3


def u_pot_floor(alpha: float) -> float:
    """Global minimum of the potential, -1/(6 alpha^2)."""
    return -1.0 / (6.0 * alpha**2)


def pi_prime_lower_bound(h, alpha: float):
    """Lower bound 2*alpha/h^5 - (6/5)^5/(2 alpha^4) for pressure_pi_prime.

    The gap closes at h = 5*alpha/6; useful as a positivity certificate for
    the fifth-order singular part of the pressure derivative.
    """
    h = _checked(h)
    return 2.0 * alpha / h**5 - (6.0 / 5.0) ** 5 / (2.0 * alpha**4)


def entropy_phi(h, nu: float):
    """Entropy function 4*nu*log(h)."""
    h = _checked(h)
    return 4.0 * nu * np.log(h)


_MOBILITY_KINDS = ("weak_slip", "intermediate_slip")


def mobility(h, kind, b: float = 0.0):
    """Scalar mobility of the single-equation models.

    weak_slip -> h^3 + b*h^2; intermediate_slip -> h^2.  The velocity-based
    systems have no scalar mobility; passing one of their kinds is an error.
    """
    tag = getattr(kind, "value", kind)
    if tag not in _MOBILITY_KINDS:
        raise ValueError(
            f"no scalar mobility for model kind {tag!r}; expected one of {_MOBILITY_KINDS}"
        )
    h = _checked(h)
    if tag == "weak_slip":
        return h**3 + b * h**2
    return h**2
