"""Tour of the constitutive laws.

The film pressure combines a long-range attraction with a short-range
repulsion, so thin regions below h = alpha get pushed back up.  This
script tabulates the pressure, its potential and the integrated pressure,
and verifies the two analytic bounds the solvers rely on.
"""

import numpy as np

from slipfilm import (
    pi_prime_lower_bound,
    pressure_pi,
    pressure_pi1,
    pressure_pi_prime,
    u_pot,
    u_pot_floor,
)

alpha = 0.1
print(f"repulsion strength alpha = {alpha}\n")

print(f"{'h':>8} {'pressure':>12} {'potential':>12} {'integrated':>12}")
for h in (0.05, alpha, 0.2, 0.5, 1.0, 2.0, 10.0):
    print(
        f"{h:8.2f} {pressure_pi(h, alpha):12.4f} "
        f"{u_pot(h, alpha):12.4f} {pressure_pi1(h, alpha):12.4f}"
    )

print("\nthe pressure changes sign exactly at h = alpha:")
print(f"  pressure({alpha}) = {pressure_pi(alpha, alpha):.2e}")

floor = u_pot_floor(alpha)
grid = np.linspace(1e-3, 50.0, 1_000_000)
vals = u_pot(grid, alpha)
print(f"\npotential floor -1/(6 alpha^2) = {floor:.6f}")
print(f"  scanned minimum  {vals.min():.6f} at h = {grid[np.argmin(vals)]:.4f}")

gap = pressure_pi_prime(grid, alpha) - pi_prime_lower_bound(grid, alpha)
print(f"\npressure-derivative bound: smallest gap {gap.min():.3e} "
      f"at h = {grid[np.argmin(gap)]:.4f} (expected near {5 * alpha / 6:.4f})")
