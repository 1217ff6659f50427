"""Parameter limits of the model family, run as convergence ladders.

Each study integrates the full system over a ladder of parameter values
and compares against the corresponding limit model at the same time.
The errors shrink monotonically down every ladder; this script runs the
two fast ones (slip length to infinity, Reynolds number to zero) plus the
rescaled route to the mobility-h^2 model on a reduced ladder.
"""

from slipfilm import (
    StudyConfig,
    limit_beta_to_infinity,
    limit_beta_to_zero,
    limit_re_to_zero,
)

print("slip length -> infinity: strong slip approaches the free film\n")
table = limit_beta_to_infinity(StudyConfig(values=(1.0, 10.0, 100.0, 1000.0)))
print(table.to_text())

print("\nReynolds number -> 0: strong slip approaches the quasi-static balance\n")
table = limit_re_to_zero(StudyConfig(values=(1.0, 0.3, 0.1, 0.03)))
print(table.to_text())

print("\nslip length -> 0 after rescaling: approaches the mobility-h^2 model")
print("(the reference velocity is rebuilt from the limit height profile)\n")
table = limit_beta_to_zero(StudyConfig(values=(0.1, 0.03, 0.01)))
print(table.to_text())
print("velocity errors per rung:",
      "  ".join(f"{r.extras['u_error_l2']:.3e}" for r in table.rows))
