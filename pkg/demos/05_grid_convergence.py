"""Richardson self-convergence across the model family.

Each kind is run on grids (n, 2n, 4n) with the step law dt ~ dx^2; the
error between successive grids then shrinks at the scheme's spatial
order, close to 2 for every member of the family.
"""

from slipfilm import ModelKind, PhysParams, StudyConfig, self_convergence

for kind in ModelKind:
    params = PhysParams(eps=1e-11) if kind is ModelKind.REGULARIZED else PhysParams()
    table = self_convergence(StudyConfig(values=(), n=32, t_end=0.01, params=params), kind=kind)
    order = table.rows[-1].observed_order
    errs = "  ".join(f"{r.error_linf:.3e}" for r in table.rows)
    print(f"{kind.value:<22} errors {errs}   observed order {order:.2f}")
