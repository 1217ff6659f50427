"""slipfilm: 1D lubrication solvers for dewetting thin films with slippage.

A small numerical laboratory for the strong-slip film system and its
limit models, built so the analytic structure is runnable: mass is
conserved exactly, the energy decreases step by step, and the entropy and
coercivity inequalities are checked along every trajectory.  Parameter
limits (slip length to zero or infinity, Reynolds number, capillarity,
and the high-order regularization) are packaged as convergence studies.
"""

from .constitutive import (
    DomainError,
    PhysParams,
    entropy_phi,
    mobility,
    pi_prime_lower_bound,
    pressure_pi,
    pressure_pi1,
    pressure_pi_prime,
    u_pot,
    u_pot_floor,
)
from .discretization import (
    CENTERS,
    NODES,
    Field,
    Grid,
    LocationError,
    State,
    div_node_to_center,
    grad_center_to_node,
    high_derivative,
    interp_center_to_node,
    laplacian_neumann,
    make_state,
)
from .dynamics import (
    DivergenceError,
    ModelKind,
    NonConvergenceError,
    PositivityLossError,
    StepControl,
    THINFILM_KINDS,
    VELOCITY_KINDS,
    advance,
    as_kind,
    integrate_fixed,
    model_coefficients,
    reference_integrate,
    step_thinfilm,
    step_velocity_models,
)
from .diagnostics import (
    DiagnosticsRecord,
    InequalityReport,
    check_coercivity,
    check_energy_balance,
    check_entropy_balance,
    energy,
    entropy_functional,
    height_gradient_identity_residual,
    positivity_report,
    record_from_state,
    record_to_csv_row,
)
from .experiments import (
    ConvergenceRow,
    ConvergenceTable,
    STUDIES,
    StateDiff,
    StudyConfig,
    compare_states,
    cosine_state,
    limit_beta_to_infinity,
    limit_beta_to_zero,
    limit_epsilon_to_zero,
    limit_re_to_zero,
    limit_sigma_to_zero,
    reconstructed_mobility_velocity,
    self_convergence,
)
from .interface import (
    Config,
    ConfigError,
    SnapshotError,
    cmd_limits,
    cmd_run,
    cmd_verify,
    main,
    parse_config,
    read_snapshot,
    write_snapshot,
)

__version__ = "0.1.0"
