"""Second-order generalized Riemann problem solvers for 1D hyperbolic systems.

The package is organized in layers:

* linalg: small dense kernels (solves, least squares, eigensolver);
* systems: the pluggable system contract plus concrete gas-dynamics, MHD,
  shallow-water and relaxation descriptors;
* riemann: face-local two-wave machinery with anti-diffusive corrections;
* grp: in-fan gradient recovery and time centering;
* ader: space-time predictor with implicit stiff sources;
* scheme: the one-step finite-volume driver;
* harness: configuration-driven problem runner, presets and oracles.
"""

from .linalg import (
    HyperbolicityError,
    LeastSquaresReport,
    SingularMatrixError,
    eigen_general,
    least_squares,
    linear_solve,
    mat_vec,
)
from .systems.base import (
    AdmissibilityError,
    EigenField,
    SystemDescriptor,
    char_matrix,
    check_jacobian,
    eigensystem,
)
from .riemann import (
    FixedPointError,
    HllResolution,
    WaveSpeedPair,
    btilde,
    delta_weight,
    flattener,
    hll_flux,
    hll_fluctuations,
    hll_state_conservative,
    hll_state_noncons,
    hlli_correction,
    wave_speed_estimates,
)
from .grp import (
    GrpFaceInput,
    GrpFaceSolution,
    evolve_state,
    grp_flux_conservative,
    grp_fluctuations,
    grp_gradient_conservative,
    grp_gradient_noncons,
)
from .ader import AderState, PicardError, ader_predict, cell_face_trace, fan_evaluate
from .scheme import (
    CellGrid,
    RunSummary,
    SolverOptions,
    StepReport,
    compute_dt,
    make_grid,
    mc_reconstruct,
    run_to_time,
    step_flux_form,
    step_flux_form_stiff,
    step_fluctuation_form,
    step_fluctuation_form_stiff,
)

__version__ = "0.1.0"
