"""indefbvp: positive solutions of u'' + (h+(t) - mu h-(t)) g(u) = 0, u(a)=u(b)=0.

Shooting (counting, classification, non-degeneracy certificates), limit
profiles for mu -> infinity, and pseudo-arclength branch continuation with
fold detection, plus a CLI that emits plain two-column data files.
"""

from .errors import (
    AmbiguousClassification,
    AmbiguousStructure,
    HypothesesNotVerified,
    InvalidExponent,
    MultipleSolutions,
    NewtonDiverged,
    NoSignChange,
    NonFiniteState,
    NoSolution,
    ScanTooCoarse,
    SingularJacobian,
    SolverError,
    StepSizeUnderflow,
    StepUnderflow,
)
from .nonlinearity import Nonlinearity, audit_hypotheses, make_power
from .weights import (
    SignStructure,
    WeightFamily,
    check_exactness_hypotheses,
    detect_sign_structure,
    eval_mu,
    make_weight,
    weight_from_descriptor,
)
from .ivp import LinearTrajectory, Trajectory, integrate, solve_linearized
from .shooting import (
    MoroneyCertificate,
    PositiveSolution,
    ShootingOutcome,
    ShootingProblem,
    check_symmetry,
    classify,
    find_all_solutions,
    moroney_sign_certificate,
    nondegeneracy_certificate,
    ratio_trace,
    shoot,
)
from .profiles import (
    LimitProfile,
    ProfilePiece,
    enumerate_profiles,
    profile_distance,
    solve_limit_interval,
)
from .continuation import (
    Branch,
    DiscreteSolution,
    FoldPoint,
    action,
    branch_coordinates,
    cluster_branch_events,
    detect_folds,
    make_mesh,
    newton_correct,
    residual,
    seed_from_profile,
    trace_branch,
)

__version__ = "0.1.0"
