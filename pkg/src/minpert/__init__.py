"""Minimal perturbations to roots of parameterized polynomial systems.

``mu_F(x)`` is the distance from an anchor root ``y0`` to the nearest root
of ``F(., x) = 0``.  The package computes it together with three
linearized estimates, their duals, and a harness that checks how the
estimates approach ``mu_F`` as ``x`` tends to the anchor parameter.
"""

from .errors import (
    DimensionMismatch,
    HypothesisFailure,
    InsufficientData,
    MinPertError,
    NoConvergence,
    NoFeasiblePoint,
    ParseError,
    RankDeficient,
    UnknownBuiltin,
    ZeroMatrix,
)
from .harness import (
    SweepRow,
    SweepSpec,
    Verdict,
    check_asymptotic_equality,
    check_differential_equivalence,
    check_duality,
    check_lipschitz,
    emit_report,
    estimate_lipschitz,
    geometric_t_values,
    rows_from_json,
    run_sweep,
)
from .linalg import (
    Bracket,
    QrFactors,
    VectorNormKind,
    dual_certificate,
    dual_max_2norm,
    householder_qr,
    least_norm_solve,
    lower_bound_bracket,
    matrix_lower_bound,
    smallest_singular_value,
)
from .nonlinear import (
    MuFSolution,
    SolveTrace,
    brute_force_mu_f,
    frozen_levelset_solve,
    mu_f,
    project_to_root,
)
from .problems import AnchoredProblem, LinearizedMu, MuEstimates, duality_gap, mu1, mu2, mu3, mu_estimates
from .registry import BUILTIN_NAMES, builtin
from .system import (
    Anchor,
    HypothesisReport,
    ParameterizedSystem,
    PolyTerm,
    check_hypotheses,
    parse_problem,
    parse_system,
    random_system,
    serialize_system,
)

__version__ = "0.1.0"
