"""Optimal unambiguous discrimination of linearly independent pure states.

Computes the measurement minimizing the probability of an inconclusive
result via a native primal-dual interior-point SDP solver, certifies
optimality from necessary-and-sufficient conditions, analyzes when the
equal-probability measurement is optimal, and solves group-symmetric
state sets in closed form.
"""

from .ensemble import (
    Measurement,
    ReciprocalSet,
    StateEnsemble,
    detection_probability,
    dump_ensemble,
    gram_operators,
    inconclusive_probability,
    load_ensemble,
    measurement_from_probs,
    reciprocal_states,
)
from .epm import (
    EpmAnalysis,
    EpmOptimalityResult,
    EpmVerdict,
    compute_epm,
    epm_analysis,
    epm_certificate,
    epm_test_lp,
    epm_test_nondegenerate,
    epm_test_spectral,
    gram_power,
    priors_for_epm,
)
from .errors import LinearDependenceError, ValidationError
from .simulate import SimulationResult, outcome_probabilities, simulate
from .solver import (
    DualCertificate,
    SdpProblem,
    SolveReport,
    SolveStatus,
    SolverOptions,
    VerificationReport,
    build_sdp,
    solve,
    solve_inequality_lp,
    verify_certificate,
    weak_duality_gap,
)
from .symmetry import (
    PhaseCommutation,
    SymmetricSolution,
    SymmetrySpec,
    UnitaryGroup,
    check_commute_phase,
    cgu_reciprocal_generators,
    expand,
    gu_reciprocal_generator,
    load_symmetry_spec,
    solve_cgu,
    solve_gu,
    verify_group,
)

__version__ = "0.1.0"

__all__ = [
    "StateEnsemble",
    "ReciprocalSet",
    "Measurement",
    "load_ensemble",
    "dump_ensemble",
    "reciprocal_states",
    "gram_operators",
    "measurement_from_probs",
    "detection_probability",
    "inconclusive_probability",
    "SdpProblem",
    "SolverOptions",
    "SolveStatus",
    "SolveReport",
    "DualCertificate",
    "VerificationReport",
    "build_sdp",
    "solve",
    "verify_certificate",
    "weak_duality_gap",
    "solve_inequality_lp",
    "EpmVerdict",
    "EpmAnalysis",
    "EpmOptimalityResult",
    "epm_analysis",
    "compute_epm",
    "epm_test_nondegenerate",
    "epm_test_lp",
    "epm_test_spectral",
    "priors_for_epm",
    "epm_certificate",
    "gram_power",
    "UnitaryGroup",
    "SymmetrySpec",
    "SymmetricSolution",
    "PhaseCommutation",
    "verify_group",
    "expand",
    "gu_reciprocal_generator",
    "cgu_reciprocal_generators",
    "check_commute_phase",
    "solve_gu",
    "solve_cgu",
    "load_symmetry_spec",
    "simulate",
    "outcome_probabilities",
    "SimulationResult",
    "ValidationError",
    "LinearDependenceError",
]
