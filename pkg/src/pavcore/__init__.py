"""Exact tools for approval-based committee elections.

Computes PAV-family committee rules, verifies core stability under the
Hare and Droop quotas, and reproduces committee-existence arguments through
exact rational LP feasibility with independently checkable integer
infeasibility certificates.
"""

from .elections import (
    CandidateSet,
    ElectionInstance,
    EnumerationLimitError,
    Profile,
    Rational,
    RestrictedProfile,
    harmonic,
    pav_score,
    restrict_profile,
    swap_delta,
    utility,
)
from .exactlp import (
    FarkasCertificate,
    Feasible,
    Infeasible,
    LinearSystem,
    Optimal,
    Row,
    Unbounded,
    maximize,
    solve_feasibility,
    verify_farkas,
)
from .proofs import (
    DeviationShape,
    History,
    HistorySearchResult,
    HistoryVerdict,
    build_program3,
    canonical_continuations,
    check_proposition1,
    delta_formula,
    enumerate_histories,
    farkas_from_theorem1,
    history_system,
    history_verdict,
    inequality_scan,
    lemma2_suite,
    verify_lemma2_structure,
)
from .rules import (
    RuleOutcome,
    SearchConfig,
    all_local_pav,
    global_pav,
    local_pav,
    recursive_pav,
)
from .stability import (
    DeviationReport,
    Quota,
    check_special_deviations,
    deviation_support,
    find_deviation,
)

__version__ = "0.1.0"

__all__ = [
    "CandidateSet",
    "DeviationReport",
    "DeviationShape",
    "ElectionInstance",
    "EnumerationLimitError",
    "FarkasCertificate",
    "Feasible",
    "History",
    "HistorySearchResult",
    "HistoryVerdict",
    "Infeasible",
    "LinearSystem",
    "Optimal",
    "Profile",
    "Quota",
    "Rational",
    "RestrictedProfile",
    "Row",
    "RuleOutcome",
    "SearchConfig",
    "Unbounded",
    "all_local_pav",
    "build_program3",
    "canonical_continuations",
    "check_proposition1",
    "check_special_deviations",
    "delta_formula",
    "deviation_support",
    "enumerate_histories",
    "farkas_from_theorem1",
    "find_deviation",
    "global_pav",
    "harmonic",
    "history_system",
    "history_verdict",
    "inequality_scan",
    "lemma2_suite",
    "local_pav",
    "maximize",
    "pav_score",
    "recursive_pav",
    "restrict_profile",
    "solve_feasibility",
    "swap_delta",
    "utility",
    "verify_farkas",
    "verify_lemma2_structure",
]
