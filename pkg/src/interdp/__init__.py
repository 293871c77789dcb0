"""Exact privacy accounting for concurrently composed interactive mechanisms."""

from .adversary import AdversaryStrategy, enumerate_adversaries, priv_loss, view_dist, worst_adversary
from .bounds import (
    BoundResult,
    basic_pure,
    compare_curves,
    hybrid_delta,
    optimal_eps_approx_noninteractive,
    optimal_eps_pure,
)
from .composition import ConComp, OrderedConComp, concomp, ordered_concomp
from .errors import (
    ComputationError,
    InvariantViolation,
    LimitExceededError,
    MechanismFormatError,
    NoSolutionError,
    NotDPError,
    SupportMismatchError,
    UnboundedEpsilonError,
)
from .lp import build_system, solve_feasibility
from .mechanism import (
    FiniteMechanism,
    Limits,
    TableMechanism,
    TwoRoundParams,
    load_mechanism,
    null_extension,
    rr_approx,
    rr_pure,
    save_mechanism,
    two_round,
)
from .prob import FiniteDist, PrivacyParams, hockey_stick, least_scale
from .rr_sim import build_simulator, verify_simulation

__version__ = "0.1.0"
