"""Explicit-state model checker for coalition reachability objectives under
imperfect information, where agents are restricted to uniform memoryless
strategies.  Winning strategies are built backwards from the target states
out of conflict-free move fragments; a brute-force strategy-enumeration
oracle and two benchmark model generators are included for validation."""

from .checker import CheckResult, CheckStats, EvalCache, check, eval_ceu, evaluate
from .errors import (
    AgentNotInCoalition,
    AtlirError,
    CapExceeded,
    CoalitionMismatch,
    DisabledJointAction,
    DocumentError,
    EnumerationCapExceeded,
    FormulaError,
    FormulaSyntaxError,
    IncompleteStrategy,
    ModelError,
    PreconditionViolation,
    UnknownAgent,
    UnknownProposition,
    UnknownState,
    UnsupportedOperator,
)
from .formula import Formula, normalize, parse, to_text
from .icgs import (
    GroupAction,
    Icgs,
    Move,
    MoveSet,
    StateSet,
    ValidationIssue,
    all_moves,
    enabled_group,
    gamma_closure,
    moves_of,
    post_states,
    step,
    validate,
    with_perfect_information,
)
from .modelio import dumps, gen_cardgame, gen_castles, load, loads, save
from .moveops import (
    compatible,
    conflicting,
    filter_ceu,
    is_conflicting,
    pre_ce,
    pre_move,
    split_agent,
    split_all,
    split_max,
    split_nonempty,
)
from .oracle import (
    UniformStrategy,
    count_uniform,
    enumerate_uniform,
    oracle_eval,
    perfect_info_eval,
    strategy_sat_u,
)

__version__ = "0.1.0"
