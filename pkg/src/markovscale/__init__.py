"""markovscale: asymptotic occupation structure of singularly perturbed
Markov chains, with a numeric oracle and a stochastic-game front end."""

from .asymptotics import (
    Monomial,
    ONE,
    ZERO,
    format_exponent,
    mono_add,
    mono_div,
    mono_eval,
    mono_limit,
    mono_mul,
    monomial,
    parse_exponent,
)
from .chain_model import (
    PerturbedChain,
    RowExit,
    averaging_period,
    chain_from_entries,
    dump_chain,
    load_chain,
    row_exit,
    sub_unit_skeleton,
)
from .errors import ChainFormatError, InputError, InternalError, ResourceError
from .evaluator import (
    OccupationResult,
    absorbing_closed_form,
    critical_closed_form,
    expm,
    limit_payoff,
    occupation,
    position,
)
from .games import StochasticGame, compile_game, limit_game_payoff, load_game
from .hierarchy import (
    HierarchyLevel,
    LimitModel,
    analyze,
    build_level,
    next_threshold,
    parse_report,
    report,
)
from .oracle import (
    SweepDiagnostics,
    convergence_sweep,
    discounted_sum,
    instantiate,
    matrix_power_position,
)
from .structure import (
    ClassDecomposition,
    classify,
    entrance_law,
    invariant_measure,
    invariant_measure_via_jump,
    jump_chain,
    periodic_components,
    support_graph,
)

__version__ = "0.1.0"

__all__ = [
    "ChainFormatError",
    "ClassDecomposition",
    "HierarchyLevel",
    "InputError",
    "InternalError",
    "LimitModel",
    "Monomial",
    "OccupationResult",
    "ONE",
    "PerturbedChain",
    "ResourceError",
    "RowExit",
    "StochasticGame",
    "SweepDiagnostics",
    "ZERO",
    "absorbing_closed_form",
    "analyze",
    "averaging_period",
    "build_level",
    "chain_from_entries",
    "classify",
    "compile_game",
    "convergence_sweep",
    "critical_closed_form",
    "discounted_sum",
    "dump_chain",
    "entrance_law",
    "expm",
    "format_exponent",
    "instantiate",
    "invariant_measure",
    "invariant_measure_via_jump",
    "jump_chain",
    "limit_game_payoff",
    "limit_payoff",
    "load_chain",
    "load_game",
    "matrix_power_position",
    "mono_add",
    "mono_div",
    "mono_eval",
    "mono_limit",
    "mono_mul",
    "monomial",
    "next_threshold",
    "occupation",
    "parse_exponent",
    "parse_report",
    "periodic_components",
    "position",
    "report",
    "row_exit",
    "sub_unit_skeleton",
    "support_graph",
]
