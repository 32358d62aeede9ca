"""Solvers for the chip-based Heads-or-Tails games JM1, JM2 and JM3.

The games model a miner who keeps a private fork (player chips ``a``) against
the official chain (bank chips ``h``).  ``solve`` computes the maximal
expected net income for every budget of remaining actions, ``critical_q``
brackets the hash rate above which deviating from honest mining pays.
"""
from .game import (
    Action,
    GameState,
    GameVariant,
    TossLaw,
    Transition,
    abandon_transition,
    crush_transition,
    legal_actions,
    terminal_value,
    toss_transitions,
)
from .montecarlo import SimStats, simulate
from .oracles import exact_value, exact_values, expectimax_oracle
from .solver import Policy, PolicyError, ValueTable, evaluate_policy, extract_policy, solve, value
from .threshold import BiasWitness, NonMonotoneError, ThresholdBracket, bias_witness, critical_q

__version__ = "0.1.0"

__all__ = [
    "Action",
    "BiasWitness",
    "GameState",
    "GameVariant",
    "NonMonotoneError",
    "Policy",
    "PolicyError",
    "SimStats",
    "ThresholdBracket",
    "TossLaw",
    "Transition",
    "ValueTable",
    "abandon_transition",
    "bias_witness",
    "critical_q",
    "crush_transition",
    "evaluate_policy",
    "exact_value",
    "exact_values",
    "expectimax_oracle",
    "extract_policy",
    "legal_actions",
    "simulate",
    "solve",
    "terminal_value",
    "toss_transitions",
    "value",
]
