"""Rules of the three chip games: legal actions, transitions and payoffs.

Every other module consumes these rules; none of them encodes game logic of
its own.  The lowercase kernels (``toss_reward``, ``crush_reward``,
``crush_next``, ``legal_mask``, ``terminal_or_nan``) are plain arithmetic on
integer codes so that they work unchanged on Python scalars, ``Fraction``,
numpy arrays and inside numba-compiled code.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

__all__ = [
    "GameVariant",
    "GameState",
    "TossLaw",
    "Action",
    "Transition",
    "check_q",
    "check_budget",
    "legal_actions",
    "toss_transitions",
    "crush_transition",
    "abandon_transition",
    "terminal_value",
]


class GameVariant(enum.IntEnum):
    JM1 = 1
    JM2 = 2
    JM3 = 3

    @classmethod
    def parse(cls, value) -> "GameVariant":
        if isinstance(value, cls):
            return value
        try:
            return cls[str(value).upper()]
        except KeyError:
            raise ValueError(f"unknown game {value!r}; expected one of jm1, jm2, jm3") from None

    def __str__(self) -> str:
        return self.name.lower()


class Action(enum.IntEnum):
    # the integer codes are what policy arrays store; -1 means "no entry"
    TOSS = 0
    CRUSH = 1
    ABANDON = 2

    def __str__(self) -> str:
        return self.name.lower()


TOSS_BIT = 1 << Action.TOSS
CRUSH_BIT = 1 << Action.CRUSH
ABANDON_BIT = 1 << Action.ABANDON


class GameState(NamedTuple):
    a: int
    h: int

    @classmethod
    def of(cls, a, h=None) -> "GameState":
        if h is None:
            a, h = a
        a, h = int(a), int(h)
        if a < 0 or h < 0:
            raise ValueError(f"chip counts must be nonnegative, got (a={a}, h={h})")
        return cls(a, h)


def check_q(q) -> float:
    """Return ``q`` as a float, or raise if it is outside [0, 0.5)."""
    q = float(q)
    if not 0.0 <= q < 0.5:
        raise ValueError(f"q must lie in [0, 0.5), got {q!r}")
    return q


def check_budget(n, cap: int, name: str = "n") -> int:
    n = int(n)
    if n < 0:
        raise ValueError(f"{name} must be nonnegative, got {n}")
    if n > cap:
        raise ValueError(f"{name}={n} exceeds the cap of {cap}")
    return n


@dataclass(frozen=True)
class TossLaw:
    q: float

    def __post_init__(self):
        object.__setattr__(self, "q", check_q(self.q))

    @property
    def p(self) -> float:
        return 1 - self.q


@dataclass(frozen=True)
class Transition:
    next_state: Optional[GameState]
    reward: float
    probability: float
    terminal: bool = False


# -- kernels ---------------------------------------------------------------


def legal_mask(variant, a, h, n):
    """Bit set of legal actions (see ``TOSS_BIT`` and friends)."""
    if n <= 0:
        return 0
    if variant == GameVariant.JM1:
        if a > h:
            return 0
        return TOSS_BIT | ABANDON_BIT
    if a > h:
        return TOSS_BIT | CRUSH_BIT
    return TOSS_BIT | ABANDON_BIT


def terminal_or_nan(variant, a, h, n):
    if n <= 0:
        return 0.0
    if variant == GameVariant.JM1 and a > h:
        return float(a)
    return math.nan


def toss_reward(variant, tails, q):
    if variant == GameVariant.JM1:
        return -q
    # charged only when the bank gains the chip
    return q * (tails - 1)


def crush_reward(variant, h, q):
    if variant == GameVariant.JM2:
        return (h + 1) - q
    if variant == GameVariant.JM3:
        return (1 - q) * (h + 1)
    raise ValueError("JM1 has no Crush action")


def crush_next(a, h):
    return a - h - 1


def abandon_ends_game(variant):
    return variant == GameVariant.JM1


# -- public operations -----------------------------------------------------


def _law(law) -> TossLaw:
    return law if isinstance(law, TossLaw) else TossLaw(law)


def legal_actions(variant: GameVariant, state: GameState, n: int) -> frozenset:
    mask = legal_mask(variant, state[0], state[1], n)
    return frozenset(act for act in Action if mask & (1 << act))


def toss_transitions(variant: GameVariant, state: GameState, law) -> tuple[Transition, Transition]:
    """Return the (Tails, Heads) branches of a toss."""
    q = _law(law).q
    a, h = GameState.of(state)
    tails = Transition(GameState(a + 1, h), float(toss_reward(variant, True, q)), q)
    heads = Transition(GameState(a, h + 1), float(toss_reward(variant, False, q)), 1 - q)
    return tails, heads


def crush_transition(variant: GameVariant, state: GameState, law) -> Transition:
    q = _law(law).q
    a, h = GameState.of(state)
    if variant == GameVariant.JM1:
        raise ValueError("JM1 has no Crush action: a > h is a terminal payout state")
    if a <= h:
        raise ValueError(f"Crush needs a > h, got (a={a}, h={h})")
    return Transition(GameState(crush_next(a, h), 0), crush_reward(variant, h, q), 1.0)


def abandon_transition(variant: GameVariant, state: GameState) -> Transition:
    a, h = GameState.of(state)
    if a > h:
        raise ValueError(f"Abandon is not offered when a > h, got (a={a}, h={h})")
    if abandon_ends_game(variant):
        return Transition(None, 0.0, 1.0, terminal=True)
    return Transition(GameState(0, 0), 0.0, 1.0)


def terminal_value(variant: GameVariant, state: GameState, n: int) -> Optional[float]:
    """Value fixed by the rules alone, or None when the state must be expanded."""
    value = terminal_or_nan(variant, state[0], state[1], n)
    return None if math.isnan(value) else value
