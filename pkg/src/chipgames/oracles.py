"""Independent cross-checks for the layered solver.

Two routes that share nothing with :mod:`chipgames.solver` beyond the game
rules themselves:

* ``expectimax_oracle`` walks the full action/outcome tree with plain
  recursion, no memo and no pruning.  The tree has three children per node,
  so it is compiled with numba and capped at ``n <= 20``.
* ``exact_value`` runs the memoised top-down recursion in ``Fraction``
  arithmetic, so fairness results hold exactly rather than up to rounding.
"""
from __future__ import annotations

import math
from fractions import Fraction

from numba import njit

from . import game
from .game import GameState, GameVariant

EXPECTIMAX_CAP = 20
EXACT_CAP = 25

_legal = njit(game.legal_mask)
_terminal = njit(game.terminal_or_nan)
_toss_reward = njit(game.toss_reward)
_crush_reward = njit(game.crush_reward)
_crush_next = njit(game.crush_next)
_abandon_ends = njit(game.abandon_ends_game)

_TOSS, _CRUSH, _ABANDON = game.TOSS_BIT, game.CRUSH_BIT, game.ABANDON_BIT


@njit
def _expectimax(variant, a, h, n, q):
    fixed = _terminal(variant, a, h, n)
    if not math.isnan(fixed):
        return fixed
    legal = _legal(variant, a, h, n)
    best = -math.inf
    if legal & _TOSS:
        tails = _toss_reward(variant, True, q) + _expectimax(variant, a + 1, h, n - 1, q)
        heads = _toss_reward(variant, False, q) + _expectimax(variant, a, h + 1, n - 1, q)
        best = max(best, q * tails + (1 - q) * heads)
    if legal & _CRUSH:
        crush = _crush_reward(variant, h, q) + _expectimax(variant, _crush_next(a, h), 0, n - 1, q)
        best = max(best, crush)
    if legal & _ABANDON:
        if _abandon_ends(variant):
            best = max(best, 0.0)
        else:
            best = max(best, _expectimax(variant, 0, 0, n - 1, q))
    return best


def expectimax_oracle(variant, a: int, h: int, n: int, q: float) -> float:
    """E(a, h, n, q) by brute-force expectimax over the whole game tree."""
    variant = GameVariant.parse(variant)
    a, h = GameState.of(a, h)
    n = game.check_budget(n, EXPECTIMAX_CAP)
    q = game.check_q(q)
    return float(_expectimax(int(variant), a, h, n, q))


def as_fraction(q) -> Fraction:
    """Parse ``q`` exactly: ``Fraction``, int, ``"2/5"`` or ``"0.4"`` all work."""
    q = Fraction(q)
    if not 0 <= q < Fraction(1, 2):
        raise ValueError(f"q must lie in [0, 1/2), got {q}")
    return q


class _ExactRecursion:
    def __init__(self, variant: GameVariant, q: Fraction):
        self.variant = variant
        self.q = q
        self.memo: dict[tuple[int, int, int], Fraction] = {}

    def __call__(self, a: int, h: int, n: int) -> Fraction:
        key = (a, h, n)
        if key in self.memo:
            return self.memo[key]
        v, q = self.variant, self.q
        fixed = game.terminal_value(v, (a, h), n)
        if fixed is not None:
            result = Fraction(int(fixed))
        else:
            legal = game.legal_mask(v, a, h, n)
            candidates = []
            if legal & _TOSS:
                tails = game.toss_reward(v, True, q) + self(a + 1, h, n - 1)
                heads = game.toss_reward(v, False, q) + self(a, h + 1, n - 1)
                candidates.append(q * tails + (1 - q) * heads)
            if legal & _CRUSH:
                candidates.append(game.crush_reward(v, h, q) + self(game.crush_next(a, h), 0, n - 1))
            if legal & _ABANDON:
                candidates.append(Fraction(0) if game.abandon_ends_game(v) else self(0, 0, n - 1))
            result = max(candidates)
        self.memo[key] = result
        return result


def exact_values(variant, a: int, h: int, n: int, q) -> list[Fraction]:
    """Exact E(a, h, k, q) for every budget ``k = 0..n``, sharing one memo."""
    variant = GameVariant.parse(variant)
    a, h = GameState.of(a, h)
    n = game.check_budget(n, EXACT_CAP)
    rec = _ExactRecursion(variant, as_fraction(q))
    return [rec(a, h, k) for k in range(n + 1)]


def exact_value(variant, a: int, h: int, n: int, q) -> Fraction:
    """E(a, h, n, q) in exact rational arithmetic; ``n <= 25``."""
    return exact_values(variant, a, h, n, q)[-1]
