"""Finite-horizon dynamic programming for the chip games.

``solve`` fills the table of maximal expected net incomes layer by layer over
the remaining budget ``n``.  Every action spends one unit of budget, so layer
``n`` only reads layer ``n - 1``.  Layer ``n`` holds the triangle of states
with ``a + h <= a0 + h0 + (n_max - n)``: tossing is the only way to add chips,
so nothing outside that triangle can be visited from the start state.

Each layer is stored as a square float array with NaN outside the triangle.
"""
from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator, Optional

import numpy as np

from . import game
from .game import Action, GameState, GameVariant

log = logging.getLogger(__name__)

N_CAP = 4096
N_DEFAULT = 2016
TIE_TOL = 1e-12
# above this many bytes, full tables are not retained unless asked for
KEEP_LAYERS_BYTES = 256 * 2**20

NO_ACTION = -1


class PolicyError(KeyError):
    """A policy has no entry for a state it reaches."""

    def __str__(self):
        return str(self.args[0]) if self.args else "missing policy entry"


def _layer_bound(start: GameState, n_max: int, n: int) -> int:
    return start.a + start.h + (n_max - n)


def _table_bytes(start: GameState, n_max: int) -> int:
    s0 = start.a + start.h
    return sum((s0 + k + 1) ** 2 for k in range(n_max + 1)) * 8


def _backups(variant: GameVariant, q: float, prev: np.ndarray, K: int) -> dict:
    """Backup of every action on a layer of bound ``K`` from the layer below.

    Returns a dict ``Action -> array`` (NaN where the action is illegal) plus
    the key ``"terminal"`` for JM1 payout states.  Expressions keep the
    textual order of the recurrences so results are reproducible bit for bit.
    """
    idx = np.arange(K + 1)
    a = idx[:, None]
    h = idx[None, :]
    ahead = a > h
    up = prev[1 : K + 2, : K + 1]  # V(a+1, h)
    right = prev[: K + 1, 1 : K + 2]  # V(a, h+1)
    out = {}
    if variant == GameVariant.JM1:
        toss = q * up + (1 - q) * right - q
        out[Action.TOSS] = np.where(ahead, np.nan, toss)
        out[Action.ABANDON] = np.where(ahead, np.nan, 0.0)
        out["terminal"] = np.where(ahead, a.astype(float) + 0 * h, np.nan)
    else:
        toss = q * up + (1 - q) * (right - q)
        out[Action.TOSS] = toss
        below = np.maximum(game.crush_next(a, h), 0)
        crush = game.crush_reward(variant, h, q) + prev[below, 0]
        out[Action.CRUSH] = np.where(ahead, crush, np.nan)
        out[Action.ABANDON] = np.where(ahead, np.nan, prev[0, 0])
    tri = (a + h) <= K
    for key, arr in out.items():
        out[key] = np.where(tri, arr, np.nan)
    return out


def _max_backup(b: dict) -> np.ndarray:
    best = b[Action.TOSS]
    for act in (Action.CRUSH, Action.ABANDON):
        if act in b:
            best = np.fmax(b[act], best)
    if "terminal" in b:
        best = np.where(np.isnan(b["terminal"]), best, b["terminal"])
    return best


def _zero_layer(K: int) -> np.ndarray:
    idx = np.arange(K + 1)
    return np.where(idx[:, None] + idx[None, :] <= K, 0.0, np.nan)


def _prepare(variant, q, n_max, start):
    variant = GameVariant.parse(variant)
    q = game.check_q(q)
    n_max = game.check_budget(n_max, N_CAP, "n_max")
    start = GameState.of(start)
    return variant, q, n_max, start


@dataclass(frozen=True, eq=False)
class ValueTable(Mapping):
    """Maximal expected net income ``E(a, h, n)`` for one (game, q, start).

    Behaves as a read-only mapping ``(a, h, n) -> float``.  When the table was
    solved with ``keep_layers=False`` only ``horizon_values`` (the value of
    the start state for every budget) is available.
    """

    variant: GameVariant
    q: float
    n_max: int
    start: GameState
    horizon_values: np.ndarray = field(repr=False)
    layers: Optional[list] = field(default=None, repr=False)

    def bound(self, n: int) -> int:
        return _layer_bound(self.start, self.n_max, n)

    @property
    def complete(self) -> bool:
        return self.layers is not None

    def layer(self, n: int) -> np.ndarray:
        if self.layers is None:
            raise ValueError("table was solved with keep_layers=False")
        return self.layers[n]

    def __getitem__(self, key) -> float:
        a, h, n = key
        if (a, h) == self.start and 0 <= n <= self.n_max:
            return float(self.horizon_values[n])
        if not (0 <= n <= self.n_max and a >= 0 and h >= 0 and a + h <= self.bound(n)):
            raise KeyError(key)
        return float(self.layer(n)[a, h])

    def __iter__(self) -> Iterator[tuple]:
        for n in range(self.n_max + 1):
            K = self.bound(n)
            for s in range(K + 1):
                for a in range(s + 1):
                    yield (a, s - a, n)

    def __len__(self) -> int:
        return sum((self.bound(n) + 1) * (self.bound(n) + 2) // 2 for n in range(self.n_max + 1))

    def value(self, n: Optional[int] = None) -> float:
        """Value of the start state with budget ``n`` (default ``n_max``)."""
        return float(self.horizon_values[self.n_max if n is None else n])


def solve(variant, q, n_max, start=(0, 0), keep_layers: Optional[bool] = None) -> ValueTable:
    """Solve one game from ``start`` for every budget up to ``n_max``.

    ``keep_layers=None`` keeps the full table when it fits in
    ``KEEP_LAYERS_BYTES``; pass ``False`` when only the start-state values are
    needed (threshold searches at large horizons).
    """
    variant, q, n_max, start = _prepare(variant, q, n_max, start)
    if keep_layers is None:
        keep_layers = _table_bytes(start, n_max) <= KEEP_LAYERS_BYTES

    K = _layer_bound(start, n_max, 0)
    layer = _zero_layer(K)
    layers = [layer] if keep_layers else None
    horizon = np.empty(n_max + 1)
    horizon[0] = 0.0
    for n in range(1, n_max + 1):
        K -= 1
        layer = _max_backup(_backups(variant, q, layer, K))
        horizon[n] = layer[start.a, start.h]
        if keep_layers:
            layers.append(layer)
    return ValueTable(variant, q, n_max, start, horizon, layers)


@lru_cache(maxsize=256)
def _cached_value(variant, a, h, n, q):
    return solve(variant, q, n, (a, h), keep_layers=False).value()


def value(variant, a: int, h: int, n: int, q: float) -> float:
    """E(a, h, n, q) for one game."""
    variant, q, n, start = _prepare(variant, q, n, (a, h))
    return _cached_value(variant, start.a, start.h, n, q)


# -- policies ----------------------------------------------------------------


class Policy(Mapping):
    """Action to play at every non-terminal state ``(a, h, n)`` with ``n >= 1``.

    Stored as one int8 array per budget layer (``-1`` = no entry), shaped like
    the value layers of the table it came from.  Read as a mapping
    ``(a, h, n) -> Action``.
    """

    def __init__(self, variant, q, n_max, start, layers):
        self.variant = GameVariant.parse(variant)
        self.q = game.check_q(q)
        self.n_max = int(n_max)
        self.start = GameState.of(start)
        self.layers = layers

    @classmethod
    def from_function(cls, variant, q, n_max, start, choose: Callable) -> "Policy":
        """Build a policy from ``choose(a, h, n) -> Action | None``."""
        variant, q, n_max, start = _prepare(variant, q, n_max, start)
        layers = [np.full((start.a + start.h + n_max + 1,) * 2, NO_ACTION, dtype=np.int8)]
        for n in range(1, n_max + 1):
            K = _layer_bound(start, n_max, n)
            codes = np.full((K + 1, K + 1), NO_ACTION, dtype=np.int8)
            for s in range(K + 1):
                for a in range(s + 1):
                    h = s - a
                    legal = game.legal_actions(variant, (a, h), n)
                    if not legal:
                        continue
                    act = choose(a, h, n)
                    if act is None:
                        continue
                    if act not in legal:
                        raise ValueError(f"{act} is illegal at {(a, h, n)} in {variant}")
                    codes[a, h] = int(act)
            layers.append(codes)
        return cls(variant, q, n_max, start, layers)

    def bound(self, n: int) -> int:
        return _layer_bound(self.start, self.n_max, n)

    def codes_at(self, a: np.ndarray, h: np.ndarray, n: int) -> np.ndarray:
        """Vectorised lookup; ``-1`` wherever the policy has no entry."""
        a = np.asarray(a)
        h = np.asarray(h)
        out = np.full(a.shape, NO_ACTION, dtype=np.int8)
        if not 1 <= n <= self.n_max:
            return out
        inside = (a + h) <= self.bound(n)
        out[inside] = self.layers[n][a[inside], h[inside]]
        return out

    def __getitem__(self, key) -> Action:
        a, h, n = key
        if not (1 <= n <= self.n_max and a >= 0 and h >= 0 and a + h <= self.bound(n)):
            raise KeyError(key)
        code = int(self.layers[n][a, h])
        if code == NO_ACTION:
            raise KeyError(key)
        return Action(code)

    def __iter__(self):
        for n in range(1, self.n_max + 1):
            a_idx, h_idx = np.nonzero(self.layers[n] >= 0)
            for a, h in zip(a_idx.tolist(), h_idx.tolist()):
                yield (a, h, n)

    def __len__(self) -> int:
        return int(sum(np.count_nonzero(layer >= 0) for layer in self.layers))

    def __repr__(self):
        return f"Policy({self.variant}, q={self.q}, n_max={self.n_max}, start={tuple(self.start)})"


def extract_policy(table: ValueTable) -> Policy:
    """Argmax action at every state, ties broken Crush, then Abandon, then Toss."""
    if not table.complete:
        raise ValueError("extract_policy needs a table solved with keep_layers=True")
    start, n_max = table.start, table.n_max
    layers = [np.full(table.layer(0).shape, NO_ACTION, dtype=np.int8)]
    for n in range(1, n_max + 1):
        K = table.bound(n)
        b = _backups(table.variant, table.q, table.layer(n - 1), K)
        toss = b[Action.TOSS]
        codes = np.where(np.isnan(toss), NO_ACTION, int(Action.TOSS)).astype(np.int8)
        for act in (Action.ABANDON, Action.CRUSH):
            if act not in b:
                continue
            better = ~np.isnan(b[act]) & (b[act] >= toss - TIE_TOL)
            codes[better] = int(act)
        if "terminal" in b:
            codes[~np.isnan(b["terminal"])] = NO_ACTION
        layers.append(codes)
    return Policy(table.variant, table.q, n_max, start, layers)


def _missing_state(variant, policy: Policy, n: int, start: GameState):
    """Walk the states the policy reaches and return the first without an entry."""
    frontier = {tuple(start)}
    for m in range(n, 0, -1):
        nxt = set()
        for a, h in sorted(frontier):
            if game.terminal_value(variant, (a, h), m) is not None:
                continue
            try:
                act = policy[a, h, m]
            except KeyError:
                return (a, h, m)
            if act not in game.legal_actions(variant, (a, h), m):
                return (a, h, m)
            if act == Action.TOSS:
                nxt.update({(a + 1, h), (a, h + 1)})
            elif act == Action.CRUSH:
                nxt.add((game.crush_next(a, h), 0))
            elif not game.abandon_ends_game(variant):
                nxt.add((0, 0))
        frontier = nxt
    return None


def evaluate_policy(variant, policy: Policy, q, n, start=(0, 0)) -> float:
    """Expected net income of following ``policy`` for ``n`` actions from ``start``."""
    variant, q, n, start = _prepare(variant, q, n, start)
    K = _layer_bound(start, n, 0)
    layer = _zero_layer(K)
    idx = np.arange(K + 1)
    for m in range(1, n + 1):
        K -= 1
        b = _backups(variant, q, layer, K)
        aa, hh = np.broadcast_arrays(idx[: K + 1, None], idx[None, : K + 1])
        codes = policy.codes_at(aa, hh, m)
        nxt = np.full((K + 1, K + 1), np.nan)
        for act in Action:
            if act in b:
                sel = codes == act
                nxt[sel] = b[act][sel]
        if "terminal" in b:
            term = ~np.isnan(b["terminal"])
            nxt[term] = b["terminal"][term]
        layer = nxt
    result = float(layer[start.a, start.h])
    if np.isnan(result):
        missing = _missing_state(variant, policy, n, start)
        raise PolicyError(f"policy has no legal entry at reachable state (a, h, n) = {missing}")
    return result
