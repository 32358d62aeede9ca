"""Seeded Monte Carlo play of a fixed policy.

Trial ``i`` draws its coin flips from Philox4x64-10 keyed by ``seed`` with the
counter starting at ``i * 2**192``, one uniform per step (Tails iff ``u < q``).
Each trial's stream depends only on ``(seed, i)``, so splitting the trials
into blocks, in any order or across workers, gives the same per-trial
outcomes.  Trials within a block are played in lockstep with numpy.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import game
from .game import Action, GameState, GameVariant
from .solver import N_CAP, Policy, PolicyError

SEED_BITS = 64


@dataclass(frozen=True)
class SimStats:
    trials: int
    mean: float
    stderr: float
    min: float
    max: float
    seed: int


def trial_uniforms(seed: int, first: int, count: int, n: int) -> np.ndarray:
    """Uniforms for trials ``first .. first+count-1``, shape ``(count, n)``."""
    out = np.empty((count, n))
    for row, i in enumerate(range(first, first + count)):
        bitgen = np.random.Philox(key=seed, counter=i << 192)
        out[row] = np.random.Generator(bitgen).random(n)
    return out


def _play_block(variant, policy, q, n, start, u) -> np.ndarray:
    count = u.shape[0]
    a = np.full(count, start.a, dtype=np.int64)
    h = np.full(count, start.h, dtype=np.int64)
    total = np.zeros(count)
    alive = np.ones(count, dtype=bool)
    stride = start.a + start.h + n + 1
    for step in range(n):
        m = n - step
        live = np.flatnonzero(alive)
        if live.size == 0:
            break
        # terminal payouts are looked up once per distinct state
        keys, inverse = np.unique(a[live] * stride + h[live], return_inverse=True)
        fixed = np.array([game.terminal_or_nan(variant, *divmod(int(k), stride), m) for k in keys])
        fixed = fixed[inverse.ravel()]
        done = ~np.isnan(fixed)
        total[live[done]] += fixed[done]
        alive[live[done]] = False
        live = live[~done]

        codes = policy.codes_at(a[live], h[live], m)
        if (codes < 0).any():
            k = live[np.argmax(codes < 0)]
            raise PolicyError(f"policy has no entry at (a, h, n) = {(int(a[k]), int(h[k]), m)}")

        tosser = live[codes == Action.TOSS]
        tails = u[tosser, step] < q
        total[tosser] += game.toss_reward(variant, tails, q)
        a[tosser] += tails
        h[tosser] += ~tails

        crusher = live[codes == Action.CRUSH]
        if crusher.size:
            total[crusher] += game.crush_reward(variant, h[crusher], q)
            a[crusher] = game.crush_next(a[crusher], h[crusher])
            h[crusher] = 0

        quitter = live[codes == Action.ABANDON]
        if game.abandon_ends_game(variant):
            alive[quitter] = False
        else:
            a[quitter] = 0
            h[quitter] = 0
    return total


def simulate(
    variant,
    policy: Policy,
    q: float,
    n: int,
    start=(0, 0),
    trials: int = 100_000,
    seed: int = 0,
    block: int = 10_000,
) -> SimStats:
    """Play ``trials`` independent games under ``policy`` and summarise net income."""
    variant = GameVariant.parse(variant)
    q = game.check_q(q)
    n = game.check_budget(n, N_CAP)
    start = GameState.of(start)
    trials = int(trials)
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    seed = int(seed)
    if not 0 <= seed < 2**SEED_BITS:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if block < 1:
        raise ValueError("block must be positive")

    totals = np.empty(trials)
    for first in range(0, trials, block):
        count = min(block, trials - first)
        u = trial_uniforms(seed, first, count, n)
        totals[first : first + count] = _play_block(variant, policy, q, n, start, u)

    lo, hi = float(totals.min()), float(totals.max())
    # numpy's sum is pairwise in a fixed order, so this is reproducible
    mean = min(max(float(np.sum(totals) / trials), lo), hi)
    stderr = float(np.std(totals, ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return SimStats(trials, mean, stderr, lo, hi, seed)
