"""Bias witnesses and critical hash-rate brackets."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from decimal import Decimal
from typing import Optional

import numpy as np

from . import game, solver
from .game import GameState, GameVariant

log = logging.getLogger(__name__)

EPS_BIAS = 1e-9
N_THRESHOLD_DEFAULT = 300
N_THRESHOLD_CAP = 2016
GRID_RESOLUTION = 1e-3


class NonMonotoneError(RuntimeError):
    """Bisection and the validation grid disagree about where the bias starts."""


@dataclass(frozen=True)
class BiasWitness:
    n_star: int
    value: float


@dataclass(frozen=True)
class ThresholdBracket:
    q_lo: float
    q_hi: float
    witness_at_hi: BiasWitness
    n_max: int
    tol: float

    @property
    def width(self) -> float:
        return self.q_hi - self.q_lo


def bias_witness(variant, start, q: float, n_max: int = N_THRESHOLD_DEFAULT) -> Optional[BiasWitness]:
    """Smallest budget at which the start state is worth more than ``EPS_BIAS``."""
    n_max = game.check_budget(n_max, N_THRESHOLD_CAP, "n_max")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    table = solver.solve(variant, q, n_max, start, keep_layers=False)
    hits = np.flatnonzero(table.horizon_values > EPS_BIAS)
    if hits.size == 0:
        return None
    n_star = int(hits[0])
    return BiasWitness(n_star, float(table.horizon_values[n_star]))


def _grid(q_lo: float, q_hi: float, step: float) -> list[float]:
    # decimal arithmetic keeps grid points free of accumulated drift
    lo, hi, st = Decimal(repr(q_lo)), Decimal(repr(q_hi)), Decimal(repr(step))
    pts = []
    k = 0
    while lo + k * st <= hi:
        pts.append(float(lo + k * st))
        k += 1
    if pts[-1] != q_hi:
        pts.append(q_hi)
    return pts


def critical_q(
    variant,
    start,
    n_max: int = N_THRESHOLD_DEFAULT,
    q_lo: float = 0.0,
    q_hi: float = 0.49,
    tol: float = 1e-6,
    workers: int = 1,
) -> Optional[ThresholdBracket]:
    """Bracket the smallest q for which a bias witness exists within ``n_max``.

    Returns None when ``q_hi`` has no witness (no threshold in range).  The
    bisection result is checked against a grid scan at resolution
    ``max(tol, 1e-3)`` because monotonicity in q is assumed, not proven.
    """
    variant = GameVariant.parse(variant)
    start = GameState.of(start)
    q_lo, q_hi = game.check_q(q_lo), game.check_q(q_hi)
    if not q_lo < q_hi:
        raise ValueError(f"need q_lo < q_hi, got [{q_lo}, {q_hi}]")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")

    def probe(q):
        return bias_witness(variant, start, q, n_max)

    if probe(q_lo) is not None:
        raise ValueError(f"q_lo={q_lo} already has a bias witness; lower it")
    w_hi = probe(q_hi)
    if w_hi is None:
        return None

    lo, hi = q_lo, q_hi
    while hi - lo > tol:
        mid = (lo + hi) / 2
        w = probe(mid)
        if w is None:
            lo = mid
        else:
            hi, w_hi = mid, w
    log.debug("bisection for %s: [%r, %r]", variant, lo, hi)

    grid = _grid(q_lo, q_hi, max(tol, GRID_RESOLUTION))
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        found = list(pool.map(lambda q: probe(q) is not None, grid))
    for q, biased in zip(grid, found):
        if (q <= lo and biased) or (q >= hi and not biased):
            raise NonMonotoneError(
                f"grid point q={q!r} is {'biased' if biased else 'fair'} "
                f"but bisection bracketed the threshold in [{lo!r}, {hi!r}]"
            )
    return ThresholdBracket(lo, hi, w_hi, n_max, tol)
