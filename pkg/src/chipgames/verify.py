"""Reproduction and invariant checks behind ``chipgames verify``."""
from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from . import montecarlo, oracles, solver, threshold
from .game import GameVariant

ZERO_TOL = 1e-9
Q_GRID = tuple(round(0.05 * k, 2) for k in range(10))
ORACLE_Q = (0.1, 0.25, 0.35, 0.45)

# reference numbers and where they come from
PAPER_E1 = 4.050134694288943e-8  # E1(1, 2, 75, 0.429056)
PAPER_E2 = 4.4530581139179404e-8  # E2(0, 0, 146, 0.329393)
JM1_BRACKET = (0.4290, 0.4292)  # "about 42,91 %"
JM2_BRACKET = (0.329392, 0.329394)  # positive at 0.329393, never at 0.329392


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _rel_check(got: float, want: float, rtol: float) -> tuple[bool, str]:
    err = abs(got - want) / abs(want)
    return err <= rtol, f"got {got!r}, reference {want!r}, relative error {err:.2e} (tol {rtol:g})"


def check_e1_value():
    return _rel_check(solver.value(GameVariant.JM1, 1, 2, 75, 0.429056), PAPER_E1, 1e-6)


def check_e2_value():
    return _rel_check(solver.value(GameVariant.JM2, 0, 0, 146, 0.329393), PAPER_E2, 1e-6)


def _bracket_check(variant, start, lo, hi, tol, inside):
    br = threshold.critical_q(variant, start, 300, lo, hi, tol)
    if br is None:
        return False, "no threshold found in range"
    ok = inside[0] <= br.q_lo and br.q_hi <= inside[1] and br.width <= tol
    return ok, f"bracket [{br.q_lo:.8f}, {br.q_hi:.8f}] (n*={br.witness_at_hi.n_star}) within {list(inside)}"


def check_jm1_threshold():
    return _bracket_check(GameVariant.JM1, (1, 2), 0.40, 0.45, 1e-6, JM1_BRACKET)


def check_jm2_threshold():
    return _bracket_check(GameVariant.JM2, (0, 0), 0.30, 0.35, 1e-7, JM2_BRACKET)


def _origin_fair(variant, n_max):
    for q in Q_GRID:
        hv = solver.solve(variant, q, n_max, (0, 0), keep_layers=False).horizon_values
        bad = np.flatnonzero(np.abs(hv) > ZERO_TOL)
        if bad.size:
            n = int(bad[0])
            return False, f"E(0,0,{n},{q}) = {hv[n]!r}"
    return True, f"|E(0,0,n,q)| <= {ZERO_TOL:g} for n <= {n_max}, q in {list(Q_GRID)}"


def check_jm1_fair():
    return _origin_fair(GameVariant.JM1, 100)


def check_jm3_fair():
    return _origin_fair(GameVariant.JM3, 150)


def check_jm3_fair_exact():
    for q in (Fraction(1, 10), Fraction(1, 4), Fraction(2, 5)):
        for n, v in enumerate(oracles.exact_values(GameVariant.JM3, 0, 0, 20, q)):
            if v != 0:
                return False, f"exact E3(0,0,{n},{q}) = {v}"
    return True, "exact E3(0,0,n,q) == 0 for n <= 20, q in {1/10, 1/4, 2/5}"


def check_jm3_bound():
    for q in (0.1, 0.3, 0.45):
        table = solver.solve(GameVariant.JM3, q, 100, (0, 0))
        for n in range(table.n_max + 1):
            layer = table.layer(n)
            a = np.arange(layer.shape[0])[:, None]
            excess = np.where(np.isnan(layer), -np.inf, layer - ((1 - q) * a + ZERO_TOL))
            if (excess > 0).any():
                a0, h0 = np.unravel_index(np.argmax(excess), excess.shape)
                return False, f"E3({a0},{h0},{n},{q}) = {layer[a0, h0]!r} > (1-q)*a"
    return True, "E3(a,h,n) <= (1-q)*a + 1e-9 on every entry, n_max=100, q in {0.1, 0.3, 0.45}"


def check_expectimax():
    worst = 0.0
    for variant in GameVariant:
        for q in ORACLE_Q:
            for a in range(4):
                for h in range(4):
                    hv = solver.solve(variant, q, 12, (a, h), keep_layers=False).horizon_values
                    for n in range(13):
                        ref = oracles.expectimax_oracle(variant, a, h, n, q)
                        err = abs(hv[n] - ref)
                        worst = max(worst, err)
                        if err > 1e-12:
                            return False, f"{variant} ({a},{h},{n},{q}): dp {hv[n]!r} vs expectimax {ref!r}"
    return True, f"max |dp - expectimax| = {worst:.1e} (tol 1e-12), a,h <= 3, n <= 12"


def check_exact():
    worst = 0.0
    for variant in GameVariant:
        for q in ORACLE_Q:
            for a in range(4):
                for h in range(4):
                    hv = solver.solve(variant, q, 20, (a, h), keep_layers=False).horizon_values
                    exact = oracles.exact_values(variant, a, h, 20, Fraction(str(q)))
                    for n, ref in enumerate(exact):
                        err = abs(hv[n] - float(ref))
                        worst = max(worst, err)
                        if err > 1e-10:
                            return False, f"{variant} ({a},{h},{n},{q}): dp {hv[n]!r} vs exact {ref}"
    return True, f"max |dp - exact| = {worst:.1e} (tol 1e-10), a,h <= 3, n <= 20"


SIM_CASES = {GameVariant.JM1: (1, 2), GameVariant.JM2: (0, 0), GameVariant.JM3: (0, 0)}


def check_simulation(q=0.35, n=100, trials=100_000, seed=20240505):
    parts = []
    for variant, start in SIM_CASES.items():
        table = solver.solve(variant, q, n, start)
        pol = solver.extract_policy(table)
        exact = solver.evaluate_policy(variant, pol, q, n, start)
        if abs(exact - table.value()) > 1e-12:
            return False, f"{variant}: evaluate_policy {exact!r} vs value {table.value()!r}"
        stats = montecarlo.simulate(variant, pol, q, n, start, trials, seed)
        if abs(stats.mean - exact) > 4 * stats.stderr:
            return False, f"{variant}: simulated {stats.mean!r} +- {stats.stderr:.3g} vs exact {exact!r}"
        parts.append(f"{variant} {stats.mean:.4f}~{exact:.4f}")
    return True, ", ".join(parts)


SUITES: dict[str, list[tuple[str, Callable]]] = {
    "paper-numbers": [
        ("E1(1,2,75,0.429056)", check_e1_value),
        ("E2(0,0,146,0.329393)", check_e2_value),
        ("JM1 threshold about 42.91%", check_jm1_threshold),
        ("JM2 threshold about 32.94%", check_jm2_threshold),
    ],
    "fairness": [
        ("JM1(0,0) is fair", check_jm1_fair),
        ("JM3(0,0) is fair", check_jm3_fair),
        ("JM3(0,0) is fair, exact", check_jm3_fair_exact),
        ("E3(a,h,n) <= p*a", check_jm3_bound),
    ],
    "oracles": [
        ("dp == expectimax", check_expectimax),
        ("dp == exact rational", check_exact),
    ],
}
SUITES["all"] = [
    *SUITES["paper-numbers"],
    *SUITES["fairness"],
    *SUITES["oracles"],
    ("simulation ~ policy value", check_simulation),
]


def run_suite(name: str) -> Iterator[CheckResult]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; expected one of {', '.join(SUITES)}")
    for label, fn in SUITES[name]:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        yield CheckResult(label, ok, detail, time.perf_counter() - t0)
