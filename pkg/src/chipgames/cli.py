"""Command-line front end.

    chipgames value --game jm1 -a 1 -h 2 -n 75 -q 0.429056
    chipgames threshold --game jm2 --start 0,0 --nmax 150 --lo 0.30 --hi 0.35 --tol 1e-6
    chipgames sweep --game jm2 --start 0,0 -n 146 --lo 0.30 --hi 0.35 --step 0.01
    chipgames policy --game jm2 -n 10 -q 0.35 --format csv
    chipgames simulate --game jm2 -n 100 -q 0.35 --trials 100000 --seed 1
    chipgames verify --suite paper-numbers

Exit codes: 0 success, 1 verification failure, 2 bad parameters, 3 internal
consistency failure.  Options may also come from ``--config FILE`` holding
``key = value`` lines; flags given on the command line win.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from decimal import Decimal, InvalidOperation
from fractions import Fraction

from . import montecarlo, oracles, solver, threshold, verify
from .game import GameVariant

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_INCONSISTENT = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _start(text: str) -> tuple[int, int]:
    try:
        a, h = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a,h', got {text!r}") from None
    return a, h


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _decimal(text: str) -> Decimal:
    try:
        return Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _build_parser() -> tuple[argparse.ArgumentParser, dict]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--help", action="help", help="show this help message and exit")
    common.add_argument("--config", metavar="FILE", help="key = value file with option defaults")
    common.add_argument("--format", choices=("json", "csv"), help="default: csv for sweep, json otherwise")
    common.add_argument("--output", metavar="PATH", help="write here instead of standard output")

    game = argparse.ArgumentParser(add_help=False)
    game.add_argument("--game", type=GameVariant.parse, metavar="{jm1,jm2,jm3}")

    parser = argparse.ArgumentParser(prog="chipgames", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    subs = {}

    def add(name, help_text, parents=(common, game)):
        p = sub.add_parser(name, help=help_text, add_help=False, parents=list(parents))
        subs[name] = p
        return p

    p = add("value", "maximal expected net income E(a,h,n,q)")
    p.add_argument("-a", type=int, default=0)
    p.add_argument("-h", type=int, default=0)
    p.add_argument("-n", type=int)
    p.add_argument("-q", type=str)
    p.add_argument("--check", action="store_true", help="also run the expectimax and exact oracles (n <= 20)")

    p = add("policy", "optimal action at every state")
    p.add_argument("--start", type=_start, default=(0, 0))
    p.add_argument("-n", type=int)
    p.add_argument("-q", type=float)

    p = add("threshold", "bracket the critical hash rate")
    p.add_argument("--start", type=_start, default=(0, 0))
    p.add_argument("--nmax", type=int, default=threshold.N_THRESHOLD_DEFAULT)
    p.add_argument("--lo", type=float, default=0.0)
    p.add_argument("--hi", type=float, default=0.49)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--workers", type=int, default=1)

    p = add("sweep", "value of the start state over a grid of q (CSV)")
    p.add_argument("--start", type=_start, default=(0, 0))
    p.add_argument("-n", type=_int_list, help="one budget or a comma-separated list")
    p.add_argument("--lo", type=_decimal)
    p.add_argument("--hi", type=_decimal)
    p.add_argument("--step", type=_decimal)

    p = add("simulate", "Monte Carlo play of the optimal policy")
    p.add_argument("--start", type=_start, default=(0, 0))
    p.add_argument("-n", type=int)
    p.add_argument("-q", type=float)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)

    p = add("verify", "reproduce the reference numbers and invariants", parents=(common,))
    p.add_argument("--suite", choices=sorted(verify.SUITES), default="all")
    return parser, subs


def read_config(path: str) -> dict[str, str]:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            values[key.strip().lstrip("-").replace("-", "_")] = val.strip()
    return values


def parse_args(argv):
    parser, subs = _build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        cfg = read_config(known.config)
        # string defaults are run through each option's type by argparse
        for name, p in subs.items():
            dests = {a.dest for a in p._actions}
            p.set_defaults(**{k: v for k, v in cfg.items() if k in dests})
        args = parser.parse_args(argv)
        unknown = set(cfg) - {a.dest for a in subs[args.command]._actions}
        if unknown:
            raise UsageError(f"unknown config keys for {args.command}: {', '.join(sorted(unknown))}")
        return args
    return parser.parse_args(argv)


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join(("-" if len(n) == 1 else "--") + n for n in missing)
        raise UsageError(f"{args.command}: missing required option(s) {flags}")


def _emit(args, payload, rows=None, header=None):
    fmt = args.format or ("csv" if args.command == "sweep" else "json")
    if fmt == "csv" and rows is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, indent=2) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _num(x: float) -> str:
    # repr is the shortest string that round-trips the double exactly
    return repr(float(x))


def cmd_value(args) -> int:
    _need(args, "game", "n", "q")
    v = solver.value(args.game, args.a, args.h, args.n, float(args.q))
    out = {"game": str(args.game), "a": args.a, "h": args.h, "n": args.n, "q": float(args.q), "value": v}
    if args.check:
        if args.n > oracles.EXPECTIMAX_CAP:
            raise UsageError(f"--check needs n <= {oracles.EXPECTIMAX_CAP}")
        out["expectimax"] = oracles.expectimax_oracle(args.game, args.a, args.h, args.n, float(args.q))
        exact = oracles.exact_value(args.game, args.a, args.h, args.n, Fraction(args.q))
        out["exact"] = str(exact)
        out["exact_float"] = float(exact)
    row = [out["game"], args.a, args.h, args.n, _num(out["q"]), _num(v)]
    _emit(args, out, [row], ["game", "a", "h", "n", "q", "value"])
    return EXIT_OK


def cmd_policy(args) -> int:
    _need(args, "game", "n", "q")
    table = solver.solve(args.game, args.q, args.n, args.start, keep_layers=True)
    pol = solver.extract_policy(table)
    rows = [[a, h, n, str(pol[a, h, n])] for (a, h, n) in sorted(pol, key=lambda k: (-k[2], k[0], k[1]))]
    payload = {
        "game": str(args.game),
        "q": args.q,
        "n_max": args.n,
        "start": list(args.start),
        "value": table.value(),
        "choice": rows,
    }
    _emit(args, payload, rows, ["a", "h", "n", "action"])
    return EXIT_OK


def cmd_threshold(args) -> int:
    _need(args, "game")
    head = {"game": str(args.game), "start": list(args.start), "n_max": args.nmax}
    try:
        br = threshold.critical_q(args.game, args.start, args.nmax, args.lo, args.hi, args.tol, args.workers)
    except threshold.NonMonotoneError as exc:
        print(f"chipgames: inconsistent threshold search: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    if br is None:
        payload = {**head, "bracket": None}
        rows = [[head["game"], f"{args.start[0]},{args.start[1]}", args.nmax, "", "", "", ""]]
    else:
        w = br.witness_at_hi
        payload = {**head, "q_lo": br.q_lo, "q_hi": br.q_hi, "n_star": w.n_star, "value": w.value, "tol": br.tol}
        rows = [[head["game"], f"{args.start[0]},{args.start[1]}", args.nmax,
                 _num(br.q_lo), _num(br.q_hi), w.n_star, _num(w.value)]]
    _emit(args, payload, rows, ["game", "start", "n_max", "q_lo", "q_hi", "n_star", "value"])
    return EXIT_OK


def sweep_grid(lo: Decimal, hi: Decimal, step: Decimal) -> list[float]:
    if step <= 0 or hi < lo:
        return []
    count = int((hi - lo) / step) + 1
    return [float(lo + k * step) for k in range(count)]


def cmd_sweep(args) -> int:
    _need(args, "game", "n", "lo", "hi", "step")
    budgets = sorted(set(args.n))
    grid = sweep_grid(args.lo, args.hi, args.step)
    if not grid or not budgets:
        raise UsageError("sweep: empty grid (need lo <= hi, step > 0 and at least one n)")
    rows = []
    for q in grid:
        table = solver.solve(args.game, q, max(budgets), args.start, keep_layers=False)
        rows.extend([_num(q), n, _num(table.value(n))] for n in budgets)
    payload = [{"q": float(q), "n": n, "value": float(v)} for q, n, v in rows]
    _emit(args, payload, rows, ["q", "n", "value"])
    return EXIT_OK


def cmd_simulate(args) -> int:
    _need(args, "game", "n", "q")
    table = solver.solve(args.game, args.q, args.n, args.start, keep_layers=True)
    pol = solver.extract_policy(table)
    s = montecarlo.simulate(args.game, pol, args.q, args.n, args.start, args.trials, args.seed)
    payload = {"trials": s.trials, "mean": s.mean, "stderr": s.stderr, "min": s.min, "max": s.max, "seed": s.seed}
    row = [s.trials, _num(s.mean), _num(s.stderr), _num(s.min), _num(s.max), s.seed]
    _emit(args, payload, [row], list(payload))
    return EXIT_OK


def cmd_verify(args) -> int:
    failed = False
    report = []
    for res in verify.run_suite(args.suite):
        print(res.line(), flush=True)
        report.append({"check": res.name, "passed": res.passed, "detail": res.detail})
        failed |= not res.passed
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
    return EXIT_FAILED if failed else EXIT_OK


COMMANDS = {
    "value": cmd_value,
    "policy": cmd_policy,
    "threshold": cmd_threshold,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"chipgames: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
