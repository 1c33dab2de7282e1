"""Command-line interface.

Exit codes: 0 success, 1 validation failure, 2 an equality that must hold
exactly failed (always a bug), 3 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Callable, Optional

from . import polytope
from .duals import model_sup_calibrated, solve_e1, solve_e2, solve_nature_lp
from .errors import TheoremViolation
from .generator import gap_candidate, random_instance
from .market_tree import (FIXTURE_NAMES, Instance, InstanceError, check_no_arbitrage,
                          dumps_instance, fixture, instance_to_dict, load_instance)
from .oracle import cross_check
from .primal import solve_primal
from .randomized import verify_corollary
from .rational import approx, fmt, fmt_vec

EXIT_OK, EXIT_INVALID, EXIT_THEOREM, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# report builders --------------------------------------------------------

def _primal_report(inst: Instance) -> dict:
    res = solve_primal(inst)
    return {"pi_primal": fmt(res.pi), "strategy": res.strategy.to_dict()}


def _e1_report(inst: Instance) -> dict:
    res = solve_e1(inst)
    return {"pi_e1": fmt(res.value), "h_star": fmt_vec(res.h_star)}


def _e2_report(inst: Instance) -> dict:
    res = solve_e2(inst)
    mixture = [{"c": fmt(c), "leaf_weights": fmt_vec(q.leaf_weights), "snell": fmt(v)}
               for (c, q), v in zip(res.mixture.components, res.mixture.snell_values())]
    return {"pi_e2": fmt(res.value), "mixture": mixture}


def _nature_report(inst: Instance) -> dict:
    return {"pi_nature": fmt(solve_nature_lp(inst).value)}


def _model_sup_report(inst: Instance) -> dict:
    try:
        return {"model_sup": fmt(model_sup_calibrated(inst))}
    except polytope.GuardExceeded as exc:
        return {"model_sup": None, "model_sup_error": str(exc)}


METHODS: dict[str, Callable[[Instance], dict]] = {
    "primal": _primal_report,
    "e1": _e1_report,
    "e2": _e2_report,
    "nature": _nature_report,
    "model-sup": _model_sup_report,
}


def _run_methods(inst: Instance, names: list[str], jobs: int) -> dict:
    if jobs > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_call_method, [(n, inst) for n in names]))
    else:
        parts = [METHODS[n](inst) for n in names]
    out: dict = {}
    for part in parts:
        out.update(part)
    return out


def _call_method(args):
    name, inst = args
    return METHODS[name](inst)


def dual_report(inst: Instance, method: str, jobs: int = 1) -> tuple[dict, int]:
    if method != "all":
        return _run_methods(inst, [method], 1), EXIT_OK
    parts = _run_methods(inst, ["primal", "e1", "e2", "nature", "model-sup"], jobs)
    keys = ["pi_primal", "pi_e1", "pi_e2", "pi_nature"]
    equal = len({parts[k] for k in keys}) == 1
    report = {k: parts[k] for k in keys}
    report["model_sup"] = parts["model_sup"]
    if parts["model_sup"] is not None:
        report["gap"] = fmt(Fraction(parts["pi_primal"]) - Fraction(parts["model_sup"]))
    else:
        report["gap"] = None
        report["model_sup_error"] = parts.get("model_sup_error")
    report["mixture"] = parts["mixture"]
    report["h_star"] = parts["h_star"]
    report["strategy"] = parts["strategy"]
    report["equal"] = equal
    return report, EXIT_OK if equal else EXIT_THEOREM


def gap_report(inst: Instance) -> dict:
    pi = solve_primal(inst).pi
    model = model_sup_calibrated(inst)
    return {"pi": fmt(pi), "model_sup": fmt(model), "gap": fmt(pi - model)}


def check_report(inst: Instance) -> tuple[dict, int]:
    rep = check_no_arbitrage(inst)
    out = rep.to_dict()
    if rep.redundant_option_indices:
        out["warnings"] = [f"options {rep.redundant_option_indices} are replicable by stock "
                           "and the other options; they are dropped before dual solves"]
    if not rep.ftap_consistent:
        return out, EXIT_THEOREM
    return out, EXIT_OK if rep.na_ok else EXIT_INVALID


def generate(seed: int, profile: str, count: int, samples: int) -> tuple[list[Instance], dict]:
    rng = random.Random(seed)
    if profile == "random":
        return [random_instance(rng) for _ in range(count)], {"samples": count}
    found: list[Instance] = []
    seen: set[str] = set()
    tried = 0
    while tried < samples and len(found) < count:
        tried += 1
        inst = gap_candidate(rng)
        if not check_no_arbitrage(inst).na_ok:
            continue
        pi = solve_primal(inst).pi
        if pi - model_sup_calibrated(inst) > 0:
            key = dumps_instance(inst, indent=None)
            if key not in seen:
                seen.add(key)
                found.append(inst)
    return found, {"samples": tried, "found": len(found)}


# output -----------------------------------------------------------------

def _approx_of(obj):
    if isinstance(obj, str):
        try:
            return approx(Fraction(obj))
        except (ValueError, ZeroDivisionError):
            return obj
    if isinstance(obj, list):
        return [_approx_of(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _approx_of(v) for k, v in obj.items()}
    return obj


def _pretty(report: dict, indent: int = 0) -> str:
    lines = []
    pad = "  " * indent
    width = max((len(str(k)) for k in report), default=0)
    for k, v in report.items():
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.append(_pretty(v, indent + 1))
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            lines.append(f"{pad}{k}:")
            for i, item in enumerate(v):
                lines.append(f"{pad}  [{i}]")
                lines.append(_pretty(item, indent + 2))
        else:
            shown = ", ".join(map(str, v)) if isinstance(v, list) else v
            lines.append(f"{pad}{str(k).ljust(width)}  {shown}")
    return "\n".join(line for line in lines if line)


def emit(report, args, stream=None) -> None:
    stream = stream or sys.stdout
    if getattr(args, "approx", False) and isinstance(report, dict):
        report = dict(report)
        report["approx"] = _approx_of({k: v for k, v in report.items() if k != "strategy"})
    if getattr(args, "pretty", False) and isinstance(report, dict):
        stream.write(_pretty(report) + "\n")
    else:
        stream.write(json.dumps(report, indent=2) + "\n")


def _read_instance(path: str) -> Instance:
    if path == "-":
        return load_instance(sys.stdin.read())
    with open(path) as fh:
        return load_instance(fh.read())


# parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="human-readable table instead of JSON")
    common.add_argument("--approx", action="store_true", help="add decimal renderings")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")

    p = _Parser(prog="semistatic", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in [("check", "structure, no-arbitrage and option redundancy"),
                        ("price", "super-hedging price and an optimal strategy"),
                        ("gap", "hedging price vs. best single calibrated model"),
                        ("oracle", "brute-force cross-check of all four prices"),
                        ("corollary", "price under Nature's and randomized models")]:
        sp = sub.add_parser(name, help=help_, parents=[common])
        sp.add_argument("file")
    sp = sub.add_parser("dual", help="dual representations", parents=[common])
    sp.add_argument("file")
    sp.add_argument("--method", choices=["e1", "e2", "nature", "model-sup", "all"], default="all")
    sp = sub.add_parser("gen", help="generate instances", parents=[common])
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--profile", choices=["random", "gap-search"], default="random")
    sp.add_argument("--count", type=int, default=None,
                    help="instances to emit (default 1 for random, 5 for gap-search)")
    sp.add_argument("--samples", type=int, default=10_000, help="gap-search sample budget")
    sp.add_argument("--out-dir", default=None, help="write one JSON file per instance here")
    sp = sub.add_parser("fixtures", help="reference instances", parents=[common])
    sp.add_argument("--name", choices=list(FIXTURE_NAMES))
    sp.add_argument("--emit", action="store_true", help="print the instance JSON")
    sp.add_argument("--list", action="store_true", help="list fixture names")
    return p


def run(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except InstanceError as exc:
        emit({"structural_ok": False, "error": str(exc)}, args)
        return EXIT_INVALID
    except OSError as exc:
        emit({"error": str(exc)}, args)
        return EXIT_USAGE
    except TheoremViolation as exc:
        report = {"error": str(exc), "theorem_violation": True}
        if exc.dump:
            report["counterexample"] = json.loads(exc.dump)
        emit(report, args)
        return EXIT_THEOREM


def _dispatch(args) -> int:
    cmd = args.command
    if cmd == "fixtures":
        if args.list or not args.name:
            emit({"fixtures": list(FIXTURE_NAMES)}, args)
            return EXIT_OK
        inst = fixture(args.name)
        if args.emit:
            sys.stdout.write(dumps_instance(inst) + "\n")
        else:
            emit({"name": args.name, "nodes": len(inst.nodes), "horizon": inst.horizon,
                  "option_count": inst.option_count}, args)
        return EXIT_OK
    if cmd == "gen":
        count = args.count if args.count is not None else (1 if args.profile == "random" else 5)
        insts, summary = generate(args.seed, args.profile, count, args.samples)
        sys.stderr.write(json.dumps({"profile": args.profile, "seed": args.seed, **summary}) + "\n")
        if args.out_dir:
            os.makedirs(args.out_dir, exist_ok=True)
            for i, inst in enumerate(insts):
                with open(os.path.join(args.out_dir, f"instance_{i:03d}.json"), "w") as fh:
                    fh.write(dumps_instance(inst) + "\n")
        elif len(insts) == 1:
            sys.stdout.write(dumps_instance(insts[0]) + "\n")
        else:
            sys.stdout.write(json.dumps([instance_to_dict(i) for i in insts], indent=2) + "\n")
        if args.profile == "gap-search" and len(insts) < count:
            return EXIT_INVALID
        return EXIT_OK

    inst = _read_instance(args.file)
    if cmd == "check":
        report, code = check_report(inst)
        emit(report, args)
        return code
    rep = check_no_arbitrage(inst)
    if not rep.na_ok:
        emit({"na_ok": False, "error": "instance admits arbitrage", "certificate": rep.certificate}, args)
        return EXIT_INVALID
    if cmd == "price":
        res = solve_primal(inst)
        emit({"pi": fmt(res.pi), "strategy": res.strategy.to_dict()}, args)
        return EXIT_OK
    if cmd == "dual":
        report, code = dual_report(inst, args.method, args.jobs)
        emit(report, args)
        return code
    if cmd == "gap":
        emit(gap_report(inst), args)
        return EXIT_OK
    if cmd == "oracle":
        rep = cross_check(inst, raise_on_mismatch=False)
        emit(rep.to_dict(), args)
        return EXIT_OK if rep.ok else EXIT_THEOREM
    if cmd == "corollary":
        rep = verify_corollary(inst)
        emit(rep.to_dict(), args)
        return EXIT_OK if rep.holds else EXIT_THEOREM
    raise UsageError(cmd)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
