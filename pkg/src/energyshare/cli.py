"""Command-line front end.

Exit codes: 0 feasible/valid, 1 infeasible/invalid, 2 unknown, 3 input
error, 4 internal error (a solver produced a schedule the validator
rejected; nothing is written in that case).  Set ``ENERGYSHARE_LOG`` to a
logging level name for progress messages on stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import generators
from .dispatch import METHODS, solve
from .model import (
    Edge,
    InstanceError,
    TopologyClass,
    WeightedGraph,
    classify,
    fmt_fraction,
    parse_instance,
    parse_solution,
    serialize_instance,
    solution_to_dict,
    to_fraction,
    totals,
)
from .oracle import MAX_AGENTS, brute_force_instance
from .validator import validate

log = logging.getLogger("energyshare")

EXIT = {"feasible": 0, "infeasible": 1, "unknown": 2}
INPUT_ERROR = 3
INTERNAL_ERROR = 4

UNKNOWN_NOTE = (
    "NP-hard band: total energy is between W and 2W on a graph that is neither a tree nor "
    "Eulerian; deciding this band is NP-hard in general. Trees, paths, cycles and Eulerian "
    "graphs are decided exactly."
)


def _plain(x: Any) -> Any:
    """JSON-ready copy: rationals become strings."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (str, bool, int, float)) or x is None:
        return x
    if isinstance(x, Fraction):
        return fmt_fraction(x)
    try:
        return fmt_fraction(Fraction(x))
    except (TypeError, ValueError):
        return str(x)


def _read(path: str | Path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str | Path, text: str) -> None:
    try:
        Path(path).write_text(text + "\n")
    except OSError as exc:
        raise InstanceError(f"cannot write {path}: {exc.strerror}") from None


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return INPUT_ERROR


# -- solve --------------------------------------------------------------------


def solve_file(src: str, out: str | None, method: str, tables: bool) -> tuple[int, dict]:
    """Solve one instance file; returns the exit code and the outcome record."""
    inst = parse_instance(_read(src))
    kwargs = {"keep_tables": True} if tables and method in ("auto", "tree") else {}
    if kwargs and classify(inst) not in (TopologyClass.PATH, TopologyClass.TREE):
        kwargs = {}
    if kwargs and method == "auto":
        method = "tree"
    res = solve(inst, method, **kwargs)
    log.info("%s: %s via %s", src, res.verdict, res.method)
    record: dict[str, Any] = {"input": str(src), "verdict": res.verdict, "method": res.method,
                              "solution": None, "diagnostics": _plain(res.diagnostics)}
    if res.verdict == "unknown":
        record["note"] = UNKNOWN_NOTE
    if res.feasible:
        report = validate(inst, res.solution)
        if not report.valid:
            record["validation"] = report.to_dict()
            record["verdict"] = "error"
            return INTERNAL_ERROR, record
        record["movement"] = fmt_fraction(report.movement)
        body = solution_to_dict(res.solution)
        if out:
            _write(out, json.dumps(body, indent=1))
            record["solution"] = str(out)
        else:
            record["solution"] = body
    return EXIT[res.verdict], record


_NOT_INSTANCES = ("index.json", ".solution.json", ".gadget.json")


def _solve_job(job: tuple[str, str | None, str, bool]) -> tuple[int, dict]:
    try:
        return solve_file(*job)
    except InstanceError as exc:
        return INPUT_ERROR, {"input": job[0], "verdict": "error", "error": str(exc)}


def cmd_solve(args: argparse.Namespace) -> int:
    src = Path(args.inp)
    if src.is_dir():
        if not args.out:
            return _fail("--out DIR is required when --in is a directory")
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        jobs = [(str(p), str(outdir / f"{p.stem}.solution.json"), args.method, args.emit_b_tables)
                for p in sorted(src.glob("*.json")) if not p.name.endswith(_NOT_INSTANCES)]
        if args.jobs > 1:
            with ProcessPoolExecutor(args.jobs) as pool:
                results = list(pool.map(_solve_job, jobs))
        else:
            results = [_solve_job(j) for j in jobs]
        print(json.dumps([r for _, r in results], indent=1))
        return max((c for c, _ in results), default=0)
    code, record = _solve_job((str(src), args.out, args.method, args.emit_b_tables))
    print(json.dumps(record, indent=1))
    if "error" in record:
        print(f"error: {record['error']}", file=sys.stderr)
    return code


# -- validate -----------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        inst = parse_instance(_read(args.inp))
        sol = parse_solution(_read(args.sol))
    except InstanceError as exc:
        return _fail(str(exc))
    report = validate(inst, sol)
    print(json.dumps(report.to_dict(), indent=1))
    return 0 if report.valid else 1


# -- gen ----------------------------------------------------------------------


def _source_graph(args: argparse.Namespace) -> WeightedGraph:
    if args.k4:
        return generators.k4()
    if args.prism:
        return generators.prism()
    if not args.graph:
        raise InstanceError("choose one of --k4, --prism or --graph FILE")
    data = json.loads(_read(args.graph))
    try:
        pairs = [(int(u), int(v)) for u, v in data["edges"]]
        return WeightedGraph(int(data["n"]), tuple(Edge(u, v, Fraction(1)) for u, v in pairs))
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceError(f"--graph: expected {{'n': int, 'edges': [[u, v], ...]}} ({exc})") from None


def cmd_gen(args: argparse.Namespace) -> int:
    try:
        if args.kind == "gadget":
            g3 = _source_graph(args)
            n = g3.n
            b = to_fraction(args.b, "--b") if args.b is not None else Fraction(1)
            a = to_fraction(args.a, "--a") if args.a is not None else 5 * n * b + 1
            eps = to_fraction(args.eps, "--eps") if args.eps is not None else b / (3 * n + 1)
            params = generators.GadgetParams(a, b, eps, args.initial)
            gi = generators.gen_gadget(g3, params, args.variant)
            out = Path(args.out or "gadget.json")
            _write(out, serialize_instance(gi.instance))
            _write(out.with_suffix(".gadget.json"), json.dumps(gi.sidecar(), indent=1))
            print(out)
        elif args.kind == "random":
            inst = generators.gen_random(args.seed, args.cls, args.n, args.k, to_fraction(args.ratio, "--ratio"))
            text = serialize_instance(inst)
            if args.out:
                _write(args.out, text)
            else:
                print(text)
        else:
            outdir = Path(args.out or "corpus")
            outdir.mkdir(parents=True, exist_ok=True)
            index = {}
            for name, entry in generators.reference_corpus().items():
                _write(outdir / f"{name}.json", serialize_instance(entry.instance))
                index[name] = {"expected": entry.expected, "solver": entry.solver, "note": entry.note}
            _write(outdir / "index.json", json.dumps(index, indent=1))
            print(outdir)
    except (InstanceError, generators.GeneratorError, ValueError) as exc:
        return _fail(str(exc))
    return 0


# -- oracle / inspect ---------------------------------------------------------


def cmd_oracle(args: argparse.Namespace) -> int:
    try:
        inst = parse_instance(_read(args.inp))
        if classify(inst) is not TopologyClass.PATH:
            raise InstanceError("the oracle handles path instances only")
        if inst.k > MAX_AGENTS:
            raise InstanceError(f"the oracle handles at most {MAX_AGENTS} agents")
    except InstanceError as exc:
        return _fail(str(exc))
    ok = brute_force_instance(inst)
    print(json.dumps({"feasible": ok}))
    return 0 if ok else 1


def cmd_inspect(args: argparse.Namespace) -> int:
    try:
        inst = parse_instance(_read(args.inp))
    except InstanceError as exc:
        return _fail(str(exc))
    W, E = totals(inst)
    info = {
        "class": classify(inst).value,
        "n": inst.graph.n,
        "m": inst.graph.m,
        "k": inst.k,
        "total_weight": fmt_fraction(W),
        "total_energy": fmt_fraction(E),
        "energy_over_weight": fmt_fraction(E / W) if W else None,
    }
    print(json.dumps(info, indent=1))
    return 0


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="energyshare", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="decide an instance and write a validated schedule")
    s.add_argument("--in", dest="inp", required=True, help="instance JSON, or a directory of them")
    s.add_argument("--out", help="solution file (or directory for batch input)")
    s.add_argument("--method", choices=METHODS, default="auto")
    s.add_argument("--emit-b-tables", action="store_true", help="include tree surplus tables in the output")
    s.add_argument("--jobs", type=int, default=1, help="worker processes for batch input")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("validate", help="check a solution against an instance")
    v.add_argument("--in", dest="inp", required=True)
    v.add_argument("--sol", required=True)
    v.set_defaults(func=cmd_validate)

    g = sub.add_parser("gen", help="generate instances")
    gsub = g.add_subparsers(dest="kind", required=True)
    gg = gsub.add_parser("gadget", help="meta-edge gadget instance from a 3-regular graph")
    src = gg.add_mutually_exclusive_group()
    src.add_argument("--k4", action="store_true")
    src.add_argument("--prism", action="store_true")
    src.add_argument("--graph", help="JSON file {'n': ..., 'edges': [[u, v], ...]}")
    gg.add_argument("--a")
    gg.add_argument("--b")
    gg.add_argument("--eps")
    gg.add_argument("--initial", type=int, default=0)
    gg.add_argument("--variant", choices=generators.VARIANTS, default="published")
    gg.add_argument("--out")
    gr = gsub.add_parser("random", help="seeded random instance")
    gr.add_argument("--class", dest="cls", required=True,
                    type=lambda s: TopologyClass(s.capitalize()),
                    help="path, cycle, tree, eulerian or general")
    gr.add_argument("--n", type=int, required=True)
    gr.add_argument("--k", type=int, required=True)
    gr.add_argument("--ratio", default="2")
    gr.add_argument("--seed", type=int, default=0)
    gr.add_argument("--out")
    gc = gsub.add_parser("corpus", help="write the named example instances")
    gc.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    o = sub.add_parser("oracle", help="brute-force decision for small path instances")
    o.add_argument("--in", dest="inp", required=True)
    o.set_defaults(func=cmd_oracle)

    i = sub.add_parser("inspect", help="print class and totals of an instance")
    i.add_argument("--in", dest="inp", required=True)
    i.set_defaults(func=cmd_inspect)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("ENERGYSHARE_LOG", "WARNING").upper(),
                        format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INPUT_ERROR if exc.code else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
