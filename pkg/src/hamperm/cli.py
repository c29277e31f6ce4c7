"""Command-line front end: ``hamperm <subcommand> ...``.

Exit codes: 0 success, 1 input or runtime error (including a tour that
fails ``verify``), 2 solver budget exhausted.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import secrets
import sys
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from hamperm import __version__, generators, probability
from hamperm.contraction import ContractedGraph, TriviallyHamiltonian, contract_any, infer_orientations
from hamperm.decomposition import decompose, replay
from hamperm.errors import InputError
from hamperm.graph import parse_graph, serialize_graph
from hamperm.solver import ALGORITHMS, ENV_DEPTH, ENV_FANOUT, SolveConfig, solve, solve_portfolio
from hamperm.tour import format_move, format_tour, parse_tour
from hamperm.tsp import TspConfig, tsp_improve
from hamperm.verify import verify as verify_order

SCHEMA_MANIFEST = "hamperm.manifest/1"
SCHEMA_TRACE = "hamperm.trace/1"
SCHEMA_DIAGNOSTICS = "hamperm.diagnostics/1"
SCHEMA_TSP = "hamperm.tsp/1"
SCHEMA_DECOMPOSE = "hamperm.decompose/1"

EXIT_OK, EXIT_ERROR, EXIT_BUDGET = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # unknown flags exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


class _Run:
    """Per-invocation bookkeeping for outputs and the manifest."""

    def __init__(self, args: argparse.Namespace, argv: list[str]):
        self.args = args
        self.argv = argv
        self.inputs: dict[str, str] = {}
        self.outputs: dict[str, str] = {}
        self.outcome: dict = {}

    def read(self, path: str) -> str:
        data = Path(path).read_bytes()
        self.inputs[path] = hashlib.sha256(data).hexdigest()
        return data.decode("utf-8")

    def write(self, path: str, text: str) -> None:
        atomic_write(path, text)
        self.outputs[path] = hashlib.sha256(text.encode()).hexdigest()

    def manifest(self) -> dict:
        env = {k: os.environ[k] for k in (ENV_FANOUT, ENV_DEPTH) if os.environ.get(k)}
        params = {k: v for k, v in vars(self.args).items() if k not in ("func", "manifest")}
        return {
            "schema": SCHEMA_MANIFEST,
            "subcommand": self.args.command,
            "argv": self.argv,
            "params": params,
            "seed": params.get("seed"),
            "env": env,
            "version": __version__,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "outcome": self.outcome,
        }


def atomic_write(path: str, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(run: _Run, text: str, out: str | None) -> None:
    if out:
        run.write(out, text)
    else:
        sys.stdout.write(text)


def _fmt_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator} ≈ {float(x):.6f}" if x.denominator != 1 else f"{x.numerator}"


# subcommands -----------------------------------------------------------------


def cmd_gen(run: _Run) -> int:
    a = run.args
    fam = a.family
    need = {"gnm": "m", "dkinout": "k", "planted": "extra"}
    if fam in need and getattr(a, need[fam]) is None:
        raise InputError(f"--{need[fam]} is required for family {fam}")
    tour = None
    if fam == "gnm":
        g = generators.gnm(a.n, a.m, a.seed)
    elif fam == "boll":
        g = generators.boll_graph(a.n, a.seed)
    elif fam == "frieze":
        g = generators.frieze_boll_digraph(a.n, a.seed)
    elif fam == "r3out":
        g = generators.r3_out(a.n, a.seed)
    elif fam == "dkinout":
        g = generators.d_k_in_k_out(a.n, a.k, a.seed)
    else:
        g, tour = generators.planted(a.n, a.extra, a.seed)
    _emit(run, serialize_graph(g), a.out)
    if tour is not None:
        tour_path = a.tour_out or (f"{a.out}.tour" if a.out else None)
        if tour_path:
            run.write(tour_path, format_tour(tour))
    run.outcome = {"n": g.n, "m": g.m}
    return EXIT_OK


def cmd_contract(run: _Run) -> int:
    a = run.args
    g = parse_graph(run.read(a.input))
    try:
        cg = contract_any(g)
    except TriviallyHamiltonian as done:
        sys.stdout.write(format_tour(done.tour))
        sys.stderr.write("graph is a single cycle; nothing to contract\n")
        run.outcome = {"trivially_hamiltonian": True}
        return EXIT_OK
    _emit(run, serialize_graph(cg.g_prime), a.out)
    map_path = a.map or (f"{a.out}.rmap" if a.out else None)
    if map_path:
        run.write(map_path, cg.rmap_text())
    else:
        sys.stdout.write("# map\n" + cg.rmap_text())
    run.outcome = {"n": cg.n, "m": cg.g_prime.m, "r_vertices": len(cg.r_map)}
    return EXIT_OK


def cmd_solve(run: _Run) -> int:
    a = run.args
    g = parse_graph(run.read(a.input))
    cfg = SolveConfig(
        algorithm=a.algorithm,
        seed=a.seed,
        budget_mult=a.budget_mult,
        contract=a.contract,
        extended=a.extended,
        start=a.start,
        full_trace=a.full_trace,
    )
    res = solve_portfolio(g, cfg, a.portfolio) if a.portfolio > 1 else solve(g, cfg)
    if a.trace:
        events = [e.to_json() for e in res.trace]
        run.write(a.trace, _dump({"schema": SCHEMA_TRACE, "seed": res.seed, "events": events}))
    run.outcome = {"found": res.found, "iterations": res.iterations, "restarts": res.restarts, "seed": res.seed}
    if res.found:
        if not verify_order(g, res.tour.order):
            raise RuntimeError("internal error: solver output failed verification")
        _emit(run, format_tour(res.tour), a.out)
        return EXIT_OK
    diag = {
        "schema": SCHEMA_DIAGNOSTICS,
        "outcome": res.outcome,
        "reason": res.reason,
        "iterations": res.iterations,
        "restarts": res.restarts,
        "seed": res.seed,
        **res.diagnostics.to_json(),
    }
    sys.stderr.write(_dump(diag))
    return EXIT_BUDGET


def cmd_decompose(run: _Run) -> int:
    a = run.args
    start = parse_tour(run.read(a.start))
    target = parse_tour(run.read(a.target))
    moves = decompose(start, target)
    ok = replay(start, moves) == target
    text = "".join(format_move(m) + "\n" for m in moves)
    _emit(run, text, a.out)
    summary = {"schema": SCHEMA_DECOMPOSE, "moves": len(moves), "replay_verified": ok}
    if a.summary:
        run.write(a.summary, _dump(summary))
    sys.stderr.write(f"replay verified: {str(ok).lower()}\n")
    run.outcome = summary
    return EXIT_OK if ok else EXIT_ERROR


def cmd_prob(run: _Run) -> int:
    a = run.args
    f = a.formula

    def need(*names: str) -> None:
        missing = [x for x in names if getattr(a, x) is None]
        if missing:
            raise InputError(f"formula {f} needs --{' --'.join(missing)}")

    lines: list[str] = []
    if f in ("t11", "t15", "t16"):
        need("n")
        exact = {"t11": probability.p_admissible_3cycle, "t15": probability.p_proper_intersection, "t16": probability.p_at_least_two}[f](a.n)
        lines.append(_fmt_fraction(exact))
        if f == "t16":
            c = probability.two_move_counts(a.n)
            lines.append(f"total={c.total} cases_1_2={c.count_cases_1_2} case_4={c.count_case_4}")
        if a.mc:
            est = {"t11": probability.mc_3cycle, "t15": probability.mc_intersection, "t16": probability.mc_two_admissible}[f]
            lines.append(f"monte carlo ({a.mc} trials, seed {a.seed}): {est(a.n, a.mc, a.seed):.6f}")
    elif f == "occupancy":
        need("r", "n")
        lines.append(_fmt_fraction(probability.occupancy_all_occupied(a.r, a.n)))
    elif f == "hoeffding":
        need("a", "p", "alpha")
        lines.append(f"{probability.hoeffding_tail(a.a, a.p, a.alpha, a.side):.6f}")
    elif f == "tv":
        need("r", "n", "m")
        lines.append(f"{probability.poisson_occupancy_tv_bound(a.r, a.n, a.m):.6g}")
    else:
        need("k", "n")
        lines.append(str(probability.power_sum(a.k, a.n)))
    text = "\n".join(lines) + "\n"
    _emit(run, text, a.out)
    run.outcome = {"result": lines[0]}
    return EXIT_OK


def cmd_tsp(run: _Run) -> int:
    a = run.args
    inst = parse_graph(run.read(a.input))
    start = parse_tour(run.read(a.start)) if a.start else None
    rec = tsp_improve(inst, start, TspConfig(seed=a.seed, stagnation=a.stagnation))
    _emit(run, format_tour(rec.tour), a.out)
    summary = {
        "schema": SCHEMA_TSP,
        "weight": rec.weight,
        "iteration": rec.iteration,
        "history": [{"iter": i, "weight": w} for i, w in rec.history],
        "seed": a.seed,
    }
    if a.summary:
        run.write(a.summary, _dump(summary))
    else:
        sys.stderr.write(f"weight: {rec.weight!r}\n")
    run.outcome = {"weight": rec.weight}
    return EXIT_OK


def cmd_verify(run: _Run) -> int:
    a = run.args
    g = parse_graph(run.read(a.graph))
    tokens = run.read(a.tour).split()
    if any("-" in tok for tok in tokens):
        cg = contract_any(g)
        if not isinstance(cg, ContractedGraph):
            raise InputError("graph could not be contracted")
        order = [cg.resolve(tok) for tok in tokens]
        if len(order) != cg.n:
            raise InputError(f"tour has {len(order)} entries, contracted graph has {cg.n}")
        if len(set(order)) != len(order):
            ok = False
        else:
            ok = infer_orientations(cg, order) is not None
    else:
        try:
            order = [int(tok) for tok in tokens]
        except ValueError:
            raise InputError("tour entries must be integers or chain names like 4-6-9") from None
        ok = verify_order(g, order)
    run.outcome = {"valid": ok}
    print("valid hamilton circuit" if ok else "not a hamilton circuit")
    return EXIT_OK if ok else EXIT_ERROR


# parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hamperm", description="Hamilton circuit search by admissible tour permutations.")
    p.add_argument("--version", action="version", version=f"hamperm {__version__}")
    p.add_argument("--replay", metavar="MANIFEST", help="re-run the command recorded in a manifest")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name: str, func: Callable[[_Run], int], help_: str, seeded: bool = False) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--manifest", help="write a run manifest JSON here")
        if seeded:
            sp.add_argument("--seed", type=int, default=None, help="RNG seed (auto-chosen and reported if absent)")
        return sp

    g = add("gen", cmd_gen, "generate a random graph", seeded=True)
    g.add_argument("--family", required=True, choices=["gnm", "boll", "frieze", "r3out", "dkinout", "planted"])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--extra", type=int)
    g.add_argument("--out")
    g.add_argument("--tour-out")

    c = add("contract", cmd_contract, "collapse degree-2 chains")
    c.add_argument("--in", dest="input", required=True)
    c.add_argument("--out")
    c.add_argument("--map")

    s = add("solve", cmd_solve, "search for a Hamilton circuit", seeded=True)
    s.add_argument("--algorithm", choices=ALGORITHMS, default="g")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--budget-mult", type=float, default=1.0)
    s.add_argument("--contract", action="store_true")
    s.add_argument("--extended", action="store_true", help="cubic budgets instead of 2 n ln n")
    s.add_argument("--start", choices=["random", "complement"], default="random")
    s.add_argument("--trace")
    s.add_argument("--full-trace", action="store_true")
    s.add_argument("--portfolio", type=int, default=1)
    s.add_argument("--out")

    d = add("decompose", cmd_decompose, "moves turning one tour into another")
    d.add_argument("--start", required=True)
    d.add_argument("--target", required=True)
    d.add_argument("--out")
    d.add_argument("--summary")

    pr = add("prob", cmd_prob, "evaluate a probability formula", seeded=True)
    pr.add_argument("--formula", required=True, choices=["t11", "t15", "t16", "occupancy", "hoeffding", "tv", "powersum"])
    pr.add_argument("--n", type=int)
    pr.add_argument("--r", type=int)
    pr.add_argument("--m", type=int)
    pr.add_argument("--k", type=int)
    pr.add_argument("--a", type=int)
    pr.add_argument("--p", type=float)
    pr.add_argument("--alpha", type=float)
    pr.add_argument("--side", choices=["lower", "upper"], default="lower")
    pr.add_argument("--mc", type=int, help="Monte Carlo trials")
    pr.add_argument("--out")

    t = add("tsp", cmd_tsp, "improve a weighted tour", seeded=True)
    t.add_argument("--in", dest="input", required=True)
    t.add_argument("--start")
    t.add_argument("--stagnation", type=int)
    t.add_argument("--out")
    t.add_argument("--summary")

    v = add("verify", cmd_verify, "check a Hamilton circuit")
    v.add_argument("--graph", required=True)
    v.add_argument("--tour", required=True)
    return p


def _needs_seed(args: argparse.Namespace) -> bool:
    if not hasattr(args, "seed"):
        return False
    if args.command == "prob":
        return bool(args.mc)
    return True


def dispatch(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.replay:
        try:
            recorded = json.loads(Path(args.replay).read_text(encoding="utf-8"))
            argv = list(recorded["argv"])
        except (OSError, ValueError, KeyError) as exc:
            sys.stderr.write(f"hamperm: cannot replay manifest: {exc}\n")
            return EXIT_ERROR
        args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_ERROR
    if _needs_seed(args) and args.seed is None:
        args.seed = secrets.randbits(63)
        sys.stderr.write(f"seed: {args.seed}\n")
        argv = argv + ["--seed", str(args.seed)]
    run = _Run(args, argv)
    try:
        code = args.func(run)
    except (InputError, OSError) as exc:
        sys.stderr.write(f"hamperm {args.command}: error: {exc}\n")
        run.outcome = {"error": str(exc)}
        code = EXIT_ERROR
    except RuntimeError as exc:
        sys.stderr.write(f"hamperm {args.command}: runtime failure: {exc}\n")
        run.outcome = {"error": str(exc)}
        code = EXIT_ERROR
    if args.manifest:
        run.outcome["exit_code"] = code
        atomic_write(args.manifest, _dump(run.manifest()))
    return code


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
