"""Command-line entry point: ``qffsample {analyze,qff,reflect,sample,bench}``."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .bench import QUANTITIES, run_scaling
from .chain import from_edge_list, random_walk_chain
from .errors import AlgorithmFailure, QsampleError, ValidationError
from .families import FAMILIES, family_chain, parse_family
from .qff import make_plan, qff_residual
from .reflect import reflection_norms, reflection_params
from .report import emit_report
from .sampler import SamplerConfig, amplitude_amplify, prepare_unknown
from .spectral import chain_spectrum, classical_mixing_time, hitting_time_spectral, hitting_times_all

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 2, 3


def load_chain(source: str, lazy: bool, require_ergodic: bool = True):
    """Chain from an edge-list file or ``family:name:n[,opts]`` (the ``family:`` prefix is optional)."""
    text = source[len("family:"):] if source.startswith("family:") else source
    if source.startswith("family:") or (text.partition(":")[0] in FAMILIES and not os.path.exists(source)):
        spec = parse_family(text)
        chain = family_chain(spec, lazy or spec.lazy_default)
    else:
        try:
            with open(source, encoding="utf-8") as fh:
                chain = random_walk_chain(from_edge_list(fh.read()), lazy=lazy)
        except OSError as exc:
            raise ValidationError(f"cannot read graph {source!r}: {exc.strerror}") from None
    if require_ergodic and not chain.ergodic:
        raise ValidationError("walk is periodic; rerun with --lazy")
    return chain


def _common() -> argparse.ArgumentParser:
    # parsed both before and after the subcommand; SUPPRESS keeps the top-level value
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--lazy", action="store_true", default=argparse.SUPPRESS, help="use the lazy walk (I+P)/2")
    p.add_argument("--out", default=argparse.SUPPRESS, help="write output to this path")
    p.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    top = argparse.ArgumentParser(prog="qffsample", description="Stationary-state preparation by fast-forwarded walks.")
    top.add_argument("--lazy", action="store_true", help="use the lazy walk (I+P)/2")
    top.add_argument("--out", help="write output to this path instead of stdout")
    top.add_argument("--format", choices=("csv", "json"), default="json")
    sub = top.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="stationary law, gaps, hitting and mixing times")
    a.add_argument("--graph", required=True)
    a.add_argument("--marked", help="comma-separated marked vertices for a set hitting time")
    a.add_argument("--mix-eps", type=float, default=0.25)

    q = sub.add_parser("qff", parents=[common], help="fast-forwarding plan and residual")
    q.add_argument("--graph", required=True)
    q.add_argument("--t", type=int, required=True)
    q.add_argument("--eps1", type=float, default=0.1)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--route", choices=("projected", "literal"), default="projected")

    r = sub.add_parser("reflect", parents=[common], help="approximate reflection cost and error")
    r.add_argument("--graph", required=True)
    r.add_argument("--eps2", type=float, default=0.1)
    r.add_argument("--route", choices=("projected", "literal"), default="projected")

    s = sub.add_parser("sample", parents=[common], help="prepare the stationary state")
    s.add_argument("--graph", required=True)
    s.add_argument("--g", default="random")
    s.add_argument("--eps", type=float, default=0.05)
    s.add_argument("--pig", default="unknown")
    s.add_argument("--mode", choices=("exact", "sampled"), default="sampled")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--copies", type=int, default=100)
    s.add_argument("--C", type=float, default=100.0)
    s.add_argument("--pi-lb", default=None)
    s.add_argument("--json", action="store_true", help="shorthand for --format json")

    b = sub.add_parser("bench", parents=[common], help="scaling table for a graph family")
    b.add_argument("--family", required=True, choices=FAMILIES)
    b.add_argument("--sizes", required=True, help="comma-separated ascending sizes")
    b.add_argument("--quantities", default="HT,delta")
    b.add_argument("--seeds", type=int, default=1, help="number of seeds (gnp only)")
    b.add_argument("--r", type=int, default=2)
    b.add_argument("--p", type=float, default=None)
    return top


def _int_list(text: str, what: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"{what} must be comma-separated integers") from None


def cmd_analyze(args):
    c = load_chain(args.graph, args.lazy, require_ergodic=False)
    spec = chain_spectrum(c)
    ht = hitting_times_all(c)
    rows = [{"vertex": v, "pi": float(c.pi[v]), "HT": float(ht[v])} for v in range(c.n)]
    if args.format == "csv":
        return rows, EXIT_OK
    doc = {"n": c.n, "reversible": c.reversible, "ergodic": c.ergodic, "pi_min": c.pi_min,
           "gap": spec.gap, "abs_gap": spec.abs_gap, "HT_max": float(ht.max())}
    if c.ergodic:
        mix = classical_mixing_time(c, args.mix_eps)
        doc.update(mixing_time=mix.t, mixing_bound=mix.bound)
    if args.marked:
        doc["HT_marked"] = hitting_time_spectral(c, _int_list(args.marked, "--marked"))
    doc["vertices"] = rows
    return doc, EXIT_OK


def cmd_qff(args):
    c = load_chain(args.graph, args.lazy)
    plan = make_plan(args.t, args.eps1)
    rng = np.random.default_rng(args.seed)
    psi = rng.normal(size=c.n)
    psi /= np.linalg.norm(psi)
    res = qff_residual(c, plan, psi, args.route)
    return {"t": plan.t, "eps1": plan.eps1, "gamma": plan.gamma, "tau": plan.tau,
            "walk_calls": plan.walk_calls, "residual": res, "within_eps1": res <= plan.eps1}, EXIT_OK


def cmd_reflect(args):
    c = load_chain(args.graph, args.lazy)
    params = reflection_params(c, args.eps2)
    rows = reflection_norms(c, params, args.route)
    if args.format == "csv":
        return rows, EXIT_OK
    fix, worst = rows[0]["norm"], max((r["norm"] for r in rows[1:]), default=0.0)
    return {"eps2": params.eps2, "delta": params.delta, "t": params.t, "tau": params.plan.tau,
            "walk_calls": params.walk_calls, "stationary_error": fix, "max_orthogonal_error": worst,
            "eigenvectors": rows}, EXIT_OK


def cmd_sample(args):
    if args.json:
        args.format = "json"
    c = load_chain(args.graph, args.lazy)
    pi_lb = args.pi_lb
    if pi_lb not in (None, "oracle"):
        try:
            pi_lb = float(pi_lb)
        except ValueError:
            raise ValidationError("--pi-lb must be a number or 'oracle'") from None
    cfg = SamplerConfig(eps=args.eps, c=args.copies, C=args.C, pi_lb=pi_lb, seed=args.seed, mode=args.mode)
    if args.g == "random":
        g = int(np.random.default_rng([args.seed, 1]).integers(c.n)) if args.pig != "unknown" else None
    else:
        g = _int_list(args.g, "--g")[0]
    if args.pig == "unknown":
        rep = prepare_unknown(c, cfg, g=g)
    else:
        try:
            pig = float(args.pig)
        except ValueError:
            raise ValidationError("--pig must be a number or 'unknown'") from None
        rep = amplitude_amplify(g, pig, args.eps, c, cfg)
    return rep, EXIT_OK if rep.verdict else EXIT_FAILED


def cmd_bench(args):
    quantities = [q for q in args.quantities.split(",") if q]
    for q in quantities:
        if q not in QUANTITIES:
            raise ValidationError(f"unknown quantity {q!r}")
    table = run_scaling(args.family, _int_list(args.sizes, "--sizes"), quantities,
                        seeds=range(max(1, args.seeds)), lazy=True if args.lazy else None, r=args.r, p=args.p)
    return table, EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "qff": cmd_qff, "reflect": cmd_reflect, "sample": cmd_sample, "bench": cmd_bench}


def _write(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result, code = COMMANDS[args.command](args)
        _write(emit_report(result, args.format), args.out)
        return code
    except AlgorithmFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (QsampleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
