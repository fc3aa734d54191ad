"""Command-line front door.

Every command prints one JSON line to stdout and, given ``--out DIR``, writes
its detailed artifacts there. Exit codes: 0 success, 1 a check failed,
2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import coloring, convergence, distill, engine, graph, mpnn, rules
from .errors import DomainError, NumericError, ValidationError
from .life import load_spec, read_rle, soup_check, validate_pattern, write_rle
from .life.machines import frame, run_life
from .life.rle import GridPattern

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(summary: dict) -> None:
    print(json.dumps(summary, sort_keys=True, separators=(",", ":")))


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    return p


def _out_dir(args) -> Path | None:
    if not args.out:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _finite(x: float):
    return x if math.isfinite(x) else str(x)


def _graph_or_isolated(path: str | None) -> graph.GraphStructure:
    return graph.build_graph(1, []) if path is None else graph.read_edge_list(path)


def _render(grid: np.ndarray, t: int) -> str:
    body = "\n".join("".join("#" if v else "." for v in row) for row in grid)
    return f"t={t}\n{body}\n"


# -- graph ----------------------------------------------------------------------

def cmd_graph_diameter(args) -> int:
    g = graph.read_edge_list(_existing(args.graph))
    dia = graph.diameter(g)
    _emit({"command": "graph diameter", "diameter": _finite(dia), "nodes": g.node_count,
           "edges": len(g.edges)})
    return EXIT_OK


# -- life -----------------------------------------------------------------------

def cmd_life_run(args) -> int:
    p = read_rle(_existing(args.pattern))
    arena = tuple(args.arena) if args.arena else (p.height + 2 * args.margin, p.width + 2 * args.margin)
    offset = tuple(args.offset) if args.offset else (args.margin, args.margin)
    trace = run_life(p, args.steps, arena, offset, args.boundary)
    frames = [frame(H, arena) for H in trace.states]
    if args.render == "text":
        for t, f in enumerate(frames):
            sys.stderr.write(_render(f, t))
    out = _out_dir(args)
    if out:
        final = GridPattern.from_array(frames[-1], f"{p.name} t={args.steps}")
        write_rle(final, out / "final.rle")
        (out / "populations.csv").write_text(
            "step,population\n" + "".join(f"{t},{int(f.sum())}\n" for t, f in enumerate(frames))
        )
    _emit({"command": "life run", "pattern": p.name, "steps": args.steps, "arena": list(arena),
           "offset": list(offset), "population": [int(f.sum()) for f in frames]})
    return EXIT_OK


def cmd_life_validate(args) -> int:
    p = read_rle(_existing(args.pattern))
    spec = load_spec(_existing(args.spec))
    report = validate_pattern(p, spec)
    out = _out_dir(args)
    if out:
        (out / "report.json").write_text(report.to_json() + "\n")
    _emit({"command": "life validate", "name": report.name, "kind": report.kind,
           "passed": report.passed, "accuracy": report.accuracy})
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_life_soup_check(args) -> int:
    bad = soup_check(args.soups, args.size, args.steps, args.seed, args.density, args.boundary, args.oracle)
    out = _out_dir(args)
    if out:
        (out / "mismatches.json").write_text(json.dumps([{"soup": k, "step": t} for k, t in bad]) + "\n")
    _emit({"command": "life soup-check", "soups": args.soups, "steps": args.steps, "size": args.size,
           "mismatches": len(bad), "match_rate": (args.soups - len(bad)) / args.soups})
    return EXIT_OK if not bad else EXIT_FAIL


# -- converge -------------------------------------------------------------------

def _contraction(args):
    anchor = [args.anchor] * args.dim
    return rules.linear_contraction_rule(args.dim, args.alpha, anchor)


def cmd_converge_estimate(args) -> int:
    g = _graph_or_isolated(args.graph and str(_existing(args.graph)))
    report = convergence.estimate_contraction(_contraction(args), g, args.trials, args.amplitude, args.seed)
    out = _out_dir(args)
    if out:
        (out / "contraction.json").write_text(report.to_json() + "\n")
    summary = json.loads(report.to_json())
    summary.update(command="converge estimate", alpha=args.alpha, within_bound=report.estimated_c <= args.alpha + 1e-9)
    _emit(summary)
    return EXIT_OK


def cmd_converge_uniqueness(args) -> int:
    g = _graph_or_isolated(args.graph and str(_existing(args.graph)))
    rule = _contraction(args)
    amplitude = args.amplitude
    if amplitude is None:
        amplitude = convergence.calibrated_amplitude(args.alpha, args.tol, args.target_steps, uniform=True)
    report = convergence.fixed_point_uniqueness(rule, g, args.inits, amplitude, args.tol,
                                                args.max_steps, args.seed, center=args.anchor / (1 - args.alpha))
    out = _out_dir(args)
    if out:
        (out / "uniqueness.json").write_text(report.to_json() + "\n")
        if report.fixed_point is not None:
            engine.write_state(report.fixed_point, out / "fixed_point.state")
    _emit({"command": "converge uniqueness", "alpha": args.alpha, "amplitude": amplitude,
           "unique": report.unique, "max_pairwise_distance": report.max_pairwise_distance,
           "mean_steps": report.mean_steps})
    return EXIT_OK if report.unique else EXIT_FAIL


def cmd_converge_decay(args) -> int:
    g = _graph_or_isolated(args.graph and str(_existing(args.graph)))
    rule = _contraction(args)
    fixed = engine.StateConfiguration(np.full((g.node_count, args.dim), args.anchor / (1 - args.alpha)))
    rng = np.random.default_rng(args.seed)
    H0 = engine.StateConfiguration(fixed.values + rng.uniform(-args.amplitude, args.amplitude, fixed.values.shape))
    trace = engine.evolve(H0, g, rule, args.steps)
    fit = convergence.fit_decay(trace, fixed, args.tol)
    out = _out_dir(args)
    if out:
        (out / "distances.csv").write_text(convergence.distances_csv(trace))
        (out / "decay.json").write_text(fit.to_json() + "\n")
    _emit({"command": "converge decay", "alpha": args.alpha, "rate": fit.rate,
           "residual": fit.residual, "ratios": len(fit.ratios),
           "within_bound": fit.rate <= args.alpha + 0.02})
    return EXIT_OK


# -- color ----------------------------------------------------------------------

def cmd_color_gen(args) -> int:
    inst = coloring.generate_3colorable(args.n, args.factor, args.seed)
    out = _out_dir(args)
    if out:
        coloring.write_instance(inst, out / "instance.edges")
    _emit({"command": "color gen", "n": args.n, "edges": len(inst.graph.edges) // 2,
           "seed": args.seed, "witness_counts": np.bincount(inst.witness, minlength=3).tolist()})
    return EXIT_OK


def cmd_color_ablate(args) -> int:
    names = [c.strip() for c in args.configs.split(",")] if args.configs else None
    rows = coloring.run_ablation(names, args.instances, args.n, args.factor, args.seed)
    out = _out_dir(args)
    if out:
        (out / "ablation.csv").write_text(coloring.ablation_csv(rows))
    _emit({"command": "color ablate", "instances": args.instances,
           "rows": [{"config": r.config, "accuracy": r.accuracy, "violation_rate": r.violation_rate,
                     "convergence_steps": r.convergence_steps} for r in rows]})
    return EXIT_OK


# -- mpnn -----------------------------------------------------------------------

def _mpnn_setup(args):
    if args.graph:
        g = graph.read_edge_list(_existing(args.graph))
    else:
        g = graph.random_graph(args.nodes, args.extra_edges, args.seed)
    if getattr(args, "params", None):
        fns = rules.load_mpnn(_existing(args.params))
    elif getattr(args, "summing", False):
        fns = rules.MpnnFunctions.summing(args.dim)
    else:
        fns = rules.MpnnFunctions.random(args.dim, args.seed)
    H0 = engine.StateConfiguration(np.random.default_rng([args.seed, 1]).uniform(-1, 1, (g.node_count, fns.dim)))
    T = args.steps
    if T is None:
        dia = graph.diameter(g)
        if not math.isfinite(dia):
            raise ValidationError("graph is not strongly connected; pass --steps explicitly")
        T = max(int(dia), 1)
    return g, fns, H0, T


def cmd_mpnn_check(args) -> int:
    g, fns, H0, T = _mpnn_setup(args)
    equal, dev = mpnn.check_equivalence(g, fns, H0, T)
    out = _out_dir(args)
    if out:
        rules.save_mpnn(fns, out / "params.mpnn")
        graph.write_edge_list(g, out / "graph.edges")
    _emit({"command": "mpnn check", "nodes": g.node_count, "steps": T, "bitwise_equal": equal,
           "max_abs_deviation": dev})
    return EXIT_OK if equal else EXIT_FAIL


def cmd_mpnn_influence(args) -> int:
    args.summing = True
    g, fns, H0, T = _mpnn_setup(args)
    m = mpnn.influence_matrix(rules.mpnn_rule(fns), g, H0, T, args.eps)
    reach = mpnn.reachability_within(g, T)
    out = _out_dir(args)
    if out:
        (out / "influence.txt").write_text(mpnn.format_influence(m))
    _emit({"command": "mpnn influence", "nodes": g.node_count, "steps": T, "all_true": m.all_true(),
           "matches_reachability": bool(np.array_equal(m.matrix, reach))})
    return EXIT_OK


# -- distill --------------------------------------------------------------------

def cmd_distill_demo(args) -> int:
    E = distill.synthetic_teacher(args.tokens, args.teacher_dim, args.seed)
    res = distill.distill_demo(E, K=args.k, iters=args.iters, step_size=args.step_size,
                               fd_eps=args.fd_eps, seed=args.seed, d=args.dim)
    out = _out_dir(args)
    if out:
        (out / "losses.csv").write_text(res.to_csv())
    _emit({"command": "distill demo", "initial_loss": res.losses[0], "final_loss": res.losses[-1],
           "halved": res.losses[-1] <= res.losses[0] / 2, "iters": args.iters})
    return EXIT_OK


# -- parser ---------------------------------------------------------------------

def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("ASPP_THREADS", "1")))
    except ValueError:
        return 1


_FLAG_HELP = {
    "steps": "number of synchronous steps",
    "margin": "dead cells around the pattern when no arena is given",
    "boundary": "grid edge handling",
    "soups": "number of random soups",
    "size": "soup side length",
    "density": "probability a soup cell starts alive",
    "seed": "random seed",
    "oracle": "independent simulator to compare against",
    "alpha": "designed contraction factor",
    "anchor": "constant offset of the contraction rule",
    "dim": "state dimension per node",
    "trials": "random configuration pairs",
    "amplitude": "half-width of the random starts",
    "inits": "number of random starts",
    "target_steps": "step count the calibrated amplitude aims for",
    "tol": "stopping tolerance on the sup distance",
    "max_steps": "iteration cap per run",
    "n": "number of nodes",
    "factor": "edges per node",
    "instances": "instances per configuration",
    "nodes": "nodes in the seeded random graph",
    "extra_edges": "edges beyond the spanning tree",
    "eps": "perturbation size",
    "tokens": "teacher tokens",
    "teacher_dim": "teacher embedding width",
    "k": "engine steps per forward pass",
    "iters": "gradient iterations",
    "step_size": "gradient step size",
    "fd_eps": "finite-difference step",
}


def _fill_help(parser: argparse.ArgumentParser) -> None:
    for action in parser._actions:
        if action.help is None and action.dest in _FLAG_HELP:
            action.help = _FLAG_HELP[action.dest]


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="aspp", description="Graph operator experiments.", formatter_class=fmt)
    parser.add_argument("--threads", type=int, default=_default_threads(),
                        help="worker cap for per-node stepping (env ASPP_THREADS)")
    groups = parser.add_subparsers(dest="group", required=True)
    leaves = []

    def command(group_parsers, name, fn, help_):
        p = group_parsers.add_parser(name, help=help_, description=help_, formatter_class=fmt)
        p.add_argument("--out", default=None, help="directory for detailed artifacts")
        p.set_defaults(fn=fn)
        leaves.append(p)
        return p

    # graph
    gsub = groups.add_parser("graph", help="graph utilities").add_subparsers(dest="cmd", required=True)
    p = command(gsub, "diameter", cmd_graph_diameter, "longest shortest path of an edge-list graph")
    p.add_argument("--graph", required=True, help="edge-list file")

    # life
    lsub = groups.add_parser("life", help="Game of Life on the engine").add_subparsers(dest="cmd", required=True)
    p = command(lsub, "run", cmd_life_run, "evolve an RLE pattern")
    p.add_argument("--pattern", required=True, help="RLE file")
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--arena", type=int, nargs=2, metavar=("ROWS", "COLS"), default=None,
                   help="arena size; unset means pattern plus margin")
    p.add_argument("--offset", type=int, nargs=2, metavar=("ROW", "COL"), default=None,
                   help="pattern placement; unset means margin, margin")
    p.add_argument("--margin", type=int, default=20)
    p.add_argument("--boundary", choices=("dead", "toroidal"), default="dead")
    p.add_argument("--render", choices=("none", "text"), default="none", help="print frames to stderr")

    p = command(lsub, "validate", cmd_life_validate, "check a pattern against its spec")
    p.add_argument("--pattern", required=True, help="RLE file")
    p.add_argument("--spec", required=True, help="pattern spec file")

    p = command(lsub, "soup-check", cmd_life_soup_check, "engine vs grid oracle on random soups")
    p.add_argument("--soups", type=int, default=1000)
    p.add_argument("--size", type=int, default=32)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--boundary", choices=("dead", "toroidal"), default="dead")
    p.add_argument("--oracle", choices=("shifted", "naive"), default="shifted")

    # converge
    csub = groups.add_parser("converge", help="contraction experiments").add_subparsers(dest="cmd", required=True)

    def contraction_flags(p):
        p.add_argument("--alpha", type=float, default=0.76)
        p.add_argument("--graph", default=None, help="edge-list file; unset means one isolated node")
        p.add_argument("--anchor", type=float, default=0.0)
        p.add_argument("--dim", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)

    p = command(csub, "estimate", cmd_converge_estimate, "empirical contraction coefficient")
    contraction_flags(p)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--amplitude", type=float, default=1.0)

    p = command(csub, "uniqueness", cmd_converge_uniqueness, "fixed point from many starts")
    contraction_flags(p)
    p.add_argument("--inits", type=int, default=10)
    p.add_argument("--amplitude", type=float, default=None,
                   help="start spread; unset means calibrated from --target-steps")
    p.add_argument("--target-steps", type=int, default=15)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-steps", type=int, default=1000)

    p = command(csub, "decay", cmd_converge_decay, "fit the geometric approach rate")
    contraction_flags(p)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=40)
    p.add_argument("--tol", type=float, default=1e-6)

    # color
    ksub = groups.add_parser("color", help="3-coloring harness").add_subparsers(dest="cmd", required=True)
    p = command(ksub, "gen", cmd_color_gen, "generate a planted 3-colorable instance")
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--factor", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)

    p = command(ksub, "ablate", cmd_color_ablate, "run the configuration ablation")
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--factor", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--configs", default=None, help="comma-separated configuration names; unset means all six")

    # mpnn
    msub = groups.add_parser("mpnn", help="message-passing checks").add_subparsers(dest="cmd", required=True)

    def mpnn_flags(p):
        p.add_argument("--graph", default=None, help="edge-list file; unset means seeded random graph")
        p.add_argument("--nodes", type=int, default=10)
        p.add_argument("--extra-edges", type=int, default=10)
        p.add_argument("--dim", type=int, default=3)
        p.add_argument("--steps", type=int, default=None, help="layers; unset means graph diameter")
        p.add_argument("--seed", type=int, default=0)

    p = command(msub, "check", cmd_mpnn_check, "engine vs reference, bit for bit")
    mpnn_flags(p)
    p.add_argument("--params", default=None, help="MPNN parameter file; unset means seeded random")

    p = command(msub, "influence", cmd_mpnn_influence, "perturbation influence matrix of the sum rule")
    mpnn_flags(p)
    p.add_argument("--eps", type=float, default=1e-3)

    # distill
    dsub = groups.add_parser("distill", help="embedding distillation toy").add_subparsers(dest="cmd", required=True)
    p = command(dsub, "demo", cmd_distill_demo, "fit the affine blend rule by finite differences")
    p.add_argument("--tokens", type=int, default=8)
    p.add_argument("--teacher-dim", type=int, default=16)
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--step-size", type=float, default=0.1)
    p.add_argument("--fd-eps", type=float, default=1e-5)
    p.add_argument("--seed", type=int, default=0)

    for leaf in leaves:
        _fill_help(leaf)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads < 1:
        parser.print_usage(sys.stderr)
        print("aspp: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        with engine.workers(args.threads):
            return args.fn(args)
    except UsageError as exc:
        print(f"aspp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, DomainError) as exc:
        print(f"aspp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"aspp: numeric failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
