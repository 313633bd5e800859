"""Command-line front end: ``monodimer <command> [options]``."""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import exact, fixedpoint, tree
from ._backend import backend_name, set_num_threads
from .graph import GraphError, RootedTree, is_forest, sample_erdos_renyi, sample_galton_watson
from .io import format_table, read_graph
from .offspring import DistributionError, parse_offspring
from .validate import FAULTS, run_validation

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
COMMANDS = ("exact", "tree", "gw", "er", "fixpoint", "pressure", "curve", "validate")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    seed: int
    x_grid: list
    output_path: str | None
    format: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if any(not x > 0 for x in self.x_grid):
            raise UsageError("activities must be strictly positive")

    def meta(self):
        d = asdict(self)
        d["backend"] = backend_name()
        return d


def parse_grid(text):
    """``start:stop:step`` (stop included) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, step = (float(t) for t in text.split(":"))
            if step <= 0:
                raise UsageError("grid step must be positive")
            k = int(math.floor((stop - start) / step + 1e-9))
            return [round(start + i * step, 12) for i in range(k + 1)]
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad activity grid {text!r}") from None


def _x_grid(args, default):
    if args.x_grid:
        grid = parse_grid(args.x_grid)
    elif args.x is not None:
        grid = parse_grid(args.x)
    else:
        grid = list(default)
    if not grid:
        raise UsageError("empty activity grid")
    return grid


def _offspring(args):
    rho = parse_offspring(args.offspring)
    P = parse_offspring(args.root_dist) if args.root_dist else rho
    return P, rho


# -- commands -----------------------------------------------------------------
def cmd_exact(cfg, args):
    if not args.graph:
        raise UsageError("exact needs --graph")
    g = read_graph(args.graph)
    big = g.n > exact.MAX_VERTICES
    if big and not is_forest(g):
        raise UsageError(f"graph has {g.n} vertices; the exact engine handles at most {exact.MAX_VERTICES} unless it is a forest")
    rows = []
    for x in cfg.x_grid:
        if big:
            logz = tree.forest_log_partition_function(g, x)
            R = [_forest_root_probability(g, o, x) for o in range(g.n)]
            E = [None] * g.m
            z = math.exp(logz) if logz < 700 else None
        else:
            model = exact.ExactModel(g, x)
            z, logz = float(model.partition_function()), model.log_partition_function()
            R = [float(r) for r in model.monomer_probabilities()]
            E = [float(e) for e in model.dimer_probabilities()]
        rows.append(dict(x=x, kind="Z", item="", value=z))
        rows.append(dict(x=x, kind="logZ", item="", value=logz))
        rows += [dict(x=x, kind="R", item=str(o), value=r) for o, r in enumerate(R)]
        rows += [dict(x=x, kind="E", item=f"{u}-{v}", value=e) for (u, v), e in zip(g.edges.tolist(), E) if e is not None]
        rows.append(dict(x=x, kind="density", item="", value=float(np.mean(R)) if g.n else None))
        rows.append(dict(x=x, kind="pressure", item="", value=logz / g.n if g.n else None))
    return rows, ["x", "kind", "item", "value"]


def _forest_root_probability(g, o, x):
    comp = next(c for c in g.components() if o in c)
    sub = g.induced(comp)
    return tree.tree_root_probability(RootedTree.from_graph(sub, int(np.searchsorted(comp, o))), x)


def _tree_from_args(args, cfg):
    if args.graph:
        g = read_graph(args.graph)
        if not is_forest(g) or len(g.components()) != 1:
            raise UsageError("--graph must be a tree for this command")
        return RootedTree.from_graph(g, args.root)
    P, rho = _offspring(args)
    return sample_galton_watson(P, rho, args.depth, cfg.seed)


def cmd_tree(cfg, args):
    t = _tree_from_args(args, cfg)
    r_max = args.depth if args.depth is not None else t.depth
    rows = []
    for x in cfg.x_grid:
        seq = tree.truncated_sequence(t, x, r_max)
        rows += [dict(x=x, depth=r, parity="even" if r % 2 == 0 else "odd", value=v) for r, v in seq.rows()]
    return rows, ["x", "depth", "parity", "value"]


def cmd_gw(cfg, args):
    P, rho = _offspring(args)
    rows = []
    for i in range(args.samples):
        t = sample_galton_watson(P, rho, args.depth, cfg.seed, i)
        for x in cfg.x_grid:
            rows.append(dict(index=i, vertices=t.n, depth=t.depth, x=x, R=tree.tree_root_probability(t, x)))
    return rows, ["index", "vertices", "depth", "x", "R"]


def cmd_er(cfg, args):
    g = sample_erdos_renyi(args.n, args.c, cfg.seed)
    sample = None if args.sample is None else args.sample
    rows = []
    for x in cfg.x_grid:
        b = tree.empirical_density_bracket(g, args.depth, x, sample, cfg.seed)
        rows.append(dict(b.row(), lower_se=b.lower_se, upper_se=b.upper_se, n=g.n, edges=g.m))
    return rows, ["x", "r", "lower", "upper", "lower_se", "upper_se", "covered_fraction", "n", "edges"]


def cmd_fixpoint(cfg, args):
    _, rho = _offspring(args)
    rows = []
    for x in cfg.x_grid:
        res = fixedpoint.solve_fixed_point(rho, x, args.pop_size, args.depth, args.tol, cfg.seed)
        rows.append(dict(res.row(), status=res.status, stderr=res.stderr))
    return rows, ["x", "mean_even", "mean_odd", "estimate", "gap", "N", "depth", "seed", "status", "stderr"]


def cmd_pressure(cfg, args):
    P, rho = _offspring(args)
    rows = []
    for x in cfg.x_grid:
        res = fixedpoint.solve_fixed_point(rho, x, args.pop_size, args.depth, args.tol, cfg.seed)
        pop = res.population
        if args.formula in ("general", "both"):
            rows.append(fixedpoint.pressure_general(P, rho, x, pop, args.pop_size, cfg.seed).row())
        if args.formula in ("erdos_renyi", "both"):
            if rho.kind != "poisson" or P.kind != "poisson" or P.param != rho.param:
                raise UsageError("the Erdos-Renyi formula needs --offspring poisson:c and no other root law")
            rows.append(fixedpoint.pressure_er(rho.param, x, pop, args.pop_size, cfg.seed).row())
    return rows, ["x", "value", "stderr", "formula"]


def cmd_curve(cfg, args):
    P, rho = _offspring(args)
    r_list = [int(r) for r in args.r_list.split(",")]
    pts = fixedpoint.bounds_curve(P, rho, cfg.x_grid, r_list, args.pop_size, cfg.seed)
    return [asdict(p) for p in pts], ["x", "r", "parity", "mean", "stderr"]


DEFAULTS = {
    "exact": dict(x=[1.0]),
    "tree": dict(x=[1.0]),
    "gw": dict(x=[1.0], depth=6),
    "er": dict(x=[1.0], depth=2),
    "fixpoint": dict(x=[1.0], pop_size=fixedpoint.DEFAULT_POPULATION, depth=fixedpoint.DEFAULT_DEPTH),
    "pressure": dict(x=[1.0], pop_size=fixedpoint.DEFAULT_POPULATION, depth=fixedpoint.DEFAULT_DEPTH),
    "curve": dict(x=fixedpoint.default_x_grid(), pop_size=10**4),
    "validate": dict(x=[1.0]),
}

RUNNERS = dict(
    exact=cmd_exact, tree=cmd_tree, gw=cmd_gw, er=cmd_er,
    fixpoint=cmd_fixpoint, pressure=cmd_pressure, curve=cmd_curve,
)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--x", help="activity, or a comma-separated list")
    common.add_argument("--x-grid", help="start:stop:step (stop included)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--threads", type=int, default=0, help="worker bound; results do not depend on it")
    common.add_argument("--offspring", default="poisson:2", help="poisson:c | fixed:k | geom:p | pmf:FILE")
    common.add_argument("--root-dist", help="root law P (defaults to --offspring)")
    common.add_argument("--pop-size", type=int)
    common.add_argument("--depth", type=int)
    common.add_argument("--tol", type=float, default=fixedpoint.DEFAULT_TOL)
    common.add_argument("--graph", help="graph file (.json or edge-list .csv)")
    common.add_argument("--root", type=int, default=0)

    p = argparse.ArgumentParser(prog="monodimer", description="Monomer-dimer computations on graphs and random trees.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("exact", parents=[common], help="exact Z, R and dimer probabilities of a small graph")
    sub.add_parser("tree", parents=[common], help="truncated root sequence of a tree (file or sampled)")
    gw = sub.add_parser("gw", parents=[common], help="sample Galton-Watson trees and their root probabilities")
    gw.add_argument("--samples", type=int, default=10)
    er = sub.add_parser("er", parents=[common], help="localisation bracket on an Erdos-Renyi graph")
    er.add_argument("--n", type=int, default=2000)
    er.add_argument("--c", type=float, default=2.0)
    er.add_argument("--sample", type=int, help="number of sampled vertices (default: all)")
    sub.add_parser("fixpoint", parents=[common], help="population-dynamics fixed point")
    pr = sub.add_parser("pressure", parents=[common], help="limiting pressure per particle")
    pr.add_argument("--formula", choices=("general", "erdos_renyi", "both"), default="both")
    cv = sub.add_parser("curve", parents=[common], help="even/odd density bound curves")
    cv.add_argument("--r-list", default="3,4,5,6")
    va = sub.add_parser("validate", parents=[common], help="run the self-check suites")
    va.add_argument("--inject-fault", choices=FAULTS, help="negative control: corrupt one computation")
    return p


def _config(args):
    d = DEFAULTS[args.command]
    for key in ("pop_size", "depth"):
        if getattr(args, key, None) is None and key in d:
            setattr(args, key, d[key])
    grid = _x_grid(args, d["x"])
    skip = {"command", "seed", "x", "x_grid", "out", "format"}
    params = {k: v for k, v in vars(args).items() if k not in skip}
    return RunConfig(args.command, args.seed, grid, args.out, args.format, params)


def _emit(text, path):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        set_num_threads(args.threads)
        if args.command == "validate":
            suites = run_validation(cfg.seed, args.inject_fault)
            report = {"config": cfg.meta(), "passed": all(s.passed for s in suites), "suites": [s.as_dict() for s in suites]}
            _emit(json.dumps(report, indent=1) + "\n", cfg.output_path)
            return EXIT_OK if report["passed"] else EXIT_FAIL
        rows, cols = RUNNERS[args.command](cfg, args)
        _emit(format_table(rows, cols, cfg.format, cfg.meta()), cfg.output_path)
        return EXIT_OK
    except (UsageError, GraphError, DistributionError, exact.SizeError, exact.ActivityError, OSError, ValueError) as exc:
        print(f"monodimer: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
