"""Command-line entry point.

Exit codes: 0 ok, 1 usage, 2 bad data, 3 internal error.  Data goes to
files or stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .aggregate import proposals_to_graph
from .config import ConfigError, ToolConfig, load_config
from .curves import Polyline, fit_bezier, resample_polyline
from .decompose import decompose, path_points
from .documents import (
    SCHEMA_VERSION,
    PathSet,
    ProposalSet,
    atomic_write_text,
    dumps,
    load_graph,
    load_paths,
    load_proposals,
    save_graph,
    save_paths,
    save_proposals,
)
from .matching import PathProposal, cost_matrix, hungarian, set_loss
from .metrics import evaluate
from .synthetic import SyntheticSpec, generate_synthetic

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _extent(text: str) -> tuple[float, float]:
    try:
        w, h = text.lower().split("x")
        ext = (float(w), float(h))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    if ext[0] <= 0 or ext[1] <= 0:
        raise argparse.ArgumentTypeError("extent must be positive")
    return ext


def _synthetic_spec(text: str) -> SyntheticSpec:
    kw: dict = {}
    try:
        for item in filter(None, text.split(",")):
            key, val = item.split("=", 1)
            key = key.strip()
            if key in ("n_splits", "depth"):
                kw[key] = int(val)
            elif key == "jitter":
                kw[key] = float(val)
            elif key == "extent":
                kw[key] = _extent(val)
            else:
                raise argparse.ArgumentTypeError(f"unknown spec key {key!r}")
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse spec {text!r}") from None
    return SyntheticSpec(**kw)


def _config(args) -> ToolConfig:
    base = load_config(args.config) if getattr(args, "config", None) else ToolConfig()
    overrides = {}
    for name in ("alpha", "beta", "p_min", "d_max", "max_paths"):
        overrides[name] = getattr(args, name, None)
    return base.replace(**overrides)


# -- subcommands -------------------------------------------------------------------


def cmd_decompose(args) -> int:
    cfg = _config(args)
    g = load_graph(args.graph)
    paths = decompose(g, cfg.max_paths)
    ps = PathSet(g.extent, g.root, tuple(paths), tuple(tuple(path_points(g, p)) for p in paths))
    save_paths(ps, args.out)
    return EXIT_OK


def cmd_represent(args) -> int:
    cfg = _config(args)
    ps = load_paths(args.paths)
    scale = np.array(ps.extent)
    props = []
    if args.to == "polyline":
        n_cp = args.n_cp
        for pts in ps.points:
            line = Polyline(pts)
            if n_cp:
                line = resample_polyline(line, n_cp)
            props.append(PathProposal(1.0, line.points / scale))
    else:
        degree = args.degree or cfg.bezier_degree
        k = args.n_cp or max(cfg.polyline_points, degree + 1)
        n_cp = degree + 1
        for pts in ps.points:
            fit = fit_bezier(resample_polyline(Polyline(pts), k), degree)
            props.append(PathProposal(1.0, fit.curve.control_points / scale))
    save_proposals(ProposalSet(args.to, n_cp, tuple(props)), args.out)
    return EXIT_OK


def _load_pair(args):
    gts = load_proposals(args.gt)
    pred = load_proposals(args.pred)
    if gts.representation != pred.representation:
        raise ValueError(f"representation mismatch: {gts.representation} vs {pred.representation}")
    return gts.ground_truth(), list(pred.proposals)


def cmd_match(args) -> int:
    cfg = _config(args)
    gts, props = _load_pair(args)
    C = cost_matrix(gts, props, cfg.weights())
    asg = hungarian(C)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "alpha": cfg.alpha,
        "beta": cfg.beta,
        "pairs": [list(p) for p in asg.pairs],
        "total_cost": asg.total_cost,
        "cost_matrix": C.tolist(),
    }
    atomic_write_text(args.out, dumps(doc))
    return EXIT_OK


def cmd_loss(args) -> int:
    cfg = _config(args)
    gts, props = _load_pair(args)
    res = set_loss(gts, props, cfg.weights())
    sys.stdout.write(
        f"total={res.total!r}\nregression={res.regression!r}\nclassification={res.classification!r}\n"
    )
    return EXIT_OK


def cmd_aggregate(args) -> int:
    cfg = _config(args)
    props = load_proposals(args.pred)
    n_cp_out = args.n_cp_out
    if n_cp_out is None and props.representation == "bezier":
        n_cp_out = cfg.polyline_points
    g = proposals_to_graph(props.proposals, props.representation, cfg.aggregation(n_cp_out), args.extent)
    save_graph(g, args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = _config(args)
    pred = load_graph(args.pred)
    gt = load_graph(args.gt)
    report = evaluate(pred, gt, cfg.metrics())
    atomic_write_text(args.out, dumps({"schema_version": SCHEMA_VERSION, **report.as_dict()}))
    return EXIT_OK


def cmd_generate(args) -> int:
    save_graph(generate_synthetic(args.seed, args.spec), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lanepaths", description="Lane graph path decomposition, matching, aggregation and metrics.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("decompose", help="split a graph into maximal root-to-terminal paths")
    s.add_argument("--graph", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--max-paths", dest="max_paths", type=int)
    s.add_argument("--config")
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("represent", help="encode pixel paths as normalised polylines or Bezier curves")
    s.add_argument("--paths", required=True)
    s.add_argument("--to", choices=("polyline", "bezier"), required=True)
    s.add_argument("--n-cp", dest="n_cp", type=int, help="resample count (polyline: omit to keep vertices)")
    s.add_argument("--degree", type=int)
    s.add_argument("--out", required=True)
    s.add_argument("--config")
    s.set_defaults(func=cmd_represent)

    for name, func, helptext in (
        ("match", cmd_match, "optimal assignment of ground-truth paths to proposals"),
        ("loss", cmd_loss, "set loss between ground-truth paths and proposals"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--gt", required=True)
        s.add_argument("--pred", required=True)
        s.add_argument("--alpha", type=float)
        s.add_argument("--beta", type=float)
        s.add_argument("--config")
        if name == "match":
            s.add_argument("--out", required=True)
        s.set_defaults(func=func)

    s = sub.add_parser("aggregate", help="fuse proposals into a lane graph")
    s.add_argument("--pred", required=True)
    s.add_argument("--p-min", dest="p_min", type=float)
    s.add_argument("--d-max", dest="d_max", type=float)
    s.add_argument("--extent", type=_extent, required=True)
    s.add_argument("--n-cp-out", dest="n_cp_out", type=int)
    s.add_argument("--out", required=True)
    s.add_argument("--config")
    s.set_defaults(func=cmd_aggregate)

    s = sub.add_parser("eval", help="score a predicted graph against ground truth")
    s.add_argument("--pred", required=True)
    s.add_argument("--gt", required=True)
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("generate", help="write a seeded synthetic successor graph")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--spec", type=_synthetic_spec, default=SyntheticSpec(),
                   help="comma-separated n_splits=,depth=,jitter=,extent=WxH")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        # domain errors (documents, matching, fitting, empty graphs, budgets) land here
        print(f"lanepaths {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"lanepaths {args.command}: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
