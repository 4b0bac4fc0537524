"""Command-line front end.

Subcommands: ``generate`` (synthetic datasets), ``cluster`` (fit and write
a report), ``eval`` (score two label files), ``sweep`` (grid over alpha and
lambda).  Exit codes: 0 success, 1 usage or validation problems, 2 numeric
failures.  The ``MVSC_THREADS`` environment variable caps worker counts.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .admm import AdmmConfig
from .data import (MultiViewDataset, SyntheticSpec, generate_synthetic,
                   load_dataset, save_dataset)
from .errors import NumericError, ValidationError
from .graph import write_edge_list
from .metrics import accuracy, nmi
from .report import RunReport
from .solver import SolverConfig, fit

logger = logging.getLogger("mvsc")


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mvsc",
                     description="Multi-view subspace clustering on an "
                                 "adaptively learned neighbour graph.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="write a synthetic dataset")
    gen.add_argument("--n", type=int, required=True, help="instance count")
    gen.add_argument("--views", type=int, default=3)
    gen.add_argument("--clusters", type=int, default=2)
    gen.add_argument("--dim", type=int, default=6, help="features per view")
    gen.add_argument("--mean-separation", type=float, default=4.0)
    gen.add_argument("--corrupt", type=float, default=0.0, metavar="FRACTION",
                     help="fraction of columns per view to corrupt")
    gen.add_argument("--sigma-scale", type=float, default=0.3,
                     help="noise variance per entry is this times the column norm")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", "-o", required=True, metavar="DIR")
    gen.set_defaults(func=cmd_generate)

    clu = sub.add_parser("cluster", help="fit a dataset and write a report")
    clu.add_argument("manifest", help="dataset manifest JSON")
    _add_solver_flags(clu)
    clu.add_argument("--seed", type=int, default=0)
    clu.add_argument("--out", default="report.json", help="report path")
    clu.add_argument("--labels-out", default=None,
                     help="labels CSV path (default: report stem + .labels.csv)")
    clu.add_argument("--edges-out", default=None,
                     help="edge list path (default: report stem + .edges.csv)")
    clu.add_argument("--timings", action="store_true",
                     help="include wall-clock timings in the report "
                          "(makes repeated runs differ byte-wise)")
    clu.set_defaults(func=cmd_cluster)

    ev = sub.add_parser("eval", help="score predicted labels against truth")
    ev.add_argument("pred", help="predicted labels CSV")
    ev.add_argument("truth", help="ground-truth labels CSV")
    ev.set_defaults(func=cmd_eval)

    sw = sub.add_parser("sweep", help="grid search over alpha and lambda")
    sw.add_argument("manifest")
    sw.add_argument("--alphas", required=True,
                    help="comma list (0.1,1,10) or logspace LO:HI:NUM")
    sw.add_argument("--lambdas", required=True,
                    help="comma list (0.1,1,10) or logspace LO:HI:NUM")
    sw.add_argument("--variant", choices=("mscam", "mscan"), default="mscam")
    sw.add_argument("--c", type=int, required=True)
    sw.add_argument("--k", type=int, default=9)
    sw.add_argument("--seeds", default="0", help="comma list of seeds")
    sw.add_argument("--out", default="sweep.csv")
    sw.set_defaults(func=cmd_sweep)

    return parser


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--variant", choices=("mscam", "mscan"), default="mscam")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--lambda", type=float, default=1.0, dest="lambda_")
    p.add_argument("--k", type=int, default=9)
    p.add_argument("--c", type=int, required=True, help="number of clusters")
    p.add_argument("--no-lambda-adapt", action="store_true",
                   help="keep the smoothing weight fixed")


def cmd_generate(args) -> int:
    spec = SyntheticSpec(n=args.n, views=args.views, clusters=args.clusters,
                         mean_separation=args.mean_separation,
                         noise_sigma_scale=args.sigma_scale,
                         corruption_fraction=args.corrupt,
                         seed=args.seed, dim=args.dim)
    data = generate_synthetic(spec)
    manifest = save_dataset(data, args.out)
    logger.info("wrote %s (%d views, n=%d)", manifest, data.n_views, data.n)
    return 0


def cmd_cluster(args) -> int:
    t0 = time.perf_counter()
    data = load_dataset(args.manifest)
    load_s = time.perf_counter() - t0

    config = SolverConfig(c=args.c, alpha=args.alpha, lam=args.lambda_,
                          k=args.k, variant=args.variant,
                          lambda_adapt=not args.no_lambda_adapt,
                          seed=args.seed, admm=AdmmConfig())
    t0 = time.perf_counter()
    result = fit(data, config, workers=_env_workers())
    fit_s = time.perf_counter() - t0

    out = Path(args.out)
    labels_out = Path(args.labels_out) if args.labels_out else out.with_suffix(".labels.csv")
    edges_out = Path(args.edges_out) if args.edges_out else out.with_suffix(".edges.csv")

    t0 = time.perf_counter()
    np.savetxt(labels_out, result.labels, fmt="%d")
    write_edge_list(result.graph, edges_out)
    timings = None
    if args.timings:
        timings = dict(result.timings or {})
        timings["load_s"] = load_s
        timings["fit_s"] = fit_s
    report = RunReport.build(data, config, result, timings=timings)
    out.write_text(report.to_json())
    write_s = time.perf_counter() - t0

    logger.info("components=%d converged=%s acc=%s (load %.2fs fit %.2fs write %.2fs)",
                result.component_count, result.converged,
                None if result.metrics is None else f"{result.metrics['acc']:.3f}",
                load_s, fit_s, write_s)
    return 0


def cmd_eval(args) -> int:
    pred = _read_labels(args.pred)
    truth = _read_labels(args.truth)
    scores = {"acc": accuracy(pred, truth), "nmi": nmi(pred, truth)}
    print(json.dumps(scores))
    return 0


def cmd_sweep(args) -> int:
    data = load_dataset(args.manifest)
    alphas = sorted(_parse_grid(args.alphas, "alphas"))
    lambdas = sorted(_parse_grid(args.lambdas, "lambdas"))
    seeds = [int(s) for s in args.seeds.split(",") if s != ""]
    if not seeds:
        raise ValidationError("need at least one seed")
    grid = [(a, l) for a in alphas for l in lambdas]

    def one(point):
        alpha, lam = point
        accs, nmis = [], []
        try:
            for seed in seeds:
                config = SolverConfig(c=args.c, alpha=alpha, lam=lam, k=args.k,
                                      variant=args.variant, seed=seed)
                result = fit(data, config)
                if result.metrics is not None:
                    accs.append(result.metrics["acc"])
                    nmis.append(result.metrics["nmi"])
        except (ValidationError, NumericError) as e:
            logger.warning("grid point alpha=%g lambda=%g failed: %s", alpha, lam, e)
            return (alpha, lam, "", "", f"error:{type(e).__name__}")
        acc = repr(float(np.mean(accs))) if accs else ""
        nmi_val = repr(float(np.mean(nmis))) if nmis else ""
        return (alpha, lam, acc, nmi_val, "ok")

    workers = _env_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(one, grid))
    else:
        rows = [one(p) for p in grid]

    lines = ["alpha,lambda,acc,nmi,status"]
    for alpha, lam, acc, nmi_val, status in rows:
        lines.append(f"{alpha!r},{lam!r},{acc},{nmi_val},{status}")
    Path(args.out).write_text("\n".join(lines) + "\n")
    logger.info("wrote %s (%d grid points)", args.out, len(grid))
    return 0


def _env_workers() -> int:
    raw = os.environ.get("MVSC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning("ignoring non-integer MVSC_THREADS=%r", raw)
        return 1


def _parse_grid(text: str, name: str) -> list[float]:
    """Either an explicit comma list or LO:HI:NUM expanded log-spaced."""
    text = text.strip()
    try:
        if ":" in text:
            lo, hi, num = text.split(":")
            lo, hi, num = float(lo), float(hi), int(num)
            if num < 1 or lo <= 0 or hi <= 0:
                raise ValueError("logspace needs positive bounds and num >= 1")
            return [float(v) for v in np.geomspace(lo, hi, num)]
        values = [float(v) for v in text.split(",") if v != ""]
    except ValueError as e:
        raise ValidationError(f"could not parse --{name} {text!r}: {e}") from e
    if not values:
        raise ValidationError(f"--{name} is empty")
    return values


def _read_labels(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"labels file not found: {path}")
    try:
        return np.loadtxt(path, dtype=np.int64, ndmin=1)
    except ValueError as e:
        raise ValidationError(f"{path}: labels must be one integer per line ({e})") from e


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as e:
        print(f"mvsc: error: {e}", file=sys.stderr)
        return 1
    except NumericError as e:
        print(f"mvsc: numeric error: {e}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
