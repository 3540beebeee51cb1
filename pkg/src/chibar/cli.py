"""``chibar`` command-line front end.

Exit codes: 0 on success, 2 on usage errors, 1 on numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import datetime
import json
import os
import platform
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__, kernels
from .errors import (ChibarError, DimensionTooLarge, GenerationFailed, InvalidPartition,
                     NegativeCorrelation, NoConvergence, NotPositiveDefinite)
from .lansim import ExperimentConfig, REPORT_FIELDS, ecdf_table, run_experiment
from .mixture import MixtureDist
from .orthant import DEFAULT_POINTS
from .structs import PartitionSpec
from .suites import SUITES, SWEEP_COLUMNS, compute_weights, default_method, resolve_cov, run_suite

WEIGHTS_COLUMNS = ("j", "weight", "method", "raw_sum")
ECDF_COLUMNS = ("t", "F_emp", "F_mix")

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2
USAGE_ERRORS = (ValueError, InvalidPartition, NegativeCorrelation, DimensionTooLarge, OSError)
NUMERIC_ERRORS = (NotPositiveDefinite, NoConvergence, GenerationFailed,
                  FloatingPointError, np.linalg.LinAlgError)


class UsageError(Exception):
    pass


def default_seed() -> int:
    raw = os.environ.get("CHIBAR_DEFAULT_SEED")
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"CHIBAR_DEFAULT_SEED must be an integer, got {raw!r}")


def _fmt(x: float) -> str:
    return repr(float(x))


def _index_list(text: str) -> List[int]:
    """Comma-separated 1-based indices -> sorted 0-based list."""
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("indices are 1-based")
    return sorted(v - 1 for v in vals)


def _partition(args) -> PartitionSpec:
    if args.poi is not None or args.nuisance is not None:
        if args.m is not None:
            raise UsageError("give either --m or --poi/--nuisance, not both")
        poi = args.poi or []
        nuis = args.nuisance or []
        if args.poi is None:
            poi = [i for i in range(args.k) if i not in nuis]
        if args.nuisance is None:
            nuis = [i for i in range(args.k) if i not in poi]
        part = PartitionSpec.from_sets(poi, nuis)
        if part.k != args.k:
            raise UsageError(f"--poi/--nuisance cover {part.k} indices, --k is {args.k}")
        return part
    m = 0 if args.m is None else args.m
    if not 0 <= m < args.k:
        raise UsageError(f"need 0 <= m < k, got m={m}, k={args.k}")
    return PartitionSpec.last(args.k, m)


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")


def _manifest(args, argv: Sequence[str], extra: dict) -> dict:
    config = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    return {
        "command": args.command,
        "argv": list(argv),
        "config": config,
        "seed": args.seed,
        "version": __version__,
        "backend": kernels.IMPLEMENTATION,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
        "python": platform.python_version(),
        "numpy": np.__version__,
        **extra,
    }


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_weights(args, argv) -> int:
    part = _partition(args)
    cov, meta = resolve_cov(args.cov, args.k)
    w = compute_weights(args.method, cov, part, args.seed, args.qmc_points)
    out = _outdir(args)
    rows = [(j, _fmt(x), w.method, _fmt(w.raw_sum)) for j, x in enumerate(w.weights)]
    _write_csv(out / "weights.csv", WEIGHTS_COLUMNS, rows)
    _write_json(out / "manifest.json", _manifest(args, argv, {
        "covariance": meta, "partition": {"poi": list(part.poi), "nuisance": list(part.nuisance)},
        "clipped": w.clipped}))
    for j, x in enumerate(w.weights):
        print(f"w_{j} = {x:.6f}")
    return EXIT_OK


def cmd_simulate(args, argv) -> int:
    part = _partition(args)
    cov, meta = resolve_cov(args.cov, args.k)
    method = args.weights_method or default_method(part.m)
    w = compute_weights(method, cov, part, args.seed, args.qmc_points)
    cfg = ExperimentConfig(cov, part, args.n, args.seed, streams=args.jobs)
    report, sim = run_experiment(cfg, MixtureDist(w))
    out = _outdir(args)
    _write_json(out / "report.json", report.to_dict())
    table = ecdf_table(sim.lrs, MixtureDist(w))
    _write_csv(out / "ecdf.csv", ECDF_COLUMNS, ((_fmt(a), _fmt(b), _fmt(c)) for a, b, c in table))
    _write_json(out / "manifest.json", _manifest(args, argv, {
        "covariance": meta, "partition": {"poi": list(part.poi), "nuisance": list(part.nuisance)},
        "weights_method": method, "weights": [float(x) for x in w.weights],
        "clipped": w.clipped}))
    for f in REPORT_FIELDS:
        print(f"{f:>10s}  {getattr(report, f)}")
    return EXIT_OK


def cmd_validate(args, argv) -> int:
    out = _outdir(args)

    def progress(res):
        print(f"[{res.suite} #{res.index:02d}] K={res.cell.k} m={res.cell.m} {res.cell.cov:<14s} "
              f"{res.cell.method:<10s} d_inf={res.report.d_inf:.4f} "
              f"tail={res.report.tail_ratio:.3f}", flush=True)

    results = run_suite(args.suite, args.n, args.seed, args.jobs, args.cov_seeds, args.rank_tol,
                        args.qmc_points, progress if args.jobs <= 1 else None)
    rows = []
    cells = []
    for res in results:
        cdir = out / f"cell_{res.index:02d}"
        cdir.mkdir(exist_ok=True)
        _write_json(cdir / "report.json", res.report.to_dict())
        row = res.row()
        rows.append([_fmt(row[c]) if isinstance(row[c], float) else row[c] for c in SWEEP_COLUMNS])
        cells.append({"index": res.index, "k": res.cell.k, "m": res.cell.m, "cov": res.cell.cov,
                      "method": res.cell.method, "covariance": res.cov_meta,
                      "weights": [float(x) for x in res.weights.weights]})
    _write_csv(out / "sweep.csv", SWEEP_COLUMNS, rows)
    _write_json(out / "manifest.json", _manifest(args, argv, {"cells": cells}))
    if args.jobs > 1:
        for res in results:
            progress(res)
    return EXIT_OK


def cmd_replay(args, argv) -> int:
    with open(args.manifest, encoding="utf-8") as fh:
        man = json.load(fh)
    old = list(man.get("argv", []))
    if not old or old[0] == "replay":
        raise UsageError("manifest does not record a replayable command")
    new = []
    skip = False
    for tok in old:
        if skip:
            skip = False
            continue
        if tok == "--out":
            skip = True
            continue
        if tok.startswith("--out="):
            continue
        new.append(tok)
    # pin the seed: the original may have come from CHIBAR_DEFAULT_SEED
    new += ["--seed", str(man["seed"]), "--out", args.out]
    if args.jobs is not None:
        if man.get("command") == "weights":
            raise UsageError("--jobs does not apply to the weights command")
        new += ["--jobs", str(args.jobs)]
    return main(new)


def _positive_int(text: str) -> int:
    v = int(float(text))
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser(seed: int) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chibar",
                                description="Chi-bar-squared weights and LRT boundary simulations.")
    p.add_argument("--version", action="version", version=f"chibar {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_k=True):
        if needs_k:
            sp.add_argument("--k", type=int, required=True, help="number of parameters on the boundary")
            sp.add_argument("--m", type=int, default=None, help="number of boundary nuisances (the last m)")
            sp.add_argument("--poi", type=_index_list, default=None,
                            help="1-based indices of parameters of interest, e.g. 1,2")
            sp.add_argument("--nuisance", type=_index_list, default=None,
                            help="1-based indices of boundary nuisances")
            sp.add_argument("--cov", default="identity",
                            help="identity | equicorr:RHO | file:PATH | mild:SEED | strong:SEED")
        sp.add_argument("--seed", type=int, default=seed)
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--qmc-points", type=_positive_int, default=DEFAULT_POINTS,
                        help="QMC points per orthant probability (power of two)")

    sw = sub.add_parser("weights", help="compute mixture weights")
    common(sw)
    sw.add_argument("--method", default="exact",
                    help="orthogonal | exact | theorem1 | rank:TOL | mc:N")
    sw.set_defaults(func=cmd_weights)

    ss = sub.add_parser("simulate", help="simulate the LRS and compare with a mixture")
    common(ss)
    ss.add_argument("--n", type=_positive_int, default=100_000, help="number of draws")
    ss.add_argument("--weights-method", default=None,
                    help="as for 'weights --method'; default exact (m=0), theorem1 (m=1), rank:0.1")
    ss.add_argument("--jobs", type=_positive_int, default=1)
    ss.set_defaults(func=cmd_simulate)

    sv = sub.add_parser("validate", help="run a validation sweep")
    sv.add_argument("suite", choices=SUITES)
    common(sv, needs_k=False)
    sv.add_argument("--n", type=_positive_int, default=100_000)
    sv.add_argument("--jobs", type=_positive_int, default=1)
    sv.add_argument("--cov-seeds", type=_positive_int, default=5,
                    help="random covariance draws per K in the mild/strong suites")
    sv.add_argument("--rank-tol", type=float, default=0.1)
    sv.set_defaults(func=cmd_validate)

    sr = sub.add_parser("replay", help="re-run the command recorded in a manifest.json")
    sr.add_argument("manifest")
    sr.add_argument("--out", required=True)
    sr.add_argument("--jobs", type=_positive_int, default=None,
                    help="override the worker count; outputs are unchanged")
    sr.set_defaults(func=cmd_replay, seed=seed)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser = build_parser(default_seed())
    except UsageError as e:
        print(f"chibar: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    try:
        return args.func(args, argv)
    except UsageError as e:
        print(f"chibar: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    # numerical errors first: NotPositiveDefinite is also a ValueError
    except NUMERIC_ERRORS as e:
        print(f"chibar: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except USAGE_ERRORS as e:
        print(f"chibar: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ChibarError as e:
        print(f"chibar: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
