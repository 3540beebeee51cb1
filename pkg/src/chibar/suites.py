"""Validation sweeps: each suite is a grid of simulation cells comparing
the simulated LRS with a chosen weight approximation."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from . import covgen
from .lansim import DiagnosticsReport, ExperimentConfig, run_experiment, simulate, mc_ray_weights
from .conegeom import build_cone, intrinsic_volumes_mc
from .mixture import MixtureDist
from .structs import CovSpec, PartitionSpec, WeightVector
from .weights import (DEFAULT_RANK_TOL, anisotropy_index, rank_based_weights,
                      weights_orthogonal_nuisance, weights_theorem1_approx)

SWEEP_COLUMNS = ("suite", "cell", "k", "m", "cov", "method", "delta", "d_inf", "tail_ratio",
                 "q50_emp", "q50_mix", "q95_emp", "q95_mix", "n_draws", "seed", "clipped")

SUITES = ("lemma1", "lemma2", "thm1-mild", "thm1-strong", "thm1-equicorr-sweep",
          "rank-mild", "rank-strong", "rank-equicorr-sweep", "rank-m-sweep")

K_GRID = (4, 7, 10)
EQUICORR_RHO = 0.5


@dataclass(frozen=True)
class Cell:
    k: int
    m: int
    cov: str        # identity | equicorr:RHO | mild:SEED | strong:SEED
    method: str     # orthogonal | theorem1 | rank:TOL | exact | mc:N


@dataclass(frozen=True)
class CellResult:
    suite: str
    index: int
    cell: Cell
    report: DiagnosticsReport
    delta: float
    weights: WeightVector
    cov_meta: dict = field(default_factory=dict)

    def row(self) -> dict:
        r = self.report.to_dict()
        return {"suite": self.suite, "cell": self.index, "k": self.cell.k, "m": self.cell.m,
                "cov": self.cell.cov, "method": self.cell.method, "delta": self.delta,
                "d_inf": r["d_inf"], "tail_ratio": r["tail_ratio"], "q50_emp": r["q50_emp"],
                "q50_mix": r["q50_mix"], "q95_emp": r["q95_emp"], "q95_mix": r["q95_mix"],
                "n_draws": r["n_draws"], "seed": r["seed"], "clipped": self.weights.clipped}


def resolve_cov(text: str, k: int) -> Tuple[CovSpec, dict]:
    """Parse ``identity | equicorr:RHO | file:PATH | mild:SEED | strong:SEED``."""
    kind, _, arg = text.partition(":")
    if kind == "identity":
        spec = covgen.CovGenSpec("identity", k)
    elif kind == "equicorr":
        spec = covgen.CovGenSpec("equicorr", k, rho=float(arg))
    elif kind in ("mild", "strong"):
        spec = getattr(covgen, kind)(k, int(arg))
    elif kind == "file":
        mat = covgen.load_matrix(arg)
        if mat.shape[0] != k:
            raise ValueError(f"covariance file is {mat.shape[0]}x{mat.shape[0]}, expected K={k}")
        return CovSpec(mat, label=f"file:{arg}"), {"kind": "file", "path": arg}
    else:
        raise ValueError(f"unknown covariance spec {text!r}")
    gen = covgen.generate(spec)
    meta = {"kind": spec.kind, "attempts": gen.attempts, "floor": gen.floor,
            "repaired": gen.repaired}
    return gen.cov, meta


def compute_weights(method: str, cov: CovSpec, part: PartitionSpec, seed: int = 0,
                    budget: Optional[int] = None) -> WeightVector:
    """Weights for ``method`` in ``orthogonal | exact | theorem1 | rank:TOL | mc:N``."""
    from .conegeom import intrinsic_volumes
    from .orthant import DEFAULT_POINTS

    budget = DEFAULT_POINTS if budget is None else budget
    name, _, arg = method.partition(":")
    k, m = part.k, part.m
    if name == "orthogonal":
        return weights_orthogonal_nuisance(k, m)
    if name == "exact":
        if m == 0:
            return intrinsic_volumes(build_cone(cov), budget, seed)
        if cov.is_diagonal():
            return weights_orthogonal_nuisance(k, m)
        raise ValueError("exact ray-null weights exist only for diagonal covariance; "
                         "use theorem1, rank:TOL or mc:N")
    if name == "theorem1":
        if m != 1:
            raise ValueError("theorem1 weights need exactly one nuisance parameter")
        return weights_theorem1_approx(cov, budget, seed)
    if name == "rank":
        tol = float(arg) if arg else DEFAULT_RANK_TOL
        return rank_based_weights(cov, part, tol, budget, seed)
    if name == "mc":
        n = int(float(arg)) if arg else 100_000
        if m == 0:
            return intrinsic_volumes_mc(build_cone(cov), n, seed)
        sim = simulate(ExperimentConfig(cov, part, n, seed))
        freq = mc_ray_weights(sim, part.p)
        return WeightVector.from_raw(freq, "mc_oracle", std_errors=np.sqrt(freq * (1 - freq) / n))
    raise ValueError(f"unknown weights method {method!r}")


def default_method(m: int) -> str:
    return "exact" if m == 0 else "theorem1" if m == 1 else f"rank:{DEFAULT_RANK_TOL:g}"


def suite_cells(suite: str, cov_seeds: int = 5, tol: float = DEFAULT_RANK_TOL) -> List[Cell]:
    rank = f"rank:{tol:g}"
    eq = f"equicorr:{EQUICORR_RHO:g}"
    if suite == "lemma1":
        return [Cell(k, 1, "identity", "orthogonal") for k in K_GRID]
    if suite == "lemma2":
        return [Cell(k, 3, "identity", "orthogonal") for k in K_GRID]
    if suite in ("thm1-mild", "thm1-strong", "rank-mild", "rank-strong"):
        regime = suite.split("-")[1]
        m, method = (1, "theorem1") if suite.startswith("thm1") else (3, rank)
        return [Cell(k, m, f"{regime}:{s}", method) for k in K_GRID for s in range(cov_seeds)]
    if suite == "thm1-equicorr-sweep":
        return [Cell(k, 1, eq, "theorem1") for k in range(2, 11)]
    if suite == "rank-equicorr-sweep":
        return [Cell(k, 3, eq, rank) for k in range(4, 11)]
    if suite == "rank-m-sweep":
        return [Cell(10, m, eq, rank) for m in range(1, 10)]
    raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")


def cell_seed(root: int, index: int) -> int:
    return int(np.random.SeedSequence([int(root), int(index)]).generate_state(1)[0])


def run_cell(suite: str, index: int, cell: Cell, n: int, seed: int,
             budget: Optional[int] = None) -> CellResult:
    cov, meta = resolve_cov(cell.cov, cell.k)
    part = PartitionSpec.last(cell.k, cell.m)
    # weights share the root seed so face masses are reused across cells with the same cone
    w = compute_weights(cell.method, cov, part, seed, budget)
    cfg = ExperimentConfig(cov, part, n, cell_seed(seed, index))
    report, _ = run_experiment(cfg, MixtureDist(w))
    return CellResult(suite, index, cell, report, anisotropy_index(cov), w, meta)


def run_suite(suite: str, n: int = 100_000, seed: int = 0, jobs: int = 1, cov_seeds: int = 5,
              tol: float = DEFAULT_RANK_TOL, budget: Optional[int] = None,
              progress: Optional[Callable[[CellResult], None]] = None) -> List[CellResult]:
    """Run every cell of ``suite``; results are in cell order whatever ``jobs`` is."""
    cells = suite_cells(suite, cov_seeds, tol)

    def work(item):
        i, c = item
        res = run_cell(suite, i, c, n, seed, budget)
        if progress is not None:
            progress(res)
        return res

    items = list(enumerate(cells))
    if jobs <= 1:
        return [work(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(work, items))
