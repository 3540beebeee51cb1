"""Monte Carlo ground truth for the boundary likelihood-ratio statistic.

Draws ``Z ~ N_K(0, Σ)``, whitens it, and evaluates

    LRS = ||P_C(z̃)||² - ||P_{C0}(z̃)||²

with both projections computed by NNLS on the whitened cone.  The empirical
distribution is then compared with a chi-bar-squared mixture.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Tuple

import numpy as np

from . import kernels
from .conegeom import Cone, build_cone, project_cone
from .errors import NoConvergence
from .mixture import MixtureDist, mixture_cdf, mixture_quantile
from .numkit import cholesky
from .streams import DEFAULT_BLOCK, block_layout, map_blocks
from .structs import CovSpec, PartitionSpec

ZERO_ATOM = 1e-10
ALPHA = 0.05
REPORT_FIELDS = ("d_inf", "tail_ratio", "q50_emp", "q50_mix", "q95_emp", "q95_mix", "n_draws", "seed")


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    sigma: CovSpec
    partition: PartitionSpec
    n_draws: int = 100_000
    seed: int = 0
    streams: int = 1
    block: int = DEFAULT_BLOCK

    def __post_init__(self):
        if self.n_draws < 1:
            raise ValueError("n_draws must be >= 1")
        if self.streams < 1:
            raise ValueError("streams must be >= 1")
        if self.partition.k != self.sigma.k:
            raise ValueError("partition and covariance dimensions differ")


@dataclass(frozen=True)
class DiagnosticsReport:
    d_inf: float
    tail_ratio: float
    q50_emp: float
    q50_mix: float
    q95_emp: float
    q95_mix: float
    n_draws: int
    seed: int

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in REPORT_FIELDS}


@dataclass(frozen=True, eq=False)
class Simulation:
    """Raw simulator output: one LRS value and face dimensions per draw."""

    lrs: np.ndarray
    dim_full: np.ndarray
    dim_null: np.ndarray


def sample_mvn(sigma, n: int, seed=0, block: int = DEFAULT_BLOCK, jobs: int = 1) -> np.ndarray:
    """``n`` draws from ``N(0, Σ)`` as an ``(n, K)`` array, via the Cholesky factor."""
    s = sigma.sigma if isinstance(sigma, CovSpec) else np.asarray(sigma, dtype=float)
    L = cholesky(s)
    k = L.shape[0]

    def run(size, ss):
        return np.random.default_rng(ss).standard_normal((size, k)) @ L.T

    parts = map_blocks(run, block_layout(seed, n, block), jobs)
    return np.concatenate(parts, axis=0) if parts else np.empty((0, k))


def whiten(cone: Cone, z: np.ndarray) -> np.ndarray:
    """``z̃ = D^{1/2} Pᵀ z`` applied to each row of ``z``."""
    return np.asarray(z, dtype=float) @ cone.generators.T


def lrt_statistic(cone: Cone, part: PartitionSpec, z_white) -> float:
    """LRS for one whitened draw; the null cone is spanned by the nuisance generators."""
    full, _ = project_cone(cone, z_white, None)
    null, _ = project_cone(cone, z_white, part.nuisance)
    v = float(full @ full - null @ null)
    return v if v > 0.0 else 0.0


def simulate(cfg: ExperimentConfig, cone: Optional[Cone] = None) -> Simulation:
    """Simulate ``cfg.n_draws`` LRS values block by block (bit-reproducible)."""
    cone = build_cone(cfg.sigma) if cone is None else cone
    k = cone.k
    L = cholesky(cfg.sigma.sigma)
    A = cone.generators
    G = np.ascontiguousarray(cone.gram)
    null_allowed = np.zeros(k, dtype=np.int32)
    null_allowed[list(cfg.partition.nuisance)] = 1
    max_iter = 10 * k

    def run(size, ss):
        z = np.random.default_rng(ss).standard_normal((size, k)) @ L.T
        c = np.ascontiguousarray(whiten(cone, z) @ A)
        lrs, dfull, dnull, status = kernels.lrs_batch(G, c, null_allowed, max_iter)
        if status < 0:
            raise NoConvergence("NNLS projection did not terminate")
        return lrs, dfull, dnull

    parts = map_blocks(run, block_layout(cfg.seed, cfg.n_draws, cfg.block), cfg.streams)
    lrs = np.concatenate([p[0] for p in parts])
    lrs[lrs < ZERO_ATOM] = 0.0
    return Simulation(lrs, np.concatenate([p[1] for p in parts]),
                      np.concatenate([p[2] for p in parts]))


def _jump_table(sample: np.ndarray):
    x = np.sort(np.where(sample < ZERO_ATOM, 0.0, sample))
    values, counts = np.unique(x, return_counts=True)
    cum = np.cumsum(counts)
    n = x.size
    return x, values, cum / n, (cum - counts) / n


def sup_distance(sample, dist: MixtureDist) -> float:
    """``sup_{t >= 0} |F_emp(t) - F_mix(t)|``, evaluated on both sides of every jump."""
    _, values, f_right, f_left = _jump_table(np.asarray(sample, dtype=float))
    fm = mixture_cdf(dist, values)
    d = np.abs(f_right - fm)
    pos = values > 0
    d_left = np.abs(f_left[pos] - fm[pos])
    # t = 0 itself: both CDFs are right-continuous there
    at_zero = f_right[0] if values[0] == 0.0 else 0.0
    cands = [float(d.max()), abs(at_zero - float(dist.weights.weights[0]))]
    if d_left.size:
        cands.append(float(d_left.max()))
    return max(cands)


def empirical_quantile(sorted_sample: np.ndarray, q: float) -> float:
    """Smallest order statistic ``x`` with ``F_emp(x) >= q``."""
    n = sorted_sample.size
    i = max(0, int(math.ceil(q * n - 1e-9)) - 1)
    return float(sorted_sample[i])


def diagnostics(sample, dist: MixtureDist, seed: int = 0) -> DiagnosticsReport:
    sample = np.asarray(sample, dtype=float)
    x = np.sort(np.where(sample < ZERO_ATOM, 0.0, sample))
    n = x.size
    t95 = mixture_quantile(dist, 1 - ALPHA)
    exceed = 1.0 - np.searchsorted(x, t95, side="right") / n
    return DiagnosticsReport(
        d_inf=sup_distance(x, dist),
        tail_ratio=float(exceed / ALPHA),
        q50_emp=empirical_quantile(x, 0.5),
        q50_mix=mixture_quantile(dist, 0.5),
        q95_emp=empirical_quantile(x, 0.95),
        q95_mix=t95,
        n_draws=int(n),
        seed=int(seed),
    )


def run_experiment(cfg: ExperimentConfig, dist: MixtureDist,
                   cone: Optional[Cone] = None) -> Tuple[DiagnosticsReport, Simulation]:
    """Simulate and compare with ``dist``; returns the report and the raw simulation."""
    sim = simulate(cfg, cone)
    return diagnostics(sim.lrs, dist, cfg.seed), sim


def ecdf_table(sample, dist: MixtureDist) -> np.ndarray:
    """Rows ``(t, F_emp(t), F_mix(t))`` on the jump grid of the sample plus ``t = 0``."""
    _, values, f_right, _ = _jump_table(np.asarray(sample, dtype=float))
    if values[0] != 0.0:
        values = np.concatenate([[0.0], values])
        f_right = np.concatenate([[0.0], f_right])
    return np.column_stack([values, f_right, mixture_cdf(dist, values)])


def mc_ray_weights(sim: Simulation, p: int) -> np.ndarray:
    """Frequencies of ``dim(full face) - dim(null face)`` clipped to ``0..p``.

    Exact in the orthogonal case; a diagnostic estimate otherwise.
    """
    d = np.clip(sim.dim_full.astype(int) - sim.dim_null.astype(int), 0, p)
    return np.bincount(d, minlength=p + 1)[: p + 1] / d.size
