"""
Monte Carlo oracle for the noise-averaged gate
==============================================

For each trajectory ``i``:

1. draw the x- and y-loop squeezing errors from streams keyed by
   ``(seed, i, plane)``;
2. reduce them to the area shifts ``alpha_i``, ``beta_i``;
3. form the pure final state ``rho_i``.

The ensemble mean of ``rho_i`` is the averaged final state. Purity and
fidelity follow from it, and their standard errors come from the delta
method on the mean matrix elements.

Reproducibility
---------------
Trajectories are processed in fixed blocks of :data:`BLOCK_SIZE` indices.
Each block yields an :class:`EnsembleAccumulator`. Accumulators are combined
by a pairwise tree over block order. Neither the batching nor the final sum
depends on the worker count, so results are bit-identical for any number of
workers.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytic import ScenarioParams, analytic_purity, rho_ideal
from .holonomy import Plane, alpha_from_values, beta_from_values, realized_density_batch
from .ou import sample_paths
from .qubit import DensityMatrix, purity

__all__ = [
    "BLOCK_SIZE",
    "MCConfig",
    "EnsembleAccumulator",
    "MCResult",
    "merge",
    "reduce_accumulators",
    "perturbation_samples",
    "trajectory_densities",
    "accumulate_block",
    "run_ensemble",
    "ConvergenceRow",
    "convergence_sweep",
    "resolve_workers",
]

BLOCK_SIZE = 1024
_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class MCConfig:
    scenario: ScenarioParams
    n_trajectories: int = 100_000
    n_grid_steps: int = 1024
    master_seed: int = 0

    def __post_init__(self):
        for name in ("n_trajectories", "n_grid_steps"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if int(self.master_seed) != self.master_seed or not 0 <= self.master_seed <= _U64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")


# Per-trajectory features, in this order:
#   0..3  deviation of (Re rho00, Re rho11, Re rho01, Im rho01) from the ideal state
#   4..9  alpha, alpha^2, alpha^4, beta, beta^2, beta^4
_N_RHO = 4
_N_FEAT = 10


@dataclass
class EnsembleAccumulator:
    """
    Additive sufficient statistics of a contiguous range of trajectories.

    ``sums`` holds the per-feature sums and ``outer`` the sums of pairwise
    products of the four density-matrix features (full covariance, needed
    for the delta method). The density features are deviations from the
    noise-free state, so an unperturbed ensemble sums to exactly zero.
    """

    count: int = 0
    sums: np.ndarray = field(default_factory=lambda: np.zeros(_N_FEAT))
    outer: np.ndarray = field(default_factory=lambda: np.zeros((_N_RHO, _N_RHO)))
    first: int | None = None

    @classmethod
    def from_features(cls, feats: np.ndarray, first: int) -> "EnsembleAccumulator":
        feats = np.asarray(feats, dtype=float)
        rho = feats[:, :_N_RHO]
        return cls(feats.shape[0], feats.sum(axis=0), rho.T @ rho, first)


def merge(a: EnsembleAccumulator, b: EnsembleAccumulator) -> EnsembleAccumulator:
    """Sum of two accumulators. Exactly commutative; associative up to rounding."""
    firsts = [f for f in (a.first, b.first) if f is not None]
    return EnsembleAccumulator(
        a.count + b.count,
        a.sums + b.sums,
        a.outer + b.outer,
        min(firsts) if firsts else None,
    )


def reduce_accumulators(accs) -> EnsembleAccumulator:
    """
    Pairwise-tree reduction in trajectory order.

    Accumulators are sorted by their first trajectory index before reduction,
    so any permutation of the same pieces gives bit-identical sums. Empty
    accumulators are dropped so they cannot change the tree shape.
    """
    items = sorted((acc for acc in accs if acc.count), key=lambda acc: acc.first)
    if not items:
        return EnsembleAccumulator()
    while len(items) > 1:
        nxt = [merge(items[k], items[k + 1]) for k in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def _ideal_features(s: ScenarioParams) -> np.ndarray:
    r = rho_ideal(s.psi).mat
    return np.array([r[0, 0].real, r[1, 1].real, r[0, 1].real, r[0, 1].imag])


def perturbation_samples(cfg: MCConfig, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
    """Area shifts ``(alpha, beta)`` of trajectories ``start..stop-1``."""
    s = cfg.scenario
    idx = range(start, stop)
    l1, l2 = s.loops.loop_I, s.loops.loop_II
    n = cfg.n_grid_steps
    px = sample_paths(s.noise_x, l1.a, l1.b, n, cfg.master_seed, idx, Plane.X_R1)
    py = sample_paths(s.noise_y, l2.a, l2.b, n, cfg.master_seed, idx, Plane.Y_R1)
    alpha = alpha_from_values(px, l1.d, l1.length / n)
    beta = beta_from_values(py, l2.d, l2.length / n)
    return alpha, beta


def trajectory_densities(cfg: MCConfig, start: int, stop: int) -> np.ndarray:
    """Final density matrices of trajectories ``start..stop-1``, shape ``(n, 2, 2)``."""
    alpha, beta = perturbation_samples(cfg, start, stop)
    return realized_density_batch(alpha, beta, cfg.scenario.psi)


def accumulate_block(cfg: MCConfig, start: int, stop: int) -> EnsembleAccumulator:
    alpha, beta = perturbation_samples(cfg, start, stop)
    rho = realized_density_batch(alpha, beta, cfg.scenario.psi)
    feats = np.empty((stop - start, _N_FEAT))
    feats[:, 0] = rho[:, 0, 0].real
    feats[:, 1] = rho[:, 1, 1].real
    feats[:, 2] = rho[:, 0, 1].real
    feats[:, 3] = rho[:, 0, 1].imag
    feats[:, :_N_RHO] -= _ideal_features(cfg.scenario)
    a2, b2 = alpha * alpha, beta * beta
    feats[:, 4:] = np.column_stack([alpha, a2, a2 * a2, beta, b2, b2 * b2])
    return EnsembleAccumulator.from_features(feats, start)


def _block_task(args):
    cfg, start, stop = args
    return accumulate_block(cfg, start, stop)


def resolve_workers(workers) -> int:
    if workers in (None, "max", 0):
        return os.cpu_count() or 1
    workers = int(workers)
    if workers < 1:
        raise ValueError("workers must be >= 1 or 'max'")
    return workers


def _blocks(bounds) -> list[tuple[int, int]]:
    return [(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def _run_blocks(cfg: MCConfig, blocks, workers) -> list[EnsembleAccumulator]:
    workers = resolve_workers(workers)
    tasks = [(cfg, lo, hi) for lo, hi in blocks]
    if workers == 1 or len(tasks) == 1:
        return [_block_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_block_task, tasks))


@dataclass(frozen=True)
class MCResult:
    rho_bar: DensityMatrix
    purity_mc: float
    purity_stderr: float
    fidelity_mc: float
    fidelity_stderr: float
    mean_alpha: float
    mean_beta: float
    mean_alpha_sq: float
    n: int
    alpha_stderr: float = 0.0
    beta_stderr: float = 0.0
    alpha_sq_stderr: float = 0.0
    mean_beta_sq: float = 0.0
    beta_sq_stderr: float = 0.0
    linear_law_residual: float = 0.0
    linear_law_stderr: float = 0.0


def _mean_and_stderr(s1: float, s2: float, n: int) -> tuple[float, float]:
    mean = s1 / n
    if n < 2:
        return mean, 0.0
    var = max(s2 - s1 * mean, 0.0) / (n - 1)
    return mean, math.sqrt(var / n)


def _finalize(acc: EnsembleAccumulator, s: ScenarioParams) -> MCResult:
    n = acc.count
    ref = _ideal_features(s)
    dev_mean = acc.sums[:_N_RHO] / n
    f = ref + dev_mean
    r01 = complex(f[2], f[3])
    rho_bar = DensityMatrix(np.array([[f[0], r01], [r01.conjugate(), f[1]]]), atol=None)
    rho0 = rho_ideal(s.psi).mat

    if n > 1:
        cov = (acc.outer - n * np.outer(dev_mean, dev_mean)) / (n - 1)
        cov_mean = cov / n
    else:
        cov_mean = np.zeros((_N_RHO, _N_RHO))

    def se(grad):
        return math.sqrt(max(float(grad @ cov_mean @ grad), 0.0))

    pur = purity(rho_bar)
    fid = float(rho0[0, 0].real * f[0] + rho0[1, 1].real * f[1] + 2.0 * (rho0[0, 1].real * f[2] + rho0[0, 1].imag * f[3]))
    g_pur = np.array([2.0 * f[0], 2.0 * f[1], 4.0 * f[2], 4.0 * f[3]])
    g_fid = np.array([rho0[0, 0].real, rho0[1, 1].real, 2.0 * rho0[0, 1].real, 2.0 * rho0[0, 1].imag])
    se_pur, se_fid = se(g_pur), se(g_fid)

    ma, se_a = _mean_and_stderr(acc.sums[4], acc.sums[5], n)
    ma2, se_a2 = _mean_and_stderr(acc.sums[5], acc.sums[6], n)
    mb, se_b = _mean_and_stderr(acc.sums[7], acc.sums[8], n)
    mb2, se_b2 = _mean_and_stderr(acc.sums[8], acc.sums[9], n)

    return MCResult(
        rho_bar=rho_bar,
        purity_mc=pur,
        purity_stderr=se_pur,
        fidelity_mc=fid,
        fidelity_stderr=se_fid,
        mean_alpha=ma,
        mean_beta=mb,
        mean_alpha_sq=ma2,
        n=n,
        alpha_stderr=se_a,
        beta_stderr=se_b,
        alpha_sq_stderr=se_a2,
        mean_beta_sq=mb2,
        beta_sq_stderr=se_b2,
        linear_law_residual=(pur - 1.0) - 2.0 * (fid - 1.0),
        # quadrature combination of the two error bars
        linear_law_stderr=math.hypot(se_pur, 2.0 * se_fid),
    )


def run_ensemble(cfg: MCConfig, workers=1) -> MCResult:
    """
    Average ``cfg.n_trajectories`` noise realizations of the gate.

    ``workers`` is the number of processes (``"max"`` for all cores). The
    result does not depend on it.
    """
    n = cfg.n_trajectories
    bounds = list(range(0, n, BLOCK_SIZE)) + [n]
    acc = reduce_accumulators(_run_blocks(cfg, _blocks(bounds), workers))
    return _finalize(acc, cfg.scenario)


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    purity_mc: float
    purity_stderr: float
    purity_analytic: float

    @property
    def abs_error(self) -> float:
        return abs(self.purity_mc - self.purity_analytic)


def convergence_sweep(cfg: MCConfig, n_values, workers=1) -> list[ConvergenceRow]:
    """
    Purity error and standard error for nested ensemble sizes.

    The ensembles share their leading trajectories. Every trajectory is
    simulated once, up to ``max(n_values)``.
    """
    n_values = [int(v) for v in n_values]
    if not n_values or any(v < 1 for v in n_values) or n_values != sorted(n_values):
        raise ValueError("n_values must be ascending positive integers")
    top = n_values[-1]
    bounds = sorted(set(range(0, top, BLOCK_SIZE)) | set(n_values) | {0})
    blocks = _blocks(bounds)
    accs = _run_blocks(cfg, blocks, workers)
    exact = analytic_purity(cfg.scenario)
    rows = []
    for nv in n_values:
        acc = reduce_accumulators([a for (lo, hi), a in zip(blocks, accs) if hi <= nv])
        res = _finalize(acc, cfg.scenario)
        rows.append(ConvergenceRow(nv, res.purity_mc, res.purity_stderr, exact))
    return rows
