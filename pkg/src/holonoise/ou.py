"""
Stationary Ornstein-Uhlenbeck squeezing noise
=============================================

The squeezing error ``dr`` along a loop side is a centered stationary
Gaussian process in the loop coordinate with covariance

    E[dr(x1) dr(x2)] = variance * exp(-bandwidth * |x1 - x2|).

Paths are sampled with the exact Gaussian transition on a uniform grid of
step ``h``:

    dr_0     ~ N(0, variance)
    dr_{k+1} = q dr_k + sqrt(variance (1 - q^2)) xi_k,    q = exp(-bandwidth h)

so every finite-dimensional marginal has exactly the target law, whatever
the step size.

Random streams
--------------
Each path draws from its own counter-based Philox stream keyed by
``(master seed, trajectory index, plane)``. A trajectory therefore sees the
same numbers no matter how trajectories are batched or distributed across
workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.signal import lfilter

from .holonomy import Plane

__all__ = [
    "OUParams",
    "NoisePath",
    "RngStream",
    "sample_path",
    "sample_paths",
    "autocorr_estimate",
    "StatCheck",
    "ou_selftest",
]

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class OUParams:
    variance: float
    bandwidth: float

    def __post_init__(self):
        if not (math.isfinite(self.variance) and self.variance >= 0):
            raise ValueError(f"OU variance must be finite and >= 0, got {self.variance!r}")
        if not (math.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise ValueError(f"OU bandwidth must be finite and > 0, got {self.bandwidth!r}")

    def covariance(self, lag: float) -> float:
        return self.variance * math.exp(-self.bandwidth * abs(lag))


@dataclass(frozen=True)
class NoisePath:
    """Noise values at ``start + k * step`` for ``k = 0..n_steps``."""

    start: float
    step: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("a noise path needs at least two grid values")
        if not self.step > 0:
            raise ValueError(f"grid step must be positive, got {self.step!r}")
        if not np.all(np.isfinite(v)):
            raise ValueError("noise values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_steps(self) -> int:
        return self.values.size - 1

    @property
    def stop(self) -> float:
        return self.start + self.n_steps * self.step

    @property
    def grid(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.values.size)


@dataclass(frozen=True)
class RngStream:
    """Key of a reproducible normal-variate stream."""

    seed: int
    index: int
    plane: Plane = Plane.X_R1

    def __post_init__(self):
        if not 0 <= self.seed <= _U64:
            raise ValueError("master seed must be an unsigned 64-bit integer")
        if not 0 <= self.index <= _U64:
            raise ValueError("trajectory index must be an unsigned 64-bit integer")
        object.__setattr__(self, "plane", Plane(self.plane))

    def generator(self) -> np.random.Generator:
        # The draw counter advances word 0; the trajectory index sits in word 2.
        bitgen = np.random.Philox(
            key=np.array([self.seed, self.plane.code], dtype=np.uint64),
            counter=np.array([0, 0, self.index, 0], dtype=np.uint64),
        )
        return np.random.Generator(bitgen)


def _grid_step(a: float, b: float, n_steps: int) -> float:
    if not (math.isfinite(a) and math.isfinite(b) and b > a):
        raise ValueError(f"noise grid needs finite b > a, got a={a!r}, b={b!r}")
    if int(n_steps) != n_steps or n_steps < 1:
        raise ValueError(f"n_steps must be a positive integer, got {n_steps!r}")
    return (b - a) / n_steps


def _propagate(params: OUParams, step: float, z: np.ndarray) -> np.ndarray:
    # z: standard normals, last axis = grid (n_steps + 1). Scaled in place.
    q = math.exp(-params.bandwidth * step)
    z[..., 0] *= math.sqrt(params.variance)
    z[..., 1:] *= math.sqrt(params.variance * -math.expm1(-2.0 * params.bandwidth * step))
    return lfilter([1.0], [1.0, -q], z, axis=-1)


def sample_path(params: OUParams, a: float, b: float, n_steps: int, rng) -> NoisePath:
    """
    Draw one stationary OU path on ``n_steps`` equal steps over ``[a, b]``.

    ``rng`` is an :class:`RngStream` key or a ``numpy.random.Generator``.
    """
    step = _grid_step(a, b, n_steps)
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    z = gen.standard_normal(int(n_steps) + 1)
    return NoisePath(a, step, _propagate(params, step, z))


def sample_paths(
    params: OUParams,
    a: float,
    b: float,
    n_steps: int,
    seed: int,
    indices: Iterable[int],
    plane: Plane = Plane.X_R1,
) -> np.ndarray:
    """
    Batch of paths for trajectory ``indices``, shape ``(len(indices), n_steps + 1)``.

    Row ``i`` is bit-identical to
    ``sample_path(params, a, b, n_steps, RngStream(seed, indices[i], plane)).values``.
    """
    step = _grid_step(a, b, n_steps)
    indices = list(indices)
    z = np.empty((len(indices), int(n_steps) + 1))
    for row, idx in zip(z, indices):
        RngStream(seed, idx, plane).generator().standard_normal(out=row)
    if params.variance == 0.0:
        return np.zeros_like(z)
    return _propagate(params, step, z)


def _as_matrix(paths) -> np.ndarray:
    if isinstance(paths, NoisePath):
        paths = [paths]
    if isinstance(paths, np.ndarray):
        m = np.atleast_2d(paths)
    else:
        paths = list(paths)
        if not paths:
            raise ValueError("autocorrelation needs at least one path")
        m = np.stack([p.values if isinstance(p, NoisePath) else np.asarray(p, dtype=float) for p in paths])
    if m.size == 0:
        raise ValueError("autocorrelation needs at least one path")
    return m


def autocorr_estimate(paths, lag: int, mean: float | None = 0.0) -> float:
    """
    Pooled sample autocovariance at integer ``lag`` (in grid steps).

    With the known process mean (``mean=0`` by default) the estimator
    ``sum x_k x_{k+lag} / n_pairs`` is unbiased. ``mean=None`` subtracts the
    pooled sample mean instead.
    """
    m = _as_matrix(paths)
    lag = int(lag)
    if not 0 <= lag < m.shape[1]:
        raise ValueError(f"lag {lag} outside path length {m.shape[1]}")
    if mean is None:
        mean = float(m.mean())
    x = m - mean
    prods = x[:, : x.shape[1] - lag] * x[:, lag:]
    return float(prods.mean())


@dataclass(frozen=True)
class StatCheck:
    name: str
    estimate: float
    expected: float
    stderr: float
    nsigma: float

    @property
    def z(self) -> float:
        if self.stderr == 0.0:
            return 0.0 if self.estimate == self.expected else math.inf
        return (self.estimate - self.expected) / self.stderr

    @property
    def passed(self) -> bool:
        return abs(self.z) <= self.nsigma

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (
            f"{tag} {self.name}: estimate={self.estimate:.6e} expected={self.expected:.6e} "
            f"stderr={self.stderr:.3e} z={self.z:+.2f}"
        )


def _check(name, per_path: np.ndarray, expected: float, nsigma: float) -> StatCheck:
    # Paths are independent, so the spread of per-path statistics gives the error bar.
    n = per_path.size
    est = float(per_path.mean())
    se = float(per_path.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return StatCheck(name, est, expected, se, nsigma)


def ou_selftest(
    params: OUParams,
    n_paths: int = 100_000,
    n_steps: int = 1024,
    length: float = 1.0,
    lags: Sequence[int] = (1, 16, 64, 256),
    seed: int = 0,
    nsigma: float = 4.0,
    expected_bandwidth: float | None = None,
    batch: int = 4096,
) -> list[StatCheck]:
    """
    Moment and autocorrelation checks of the sampler against the target law.

    Draws ``n_paths`` independent paths per plane and tests: pooled mean and
    variance, lag-``k`` autocovariance, the variance at the first and last
    grid index (stationarity), and the cross-covariance between the two
    planes' streams (independence). ``expected_bandwidth`` overrides the
    bandwidth used for the *expectations only*, which lets a caller confirm
    the test detects a mis-specified process.
    """
    step = _grid_step(0.0, length, n_steps)
    bw = params.bandwidth if expected_bandwidth is None else expected_bandwidth
    lags = [int(k) for k in lags if 0 < int(k) <= n_steps]
    stats: dict[str, list[np.ndarray]] = {}

    def push(key, arr):
        stats.setdefault(key, []).append(arr)

    for lo in range(0, n_paths, batch):
        idx = range(lo, min(lo + batch, n_paths))
        x = sample_paths(params, 0.0, length, n_steps, seed, idx, Plane.X_R1)
        y = sample_paths(params, 0.0, length, n_steps, seed, idx, Plane.Y_R1)
        push("mean", x.mean(axis=1))
        push("variance", (x * x).mean(axis=1))
        for k in lags:
            push(f"autocov[lag={k}]", (x[:, :-k] * x[:, k:]).mean(axis=1))
        push("variance[first index]", x[:, 0] ** 2)
        push("variance[last index]", x[:, -1] ** 2)
        push("cross-plane covariance", (x * y).mean(axis=1))

    expected = {
        "mean": 0.0,
        "variance": params.variance,
        "variance[first index]": params.variance,
        "variance[last index]": params.variance,
        "cross-plane covariance": 0.0,
    }
    for k in lags:
        expected[f"autocov[lag={k}]"] = params.variance * math.exp(-bw * k * step)
    return [_check(name, np.concatenate(parts), expected[name], nsigma) for name, parts in stats.items()]
