import math

import numpy as np
import pytest

from holonoise.holonomy import Plane
from holonoise.ou import (
    NoisePath,
    OUParams,
    RngStream,
    autocorr_estimate,
    ou_selftest,
    sample_path,
    sample_paths,
)


def test_params_validation():
    with pytest.raises(ValueError):
        OUParams(-1e-3, 1.0)
    with pytest.raises(ValueError):
        OUParams(1e-3, 0.0)


def test_zero_variance_gives_zero_path():
    p = sample_path(OUParams(0.0, 5.0), 0.0, 1.0, 64, RngStream(1, 0))
    assert not np.any(p.values)
    assert autocorr_estimate([p], 0) == 0.0


def test_grid_layout():
    p = sample_path(OUParams(1e-3, 5.0), -1.0, 2.0, 30, RngStream(1, 0))
    assert p.n_steps == 30
    assert abs(p.step * 30 - 3.0) < 1e-12
    assert abs(p.stop - 2.0) < 1e-12
    assert p.grid[0] == -1.0


def test_invalid_grid():
    with pytest.raises(ValueError):
        sample_path(OUParams(1e-3, 5.0), 1.0, 1.0, 10, RngStream(1, 0))
    with pytest.raises(ValueError):
        sample_path(OUParams(1e-3, 5.0), 0.0, 1.0, 0, RngStream(1, 0))


def test_noise_path_validation():
    with pytest.raises(ValueError):
        NoisePath(0.0, 0.1, [0.0])
    with pytest.raises(ValueError):
        NoisePath(0.0, 0.1, [0.0, math.nan])


def test_stream_determinism_and_separation():
    params = OUParams(1e-3, 5.0)
    a = sample_path(params, 0, 1, 256, RngStream(7, 3, Plane.X_R1)).values
    b = sample_path(params, 0, 1, 256, RngStream(7, 3, Plane.X_R1)).values
    assert np.array_equal(a, b)
    for other in (RngStream(7, 4, Plane.X_R1), RngStream(7, 3, Plane.Y_R1), RngStream(8, 3, Plane.X_R1)):
        assert not np.array_equal(a, sample_path(params, 0, 1, 256, other).values)


def test_batch_rows_match_single_paths():
    params = OUParams(2e-3, 3.0)
    batch = sample_paths(params, 0.0, 1.0, 128, 11, [5, 0, 17], Plane.Y_R1)
    for row, idx in zip(batch, [5, 0, 17]):
        assert np.array_equal(row, sample_path(params, 0.0, 1.0, 128, RngStream(11, idx, Plane.Y_R1)).values)


def test_stream_key_range():
    with pytest.raises(ValueError):
        RngStream(-1, 0)
    RngStream((1 << 64) - 1, (1 << 64) - 1).generator().standard_normal()


def test_uncorrelated_limit():
    # bandwidth * step = 50: one-step correlation e^{-50}, effectively iid N(0, var).
    params = OUParams(0.01, 5000.0)
    paths = sample_paths(params, 0.0, 1.0, 500, 3, range(400))
    n = paths.size
    assert abs(autocorr_estimate(paths, 0) - 0.01) < 4 * 0.01 * math.sqrt(2 / n)
    assert abs(autocorr_estimate(paths, 1)) < 4 * 0.01 / math.sqrt(n)


def _effective_variance_band(var, q, n):
    # Std of the pooled second moment of a stationary AR(1) sample of length n:
    # Var(x^2) = 2 var^2 and lag-k correlation of x^2 is q^{2k}.
    r = q * q
    inflation = 1 + 2 * sum((1 - k / n) * r**k for k in range(1, n))
    return var * math.sqrt(2 * inflation / n)


def test_pooled_variance_with_correlation_band():
    var, gamma, step = 0.01, 5.0, 0.01
    n_paths, n_steps = 1000, 999  # 10^6 pooled samples
    paths = sample_paths(OUParams(var, gamma), 0.0, n_steps * step, n_steps, 21, range(n_paths))
    est = float(np.mean(paths**2))
    q = math.exp(-gamma * step)
    per_path = _effective_variance_band(var, q, n_steps + 1)
    band = 3 * per_path / math.sqrt(n_paths)
    assert abs(est - var) < band


def test_autocorr_estimate_errors():
    with pytest.raises(ValueError):
        autocorr_estimate([], 0)
    p = sample_path(OUParams(1e-3, 5.0), 0, 1, 8, RngStream(1, 0))
    with pytest.raises(ValueError):
        autocorr_estimate([p], 9)


def test_autocorr_recovers_exponential_decay():
    params = OUParams(1e-3, 10.0)
    paths = sample_paths(params, 0.0, 1.0, 256, 2, range(4000))
    for lag in (0, 8, 32):
        est = autocorr_estimate(paths, lag)
        expected = params.covariance(lag / 256)
        assert abs(est - expected) < 0.05 * 1e-3


def test_selftest_passes_and_detects_wrong_bandwidth():
    params = OUParams(1e-3, 10.0)
    checks = ou_selftest(params, n_paths=20_000, n_steps=256, seed=4)
    assert all(c.passed for c in checks), [c.line() for c in checks if not c.passed]
    wrong = ou_selftest(params, n_paths=20_000, n_steps=256, seed=4, expected_bandwidth=5.0)
    assert not all(c.passed for c in wrong)
    failed = {c.name for c in wrong if not c.passed}
    assert any(name.startswith("autocov") for name in failed)


def test_selftest_zero_variance_trivially_passes():
    checks = ou_selftest(OUParams(0.0, 10.0), n_paths=100, n_steps=32)
    assert all(c.passed for c in checks)
