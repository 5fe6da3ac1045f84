import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holonoise.analytic import (
    ScenarioParams,
    analytic_fidelity,
    analytic_fidelity_angles,
    analytic_purity,
    analytic_purity_angles,
    averaged_density,
    noise_moments,
    rho_ideal,
)
from holonoise.holonomy import realized_density_batch
from holonoise.qubit import QubitState, fidelity, purity


def _double_integral(gamma, l, n=4000):
    # Midpoint-rule oracle for int_0^l int_0^l e^{-gamma |x - x'|} dx dx'.
    x = (np.arange(n) + 0.5) * l / n
    k = np.exp(-gamma * np.abs(x[:, None] - x[None, :]))
    return k.sum() * (l / n) ** 2


@pytest.mark.parametrize("gamma", [0.05, 1.0, 10.0])
def test_combined_moment_is_double_integral(gamma):
    s = ScenarioParams.build(sigma_x=1e-3, gamma_x=gamma, sigma_y=2e-3, gamma_y=gamma, lx=1.2, ly=0.8)
    m = noise_moments(s)
    ix = 4 * 1e-3 * math.exp(-4 * s.loops.dx) * _double_integral(gamma, 1.2)
    iy = 4 * 2e-3 * math.exp(4 * s.loops.dy) * _double_integral(gamma, 0.8)
    assert m.combined_x == pytest.approx(ix, rel=1e-5)
    assert m.combined_y == pytest.approx(iy, rel=1e-5)


def test_moments_large_bandwidth():
    s = ScenarioParams.build(gamma_x=1e4, gamma_y=1e4)
    m = noise_moments(s)
    assert m.Fx == pytest.approx(math.exp(-4 * s.loops.dx) * (1 - 1e-4), rel=1e-12)


def test_moments_small_bandwidth_limit():
    for g in (1e-12, 1e-8, 1e-5, 9.9e-5, 1.01e-4, 1e-3):
        s = ScenarioParams.build(gamma_x=g, gamma_y=g)
        m = noise_moments(s)
        limit_x = 4e-3 * math.exp(-4 * s.loops.dx)
        limit_y = 4e-3 * math.exp(4 * s.loops.dy)
        assert m.combined_x == pytest.approx(limit_x * (1 - g / 3 + g * g / 12), rel=1e-11)
        assert m.combined_y == pytest.approx(limit_y * (1 - g / 3 + g * g / 12), rel=1e-11)


def test_moments_continuous_across_series_switch():
    lo = noise_moments(ScenarioParams.build(gamma_x=0.99999e-4)).combined_x
    hi = noise_moments(ScenarioParams.build(gamma_x=1.00001e-4)).combined_x
    assert abs(lo - hi) / lo < 1e-8


def test_zero_variance_moments():
    m = noise_moments(ScenarioParams.build(sigma_x=0.0, sigma_y=0.0))
    assert (m.combined_x, m.combined_y, m.mean_alpha, m.mean_beta) == (0.0, 0.0, 0.0, 0.0)


def test_rho_ideal_examples():
    assert np.allclose(rho_ideal(QubitState.basis(0)).mat, 0.5 * np.ones((2, 2)), atol=1e-15, rtol=0)
    plus = QubitState.from_angles(math.pi / 4)
    assert np.allclose(rho_ideal(plus).mat, np.diag([1.0, 0.0]), atol=1e-15, rtol=0)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=50)
def test_rho_ideal_is_pure(phi, xi, chi):
    assert abs(purity(rho_ideal(QubitState.from_angles(phi, xi, chi))) - 1) < 1e-12


def test_averaged_density_without_noise_is_ideal():
    psi = QubitState.from_angles(0.3, 0.7, -0.4)
    s = ScenarioParams.build(sigma_x=0.0, sigma_y=0.0, psi=psi)
    assert np.max(np.abs(averaged_density(s).mat - rho_ideal(psi).mat)) < 1e-15


def test_averaged_density_basis_state_has_no_y_terms():
    psi = QubitState.basis(0)
    a = averaged_density(ScenarioParams.build(sigma_y=0.0, psi=psi)).mat
    b = averaged_density(ScenarioParams.build(sigma_y=5e-3, gamma_y=0.3, psi=psi)).mat
    assert np.array_equal(a, b)


def test_averaged_density_unit_trace_hermitian():
    s = ScenarioParams.build(phi=0.3, xi=0.2, chi=1.1)
    m = averaged_density(s).mat
    assert abs(np.trace(m) - 1) < 1e-15
    assert np.array_equal(m, m.conj().T)


def _second_order_average(s, h=1e-4):
    # Independent route: Taylor-average the exact per-realization state
    # using the Gaussian moments E[alpha], E[beta], E[alpha^2], E[beta^2].
    m = noise_moments(s)

    def rho(a, b):
        return realized_density_batch([a], [b], s.psi)[0]

    r0 = rho(0, 0)
    da = (rho(h, 0) - rho(-h, 0)) / (2 * h)
    db = (rho(0, h) - rho(0, -h)) / (2 * h)
    daa = (rho(h, 0) - 2 * r0 + rho(-h, 0)) / h**2
    dbb = (rho(0, h) - 2 * r0 + rho(0, -h)) / h**2
    return r0 + da * m.mean_alpha + db * m.mean_beta + 0.5 * daa * m.combined_x + 0.5 * dbb * m.combined_y


@pytest.mark.parametrize("seed", range(5))
def test_averaged_density_equals_second_order_expansion(seed):
    rng = np.random.default_rng(seed)
    psi = QubitState.from_angles(*rng.uniform(-math.pi, math.pi, 3))
    s = ScenarioParams.build(sigma_x=1e-6, gamma_x=rng.uniform(0.1, 20), sigma_y=1e-6, gamma_y=rng.uniform(0.1, 20), psi=psi)
    # finite-difference error ~ 1e-8 relative to the O(1e-6) correction terms
    assert np.max(np.abs(averaged_density(s).mat - _second_order_average(s))) < 1e-12


def test_purity_fidelity_examples():
    assert analytic_purity(ScenarioParams.build(sigma_x=0, sigma_y=0, phi=0.4)) == 1.0
    assert analytic_fidelity(ScenarioParams.build(sigma_x=0, sigma_y=0, phi=0.4)) == 1.0
    s = ScenarioParams.build(psi=QubitState.basis(0))
    m = noise_moments(s)
    assert analytic_purity(s) == pytest.approx(1 - 16 * 1e-3 / 10 * m.Fx, abs=1e-15)
    assert analytic_fidelity(s) == pytest.approx(1 - 8 * 1e-3 / 10 * m.Fx, abs=1e-15)


def test_angle_forms_examples():
    s = ScenarioParams.build()
    m = noise_moments(s)
    assert analytic_purity_angles(s, 0.0) == pytest.approx(1 - 16e-4 * m.Fx, abs=1e-15)
    phis = np.linspace(0, math.pi, 401)
    vals = [analytic_purity_angles(s, p) for p in phis]
    assert phis[int(np.argmin(vals[:201]))] == pytest.approx(math.pi / 4)
    assert analytic_purity_angles(s, 0.3) == pytest.approx(analytic_purity_angles(s, 0.3 + math.pi / 2), abs=1e-15)
    assert analytic_fidelity_angles(s, 0.0) > analytic_fidelity_angles(s, math.pi / 4)
    assert analytic_fidelity_angles(s, math.pi / 2) == pytest.approx(analytic_fidelity_angles(s, 0.0), abs=1e-15)


def test_angle_form_phase_condition():
    s = ScenarioParams.build()
    with pytest.raises(ValueError):
        analytic_purity_angles(s, 0.3, xi=0.5, chi=0.0)
    analytic_purity_angles(s, 0.3, xi=2 * math.pi + 0.1, chi=0.1)


scenarios = st.builds(
    dict,
    lx=st.floats(0.8, 20),
    ly=st.floats(0.05, 20),
    sigma_x=st.floats(0, 1e-2),
    gamma_x=st.floats(1e-6, 1e3),
    sigma_y=st.floats(0, 1e-2),
    gamma_y=st.floats(1e-6, 1e3),
    phi=st.floats(-math.pi, math.pi),
    xi=st.floats(-math.pi, math.pi),
    chi=st.floats(-math.pi, math.pi),
)


@given(scenarios)
def test_linear_law_exact(kw):
    s = ScenarioParams.build(**kw)
    pur, lin = analytic_purity(s), 2 * analytic_fidelity(s) - 1
    assert abs(pur - lin) <= 4 * np.finfo(float).eps * max(1.0, abs(pur), abs(lin))


@given(scenarios, st.integers(-3, 3))
def test_general_and_angle_forms_agree(kw, n):
    kw["chi"] = kw["xi"] - n * math.pi
    s = ScenarioParams.build(**kw)
    assert abs(analytic_purity(s) - analytic_purity_angles(s, kw["phi"], kw["xi"], kw["chi"])) < 1e-12
    assert abs(analytic_fidelity(s) - analytic_fidelity_angles(s, kw["phi"], kw["xi"], kw["chi"])) < 1e-12


@given(scenarios, st.floats(1e-4, 1e-2))
def test_fidelity_monotone_in_variance(kw, extra):
    s = ScenarioParams.build(**kw)
    f = analytic_fidelity(s)
    kx = dict(kw, sigma_x=kw["sigma_x"] + extra)
    ky = dict(kw, sigma_y=kw["sigma_y"] + extra)
    assert analytic_fidelity(ScenarioParams.build(**kx)) <= f + 1e-15
    assert analytic_fidelity(ScenarioParams.build(**ky)) <= f + 1e-15


def _scenario_at(var, psi):
    return ScenarioParams.build(sigma_x=var, gamma_x=3.0, sigma_y=var, gamma_y=2.0, psi=psi)


@pytest.mark.parametrize("v", [1e-5, 1e-3, 1e-2])
def test_fidelity_of_averaged_state_matches_formula(v):
    # tr(rho0 rho_bar) is linear in the variances, so the two agree beyond first order.
    psi = QubitState.from_angles(0.5, 0.9, 0.2)
    s = _scenario_at(v, psi)
    assert abs(fidelity(rho_ideal(psi), averaged_density(s)) - analytic_fidelity(s)) < 1e-12


def test_purity_of_averaged_state_differs_quadratically():
    psi = QubitState.from_angles(0.5, 0.9, 0.2)
    d = []
    for v in (1e-4, 5e-5):
        s = _scenario_at(v, psi)
        d.append(purity(averaged_density(s)) - analytic_purity(s))
    assert d[0] / d[1] == pytest.approx(4.0, rel=0.05)
