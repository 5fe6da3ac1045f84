"""
Closed-form noise averages
==========================

Small-noise results for the Hadamard holonomy under independent OU squeezing
errors in the two loops. Everything is first order in the noise variances.

Noise moments. With ``u = bandwidth * l``,

    F_x = e^{-4 d_x} (l_x - (1 - e^{-u_x}) / bandwidth_x)
    F_y = e^{+4 d_y} (l_y - (1 - e^{-u_y}) / bandwidth_y)

and ``E[alpha^2] ~ 8 var_x F_x / bandwidth_x``, ``E[beta^2] ~ 8 var_y F_y /
bandwidth_y`` (the "combined" moments). ``E[alpha] ~ -2 var_x l_x e^{-2 d_x}``,
``E[beta] ~ 2 var_y l_y e^{2 d_y}``.

Purity and fidelity of the averaged final state,

    I = 1 - 8 C_y |c0|^2 |c1|^2 - 2 C_x |c0^2 + c1^2|^2
    F = 1 - 4 C_y |c0|^2 |c1|^2 -   C_x |c0^2 + c1^2|^2

with ``C_x``, ``C_y`` the combined moments, so ``I = 2F - 1`` identically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .holonomy import HADAMARD, LoopPair
from .ou import OUParams
from .qubit import ALGEBRA_TOL, DensityMatrix, QubitState, density_from_pure

__all__ = [
    "SERIES_SWITCH",
    "ScenarioParams",
    "NoiseMoments",
    "noise_moments",
    "rho_ideal",
    "averaged_density",
    "analytic_purity",
    "analytic_fidelity",
    "analytic_purity_angles",
    "analytic_fidelity_angles",
]

SERIES_SWITCH = 1e-4


@dataclass(frozen=True)
class ScenarioParams:
    loops: LoopPair
    noise_x: OUParams
    noise_y: OUParams
    psi: QubitState

    @classmethod
    def build(
        cls,
        lx: float = 1.0,
        ly: float = 1.0,
        sigma_x: float = 1e-3,
        gamma_x: float = 10.0,
        sigma_y: float = 1e-3,
        gamma_y: float = 10.0,
        phi: float = 0.0,
        xi: float = 0.0,
        chi: float = 0.0,
        psi: QubitState | None = None,
    ) -> "ScenarioParams":
        """Scenario from scalar parameters; ``psi`` overrides the angle form."""
        return cls(
            LoopPair.from_lengths(lx, ly),
            OUParams(sigma_x, gamma_x),
            OUParams(sigma_y, gamma_y),
            QubitState.from_angles(phi, xi, chi) if psi is None else psi,
        )


@dataclass(frozen=True)
class NoiseMoments:
    Fx: float
    Fy: float
    combined_x: float
    combined_y: float
    mean_alpha: float
    mean_beta: float


def _relaxation_fraction(u: float) -> float:
    """``1 - (1 - e^{-u}) / u`` without cancellation at small ``u``."""
    if u < SERIES_SWITCH:
        return u * (0.5 - u * (1.0 / 6.0 - u / 24.0))
    return 1.0 + math.expm1(-u) / u


def _over_u(u: float) -> float:
    """``(1 - (1 - e^{-u}) / u) / u``, finite as ``u -> 0``."""
    if u < SERIES_SWITCH:
        return 0.5 - u * (1.0 / 6.0 - u / 24.0)
    return _relaxation_fraction(u) / u


def noise_moments(s: ScenarioParams) -> NoiseMoments:
    lx, ly, dx, dy = s.loops.lx, s.loops.ly, s.loops.dx, s.loops.dy
    vx, gx = s.noise_x.variance, s.noise_x.bandwidth
    vy, gy = s.noise_y.variance, s.noise_y.bandwidth
    ux, uy = gx * lx, gy * ly
    wx, wy = math.exp(-4.0 * dx), math.exp(4.0 * dy)
    return NoiseMoments(
        Fx=wx * lx * _relaxation_fraction(ux),
        Fy=wy * ly * _relaxation_fraction(uy),
        # 8 var F / bandwidth = 8 var e^{-+4d} l^2 * fraction(u) / u
        combined_x=8.0 * vx * wx * lx * lx * _over_u(ux),
        combined_y=8.0 * vy * wy * ly * ly * _over_u(uy),
        mean_alpha=-2.0 * vx * lx * math.exp(-2.0 * dx),
        mean_beta=2.0 * vy * ly * math.exp(2.0 * dy),
    )


def rho_ideal(psi: QubitState) -> DensityMatrix:
    """Noise-free final state ``H_0|psi><psi|H_0`` from its explicit elements."""
    c0, c1 = psi.c0, psi.c1
    a = c0.conjugate() * c1
    b = c0 * c1.conjugate()
    p = abs(c0) ** 2 - abs(c1) ** 2
    rho = 0.5 * np.array([[1 + a + b, p + a - b], [p + b - a, 1 - a - b]], dtype=complex)
    direct = density_from_pure(HADAMARD, psi).mat
    dev = np.max(np.abs(rho - direct))
    if dev > ALGEBRA_TOL:
        raise RuntimeError(f"ideal final state disagrees with H_0 conjugation by {dev:.3e}")
    return DensityMatrix(rho)


def averaged_density(s: ScenarioParams) -> DensityMatrix:
    """
    Noise-averaged final state to first order in the noise variances.

    Only ``<0|rho|0>`` and ``<0|rho|1>`` are evaluated; the other two
    elements follow from Hermiticity and unit trace. Positivity is not
    checked since the expansion may leave it when the noise is not small.
    """
    m = noise_moments(s)
    c0, c1 = s.psi.c0, s.psi.c1
    cc0, cc1 = c0.conjugate(), c1.conjugate()
    p = abs(c0) ** 2 - abs(c1) ** 2
    plus = c0 * cc1 + cc0 * c1
    minus = c0 * cc1 - cc0 * c1
    # -mean_alpha/2 and mean_beta/2 are var*l*e^{-+2d}.
    ax = -0.5 * m.mean_alpha
    by = 0.5 * m.mean_beta
    r00 = (
        0.5 * (1 + plus)
        - 2.0 * p * ax
        - 2j * minus * by
        - plus * (m.combined_x + m.combined_y)
    )
    r01 = (
        0.5 * (c0 + c1) * (cc0 - cc1)
        + 2.0 * plus * (ax + 1j * by)
        - m.combined_x * p
        + m.combined_y * minus
    )
    r00 = r00.real
    return DensityMatrix(np.array([[r00, r01], [np.conj(r01), 1.0 - r00]]), atol=None)


def _state_weights(psi: QubitState) -> tuple[float, float]:
    c0, c1 = psi.c0, psi.c1
    y_weight = abs(c0) ** 2 * abs(c1) ** 2
    x_weight = ((c0 * c0 + c1 * c1) * (c0.conjugate() ** 2 + c1.conjugate() ** 2)).real
    return x_weight, y_weight


def analytic_purity(s: ScenarioParams) -> float:
    m = noise_moments(s)
    xw, yw = _state_weights(s.psi)
    return 1.0 - 8.0 * m.combined_y * yw - 2.0 * m.combined_x * xw


def analytic_fidelity(s: ScenarioParams) -> float:
    m = noise_moments(s)
    xw, yw = _state_weights(s.psi)
    return 1.0 - 4.0 * m.combined_y * yw - m.combined_x * xw


def _check_phase_condition(xi: float, chi: float) -> None:
    n = (xi - chi) / math.pi
    if abs(n - round(n)) > 1e-9:
        raise ValueError(f"angle form needs xi - chi to be a multiple of pi, got {xi - chi!r}")


def analytic_purity_angles(s: ScenarioParams, phi: float, xi: float = 0.0, chi: float = 0.0) -> float:
    """
    Purity for ``c0 = e^{i xi} cos(phi)``, ``c1 = e^{i chi} sin(phi)``.

    Loop geometry and noise come from ``s``; ``s.psi`` is not used. Only
    valid when ``xi - chi`` is a multiple of pi.
    """
    _check_phase_condition(xi, chi)
    m = noise_moments(s)
    return 1.0 - 2.0 * m.combined_x - 2.0 * m.combined_y * math.sin(2.0 * phi) ** 2


def analytic_fidelity_angles(s: ScenarioParams, phi: float, xi: float = 0.0, chi: float = 0.0) -> float:
    _check_phase_condition(xi, chi)
    m = noise_moments(s)
    return 1.0 - m.combined_x - m.combined_y * math.sin(2.0 * phi) ** 2
