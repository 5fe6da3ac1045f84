"""
Holonomic Hadamard gate from two rectangular squeezing loops
============================================================

The one-qubit gate is built from two loops in the control manifold, both at
squeezing phase ``theta_1 = 0``:

* ``C_I`` in the ``(x, r_1)`` plane, rectangle ``[a_x, b_x] x [0, d_x]``.
  Its holonomy is ``exp(-i sigma_y Sigma_I)`` with
  ``Sigma_I = int dx dr 2 e^{-2r} = l_x (1 - e^{-2 d_x})``.
* ``C_II`` in the ``(y, r_1)`` plane, rectangle ``[a_y, b_y] x [0, d_y]``.
  Its holonomy is ``exp(-i sigma_x Sigma_II)`` with
  ``Sigma_II = int dy dr 2 e^{2r} = l_y (e^{2 d_y} - 1)``.

With ``Sigma_I = pi/4`` and ``Sigma_II = pi/2`` the product
``Gamma(C_II) Gamma(C_I)`` is ``-i H_0``, ``H_0`` being the Hadamard matrix.

Squeezing errors
----------------
Fluctuations of ``r_1`` are only felt along the top edge ``r_1 = d`` of each
rectangle. Replacing ``d`` by ``d + dr(x)`` shifts the two areas by

    alpha = e^{-2 d_x} int_{a_x}^{b_x} (1 - e^{-2 dr_x(x)}) dx
    beta  = e^{+2 d_y} int_{a_y}^{b_y} (e^{2 dr_y(y)} - 1) dy

and the realized gate becomes ``exp(-i sigma_x (pi/2 + beta))
exp(-i sigma_y (pi/4 + alpha))``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .qubit import ALGEBRA_TOL, DensityMatrix, QubitState, density_from_pure, pauli, su2_exp

__all__ = [
    "DomainError",
    "Plane",
    "RectLoop",
    "LoopPair",
    "PerturbationAngles",
    "HADAMARD",
    "SIGMA_I_TARGET",
    "SIGMA_II_TARGET",
    "solve_dx",
    "solve_dy",
    "sigma_I",
    "sigma_II",
    "ideal_gate",
    "alpha_from_path",
    "beta_from_path",
    "alpha_from_values",
    "beta_from_values",
    "perturbed_gate",
    "perturbed_gate_closed_form",
    "realized_density",
    "realized_density_batch",
]

SIGMA_I_TARGET = math.pi / 4
SIGMA_II_TARGET = math.pi / 2
LOOP_TOL = 1e-10

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
HADAMARD.setflags(write=False)


class DomainError(ValueError):
    """A loop geometry that cannot realize the requested holonomy."""


class Plane(str, enum.Enum):
    X_R1 = "x"
    Y_R1 = "y"

    @property
    def code(self) -> int:
        return 0 if self is Plane.X_R1 else 1


@dataclass(frozen=True)
class RectLoop:
    """
    Axis-parallel rectangle ``[a, b] x [0, d]`` in one squeezing plane.

    ``d = 0`` is accepted as the degenerate (zero-area) loop.
    """

    plane: Plane
    a: float
    b: float
    d: float

    def __post_init__(self):
        object.__setattr__(self, "plane", Plane(self.plane))
        if not all(map(math.isfinite, (self.a, self.b, self.d))):
            raise ValueError("loop coordinates must be finite")
        if not self.b > self.a:
            raise ValueError(f"loop needs b > a, got a={self.a!r}, b={self.b!r}")
        if self.d < 0:
            raise ValueError(f"loop height must be non-negative, got d={self.d!r}")
        if self.plane is Plane.X_R1 and not self.length > SIGMA_I_TARGET:
            raise DomainError(f"x-plane loop needs l_x > pi/4, got l_x={self.length!r}")

    @property
    def length(self) -> float:
        return self.b - self.a


def solve_dx(lx: float) -> float:
    """Height ``d_x`` for which the ``(x, r_1)`` rectangle of width ``lx`` has ``Sigma_I = pi/4``."""
    if not lx > SIGMA_I_TARGET:
        raise DomainError(f"l_x > pi/4 is required to reach Sigma_I = pi/4, got l_x={lx!r}")
    return -0.5 * math.log1p(-SIGMA_I_TARGET / lx)


def solve_dy(ly: float) -> float:
    """Height ``d_y`` for which the ``(y, r_1)`` rectangle of width ``ly`` has ``Sigma_II = pi/2``."""
    if not ly > 0:
        raise DomainError(f"l_y > 0 is required, got l_y={ly!r}")
    return 0.5 * math.log1p(SIGMA_II_TARGET / ly)


def _require_plane(loop: RectLoop, plane: Plane) -> None:
    if loop.plane is not plane:
        raise ValueError(f"expected a loop in plane {plane.name}, got {loop.plane.name}")


def sigma_I(loop: RectLoop) -> float:
    """Weighted area ``l (1 - e^{-2d})`` of an ``(x, r_1)`` loop."""
    _require_plane(loop, Plane.X_R1)
    return -loop.length * math.expm1(-2.0 * loop.d)


def sigma_II(loop: RectLoop) -> float:
    """Weighted area ``l (e^{2d} - 1)`` of a ``(y, r_1)`` loop."""
    _require_plane(loop, Plane.Y_R1)
    return loop.length * math.expm1(2.0 * loop.d)


def _area_by_quadrature(loop: RectLoop) -> float:
    sign = -1.0 if loop.plane is Plane.X_R1 else 1.0
    inner, _ = integrate.quad(lambda r: 2.0 * math.exp(2.0 * sign * r), 0.0, loop.d, epsabs=0.0, epsrel=1e-13)
    return loop.length * inner


@dataclass(frozen=True)
class LoopPair:
    """The two loops whose holonomies compose to ``-i H_0``."""

    loop_I: RectLoop
    loop_II: RectLoop

    def __post_init__(self):
        _require_plane(self.loop_I, Plane.X_R1)
        _require_plane(self.loop_II, Plane.Y_R1)
        s1, s2 = sigma_I(self.loop_I), sigma_II(self.loop_II)
        if abs(s1 - SIGMA_I_TARGET) > LOOP_TOL:
            raise DomainError(f"Sigma_I = {s1!r}, expected pi/4")
        if abs(s2 - SIGMA_II_TARGET) > LOOP_TOL:
            raise DomainError(f"Sigma_II = {s2!r}, expected pi/2")

    @classmethod
    def from_lengths(cls, lx: float = 1.0, ly: float = 1.0, ax: float = 0.0, ay: float = 0.0) -> "LoopPair":
        """
        Build the loop pair from side lengths, solving for the heights.

        The heights come from the closed forms; the enclosed areas are then
        re-derived by numerical quadrature as an independent check.
        """
        loop_I = RectLoop(Plane.X_R1, ax, ax + lx, solve_dx(lx))
        loop_II = RectLoop(Plane.Y_R1, ay, ay + ly, solve_dy(ly))
        for loop, target in ((loop_I, SIGMA_I_TARGET), (loop_II, SIGMA_II_TARGET)):
            area = _area_by_quadrature(loop)
            if abs(area - target) > LOOP_TOL * max(1.0, loop.length):
                raise DomainError(f"quadrature area {area!r} of {loop.plane.name} loop misses {target!r}")
        return cls(loop_I, loop_II)

    @property
    def lx(self) -> float:
        return self.loop_I.length

    @property
    def ly(self) -> float:
        return self.loop_II.length

    @property
    def dx(self) -> float:
        return self.loop_I.d

    @property
    def dy(self) -> float:
        return self.loop_II.d


def ideal_gate(loops: LoopPair) -> np.ndarray:
    """Composed holonomy ``Gamma(C_II) Gamma(C_I)``; equals ``-i H_0``."""
    if not isinstance(loops, LoopPair):
        raise TypeError("ideal_gate expects a LoopPair")
    return su2_exp(1.0, 0.0, 0.0, sigma_II(loops.loop_II)) @ su2_exp(0.0, 1.0, 0.0, sigma_I(loops.loop_I))


@dataclass(frozen=True)
class PerturbationAngles:
    """Area deviations ``alpha`` (x-loop) and ``beta`` (y-loop) of one noise realization."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError("perturbation angles must be finite")


# Path-to-angle functionals. Left-endpoint Riemann sums on the noise grid:
# the last grid point (x = b) is not used.

def alpha_from_values(values: np.ndarray, d: float, step: float) -> np.ndarray:
    """``alpha`` for one path (1-d) or a batch of paths (last axis = grid)."""
    v = np.asarray(values, dtype=float)[..., :-1]
    return math.exp(-2.0 * d) * step * np.sum(-np.expm1(-2.0 * v), axis=-1)


def beta_from_values(values: np.ndarray, d: float, step: float) -> np.ndarray:
    v = np.asarray(values, dtype=float)[..., :-1]
    return math.exp(2.0 * d) * step * np.sum(np.expm1(2.0 * v), axis=-1)


def _check_grid(loop: RectLoop, path) -> None:
    n = len(path.values) - 1
    scale = max(1.0, abs(loop.a), abs(loop.b))
    if n < 1 or abs(path.start - loop.a) > 1e-12 * scale or abs(path.start + n * path.step - loop.b) > 1e-12 * scale:
        raise ValueError(
            f"noise grid [{path.start!r}, {path.start + n * path.step!r}] does not span loop side [{loop.a!r}, {loop.b!r}]"
        )


def alpha_from_path(loop_I: RectLoop, path) -> float:
    """x-loop area shift produced by the squeezing error path ``path``."""
    _require_plane(loop_I, Plane.X_R1)
    _check_grid(loop_I, path)
    return float(alpha_from_values(path.values, loop_I.d, path.step))


def beta_from_path(loop_II: RectLoop, path) -> float:
    """y-loop area shift produced by the squeezing error path ``path``."""
    _require_plane(loop_II, Plane.Y_R1)
    _check_grid(loop_II, path)
    return float(beta_from_values(path.values, loop_II.d, path.step))


def perturbed_gate_closed_form(alpha: float, beta: float) -> np.ndarray:
    """Explicit Pauli expansion of ``-i H`` for area shifts ``(alpha, beta)``."""
    sx, sy, sz = pauli("x"), pauli("y"), pauli("z")
    ca, sa, cb, sb = math.cos(alpha), math.sin(alpha), math.cos(beta), math.sin(beta)
    r2 = math.sqrt(2.0)
    return (
        -(ca - sa) / r2 * (sb * np.eye(2) + 1j * cb * sx)
        - 1j / r2 * (ca + sa) * (cb * sz - sb * sy)
    )


def perturbed_gate(angles: PerturbationAngles) -> np.ndarray:
    """
    Realized gate ``-i H`` for one noise realization.

    Computed as the product of the two shifted holonomies and checked
    against the explicit Pauli expansion; a mismatch above 1e-12 is an
    implementation error and raises ``RuntimeError``.
    """
    a, b = angles.alpha, angles.beta
    u = su2_exp(1.0, 0.0, 0.0, SIGMA_II_TARGET + b) @ su2_exp(0.0, 1.0, 0.0, SIGMA_I_TARGET + a)
    dev = np.max(np.abs(u - perturbed_gate_closed_form(a, b)))
    if dev > ALGEBRA_TOL:
        raise RuntimeError(f"perturbed gate forms disagree by {dev:.3e}")
    return u


def _amplitude_combinations(psi: QubitState) -> tuple[float, complex, complex]:
    c0, c1 = psi.c0, psi.c1
    p = abs(c0) ** 2 - abs(c1) ** 2
    s = c0 * c1.conjugate() + c0.conjugate() * c1  # real
    d = c0 * c1.conjugate() - c0.conjugate() * c1  # imaginary
    return p, s, d


def _closed_form_elements(alpha, beta, psi: QubitState):
    p, s, d = _amplitude_combinations(psi)
    g2 = 2.0 * (np.asarray(alpha, dtype=float) - SIGMA_I_TARGET)
    b2 = 2.0 * np.asarray(beta, dtype=float)
    cg, sg, cb, sb = np.cos(g2), np.sin(g2), np.cos(b2), np.sin(b2)
    r00 = 0.5 + 0.5 * p * cb * cg - 0.5 * s * cb * sg - 0.5j * d * sb
    r01 = (
        -0.5 * p * sg
        + 0.5j * p * sb * cg
        - 0.5 * s * (cg + 1j * sb * sg)
        - 0.5 * d * cb
    )
    return r00.real, r01


def realized_density_batch(alpha, beta, psi: QubitState, check: bool = True) -> np.ndarray:
    """
    Final density matrices for arrays of area shifts, shape ``(n, 2, 2)``.

    Uses the closed-form matrix elements. With ``check`` the batch is also
    computed by direct conjugation ``U |psi><psi| U^dagger`` and the two must
    agree within 1e-12.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    r00, r01 = _closed_form_elements(alpha, beta, psi)
    out = np.empty(alpha.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = r00
    out[..., 0, 1] = r01
    out[..., 1, 0] = np.conj(r01)
    out[..., 1, 1] = 1.0 - r00
    if check:
        direct = _conjugate_batch(alpha, beta, psi)
        dev = np.max(np.abs(out - direct)) if out.size else 0.0
        if dev > ALGEBRA_TOL:
            raise RuntimeError(f"closed-form density disagrees with direct conjugation by {dev:.3e}")
    return out


def _conjugate_batch(alpha: np.ndarray, beta: np.ndarray, psi: QubitState) -> np.ndarray:
    # exp(-i sx t2) exp(-i sy t1) |psi>, written out elementwise.
    t1 = SIGMA_I_TARGET + alpha
    t2 = SIGMA_II_TARGET + beta
    c1, s1, c2, s2 = np.cos(t1), np.sin(t1), np.cos(t2), np.sin(t2)
    u0 = c1 * psi.c0 - s1 * psi.c1
    u1 = s1 * psi.c0 + c1 * psi.c1
    v0 = c2 * u0 - 1j * s2 * u1
    v1 = -1j * s2 * u0 + c2 * u1
    v = np.stack([v0, v1], axis=-1)
    return v[..., :, None] * v[..., None, :].conj()


def realized_density(angles: PerturbationAngles, psi: QubitState) -> DensityMatrix:
    """
    Final state ``H|psi><psi|H^dagger`` of one noise realization.

    Closed-form elements, cross-checked against conjugation by
    :func:`perturbed_gate`.
    """
    rho = realized_density_batch(angles.alpha, angles.beta, psi, check=False)[0]
    direct = density_from_pure(perturbed_gate(angles), psi).mat
    dev = np.max(np.abs(rho - direct))
    if dev > ALGEBRA_TOL:
        raise RuntimeError(f"closed-form density disagrees with direct conjugation by {dev:.3e}")
    return DensityMatrix(rho)
