"""
Single-qubit linear algebra
===========================

Everything in this package lives on a two-dimensional Hilbert space, so the
matrices are plain ``(2, 2)`` complex numpy arrays. This module supplies the
Pauli matrices, closed-form SU(2) exponentials, pure states, density matrices
and the two figures of merit used throughout: the purity ``tr(rho^2)`` and the
linear overlap fidelity ``tr(rho0 rho)``.

Tolerances
----------
Algebraic identities are held to 1e-12. Inputs that must be unitary or
positive semidefinite are gated at 1e-10.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ALGEBRA_TOL",
    "INPUT_TOL",
    "IDENTITY",
    "pauli",
    "su2_exp",
    "is_unitary",
    "QubitState",
    "DensityMatrix",
    "density_from_pure",
    "purity",
    "fidelity",
]

ALGEBRA_TOL = 1e-12
INPUT_TOL = 1e-10

IDENTITY = np.eye(2, dtype=complex)

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
for _m in _PAULI.values():
    _m.setflags(write=False)
IDENTITY.setflags(write=False)


def pauli(axis: str) -> np.ndarray:
    """Return the Pauli matrix for ``axis`` in ``{"x", "y", "z"}`` (a fresh copy)."""
    try:
        return _PAULI[axis.lower()].copy()
    except (KeyError, AttributeError):
        raise ValueError(f"unknown Pauli axis {axis!r}; expected 'x', 'y' or 'z'") from None


def su2_exp(nx: float, ny: float, nz: float, theta: float) -> np.ndarray:
    """
    Closed-form ``exp(-i theta n.sigma)`` for a unit axis ``n``.

    Evaluates ``cos(theta) I - i sin(theta) (n.sigma)``, which is exact for
    unit ``n`` because ``(n.sigma)^2 = I``.

    Raises
    ------
    ValueError
        If ``|n|`` differs from 1 by more than 1e-9.
    """
    norm = math.sqrt(nx * nx + ny * ny + nz * nz)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"rotation axis must have unit norm, got |n| = {norm!r}")
    c, s = math.cos(theta), math.sin(theta)
    return np.array(
        [
            [c - 1j * s * nz, -1j * s * nx - s * ny],
            [-1j * s * nx + s * ny, c + 1j * s * nz],
        ],
        dtype=complex,
    )


def is_unitary(u: np.ndarray, atol: float = INPUT_TOL) -> bool:
    u = np.asarray(u)
    return u.shape == (2, 2) and np.allclose(u.conj().T @ u, IDENTITY, rtol=0.0, atol=atol)


@dataclass(frozen=True)
class QubitState:
    """Pure state ``c0|0> + c1|1>`` with ``|c0|^2 + |c1|^2 = 1`` (to 1e-12)."""

    c0: complex
    c1: complex

    def __post_init__(self):
        c0, c1 = complex(self.c0), complex(self.c1)
        if not all(map(math.isfinite, (c0.real, c0.imag, c1.real, c1.imag))):
            raise ValueError("amplitudes must be finite")
        norm2 = abs(c0) ** 2 + abs(c1) ** 2
        if abs(norm2 - 1.0) > ALGEBRA_TOL:
            raise ValueError(f"state is not normalized: |c0|^2 + |c1|^2 = {norm2!r}")
        object.__setattr__(self, "c0", c0)
        object.__setattr__(self, "c1", c1)

    @classmethod
    def from_angles(cls, phi: float, xi: float = 0.0, chi: float = 0.0) -> "QubitState":
        """``c0 = e^{i xi} cos(phi)``, ``c1 = e^{i chi} sin(phi)``."""
        return cls(np.exp(1j * xi) * math.cos(phi), np.exp(1j * chi) * math.sin(phi))

    @classmethod
    def basis(cls, k: int) -> "QubitState":
        if k not in (0, 1):
            raise ValueError("basis index must be 0 or 1")
        return cls(1.0 - k, float(k))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.c0, self.c1], dtype=complex)


def _closed_form_eigenvalues(m: np.ndarray) -> tuple[float, float]:
    # Hermitian 2x2: eigenvalues from trace and determinant.
    t = (m[0, 0] + m[1, 1]).real
    diff = (m[0, 0] - m[1, 1]).real
    r = math.hypot(diff, 2.0 * abs(m[0, 1]))
    return 0.5 * (t - r), 0.5 * (t + r)


@dataclass(frozen=True)
class DensityMatrix:
    """
    Qubit density matrix.

    The matrix is checked on construction: Hermitian and unit trace within
    ``atol`` (default 1e-12), smallest eigenvalue no lower than -1e-10. Pass
    ``atol=None`` to skip the checks for intermediate results whose validity
    is established elsewhere.
    """

    mat: np.ndarray

    def __init__(self, mat, atol: float | None = ALGEBRA_TOL):
        m = np.array(mat, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"density matrix must be 2x2, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("density matrix entries must be finite")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)
        if atol is not None:
            self.validate(atol)

    def validate(self, atol: float = ALGEBRA_TOL, psd_tol: float = INPUT_TOL) -> None:
        m = self.mat
        herm = np.max(np.abs(m - m.conj().T))
        if herm > atol:
            raise ValueError(f"density matrix not Hermitian (deviation {herm:.3e})")
        tr = np.trace(m)
        if abs(tr - 1.0) > atol:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        lo, _ = _closed_form_eigenvalues(m)
        if lo < -psd_tol:
            raise ValueError(f"density matrix not positive semidefinite (eigenvalue {lo:.3e})")

    @property
    def eigenvalues(self) -> tuple[float, float]:
        return _closed_form_eigenvalues(self.mat)

    def __array__(self, dtype=None, copy=None):
        return self.mat if dtype is None else self.mat.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return bool(np.array_equal(self.mat, other.mat))

    __hash__ = None


def _matrix(rho) -> np.ndarray:
    return rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def density_from_pure(u: np.ndarray, psi: QubitState) -> DensityMatrix:
    """Return ``U|psi><psi|U^dagger``; ``u`` must be unitary within 1e-10."""
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u):
        raise ValueError("gate is not unitary")
    out = u @ psi.vector
    return DensityMatrix(np.outer(out, out.conj()))


def purity(rho) -> float:
    """``tr(rho^2)``."""
    m = _matrix(rho)
    return float(np.trace(m @ m).real)


def fidelity(rho0, rho) -> float:
    """
    Linear overlap ``tr(rho0 rho)``.

    For two density matrices the trace is real; an imaginary part above
    1e-12 means one of the arguments was not Hermitian and raises
    ``ValueError``.
    """
    tr = np.trace(_matrix(rho0) @ _matrix(rho))
    if abs(tr.imag) > ALGEBRA_TOL:
        raise ValueError(f"tr(rho0 rho) has imaginary part {tr.imag:.3e}; inputs not Hermitian")
    return float(tr.real)
