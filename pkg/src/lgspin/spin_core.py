"""Spin-j operators, basis states and precession unitaries.

States are represented in the J_z eigenbasis ordered by ascending magnetic
quantum number, ``m = -j, -j+1, ..., +j``.  Every module relies on this
ordering, so index ``k`` always corresponds to ``m = -j + k``.

The precession Hamiltonian is ``H = Omega * J_x``; only the rotation angles
``Omega * t`` matter, and the measurement protocol uses two of them: ``pi``
(preparation to the first measurement) and ``pi/2`` (between consecutive
measurements).
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Real

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DimensionOverflowError, DomainError, NumericalDegeneracyError

__all__ = [
    "DEFAULT_J_MAX",
    "Step",
    "SpinContext",
    "as_spin",
    "j_max_from_env",
    "build_spin_context",
    "spin_context",
    "basis_state",
    "maximally_mixed",
    "evolve",
    "validate_density_matrix",
]

DEFAULT_J_MAX = 500
J_MAX_ENV = "LGSPIN_J_MAX"

UNITARITY_TOL = 1e-10
HERMITICITY_TOL = 1e-12


class Step(enum.Enum):
    """Rotation angle applied between consecutive protocol slots."""

    PI = np.pi
    HALF_PI = np.pi / 2


def as_spin(j) -> Fraction:
    """Coerce ``j`` (int, float, Fraction or a string like ``"3/2"``) to a Fraction.

    Raises DomainError unless ``2j`` is a non-negative integer.
    """
    try:
        if isinstance(j, str):
            value = Fraction(j.strip())
        elif isinstance(j, Fraction):
            value = j
        elif isinstance(j, Real):
            value = Fraction(float(j)).limit_denominator(2)
            if abs(float(value) - float(j)) > 1e-12:
                raise DomainError("j", f"{j!r} is not a half-integer")
        else:
            raise TypeError
    except (ValueError, TypeError, ZeroDivisionError):
        raise DomainError("j", f"cannot interpret {j!r} as a spin quantum number") from None
    if value < 0 or (2 * value).denominator != 1:
        raise DomainError("j", f"{j!r} is not a non-negative half-integer")
    return value


def j_max_from_env(default: int = DEFAULT_J_MAX) -> Fraction:
    raw = os.environ.get(J_MAX_ENV)
    if raw is None or raw.strip() == "":
        return Fraction(default)
    return as_spin(raw)


@dataclass(frozen=True, eq=False)
class SpinContext:
    """Immutable bundle of the operators needed for one spin value.

    Attributes
    ----------
    j : Fraction
        Spin quantum number.
    m_values : ndarray
        Magnetic quantum numbers ``-j .. +j`` (basis ordering).
    jx : ndarray
        Real symmetric tridiagonal matrix of J_x in the J_z basis.
    u_pi, u_half_pi : ndarray
        ``exp(-i pi J_x)`` and ``exp(-i pi/2 J_x)``.
    """

    j: Fraction
    m_values: np.ndarray = field(repr=False)
    jx: np.ndarray = field(repr=False)
    jx_eigenvectors: np.ndarray = field(repr=False)
    u_pi: np.ndarray = field(repr=False)
    u_half_pi: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return int(2 * self.j) + 1

    @property
    def floor_j(self) -> int:
        return int(self.j)

    def unitary(self, step: Step) -> np.ndarray:
        return self.u_pi if step is Step.PI else self.u_half_pi

    def rotation(self, theta: float) -> np.ndarray:
        """``exp(-i theta J_x)`` for an arbitrary angle, from the cached eigensystem."""
        return _exp_from_eigensystem(self.jx_eigenvectors, self.m_values, theta)

    def index(self, m) -> int:
        """Basis index of magnetic quantum number ``m``."""
        try:
            offset = Fraction(m) + self.j
        except (TypeError, ValueError):
            raise DomainError("m", f"{m!r} is not a number") from None
        if offset.denominator != 1 or not 0 <= offset < self.dim:
            raise DomainError("m", f"{m} is not in {{-{self.j}, ..., {self.j}}}")
        return int(offset)


def _ladder_offdiagonal(j: Fraction, m: np.ndarray) -> np.ndarray:
    jf = float(j)
    lower = m[:-1]
    # <m+1|J_x|m> = sqrt(j(j+1) - m(m+1)) / 2
    return 0.5 * np.sqrt(np.maximum(jf * (jf + 1) - lower * (lower + 1), 0.0))


def _exp_from_eigensystem(vectors: np.ndarray, eigenvalues: np.ndarray, theta: float) -> np.ndarray:
    phases = np.exp(-1j * theta * eigenvalues)
    return (vectors * phases) @ vectors.T


def _max_abs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def build_spin_context(j, j_max=None) -> SpinContext:
    """Assemble J_x and the two protocol unitaries for spin ``j``.

    The unitaries come from the eigendecomposition of the tridiagonal J_x.
    The solver's eigenvalues are checked against the exact spectrum
    ``{-j, ..., j}`` and then replaced by it, so the phases carry no
    eigenvalue round-off.
    """
    j = as_spin(j)
    limit = j_max_from_env() if j_max is None else as_spin(j_max)
    if j > limit:
        raise DimensionOverflowError(
            f"j = {j} exceeds the configured maximum {limit} "
            f"(dimension {int(2 * j) + 1}); raise it with {J_MAX_ENV} or --j-max"
        )
    d = int(2 * j) + 1
    m = float(-j) + np.arange(d, dtype=float)
    off = _ladder_offdiagonal(j, m)
    jx = np.diag(off, 1) + np.diag(off, -1)

    if d == 1:
        w, vectors = np.zeros(1), np.ones((1, 1))
    else:
        w, vectors = eigh_tridiagonal(np.zeros(d), off)
    spectrum_err = _max_abs(w - m)
    if spectrum_err > 1e-8 * max(1.0, float(j)):
        raise NumericalDegeneracyError(f"J_x spectrum off by {spectrum_err:.3e} at j = {j}")

    u_pi = _exp_from_eigensystem(vectors, m, np.pi)
    u_half_pi = _exp_from_eigensystem(vectors, m, np.pi / 2)
    eye = np.eye(d)
    for name, u in (("u_pi", u_pi), ("u_half_pi", u_half_pi)):
        err = _max_abs(u.conj().T @ u - eye)
        if err >= UNITARITY_TOL:
            raise NumericalDegeneracyError(f"{name} not unitary at j = {j}: {err:.3e}")

    for arr in (m, jx, vectors, u_pi, u_half_pi):
        arr.setflags(write=False)
    return SpinContext(j=j, m_values=m, jx=jx, jx_eigenvectors=vectors, u_pi=u_pi, u_half_pi=u_half_pi)


@lru_cache(maxsize=64)
def _cached_context(j: Fraction, j_max: Fraction) -> SpinContext:
    return build_spin_context(j, j_max)


def spin_context(j, j_max=None) -> SpinContext:
    """Memoised :func:`build_spin_context`; contexts are read-only and shareable."""
    j = as_spin(j)
    limit = j_max_from_env() if j_max is None else as_spin(j_max)
    return _cached_context(j, limit)


def basis_state(ctx: SpinContext, m) -> np.ndarray:
    """Density matrix ``|m><m|``."""
    k = ctx.index(m)
    rho = np.zeros((ctx.dim, ctx.dim), dtype=complex)
    rho[k, k] = 1.0
    return rho


def maximally_mixed(ctx: SpinContext) -> np.ndarray:
    return np.eye(ctx.dim, dtype=complex) / ctx.dim


def validate_density_matrix(rho: np.ndarray, dim: int, atol: float = 1e-10) -> None:
    """Raise DomainError if ``rho`` is not a ``dim x dim`` unit-trace PSD Hermitian matrix."""
    rho = np.asarray(rho)
    if rho.shape != (dim, dim):
        raise DomainError("rho", f"expected shape {(dim, dim)}, got {rho.shape}")
    if _max_abs(rho - rho.conj().T) > atol:
        raise DomainError("rho", "not Hermitian")
    if abs(np.trace(rho) - 1) > atol:
        raise DomainError("rho", f"trace {np.trace(rho).real:.12g} != 1")
    if np.linalg.eigvalsh(rho).min() < -atol:
        raise DomainError("rho", "not positive semidefinite")


def evolve(ctx: SpinContext, rho: np.ndarray, step: Step) -> np.ndarray:
    """Return ``U rho U^dagger`` for the rotation selected by ``step``.

    ``rho`` need not be normalised: unnormalised branch states from a
    measurement are propagated with the same call.
    """
    rho = np.asarray(rho)
    if rho.shape != (ctx.dim, ctx.dim):
        raise DomainError("rho", f"expected shape {(ctx.dim, ctx.dim)}, got {rho.shape}")
    u = ctx.unitary(step)
    return u @ rho @ u.conj().T
