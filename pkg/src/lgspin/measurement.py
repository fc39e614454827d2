"""Unsharp J_z measurements and the two-valued coarse-grained outcome Q.

Effects are ``F_m = lam * P_m + (1 - lam) * I / d``.  They are diagonal in
the J_z basis, so they are stored as vectors of diagonal entries: row ``k``
of :attr:`MeasurementSetting.effects` is the diagonal of ``F_m`` with
``m = -j + k``.

The state update is applied level by level with ``sqrt(F_m)`` and only
afterwards are the levels pooled into ``Q = -1`` (``m = -j .. -j + x``) or
``Q = +1`` (the rest).  A group projector would keep coherences inside a
group; the per-level update removes them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .spin_core import SpinContext

__all__ = [
    "GroupingScheme",
    "MeasurementSetting",
    "Outcome",
    "make_setting",
    "measure_levels",
    "group_outcome",
    "group_probability",
    "collapse_group",
]

ZERO_PROBABILITY = 1e-15


@dataclass(frozen=True)
class GroupingScheme:
    """Dichotomisation of J_z outcomes.

    ``x`` counts the levels added to the ``Q = -1`` group beyond ``m = -j``;
    ``x = 0`` puts only ``m = -j`` there and ``x = floor(j)`` is the most
    symmetric split.
    """

    j: Fraction
    x: int = 0

    def __post_init__(self):
        if isinstance(self.x, bool) or int(self.x) != self.x:
            raise DomainError("x", f"{self.x!r} is not an integer")
        object.__setattr__(self, "x", int(self.x))
        object.__setattr__(self, "j", Fraction(self.j))
        if not 0 <= self.x <= int(self.j):
            raise DomainError("x", f"x = {self.x} must satisfy 0 <= x <= floor(j) = {int(self.j)}")

    @classmethod
    def for_context(cls, ctx: SpinContext, x: int = 0) -> "GroupingScheme":
        return cls(ctx.j, x)

    @property
    def dim(self) -> int:
        return int(2 * self.j) + 1

    def mask(self, q: int) -> np.ndarray:
        """Boolean vector selecting the basis levels that report outcome ``q``."""
        _check_q(q)
        minus = np.arange(self.dim) <= self.x
        return minus if q == -1 else ~minus

    def size(self, q: int) -> int:
        _check_q(q)
        return self.x + 1 if q == -1 else self.dim - self.x - 1


def _check_q(q) -> None:
    if q not in (1, -1):
        raise DomainError("q", f"outcome must be +1 or -1, got {q!r}")


@dataclass(frozen=True, eq=False)
class MeasurementSetting:
    lam: float
    dim: int
    effects: np.ndarray = field(repr=False)
    sqrt_effects: np.ndarray = field(repr=False)

    @property
    def noise(self) -> float:
        """Weight ``(1 - lam) / d`` every effect puts on every level."""
        return (1.0 - self.lam) / self.dim

    @property
    def sqrt_on(self) -> float:
        """Diagonal entry of ``sqrt(F_m)`` at its own level."""
        return float(np.sqrt(self.lam + self.noise))

    @property
    def sqrt_off(self) -> float:
        """Diagonal entry of ``sqrt(F_m)`` at every other level."""
        return float(np.sqrt(self.noise))

    def effect(self, k: int) -> np.ndarray:
        return np.diag(self.effects[k]).astype(complex)

    def sqrt_effect(self, k: int) -> np.ndarray:
        return np.diag(self.sqrt_effects[k]).astype(complex)


def make_setting(ctx: SpinContext, lam: float) -> MeasurementSetting:
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise DomainError("lambda", f"{lam} is outside [0, 1]")
    d = ctx.dim
    noise = (1.0 - lam) / d
    effects = np.full((d, d), noise)
    np.fill_diagonal(effects, lam + noise)
    if lam == 1.0:
        effects = np.eye(d)
    sqrt_effects = np.sqrt(effects)

    completeness = np.max(np.abs(effects.sum(axis=0) - 1.0))
    if completeness > 1e-12:
        raise AssertionError(f"effects are not complete: {completeness:.3e}")
    for arr in (effects, sqrt_effects):
        arr.setflags(write=False)
    return MeasurementSetting(lam=lam, dim=d, effects=effects, sqrt_effects=sqrt_effects)


@dataclass(frozen=True, eq=False)
class Outcome:
    m: Fraction
    probability: float
    post_state: np.ndarray | None = field(repr=False)
    """Normalised post-measurement state, or None for a zero-probability branch."""


def _diag_real(rho: np.ndarray) -> np.ndarray:
    return np.real(np.diagonal(rho))


def measure_levels(ctx: SpinContext, setting: MeasurementSetting, rho: np.ndarray) -> list[Outcome]:
    """Full J_z outcome distribution with per-level Lüders post-states.

    Builds ``d`` dense matrices, so it is meant for small spins; grouped
    quantities should go through :func:`collapse_group`.
    """
    rho = np.asarray(rho)
    if rho.shape != (setting.dim, setting.dim):
        raise DomainError("rho", f"expected shape {(setting.dim, setting.dim)}, got {rho.shape}")
    populations = _diag_real(rho)
    trace = populations.sum()
    out = []
    for k in range(setting.dim):
        p = setting.lam * populations[k] + setting.noise * trace
        s = setting.sqrt_effects[k]
        post = None
        if p >= ZERO_PROBABILITY:
            post = (s[:, None] * rho * s[None, :]) / p
        out.append(Outcome(m=k - ctx.j, probability=float(p), post_state=post))
    return out


def group_outcome(scheme: GroupingScheme, m) -> int:
    """Q value (+1 or -1) reported for J_z outcome ``m``."""
    offset = Fraction(m) + scheme.j
    if offset.denominator != 1 or not 0 <= offset < scheme.dim:
        raise DomainError("m", f"{m} is not in {{-{scheme.j}, ..., {scheme.j}}}")
    return -1 if offset <= scheme.x else 1


def group_probability(setting: MeasurementSetting, scheme: GroupingScheme, rho: np.ndarray, q: int) -> float:
    """``sum_{m in group q} Tr(rho F_m)``; ``rho`` may be unnormalised."""
    populations = _diag_real(rho)
    return float(setting.lam * populations[scheme.mask(q)].sum() + scheme.size(q) * setting.noise * populations.sum())


def collapse_group(
    setting: MeasurementSetting, scheme: GroupingScheme, rho: np.ndarray, q: int
) -> tuple[float, np.ndarray]:
    """Probability of ``q`` and the unnormalised branch state.

    The branch state is ``sum_{m in group q} sqrt(F_m) rho sqrt(F_m)``,
    evaluated in O(d^2): with ``a``/``b`` the on/off entries of ``sqrt(F_m)``
    and ``G`` the group projector, the sum equals
    ``n b^2 rho + b (a - b) (G rho + rho G) + (a - b)^2 diag_G(rho)``.
    """
    rho = np.asarray(rho)
    if rho.shape != (setting.dim, setting.dim):
        raise DomainError("rho", f"expected shape {(setting.dim, setting.dim)}, got {rho.shape}")
    g = scheme.mask(q).astype(float)
    n = scheme.size(q)
    a, b = setting.sqrt_on, setting.sqrt_off
    post = (n * b * b) * rho + (b * (a - b)) * (g[:, None] * rho + rho * g[None, :])
    idx = np.flatnonzero(g)
    post[idx, idx] += (a - b) ** 2 * rho[idx, idx]
    return group_probability(setting, scheme, rho, q), post
