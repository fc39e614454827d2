"""LGI, Wigner-form LGI and NSIT values from density-matrix simulation.

Protocol: the state ``v |-j><-j| + (1 - v) I/d`` is rotated by ``pi`` to the
first measurement slot and by ``pi/2`` to each of the next two.  Every
two-time quantity comes from its own run in which only the two named slots
are measured; the remaining slot contributes its rotation and nothing else.
In particular ``C13`` involves no measurement at ``t2``.

Two routes compute the same numbers:

* :func:`two_time_joint`, :func:`single_time_prob` and :func:`correlator`
  follow the branch literally (evolve, collapse, evolve, read out).
* :class:`ProtocolSimulator` notices that a branch probability is a fixed
  combination of three lambda-independent pieces of the pre-measurement
  state and precomputes them once per ``(j, x, v)``.  After that, any
  sharpness costs O(1), which is what threshold scans need.

:func:`evaluate` uses the second route; the test-suite checks the two
against each other.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .measurement import GroupingScheme, MeasurementSetting, collapse_group, group_probability
from .spin_core import SpinContext, Step, evolve, maximally_mixed

__all__ = [
    "Quantity",
    "Engine",
    "Pair",
    "Protocol",
    "ViolationReport",
    "ProtocolSimulator",
    "simulator",
    "two_time_joint",
    "single_time_prob",
    "correlator",
    "evaluate",
    "evaluate_direct",
]

# rotation applied on the way into slot t1, t2, t3
PROTOCOL_STEPS = (Step.PI, Step.HALF_PI, Step.HALF_PI)
OUTCOMES = (1, -1)


class Quantity(str, enum.Enum):
    LGI = "lgi"
    WLGI = "wlgi"
    NSIT = "nsit"

    @property
    def bound(self) -> float:
        """Value the quantity cannot exceed under macrorealism."""
        return 1.0 if self is Quantity.LGI else 0.0

    @property
    def algebraic_max(self) -> float:
        return 3.0 if self is Quantity.LGI else 1.0


class Engine(str, enum.Enum):
    SIM = "sim"
    CLOSED_FORM = "closed"


class Pair(enum.Enum):
    T1T2 = (1, 2)
    T2T3 = (2, 3)
    T1T3 = (1, 3)

    @property
    def first(self) -> int:
        return self.value[0]

    @property
    def second(self) -> int:
        return self.value[1]


@dataclass(frozen=True)
class Protocol:
    """Three-slot measurement protocol with a noisy initial state."""

    visibility: float = 1.0

    def __post_init__(self):
        v = float(self.visibility)
        if not 0.0 <= v <= 1.0:
            raise DomainError("v", f"{v} is outside [0, 1]")
        object.__setattr__(self, "visibility", v)

    def initial_state(self, ctx: SpinContext) -> np.ndarray:
        rho = (1.0 - self.visibility) * maximally_mixed(ctx)
        rho[0, 0] += self.visibility
        return rho


@dataclass(frozen=True)
class ViolationReport:
    quantity: Quantity
    value: float
    engine: Engine
    j: float
    lam: float
    v: float
    x: int

    @property
    def bound(self) -> float:
        return self.quantity.bound

    @property
    def violation(self) -> float:
        return self.value - self.quantity.bound

    @property
    def violated(self) -> bool:
        return self.violation > 0

    def as_dict(self) -> dict:
        return {
            "j": self.j,
            "lambda": self.lam,
            "v": self.v,
            "x": self.x,
            "quantity": self.quantity.value,
            "value": self.value,
            "violation": self.violation,
            "engine": self.engine.value,
        }


def _check_time(t: int) -> None:
    if t not in (1, 2, 3):
        raise DomainError("time", f"measurement slot must be 1, 2 or 3, got {t!r}")


def _run(ctx: SpinContext, rho: np.ndarray, start: int, stop: int) -> np.ndarray:
    """Evolve from slot ``start`` to slot ``stop`` (slot 0 is the preparation)."""
    for step in PROTOCOL_STEPS[start:stop]:
        rho = evolve(ctx, rho, step)
    return rho


# direct route -------------------------------------------------------------


def two_time_joint(
    ctx: SpinContext,
    setting: MeasurementSetting,
    scheme: GroupingScheme,
    protocol: Protocol,
    pair: Pair,
    qa: int,
    qb: int,
) -> float:
    """``P(Q_a = qa, Q_b = qb)`` with measurements only at the two slots of ``pair``."""
    rho = _run(ctx, protocol.initial_state(ctx), 0, pair.first)
    _, branch = collapse_group(setting, scheme, rho, qa)
    branch = _run(ctx, branch, pair.first, pair.second)
    return group_probability(setting, scheme, branch, qb)


def single_time_prob(
    ctx: SpinContext,
    setting: MeasurementSetting,
    scheme: GroupingScheme,
    protocol: Protocol,
    time: int,
    q: int,
) -> float:
    """Probability of ``q`` at slot ``time`` with no earlier measurement."""
    _check_time(time)
    rho = _run(ctx, protocol.initial_state(ctx), 0, time)
    return group_probability(setting, scheme, rho, q)


def correlator(
    ctx: SpinContext,
    setting: MeasurementSetting,
    scheme: GroupingScheme,
    protocol: Protocol,
    pair: Pair,
) -> float:
    return sum(
        qa * qb * two_time_joint(ctx, setting, scheme, protocol, pair, qa, qb)
        for qa in OUTCOMES
        for qb in OUTCOMES
    )


def evaluate_direct(
    ctx: SpinContext,
    setting: MeasurementSetting,
    scheme: GroupingScheme,
    protocol: Protocol,
    quantity: Quantity,
) -> float:
    """Quantity value assembled from the branch-by-branch functions above."""
    args = (ctx, setting, scheme, protocol)
    quantity = Quantity(quantity)
    if quantity is Quantity.LGI:
        return correlator(*args, Pair.T1T2) + correlator(*args, Pair.T2T3) - correlator(*args, Pair.T1T3)
    if quantity is Quantity.WLGI:
        return (
            two_time_joint(*args, Pair.T2T3, 1, 1)
            - two_time_joint(*args, Pair.T1T2, -1, 1)
            - two_time_joint(*args, Pair.T1T3, 1, 1)
        )
    return (
        single_time_prob(*args, 3, -1)
        - two_time_joint(*args, Pair.T2T3, 1, -1)
        - two_time_joint(*args, Pair.T2T3, -1, -1)
    )


# precomputed route --------------------------------------------------------


def _populations_after(u: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Diagonal of ``u rho u^dagger`` without forming the full product."""
    return np.real(np.einsum("ik,ik->i", u @ rho, u.conj()))


@dataclass(frozen=True, eq=False)
class ProtocolSimulator:
    """Lambda-independent summary of every branch of the protocol.

    A measurement of outcome ``q`` maps the pre-measurement state ``rho`` to
    ``n mu rho + c1 (G rho + rho G) + c2 diag_G(rho)`` with ``mu = (1-lam)/d``,
    ``c1 = b (a - b)``, ``c2 = (a - b)^2`` (``a``, ``b`` the diagonal entries of
    ``sqrt(F_m)``).  Only group sums of later populations are ever read, so
    for each branch this class stores the group sums of the three evolved
    pieces; combining them with the lambda-dependent weights is exact.
    """

    ctx: SpinContext
    scheme: GroupingScheme
    protocol: Protocol
    # slot -> (group sums over q = +1, -1) of the unmeasured populations
    unmeasured: dict = field(repr=False)
    # (first, second, qa) -> array[3 pieces, 2 qb] of evolved group sums
    branches: dict = field(repr=False)
    # (slot, qa) -> group sum of the pre-measurement populations
    group_weight: dict = field(repr=False)

    @classmethod
    def build(cls, ctx: SpinContext, scheme: GroupingScheme, protocol: Protocol) -> "ProtocolSimulator":
        if scheme.dim != ctx.dim:
            raise DomainError("x", "grouping scheme built for a different spin")
        masks = {q: scheme.mask(q) for q in OUTCOMES}

        def sums(pop):
            return np.array([pop[masks[q]].sum() for q in OUTCOMES])

        states = [protocol.initial_state(ctx)]
        for step in PROTOCOL_STEPS:
            states.append(evolve(ctx, states[-1], step))
        unmeasured = {t: sums(np.real(np.diagonal(states[t]))) for t in (1, 2, 3)}

        propagators = {
            (1, 2): ctx.u_half_pi,
            (1, 3): ctx.u_pi,
            (2, 3): ctx.u_half_pi,
        }
        branches, weights = {}, {}
        for (first, second), u in propagators.items():
            rho = states[first]
            pops = np.real(np.diagonal(rho))
            base = sums(_populations_after(u, rho))
            u_abs2 = np.abs(u) ** 2
            for qa in OUTCOMES:
                g = masks[qa].astype(float)
                anti = g[:, None] * rho + rho * g[None, :]
                diag_part = u_abs2 @ (g * pops)
                branches[(first, second, qa)] = np.vstack(
                    [base, sums(_populations_after(u, anti)), sums(diag_part)]
                )
                weights[(first, qa)] = float(pops[masks[qa]].sum())
        return cls(ctx, scheme, protocol, unmeasured, branches, weights)

    # lambda-dependent part ------------------------------------------------

    def _readout(self, lam: float, group_sum: float, trace: float, qb: int) -> float:
        noise = (1.0 - lam) / self.ctx.dim
        return lam * group_sum + self.scheme.size(qb) * noise * trace

    def single(self, lam: float, time: int, q: int) -> float:
        _check_time(time)
        k = OUTCOMES.index(q)
        return float(self._readout(lam, self.unmeasured[time][k], 1.0, q))

    def joint(self, lam: float, pair: Pair, qa: int, qb: int) -> float:
        d = self.ctx.dim
        noise = (1.0 - lam) / d
        a, b = np.sqrt(lam + noise), np.sqrt(noise)
        n = self.scheme.size(qa)
        weights = (n * noise, b * (a - b), (a - b) ** 2)
        s = self.group_weight[(pair.first, qa)]
        traces = (1.0, 2.0 * s, s)
        sums = self.branches[(pair.first, pair.second, qa)][:, OUTCOMES.index(qb)]
        return float(sum(w * self._readout(lam, gs, tr, qb) for w, gs, tr in zip(weights, sums, traces)))

    def correlator(self, lam: float, pair: Pair) -> float:
        return sum(qa * qb * self.joint(lam, pair, qa, qb) for qa in OUTCOMES for qb in OUTCOMES)

    def value(self, quantity: Quantity, lam: float) -> float:
        quantity = Quantity(quantity)
        if not 0.0 <= lam <= 1.0:
            raise DomainError("lambda", f"{lam} is outside [0, 1]")
        if quantity is Quantity.LGI:
            return self.correlator(lam, Pair.T1T2) + self.correlator(lam, Pair.T2T3) - self.correlator(lam, Pair.T1T3)
        if quantity is Quantity.WLGI:
            return (
                self.joint(lam, Pair.T2T3, 1, 1)
                - self.joint(lam, Pair.T1T2, -1, 1)
                - self.joint(lam, Pair.T1T3, 1, 1)
            )
        return (
            self.single(lam, 3, -1)
            - self.joint(lam, Pair.T2T3, 1, -1)
            - self.joint(lam, Pair.T2T3, -1, -1)
        )

    def violation(self, quantity: Quantity, lam: float) -> float:
        quantity = Quantity(quantity)
        return self.value(quantity, lam) - quantity.bound


@lru_cache(maxsize=256)
def simulator(ctx: SpinContext, scheme: GroupingScheme, protocol: Protocol) -> ProtocolSimulator:
    """Cached :meth:`ProtocolSimulator.build`."""
    return ProtocolSimulator.build(ctx, scheme, protocol)


def evaluate(
    ctx: SpinContext,
    setting: MeasurementSetting,
    scheme: GroupingScheme,
    protocol: Protocol,
    quantity: Quantity,
) -> ViolationReport:
    quantity = Quantity(quantity)
    value = float(simulator(ctx, scheme, protocol).value(quantity, setting.lam))
    return ViolationReport(
        quantity=quantity,
        value=value,
        engine=Engine.SIM,
        j=float(ctx.j),
        lam=setting.lam,
        v=protocol.visibility,
        x=scheme.x,
    )
