"""Point evaluation, threshold search, grid sweeps and table regeneration."""

from __future__ import annotations

import enum
import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import closed_form
from .errors import ClosedFormUnavailable, DomainError
from .measurement import GroupingScheme, make_setting
from .quantities import Engine, Protocol, Quantity, ViolationReport, evaluate, simulator
from .spin_core import as_spin, spin_context
from .tables import LAMBDA_THRESHOLD, LIMIT, VIOLATION, VISIBILITY_THRESHOLD, Cell, table_cells

__all__ = [
    "Variable",
    "ThresholdQuery",
    "ThresholdResult",
    "SweepResult",
    "TableRow",
    "CoarseGrainingReport",
    "evaluate_point",
    "violation_function",
    "find_threshold",
    "sweep",
    "reproduce_table",
    "lgi_extreme_coarse_check",
]

# closed-interval slack when comparing against numbers quoted to a few decimals
COMPARE_SLACK = 1e-9
# |violation| below this at the lower end of a scan counts as zero
ZERO_VIOLATION = 1e-12


class Variable(str, enum.Enum):
    LAMBDA = "lambda"
    VISIBILITY = "visibility"


def _grouping(ctx, x) -> GroupingScheme:
    return GroupingScheme.for_context(ctx, x)


def evaluate_point(
    j, quantity, lam: float = 1.0, v: float = 1.0, x: int = 0, engine=Engine.SIM, j_max=None
) -> ViolationReport:
    """Evaluate one ``(j, lambda, v, x)`` point with the chosen engine."""
    quantity, engine = Quantity(quantity), Engine(engine)
    spin = as_spin(j)
    if engine is Engine.CLOSED_FORM:
        GroupingScheme(spin, x)
        value = closed_form.closed_form_value(quantity, spin, lam=lam, v=v, x=x)
        return ViolationReport(quantity, value, Engine.CLOSED_FORM, float(spin), float(lam), float(v), int(x))
    ctx = spin_context(spin, j_max)
    return evaluate(ctx, make_setting(ctx, lam), _grouping(ctx, x), Protocol(v), quantity)


def violation_function(quantity, j, variable, lam=1.0, v=1.0, x=0, engine=Engine.SIM, j_max=None):
    """Violation as a one-argument function of ``lambda`` or ``v``, other parameters fixed."""
    quantity, engine, variable = Quantity(quantity), Engine(engine), Variable(variable)
    spin = as_spin(j)
    if engine is Engine.CLOSED_FORM:
        if x != 0:
            raise ClosedFormUnavailable(f"no closed form for grouping x = {x}; use the simulation engine")
        if variable is Variable.LAMBDA:
            return lambda t: closed_form.closed_form_value(quantity, spin, lam=t, v=v) - quantity.bound
        return lambda t: closed_form.closed_form_value(quantity, spin, lam=lam, v=t) - quantity.bound

    ctx = spin_context(spin, j_max)
    scheme = _grouping(ctx, x)
    if variable is Variable.LAMBDA:
        sim = simulator(ctx, scheme, Protocol(v))
        return lambda t: sim.violation(quantity, t)
    return lambda t: simulator(ctx, scheme, Protocol(t)).violation(quantity, lam)


@dataclass(frozen=True)
class ThresholdQuery:
    quantity: Quantity
    j: object
    variable: Variable = Variable.LAMBDA
    x: int = 0
    engine: Engine = Engine.SIM
    lam: float = 1.0
    v: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "quantity", Quantity(self.quantity))
        object.__setattr__(self, "variable", Variable(self.variable))
        object.__setattr__(self, "engine", Engine(self.engine))
        spin = as_spin(self.j)
        object.__setattr__(self, "j", spin)
        GroupingScheme(spin, self.x)
        if self.engine is Engine.CLOSED_FORM and self.x != 0:
            raise ClosedFormUnavailable(f"no closed form for grouping x = {self.x}; use the simulation engine")


@dataclass(frozen=True)
class ThresholdResult:
    """Outcome of a threshold search.

    ``value`` is the largest parameter value without violation, 0 if every
    positive value violates, and None if nothing on the grid (including the
    top end) violates.
    """

    query: ThresholdQuery
    value: float | None
    sign_changes: int = 0
    method: str = "bisect"
    metadata: dict = field(default_factory=dict)

    @property
    def anomaly(self) -> bool:
        return self.sign_changes > 1 or bool(self.metadata.get("anomaly"))


def find_threshold(
    query: ThresholdQuery, tol: float = 1e-6, step: float = 0.01, method: str | None = None, j_max=None
) -> ThresholdResult:
    """Smallest sharpness / visibility from which the violation persists.

    Lambda: a scan at ``step`` locates the largest sign change, then Brent
    bisection refines it to ``tol``.  Visibility: the violation is affine in
    ``v``, so two evaluations pin the root (``method="affine"``, default);
    ``method="bisect"`` runs a bracketing search instead.
    """
    if tol < 1e-12:
        raise DomainError("tol", f"{tol} is too small")
    f = violation_function(
        query.quantity, query.j, query.variable, lam=query.lam, v=query.v, x=query.x, engine=query.engine, j_max=j_max
    )
    if query.variable is Variable.VISIBILITY and (method or "affine") == "affine":
        return _affine_threshold(query, f)
    return _scan_threshold(query, f, tol, step)


def _affine_threshold(query: ThresholdQuery, f) -> ThresholdResult:
    at0, at1 = f(0.0), f(1.0)
    meta = {"violation_at_0": at0, "violation_at_1": at1}
    if at1 <= 0:
        return ThresholdResult(query, None, 0, "affine", meta)
    if at0 >= 0:
        return ThresholdResult(query, 0.0, 0, "affine", meta)
    return ThresholdResult(query, float(-at0 / (at1 - at0)), 1, "affine", meta)


def _scan_threshold(query: ThresholdQuery, f, tol: float, step: float) -> ThresholdResult:
    n = int(round(1.0 / step))
    grid = np.round(np.arange(1, n + 1) * step, 12)
    grid[-1] = 1.0
    values = np.array([f(t) for t in grid])
    positive = values > 0
    sign_changes = int(np.count_nonzero(positive[1:] != positive[:-1]))
    meta = {"grid_step": step, "tol": tol}
    if not positive[-1]:
        meta["anomaly"] = bool(positive.any())
        return ThresholdResult(query, None, sign_changes, "scan", meta)
    if positive.all():
        # a root may still hide below the first grid point
        at0 = f(0.0)
        if at0 >= -ZERO_VIOLATION:
            return ThresholdResult(query, 0.0, sign_changes, "scan", meta)
        root = brentq(f, 0.0, grid[0], xtol=tol, rtol=4 * np.finfo(float).eps)
        return ThresholdResult(query, float(root), sign_changes, "bisect", meta)
    k = int(np.flatnonzero(~positive)[-1])
    if sign_changes > 1:
        meta["anomaly"] = True
    if values[k] == 0.0:
        return ThresholdResult(query, float(grid[k]), sign_changes, "scan", meta)
    root = brentq(f, grid[k], grid[k + 1], xtol=tol, rtol=4 * np.finfo(float).eps)
    return ThresholdResult(query, float(root), sign_changes, "bisect", meta)


# sweeps ------------------------------------------------------------------


@dataclass
class SweepResult:
    rows: list
    metadata: dict = field(default_factory=dict)


def _map(func, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def sweep(
    js,
    quantities=tuple(Quantity),
    lams=(1.0,),
    vs=(1.0,),
    xs=(0,),
    engine=Engine.SIM,
    workers: int = 1,
    j_max=None,
) -> SweepResult:
    """Evaluate the full Cartesian grid; rows come back in grid order.

    Grid points whose ``x`` exceeds ``floor(j)`` are rejected, not skipped.
    """
    engine = Engine(engine)
    grid = list(itertools.product(js, xs, vs, lams, [Quantity(q) for q in quantities]))
    started = time.perf_counter()

    def point(item):
        j, x, v, lam, q = item
        return evaluate_point(j, q, lam=lam, v=v, x=x, engine=engine, j_max=j_max)

    rows = _map(point, grid, workers)
    return SweepResult(
        rows,
        {"engine": engine.value, "points": len(rows), "wall_time": time.perf_counter() - started},
    )


# tables ------------------------------------------------------------------


@dataclass
class TableRow:
    table: int
    quantity: str
    kind: str
    j: float
    lam: float
    v: float
    x: int
    value: float
    closed: float | None
    target: float | None
    decimals: int
    tolerance: float

    @property
    def engine_diff(self) -> float | None:
        return None if self.closed is None else abs(self.value - self.closed)

    @property
    def deviation(self) -> float | None:
        return None if self.target is None else self.value - self.target

    @property
    def matches(self) -> bool:
        if self.target is None:
            return self.value <= 0.0
        return abs(self.value - self.target) <= self.tolerance + COMPARE_SLACK

    def as_dict(self) -> dict:
        out = asdict(self)
        out.update(engine_diff=self.engine_diff, deviation=self.deviation, matches=self.matches)
        return out


DEFAULT_TOLERANCE = {1: 0.005, 2: 0.005, 3: 0.005, 4: 0.002, 5: 0.005, 6: 0.005,
                     7: 0.0005, 8: 0.005, 9: 0.005, 10: 0.005}


def _cell_values(cell: Cell, tol: float, j_max) -> tuple[float, float | None]:
    """(simulation value, closed-form value or None) for one table cell."""
    if cell.kind == LIMIT:
        limit = closed_form.asymptotic_limit(cell.quantity, lam=cell.lam, v=cell.v)
        return limit, limit
    if cell.kind == VIOLATION:
        sim = evaluate_point(cell.j, cell.quantity, cell.lam, cell.v, cell.x, Engine.SIM, j_max).violation
        try:
            cf = evaluate_point(cell.j, cell.quantity, cell.lam, cell.v, cell.x, Engine.CLOSED_FORM).violation
        except ClosedFormUnavailable:
            cf = None
        return sim, cf
    variable = Variable.LAMBDA if cell.kind == LAMBDA_THRESHOLD else Variable.VISIBILITY
    results = []
    for engine in (Engine.SIM, Engine.CLOSED_FORM):
        if engine is Engine.CLOSED_FORM and cell.x != 0:
            results.append(None)
            continue
        query = ThresholdQuery(cell.quantity, cell.j, variable, x=cell.x, engine=engine, lam=cell.lam, v=cell.v)
        results.append(find_threshold(query, tol=tol, j_max=j_max).value)
    return results[0], results[1]


def reproduce_table(n: int, workers: int = 1, tol: float = 1e-6, j_max=None) -> SweepResult:
    """Regenerate table ``n``; the simulation engine is authoritative.

    Each row carries the closed-form value where one exists and the target
    it is compared against.
    """
    n = int(n)
    cells = table_cells(n)
    started = time.perf_counter()
    values = _map(lambda c: _cell_values(c, tol, j_max), cells, workers)
    rows = [
        TableRow(
            table=n,
            quantity=c.quantity.value,
            kind=c.kind,
            j=float(c.j),
            lam=c.lam,
            v=c.v,
            x=c.x,
            value=sim,
            closed=cf,
            target=c.target,
            decimals=c.decimals,
            tolerance=DEFAULT_TOLERANCE[n],
        )
        for c, (sim, cf) in zip(cells, values)
    ]
    return SweepResult(
        rows,
        {"table": n, "engine": "sim", "tolerance": DEFAULT_TOLERANCE[n], "threshold_tol": tol,
         "wall_time": time.perf_counter() - started},
    )


# coarse-graining check ---------------------------------------------------


@dataclass(frozen=True)
class CoarseGrainingReport:
    j: float
    x_full: int
    lgi_full: float
    lgi_below: float
    wlgi_full: float
    nsit_full: float

    @property
    def lgi_vanishes_at_full(self) -> bool:
        return self.lgi_full <= 1e-10

    @property
    def lgi_survives_below(self) -> bool:
        return self.lgi_below > 0

    @property
    def passed(self) -> bool:
        return (
            self.lgi_vanishes_at_full
            and self.lgi_survives_below
            and self.wlgi_full > 0
            and self.nsit_full > 0
        )


def lgi_extreme_coarse_check(j, j_max=None) -> CoarseGrainingReport:
    """Violations at the most symmetric grouping ``x = floor(j)`` and one step below."""
    spin = as_spin(j)
    if spin < 1:
        raise DomainError("j", "the coarse-graining check needs j >= 1")
    full = int(spin)

    def viol(q, x):
        return evaluate_point(spin, q, x=x, j_max=j_max).violation

    return CoarseGrainingReport(
        j=float(spin),
        x_full=full,
        lgi_full=viol(Quantity.LGI, full),
        lgi_below=viol(Quantity.LGI, full - 1),
        wlgi_full=viol(Quantity.WLGI, full),
        nsit_full=viol(Quantity.NSIT, full),
    )
