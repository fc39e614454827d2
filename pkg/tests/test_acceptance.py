"""Acceptance gate: one test per criterion, each at its stated tolerance.

Every test prints one line per checked cell and records a single PASS/FAIL
line that the terminal summary repeats at the end of the run.  Run with
``pytest tests/test_acceptance.py -s`` to see the per-cell lines live.
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from lgspin.closed_form import asymptotic_limit, closed_form_value
from lgspin.measurement import GroupingScheme, make_setting
from lgspin.quantities import OUTCOMES, Engine, Pair, Protocol, Quantity, ProtocolSimulator
from lgspin.spin_core import spin_context
from lgspin.sweep import (
    COMPARE_SLACK,
    ThresholdQuery,
    Variable,
    evaluate_point,
    find_threshold,
    lgi_extreme_coarse_check,
    reproduce_table,
)
from lgspin.tables import LIMIT, table_cells

pytestmark = pytest.mark.acceptance

THRESHOLD_TOL = 1e-6


class Criterion:
    """Collects named checks and reports them in a uniform way."""

    def __init__(self, number, title, log):
        self.number, self.title, self.log = number, title, log
        self.checks = []

    def close(self, label, value, target, tol):
        ok = value is not None and abs(value - target) <= tol + COMPARE_SLACK
        shown = "None" if value is None else f"{value:.6f}"
        dev = "" if value is None else f" dev {value - target:+.6f}"
        self.record(ok, f"{label}: {shown} vs {target}{dev} (tol {tol})")

    def holds(self, label, ok, detail=""):
        self.record(bool(ok), f"{label}{': ' + detail if detail else ''}")

    def record(self, ok, text):
        self.checks.append(ok)
        print(f"  [{'ok ' if ok else 'OFF'}] {text}")

    def finish(self):
        failed = self.checks.count(False)
        passed = failed == 0 and bool(self.checks)
        summary = f"{self.title} ({len(self.checks) - failed}/{len(self.checks)} checks)"
        self.log[self.number] = (passed, summary)
        print(f"CRITERION {self.number}: {'PASS' if passed else 'FAIL'}  {summary}")
        assert passed, f"criterion {self.number}: {failed} of {len(self.checks)} checks off"


def _label(cell):
    extra = "".join(f" {k}={getattr(cell, k)}" for k in ("lam", "v", "x") if getattr(cell, k) != (0 if k == "x" else 1.0))
    return f"{cell.quantity.value} j={cell.j}{extra}"


def violation_table(number, title, log, tol, engines=(Engine.SIM,)):
    crit = Criterion(number, title, log)
    for cell in table_cells(number):
        if cell.kind == LIMIT:
            continue
        for engine in engines:
            value = evaluate_point(cell.j, cell.quantity, cell.lam, cell.v, cell.x, engine).violation
            label = f"{_label(cell)} [{engine.value}]"
            if cell.target is None:
                crit.holds(label, value <= 0, f"{value:.6f} <= 0 (no violation expected)")
            else:
                crit.close(label, value, cell.target, tol)
    return crit


def threshold_table(number, title, log, variable, tol, engines=(Engine.SIM,)):
    crit = Criterion(number, title, log)
    for cell in table_cells(number):
        for engine in engines:
            query = ThresholdQuery(cell.quantity, cell.j, variable, x=cell.x, engine=engine)
            result = find_threshold(query, tol=THRESHOLD_TOL)
            crit.close(f"{_label(cell)} threshold [{engine.value}]", result.value, cell.target, tol)
            if result.anomaly:
                crit.holds(f"{_label(cell)} single sign change", False, f"{result.sign_changes} sign changes")
    return crit


BOTH = (Engine.SIM, Engine.CLOSED_FORM)


def test_criterion_01_table1(acceptance_log):
    started = time.perf_counter()
    crit = violation_table(1, "Table 1 sharp pure LGI/WLGI", acceptance_log, 0.005, BOTH)
    elapsed = time.perf_counter() - started
    crit.holds("runtime in seconds", elapsed < 10, f"{elapsed:.2f} s")
    crit.finish()


def test_criterion_02_table2(acceptance_log):
    threshold_table(2, "Table 2 lambda thresholds", acceptance_log, Variable.LAMBDA, 0.005, BOTH).finish()


def test_criterion_03_table3(acceptance_log):
    violation_table(3, "Table 3 unsharp LGI/WLGI", acceptance_log, 0.005, BOTH).finish()


def test_criterion_04_table4(acceptance_log):
    threshold_table(4, "Table 4 visibility thresholds", acceptance_log, Variable.VISIBILITY, 0.002, BOTH).finish()


def test_criterion_05_table5(acceptance_log):
    violation_table(5, "Table 5 mixed-state LGI/WLGI", acceptance_log, 0.005, BOTH).finish()


def test_criterion_06_table6(acceptance_log):
    violation_table(6, "Table 6 sharp NSIT", acceptance_log, 0.005, BOTH).finish()


def test_criterion_07_table7(acceptance_log):
    crit = violation_table(7, "Table 7 unsharp NSIT and its limit row", acceptance_log, 0.0005, BOTH)
    for cell in table_cells(7):
        if cell.kind == LIMIT:
            value = asymptotic_limit(cell.quantity, lam=cell.lam)
            crit.holds(f"nsit limit lam={cell.lam}", value == cell.lam**2 and round(value, 4) == cell.target,
                       f"{value!r} vs {cell.target}")
    crit.finish()


def test_criterion_08_table8(acceptance_log):
    violation_table(8, "Table 8 mixed-state NSIT", acceptance_log, 0.005, BOTH).finish()


def test_criterion_09_table9(acceptance_log):
    violation_table(9, "Table 9 coarse groupings, simulation", acceptance_log, 0.005).finish()


def test_criterion_10_table10(acceptance_log):
    threshold_table(10, "Table 10 lambda thresholds, coarse groupings", acceptance_log, Variable.LAMBDA, 0.005).finish()


def test_criterion_11_engine_equivalence(acceptance_log):
    crit = Criterion(11, "engine equivalence on the x=0 grid", acceptance_log)
    spins = [Fraction(1, 2), 1, 2, 5, 10, 20, 30]
    points = [(lam, 1.0) for lam in (0.1, 0.5, 0.9, 1.0)] + [(1.0, v) for v in (0.2, 0.6)]
    worst = 0.0
    for j in spins:
        for lam, v in points:
            for q in Quantity:
                sim = evaluate_point(j, q, lam=lam, v=v).value
                closed = closed_form_value(q, j, lam=lam, v=v)
                diff = abs(sim - closed)
                worst = max(worst, diff)
                if diff >= 1e-9:
                    crit.holds(f"{q.value} j={j} lam={lam} v={v}", False, f"|sim - closed| = {diff:.3e}")
    crit.holds(f"{len(spins) * len(points) * 3} grid points", worst < 1e-9, f"max |sim - closed| = {worst:.3e}")
    crit.finish()


def test_criterion_12_structural_invariants(acceptance_log):
    crit = Criterion(12, "structural invariants", acceptance_log)

    worst_u = worst_spec = 0.0
    for n in range(1, 401):
        ctx = spin_context(Fraction(n, 2))
        eye = np.eye(ctx.dim)
        for u in (ctx.u_pi, ctx.u_half_pi):
            worst_u = max(worst_u, np.abs(u.conj().T @ u - eye).max())
        worst_spec = max(worst_spec, np.abs(np.linalg.eigvalsh(ctx.jx) - ctx.m_values).max())
    crit.holds("unitarity, j <= 200", worst_u < 1e-10, f"max |U^dag U - I| = {worst_u:.3e}")
    crit.holds("J_x spectrum, j <= 200", worst_spec < 1e-10, f"max eigenvalue error = {worst_spec:.3e}")

    spins = [Fraction(1, 2), 1, Fraction(3, 2), 2, 5, 10, 20, 50]
    lams = [0.0, 0.1, 0.37, 0.5, 0.9, 1.0]
    worst_povm = 0.0
    for j in spins:
        ctx = spin_context(j)
        for lam in lams:
            s = make_setting(ctx, lam)
            worst_povm = max(worst_povm, np.abs(s.effects.sum(axis=0) - 1).max(),
                             np.abs(s.sqrt_effects**2 - s.effects).max())
    crit.holds("POVM completeness and square roots", worst_povm < 1e-12, f"max error = {worst_povm:.3e}")

    worst_norm = worst_marg = worst_affine = worst_null = 0.0
    for j in spins:
        ctx = spin_context(j)
        for x in sorted({0, ctx.floor_j // 2, ctx.floor_j}):
            scheme = GroupingScheme.for_context(ctx, x)
            sims = {v: ProtocolSimulator.build(ctx, scheme, Protocol(v)) for v in (0.0, 0.3, 0.8, 1.0)}
            for v, sim in sims.items():
                for lam in lams:
                    for pair in Pair:
                        probs = {(a, b): sim.joint(lam, pair, a, b) for a in OUTCOMES for b in OUTCOMES}
                        worst_norm = max(worst_norm, abs(sum(probs.values()) - 1))
                        for a in OUTCOMES:
                            marginal = probs[(a, 1)] + probs[(a, -1)]
                            worst_marg = max(worst_marg, abs(marginal - sim.single(lam, pair.first, a)))
                for q in Quantity:
                    worst_null = max(worst_null, sim.violation(q, 0.0))
            for lam in lams:
                for q in Quantity:
                    (v0, f0), (v1, f1), (v2, f2) = [(v, sims[v].value(q, lam)) for v in (0.0, 0.3, 0.8)]
                    worst_affine = max(worst_affine, abs((v1 - v0) * (f2 - f0) - (v2 - v0) * (f1 - f0)))
    crit.holds("joint probabilities normalized", worst_norm < 1e-10, f"max error = {worst_norm:.3e}")
    crit.holds("marginal consistency", worst_marg < 1e-10, f"max error = {worst_marg:.3e}")
    crit.holds("affine in v (three-point collinearity)", worst_affine < 1e-10, f"max area = {worst_affine:.3e}")
    crit.holds("no violation at lambda = 0", worst_null <= 1e-10, f"max violation = {worst_null:.3e}")
    crit.finish()


def test_criterion_13_asymptotic_scaling(acceptance_log):
    crit = Criterion(13, "gap-to-limit ratio between j and 4j", acceptance_log)
    for j in (25, 50):
        for lam in (0.5, 1.0):
            for q in Quantity:
                limit = asymptotic_limit(q, lam=lam)
                gap = limit - evaluate_point(j, q, lam=lam).violation
                gap4 = limit - evaluate_point(4 * j, q, lam=lam).violation
                ratio = gap / gap4
                crit.holds(f"{q.value} j={j} lam={lam}", 1.7 <= ratio <= 2.3, f"ratio {ratio:.4f}")
    crit.finish()


def test_criterion_14_extreme_coarse_graining(acceptance_log):
    crit = Criterion(14, "most symmetric grouping x = j", acceptance_log)
    for j in (5, 10, 20):
        r = lgi_extreme_coarse_check(j)
        crit.holds(f"lgi j={j} x={j}", r.lgi_full <= 1e-10, f"{r.lgi_full:.6f} <= 1e-10")
        crit.holds(f"lgi j={j} x={j - 1}", r.lgi_below > 0, f"{r.lgi_below:.6f} > 0")
        crit.holds(f"wlgi j={j} x={j}", r.wlgi_full > 0, f"{r.wlgi_full:.6f} > 0")
        crit.holds(f"nsit j={j} x={j}", r.nsit_full > 0, f"{r.nsit_full:.6f} > 0")
    crit.finish()
