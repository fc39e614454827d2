import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lgspin.errors import DomainError
from lgspin.measurement import GroupingScheme, make_setting
from lgspin.quantities import (
    OUTCOMES,
    Engine,
    Pair,
    Protocol,
    ProtocolSimulator,
    Quantity,
    ViolationReport,
    correlator,
    evaluate,
    evaluate_direct,
    single_time_prob,
    two_time_joint,
)
from lgspin.spin_core import spin_context


def r_exact(j):
    """C(4j, 2j) / 16^j from exact integers."""
    n = int(2 * j)
    return math.comb(2 * n, n) / 4**n


def args(j, lam=1.0, v=1.0, x=0):
    ctx = spin_context(j)
    return ctx, make_setting(ctx, lam), GroupingScheme.for_context(ctx, x), Protocol(v)


def eq11_joint(j, lam):
    """P(Q1 = +, Q2 = -) for the pure state, transcribed independently."""
    j = float(j)
    x = math.sqrt((2 * j * lam + 1) / (2 * j + 1)) - math.sqrt((1 - lam) / (2 * j + 1))
    a = (1 - lam) / (2 * j + 1)
    return (
        x**2 * lam / 4**j
        + 2 * x * lam * math.sqrt(a) / 4**j
        + lam * (1 - lam) / (2 * j + 1) * 2 * j / 4**j
        + x**2 * (1 - lam) / (2 * j + 1)
        + 2 * x * a**1.5
        + a**2 * 2 * j
    )


small_spin = st.integers(1, 24).map(lambda n: Fraction(n, 2))
unit = st.floats(0, 1)


class TestJoint:
    def test_t2t3_plus_plus_at_j1(self):
        # 1 - r(1) + 2^-4 - 2^-2
        assert two_time_joint(*args(1), Pair.T2T3, 1, 1) == pytest.approx(0.4375, abs=1e-12)

    @pytest.mark.parametrize("j", [Fraction(1, 2), 1, 7, 30])
    def test_t1t2_minus_minus_vanishes(self, j):
        assert abs(two_time_joint(*args(j), Pair.T1T2, -1, -1)) < 1e-12

    @pytest.mark.parametrize("j", [Fraction(1, 2), 1, 2, 5, 10])
    @pytest.mark.parametrize("lam", [0.1, 0.5, 0.9])
    def test_unsharp_joint_against_transcription(self, j, lam):
        got = two_time_joint(*args(j, lam), Pair.T1T2, 1, -1)
        assert got == pytest.approx(eq11_joint(j, lam), abs=1e-12)

    def test_half_sharp_j1_value(self):
        assert two_time_joint(*args(1, 0.5), Pair.T1T2, 1, -1) == pytest.approx(35 / 144, abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(j=small_spin, lam=unit, v=unit, x_frac=st.floats(0, 1))
    def test_normalization_and_marginals(self, j, lam, v, x_frac):
        ctx = spin_context(j)
        a = args(j, lam, v, int(x_frac * ctx.floor_j))
        for pair in Pair:
            probs = {(qa, qb): two_time_joint(*a, pair, qa, qb) for qa in OUTCOMES for qb in OUTCOMES}
            assert min(probs.values()) > -1e-12
            assert abs(sum(probs.values()) - 1) < 1e-10
            for qa in OUTCOMES:
                marginal = probs[(qa, 1)] + probs[(qa, -1)]
                assert abs(marginal - single_time_prob(*a, pair.first, qa)) < 1e-10


class TestSingleTime:
    @pytest.mark.parametrize("j", [1, 4, 13])
    def test_full_turn_returns_lowest_state(self, j):
        assert single_time_prob(*args(j), 3, -1) == pytest.approx(1.0, abs=1e-12)

    def test_pure_noise(self):
        assert single_time_prob(*args(1, lam=0.0), 3, -1) == pytest.approx(1 / 3, abs=1e-15)

    def test_mixed_state(self):
        assert single_time_prob(*args(10, v=0.0), 2, -1) == pytest.approx(1 / 21, abs=1e-15)

    def test_bad_slot(self):
        with pytest.raises(DomainError):
            single_time_prob(*args(1), 4, -1)


class TestCorrelator:
    def test_j1_correlators_give_table_value(self):
        a = args(1)
        k = correlator(*a, Pair.T1T2) + correlator(*a, Pair.T2T3) - correlator(*a, Pair.T1T3)
        assert k == pytest.approx(1.5, abs=1e-12)

    def test_j1_brute_force_branches(self):
        """Correlators at d = 3 from explicit Kraus products over all level pairs."""
        ctx, setting, scheme, protocol = args(1)
        rho0 = protocol.initial_state(ctx)
        evolve_to = [ctx.u_pi, ctx.u_half_pi, ctx.u_half_pi]
        group = [-1, 1, 1]

        def joint(first, second, qa, qb):
            rho = rho0
            for u in evolve_to[:first]:
                rho = u @ rho @ u.conj().T
            total = 0.0
            for ka in range(3):
                if group[ka] != qa:
                    continue
                branch = rho[ka, ka] * np.outer(np.eye(3)[ka], np.eye(3)[ka])
                for u in evolve_to[first:second]:
                    branch = u @ branch @ u.conj().T
                total += sum(branch[kb, kb].real for kb in range(3) if group[kb] == qb)
            return total

        for pair in Pair:
            c = sum(qa * qb * joint(pair.first, pair.second, qa, qb) for qa in OUTCOMES for qb in OUTCOMES)
            assert correlator(ctx, setting, scheme, protocol, pair) == pytest.approx(c, abs=1e-12)

    @pytest.mark.parametrize("pair", list(Pair))
    def test_pure_noise_product(self, pair):
        assert correlator(*args(1, lam=0.0), pair) == pytest.approx(1 / 9, abs=1e-14)

    @pytest.mark.parametrize("j, x", [(2, 1), (5, 3)])
    def test_pure_noise_product_grouped(self, j, x):
        d = 2 * j + 1
        mean = (d - 2 * (x + 1)) / d
        assert correlator(*args(j, 0.0, 0.6, x), Pair.T1T3) == pytest.approx(mean**2, abs=1e-14)


class TestEvaluate:
    @pytest.mark.parametrize(
        "j, quantity, x, target",
        [(1, "lgi", 0, 0.50), (10, "nsit", 0, 0.87), (40, "lgi", 10, 1.52)],
    )
    def test_examples(self, j, quantity, x, target):
        report = evaluate(*args(j, x=x), Quantity(quantity))
        assert report.violation == pytest.approx(target, abs=0.005)
        assert report.engine is Engine.SIM
        assert isinstance(report.value, float)

    @pytest.mark.parametrize("j", list(range(1, 51)) + [Fraction(1, 2), Fraction(7, 2), Fraction(99, 2)])
    def test_sharp_closed_forms(self, j):
        r = r_exact(j)
        expected = {
            Quantity.LGI: 3 + 4.0 ** (1 - 2 * j) - 4.0 ** (1 - j) - 2 * r,
            Quantity.WLGI: 1 + 4.0 ** (-2 * j) - 4.0 ** (-j) - r,
            Quantity.NSIT: 1 - r,
        }
        for q, value in expected.items():
            assert abs(evaluate(*args(j), q).value - value) < 1e-9

    @pytest.mark.parametrize("quantity", list(Quantity))
    def test_simulator_matches_direct_route(self, quantity):
        for j, lam, v, x in [(1, 0.3, 0.7, 0), (Fraction(5, 2), 0.8, 1.0, 2), (6, 1.0, 0.4, 3), (9, 0.05, 0.9, 9)]:
            a = args(j, lam, v, x)
            assert evaluate(*a, quantity).value == pytest.approx(evaluate_direct(*a, quantity), abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(j=small_spin, lam=unit, x_frac=st.floats(0, 1), vs=st.tuples(unit, unit, unit))
    def test_affine_in_visibility(self, j, lam, x_frac, vs):
        x = int(x_frac * int(j))
        ctx = spin_context(j)
        scheme = GroupingScheme.for_context(ctx, x)
        for q in Quantity:
            vals = [ProtocolSimulator.build(ctx, scheme, Protocol(v)).value(q, lam) for v in vs]
            v0, v1, v2 = vs
            # collinearity of (v, value) triples
            area = (v1 - v0) * (vals[2] - vals[0]) - (v2 - v0) * (vals[1] - vals[0])
            assert abs(area) < 1e-10

    @settings(max_examples=25, deadline=None)
    @given(j=small_spin, v=unit, x_frac=st.floats(0, 1))
    def test_no_violation_without_sharpness(self, j, v, x_frac):
        a = args(j, 0.0, v, int(x_frac * int(j)))
        for q in Quantity:
            assert evaluate(*a, q).violation <= 1e-10

    @settings(max_examples=25, deadline=None)
    @given(j=small_spin, lam=unit, v=unit, x_frac=st.floats(0, 1))
    def test_algebraic_bounds(self, j, lam, v, x_frac):
        a = args(j, lam, v, int(x_frac * int(j)))
        for q in Quantity:
            assert abs(evaluate(*a, q).value) <= q.algebraic_max + 1e-12
        assert evaluate(*a, Quantity.NSIT).value >= -1e-12


class TestTypes:
    def test_protocol_domain(self):
        with pytest.raises(DomainError):
            Protocol(1.2)

    def test_initial_state(self):
        ctx = spin_context(1)
        np.testing.assert_allclose(Protocol(0.4).initial_state(ctx).real, np.diag([0.6, 0.2, 0.2]), atol=1e-15)

    def test_report(self):
        r = ViolationReport(Quantity.LGI, 1.5, Engine.SIM, 1.0, 1.0, 1.0, 0)
        assert r.violation == 0.5 and r.violated and r.bound == 1
        assert r.as_dict()["quantity"] == "lgi"

    def test_simulator_rejects_foreign_scheme(self):
        with pytest.raises(DomainError):
            ProtocolSimulator.build(spin_context(2), GroupingScheme(Fraction(1), 0), Protocol())

    def test_simulator_rejects_bad_lambda(self):
        sim = ProtocolSimulator.build(spin_context(2), GroupingScheme(Fraction(2), 0), Protocol())
        with pytest.raises(DomainError):
            sim.value(Quantity.LGI, 1.5)
