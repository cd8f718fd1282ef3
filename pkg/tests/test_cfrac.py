"""Tests for continued fractions, growth prescriptions, small divisors."""

import json
import math
from fractions import Fraction as F

import gmpy2
import pytest
from hypothesis import given, settings, strategies as st

import siegelshear as ss
from siegelshear import cfrac, config
from siegelshear.errors import (
    AmbiguousQuotient,
    EnclosureTooWide,
    OverflowBudget,
    StreamExhausted,
)
from siegelshear.exactarith import bump_down, bump_up, fraction_from_mpfr


# -- oracles ----------------------------------------------------------------

def sqrt5_bounds(digits=120):
    """Exact rational bounds on sqrt(5) via integer square root."""
    scale = 10 ** digits
    r = math.isqrt(5 * scale * scale)
    return F(r, scale), F(r + 1, scale)


def euclid_quotients(x: F, n_terms: int):
    """Plain Euclidean-algorithm expansion of an exact rational."""
    out = []
    for _ in range(n_terms):
        a = x.numerator // x.denominator
        out.append(a)
        x = x - a
        if x == 0:
            break
        x = 1 / x
    return out


GOLDEN_PREFIX = [0] + [1] * 14  # frozen from the oracle below


def test_oracle_golden_prefix_frozen():
    """Euclid on rational bounds of (sqrt(5)-1)/2 yields all ones."""
    lo5, hi5 = sqrt5_bounds()
    tlo, thi = (lo5 - 1) / 2, (hi5 - 1) / 2
    a = euclid_quotients(tlo, 15)
    b = euclid_quotients(thi, 15)
    assert a[:15] == b[:15] == GOLDEN_PREFIX


# -- convergents ------------------------------------------------------------

class TestConvergents:
    def test_golden_table(self):
        cf = cfrac.ContinuedFraction([0, 1, 1, 1, 1, 1])
        assert cf.convergents(5) == [(0, 1), (1, 1), (1, 2), (2, 3), (3, 5), (5, 8)]

    def test_two_three(self):
        cf = cfrac.ContinuedFraction([0, 2, 3])
        assert cf.convergents(2) == [(0, 1), (1, 2), (3, 7)]

    def test_integer_part_only(self):
        assert cfrac.ContinuedFraction([5]).convergents(0) == [(5, 1)]

    def test_stream_exhausted(self):
        with pytest.raises(StreamExhausted):
            cfrac.ContinuedFraction([0, 2, 3]).convergents(3)

    @given(st.lists(st.integers(1, 50), min_size=1, max_size=12))
    def test_determinant_identity(self, tail):
        cf = cfrac.ContinuedFraction([0] + tail)
        cs = cf.convergents(len(tail))
        for n in range(len(cs) - 1):
            (pn, qn), (pn1, qn1) = cs[n], cs[n + 1]
            assert pn1 * qn - pn * qn1 == (-1) ** n
            assert math.gcd(pn1, qn1) == 1

    @given(st.lists(st.integers(1, 9), min_size=2, max_size=20))
    def test_denominator_growth(self, tail):
        cf = cfrac.ContinuedFraction([0] + tail)
        qs = [q for _, q in cf.convergents(len(tail))]
        for n in range(1, len(qs)):
            assert qs[n] > qs[n - 1] or n == 1
            assert F(qs[n]) ** 2 >= 2 ** (n - 1)  # q_n >= 2^((n-1)/2)

    def test_digit_cap(self):
        old = config.get()
        try:
            config.install(config.Settings(digit_cap=50))
            cf = cfrac.ContinuedFraction([0], rule=lambda n: 10 ** 30)
            with pytest.raises(OverflowBudget):
                cf.convergents(4)
        finally:
            config.install(old)


# -- enclosures -------------------------------------------------------------

class TestEnclosure:
    def test_golden_depth2(self):
        enc = cfrac.golden_theta().theta_enclosure(2)
        assert (enc.lo, enc.hi) == (F(1, 2), F(2, 3))

    def test_two_three_depth1(self):
        enc = cfrac.ContinuedFraction([0, 2, 3]).theta_enclosure(1)
        assert (enc.lo, enc.hi) == (F(3, 7), F(1, 2))

    @given(st.lists(st.integers(1, 30), min_size=3, max_size=10),
           st.integers(1, 8))
    def test_width_identity(self, tail, depth):
        depth = min(depth, len(tail) - 1)
        cf = cfrac.ContinuedFraction([0] + tail)
        enc = cf.theta_enclosure(depth)
        assert enc.width == F(1, cf.q(depth) * cf.q(depth + 1))

    def test_contains_golden(self):
        lo5, hi5 = sqrt5_bounds()
        enc = cfrac.golden_theta().theta_enclosure(9)
        assert enc.lo <= (lo5 - 1) / 2 <= (hi5 - 1) / 2 <= enc.hi

    def test_roundtrip(self):
        """Feeding an enclosure back reproduces the quotients (the last
        index is genuinely undetermined: the closed hull's endpoint is a
        convergent whose canonical expansion deviates there)."""
        g = cfrac.golden_theta()
        for depth in (5, 8, 11):
            got = cfrac.quotients_from_real(g.theta_enclosure(depth), depth - 2)
            assert got == [0] + [1] * (depth - 2)


# -- quotient ingestion -----------------------------------------------------

class TestQuotientsFromReal:
    def test_exact_third(self):
        got = cfrac.quotients_from_real(ss.RatInterval.point(F(1, 3)), 1)
        assert got == [0, 3]

    def test_straddle(self):
        with pytest.raises(AmbiguousQuotient) as ei:
            cfrac.quotients_from_real(ss.RatInterval(F(49, 100), F(51, 100)), 2)
        assert ei.value.partial == [0]

    def test_golden_sixty_digits(self):
        lo5, hi5 = sqrt5_bounds(60)
        x = ss.RatInterval((lo5 - 1) / 2, (hi5 - 1) / 2)
        got = cfrac.quotients_from_real(x, 10)
        assert got == [0] + [1] * 10

    def test_terminating_rational(self):
        with pytest.raises(StreamExhausted):
            cfrac.quotients_from_real(ss.RatInterval.point(F(1, 3)), 5)

    @given(st.lists(st.integers(1, 9), min_size=2, max_size=8)
           .filter(lambda t: t[-1] >= 2))
    def test_point_roundtrip(self, tail):
        """Canonical expansions (last quotient >= 2) round-trip exactly."""
        cf = cfrac.ContinuedFraction([0] + tail)
        v = cf.convergent(len(tail))
        got = cfrac.quotients_from_real(ss.RatInterval.point(v), len(tail))
        assert got == [0] + tail


# -- small divisors ---------------------------------------------------------

class TestFracQN:
    def test_zero_multiple(self):
        d = cfrac.golden_theta().frac_qNtheta(2, 0)
        assert d.lo == d.hi == 0

    def test_golden_n1(self):
        d = cfrac.golden_theta().frac_qNtheta(1, 1, depth=12)
        lo5, hi5 = sqrt5_bounds()
        # true value is 1 - theta = (3 - sqrt 5)/2 ~ 0.381966
        assert d.lo <= (3 - hi5) / 2 <= (3 - lo5) / 2 <= d.hi
        assert F(38, 100) < d.lo and d.hi < F(382, 1000)
        assert d.hi <= F(1, 2)  # 1/q_2

    @given(st.integers(1, 7))
    def test_unit_multiple_sandwich(self, n):
        g = cfrac.golden_theta()
        d = g.frac_qNtheta(n, 1)
        lo = F(1, g.q(n + 1) + g.q(n))
        hi = F(1, g.q(n + 1))
        assert lo <= d.lo and d.hi <= hi

    @given(st.integers(1, 6), st.integers(1, 20))
    def test_scaled_multiple_bound(self, n, k):
        """dist(q_n N theta) <= N/q_{n+1} for N = k q_{n+1} scaled checks."""
        g = cfrac.golden_theta()
        N = k
        d = g.frac_qNtheta(n, N)
        assert d.hi <= F(N, g.q(n + 1))

    def test_default_depth_width(self):
        d = cfrac.golden_theta().frac_qNtheta(3, 11)
        assert d.width < F(1, 2 ** config.get().dist_width_bits)

    def test_too_wide(self):
        cf = cfrac.ContinuedFraction([0, 2, 3])  # q: 1, 2, 7; nothing deeper
        with pytest.raises(EnclosureTooWide):
            cf.frac_qNtheta(1, 10 ** 6)

    def test_explicit_depth_validation(self):
        g = cfrac.golden_theta()
        with pytest.raises(ValueError):
            g.frac_qNtheta(3, 1, depth=2)


class TestAngleMultiple:
    def test_small_golden(self):
        g = cfrac.golden_theta()
        g.convergents(40)
        lo5, hi5 = sqrt5_bounds()
        for K in (1, 2, 13, 1000):
            am = g.angle_multiple(K)
            tlo = K * (lo5 - 1) / 2
            thi = K * (hi5 - 1) / 2
            tlo, thi = tlo - (K * (hi5 - 1) / 2).__floor__(), thi - (K * (hi5 - 1) / 2).__floor__()
            # crude check: the enclosure must contain the true frac part
            assert am.lo <= thi and tlo <= am.hi + 1  # mod-1 slack for wrap

    def test_width_guard(self):
        cf = cfrac.ContinuedFraction([0, 2, 3, 1, 1])
        with pytest.raises(EnclosureTooWide):
            cf.angle_multiple(10 ** 12)

    def test_fast_theta_huge_multiple(self):
        lt = cfrac.make_liouville_theta()
        K = lt.q(3) ** 2  # a 149-digit integer multiple
        am = lt.angle_multiple(K)
        assert am.width < F(1, 10 ** 99000)


# -- Brjuno sums ------------------------------------------------------------

class TestBrjuno:
    def test_log2_example(self):
        res = cfrac.ContinuedFraction([0, 1, 1]).brjuno_sum(1)
        with config.working_precision(512):
            l2 = gmpy2.log(gmpy2.mpfr(2))
            l2_lo = fraction_from_mpfr(bump_down(l2, 2))
            l2_hi = fraction_from_mpfr(bump_up(l2, 2))
        assert res.partial.lo <= l2_lo and l2_hi <= res.partial.hi
        assert res.partial.width < F(1, 10 ** 60)

    def test_golden_bounded_not_divergent(self):
        res = cfrac.golden_theta().brjuno_sum(14)
        assert not res.diverges
        assert res.partial.hi < 4  # comfortably bounded

    def test_fast_theta_divergent(self):
        lt = cfrac.make_liouville_theta()
        res = lt.brjuno_sum(3)
        assert res.diverges
        # generated terms dominate the prescribed rates g(n) = n+1
        assert res.term_lowers[2] >= 3 and res.term_lowers[3] >= 4
        assert res.partial.lo > F(9)

    def test_needs_materialized(self):
        lt = cfrac.make_liouville_theta()
        with pytest.raises(StreamExhausted):
            lt.brjuno_sum(4)


# -- growth builders --------------------------------------------------------

class TestBuildFastTheta:
    def test_unit_rate_example(self):
        rule = cfrac.GrowthRule(func=lambda n: 1)
        cf = cfrac.build_fast_theta(rule, 2, seeds=(0, 1))
        assert [cf.quotient(i) for i in range(3)] == [0, 1, 3]
        assert cf.q(2) == 4

    def test_trivial_depth(self):
        rule = cfrac.GrowthRule(table=[1])
        cf = cfrac.build_fast_theta(rule, 0, seeds=(0, 1))
        assert cf.convergents(0) == [(0, 1)]

    def test_growth_certificate(self):
        """log q_{n+1} >= g(n) q_n for generated levels, against an
        independent high-precision enclosure of e^{g(n) q_n}."""
        rule = cfrac.GrowthRule(func=lambda n: n + 1)
        cf = cfrac.build_fast_theta(rule, 3, seeds=(0, 2))
        for n in (1, 2):
            t = (n + 1) * cf.q(n)
            with config.working_precision(1024):
                e_t = fraction_from_mpfr(bump_down(gmpy2.exp(gmpy2.mpfr(t)), 3))
            assert cf.q(n + 1) > e_t

    def test_canonical_fast_theta_frozen(self):
        lt = cfrac.make_liouville_theta()
        assert [lt.quotient(i) for i in range(3)] == [0, 2, 28]
        assert lt.q(2) == 57
        q3 = lt.q(3)
        assert len(str(q3)) == 75
        assert str(q3)[:10] == "1838046124"
        assert lt.quotient(3) * 57 + 2 == q3
        assert [lt.level_kind(i) for i in range(6)] == \
            ["exact"] * 4 + ["log", "astro"]

    def test_soft_level_log_bounds(self):
        lt = cfrac.make_liouville_theta()
        lo, hi = lt.log10_q(4)
        with config.working_precision(512):
            t = gmpy2.mpfr(4 * lt.q(3))
            l10 = gmpy2.log10(gmpy2.exp(gmpy2.mpfr(1)))
            ref = t * l10
        assert float(lo) <= float(ref) <= float(hi) * (1 + 1e-50)
        assert hi - lo < 1  # within one decimal digit
        lo5, hi5 = lt.log10_q(5)
        assert hi5 is None and float(lo5) == 1e250

    def test_overflow_budget(self):
        rule = cfrac.GrowthRule(func=lambda n: n + 1)
        with pytest.raises(OverflowBudget):
            cfrac.build_fast_theta(rule, 4, seeds=(0, 2))

    def test_nondecreasing_rule_enforced(self):
        with pytest.raises(ValueError):
            cfrac.GrowthRule(table=[2, 1])

    def test_delta_bounds_all_regimes(self):
        lt = cfrac.make_liouville_theta()
        d2 = lt.delta_abs(2)
        assert d2.lo == F(1, lt.q(3) + lt.q(2)) and d2.hi == F(1, lt.q(3))
        # level 4 is log-tracked: exact fraction falls back to the clamp
        r3 = lt.delta_upper_fraction(3)
        assert r3 == F(1, 10 ** 100000)
        lm = lt.delta_logmag(3)
        assert float(lm.log10_hi) == pytest.approx(-3.193e74, rel=1e-3)
        lm4 = lt.delta_logmag(4)
        assert lm4.log10_lo is None and float(lm4.log10_hi) == -1e250


# -- serialization ----------------------------------------------------------

class TestSerialization:
    def test_json_roundtrip(self):
        lt = cfrac.make_liouville_theta()
        text = lt.quotients_json(3)
        data = json.loads(text)
        assert all(isinstance(s, str) for s in data)
        back = cfrac.ContinuedFraction.from_quotients_json(text)
        assert back.convergents(3) == lt.convergents(3)

    def test_str_smoke(self):
        assert str(cfrac.ContinuedFraction([0, 2, 3])).startswith("[0;2,3")
