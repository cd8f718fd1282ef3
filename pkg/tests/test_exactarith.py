"""Tests for the exact/certified arithmetic layer."""

from fractions import Fraction as F

import gmpy2
import pytest
from hypothesis import given, settings, strategies as st

import siegelshear as ss
from siegelshear import exactarith as ea


rationals = st.fractions(min_value=-100, max_value=100, max_denominator=10**6)
small_rationals = st.fractions(min_value=-4, max_value=4, max_denominator=10**4)


def intervals(base=rationals):
    return st.tuples(base, base).map(
        lambda ab: ss.RatInterval(min(ab), max(ab)))


# ---------------------------------------------------------------------------
# RatInterval
# ---------------------------------------------------------------------------

class TestRatInterval:
    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ss.RatInterval(F(1, 2), F(1, 3))

    def test_point_and_queries(self):
        p = ss.RatInterval.point(F(3, 7))
        assert p.width == 0 and p.mid == F(3, 7)
        assert p.contains(F(3, 7)) and not p.contains(F(1, 2))

    @given(intervals(), intervals(), rationals, rationals)
    def test_add_mul_enclosure(self, a, b, x, y):
        """Interval ops enclose every pointwise result (exact, no rounding)."""
        xa = min(max(x, a.lo), a.hi)
        yb = min(max(y, b.lo), b.hi)
        assert (a + b).contains(xa + yb)
        assert (a - b).contains(xa - yb)
        assert (a * b).contains(xa * yb)

    @given(intervals(), rationals)
    def test_scale(self, a, c):
        s = a.scale(c)
        assert s.contains(a.lo * c) and s.contains(a.hi * c)
        assert s.width == abs(c) * a.width

    @given(intervals())
    def test_reduce_mod1(self, a):
        r = a.reduce_mod1()
        assert 0 <= r.lo < 1
        assert r.width == a.width
        assert (r.lo - a.lo).denominator == 1

    def test_hull_and_intersects(self):
        a = ss.RatInterval(0, 1)
        b = ss.RatInterval(F(1, 2), 2)
        assert a.intersects(b)
        assert a.hull(b) == ss.RatInterval(0, 2)
        assert not a.intersects(ss.RatInterval(3, 4))


# ---------------------------------------------------------------------------
# dist_to_int
# ---------------------------------------------------------------------------

class TestDistToInt:
    def test_frozen_values(self):
        d = ss.dist_to_int(ss.RatInterval.point(F(3, 8)))
        assert d.lo == d.hi == F(3, 8)
        d = ss.dist_to_int(ss.RatInterval.point(F(7, 8)))
        assert d.lo == d.hi == F(1, 8)
        d = ss.dist_to_int(ss.RatInterval.point(F(-13, 8)))
        assert d.lo == d.hi == F(3, 8)
        # straddles an integer
        d = ss.dist_to_int(ss.RatInterval(F(9, 10), F(11, 10)))
        assert d.lo == 0 and d.hi == F(1, 10)
        # straddles a half-integer
        d = ss.dist_to_int(ss.RatInterval(F(2, 5), F(3, 5)))
        assert d.lo == F(2, 5) and d.hi == F(1, 2)

    @given(intervals(small_rationals), small_rationals, st.integers(-5, 5))
    def test_enclosure_and_range(self, iv, t, k):
        d = ss.dist_to_int(iv)
        assert 0 <= d.lo <= d.hi <= F(1, 2)
        t = min(max(t, iv.lo), iv.hi)
        exact = min(abs(t - n) for n in
                    range(int(t) - 2, int(t) + 3))
        assert d.contains(exact)

    @given(small_rationals, st.integers(-10, 10))
    def test_periodicity(self, t, k):
        a = ss.dist_to_int(ss.RatInterval.point(t))
        b = ss.dist_to_int(ss.RatInterval.point(t + k))
        assert a.lo == b.lo and a.hi == b.hi


# ---------------------------------------------------------------------------
# CertifiedComplex
# ---------------------------------------------------------------------------

class TestCertifiedComplex:
    def test_exact_membership(self):
        z = ss.CertifiedComplex.from_rationals(F(1, 3), F(2, 7))
        assert z.contains_exact(F(1, 3), F(2, 7))

    @given(small_rationals, small_rationals, small_rationals, small_rationals)
    def test_ring_ops_contain_exact_result(self, ar, ai, br, bi):
        """Ball sums/products contain the exact rational-complex results."""
        a = ss.CertifiedComplex.from_rationals(ar, ai)
        b = ss.CertifiedComplex.from_rationals(br, bi)
        s = a + b
        assert s.contains_exact(ar + br, ai + bi)
        p = a * b
        assert p.contains_exact(ar * br - ai * bi, ar * bi + ai * br)

    @given(small_rationals, small_rationals, st.integers(0, 12))
    def test_pow_int(self, r, i, k):
        z = ss.CertifiedComplex.from_rationals(r, i)
        w = z.pow_int(k)
        # exact (re+im*i)^k by integer arithmetic on Fractions
        er, eim = F(1), F(0)
        for _ in range(k):
            er, eim = er * r - eim * i, er * i + eim * r
        assert w.contains_exact(er, eim)

    def test_abs_bounds_bracket(self):
        z = ss.CertifiedComplex.from_rationals(F(3, 5), F(4, 5))  # |z| = 1
        assert z.abs_lower() <= 1 <= z.abs_upper()
        assert float(z.abs_upper()) == pytest.approx(1.0, abs=1e-60)

    def test_widen_and_zero_test(self):
        z = ss.CertifiedComplex.from_rationals(F(1, 1000))
        assert not z.certainly_contains_zero()
        assert z.widen(gmpy2.mpfr("0.01")).certainly_contains_zero()

    def test_intersection_is_conservative(self):
        a = ss.CertifiedComplex.from_rationals(0, 0, err=F(3, 10))
        b = ss.CertifiedComplex.from_rationals(F(1, 2), 0, err=F(3, 10))
        assert a.certainly_intersects(b)  # radii overlap with slack
        c = ss.CertifiedComplex.from_rationals(1, 0, err=F(1, 4))
        assert not a.certainly_intersects(c)
        # exact tangency may be declined -- conservative, never unsound


# ---------------------------------------------------------------------------
# unit_exp and the chord/arc bounds
# ---------------------------------------------------------------------------

class TestUnitExp:
    def test_quarter_turns(self):
        assert ss.unit_exp(F(0)).contains_exact(1, 0)
        assert ss.unit_exp(F(1, 4)).contains_exact(0, 1)
        assert ss.unit_exp(F(1, 2)).contains_exact(-1, 0)
        assert ss.unit_exp(F(3, 4)).contains_exact(0, -1)
        assert ss.unit_exp(F(5, 4)).contains_exact(0, 1)

    @given(small_rationals)
    def test_modulus_one(self, t):
        u = ss.unit_exp(t)
        assert u.abs_lower() <= 1 <= u.abs_upper()

    @given(small_rationals, small_rationals)
    def test_multiplicative(self, s, t):
        """exp(2pi i s) * exp(2pi i t) and exp(2pi i (s+t)) must overlap."""
        prod = ss.unit_exp(s) * ss.unit_exp(t)
        assert prod.certainly_intersects(ss.unit_exp(s + t))

    @given(st.fractions(min_value=0, max_value=F(1, 2), max_denominator=10**4))
    def test_unity_gap_brackets_truth(self, d):
        """|1 - e^{2 pi i d}| lies inside both the sandwich and the sharp
        enclosure, and the sharp enclosure sits inside the sandwich."""
        iv = ss.RatInterval.point(d)
        sandwich = ss.one_minus_unit_exp_bound(iv)
        sharp = ss.two_sin_pi_enclosure(iv)
        assert sandwich.lo <= sharp.lo <= sharp.hi <= sandwich.hi
        gap = ss.CertifiedComplex.exact_int(1) - ss.unit_exp(d)
        assert float(gap.abs_lower()) >= float(sandwich.lo) - 1e-30
        assert float(gap.abs_upper()) <= float(sandwich.hi) + 1e-30

    def test_width_charge(self):
        wide = ss.unit_exp(ss.RatInterval(F(0), F(1, 100)))
        # err <= 2*pi*width + 2^-(P-8)
        assert float(wide.err) <= 2 * 3.15 / 100
        assert float(wide.err) >= 0.001  # actually charges the halfwidth arc

    def test_precision_refines(self):
        """Doubling the precision shrinks the ball and keeps it nested."""
        coarse = ss.unit_exp(F(1, 7))
        with ss.working_precision(512):
            fine = ss.unit_exp(F(1, 7))
        assert fine.err < coarse.err
        assert coarse.certainly_intersects(fine)


# ---------------------------------------------------------------------------
# LogMag / pow_logmag
# ---------------------------------------------------------------------------

class TestLogMag:
    def test_pow_logmag_frozen(self):
        lm = ss.pow_logmag(F(2), 10)  # 2^10 = 1024, log10 ~ 3.0103
        assert float(lm.log10_lo) == pytest.approx(3.0102999566398, rel=1e-12)
        assert float(lm.log10_hi) == pytest.approx(3.0102999566398, rel=1e-12)
        up = lm.magnitude_upper()
        assert 1024 <= up < 1025

    def test_pow_logmag_huge_exponent(self):
        lm = ss.pow_logmag(F(1, 2), 10**80)
        assert lm.log10_hi < 0
        assert float(lm.log10_lo) == pytest.approx(-3.0103e79, rel=1e-4)

    def test_tiny_materialization(self):
        lm = ss.pow_logmag(F(1, 2), 10**9)  # 10^(-3e8), beyond mpfr range
        up = lm.magnitude_upper()
        assert up > 0
        assert gmpy2.log10(up) == ss.get().log_tiny

    def test_band_guard(self):
        lm = ss.pow_logmag(F(2), 10**9)
        with pytest.raises(OverflowError):
            lm.magnitude_upper()

    @settings(max_examples=40)
    @given(st.fractions(min_value=F(1, 100), max_value=100,
                        max_denominator=1000),
           st.integers(0, 2000))
    def test_pow_brackets_exact(self, b, k):
        """The LogMag window must straddle the true log10(b^k): its lower
        bound cannot exceed any certified upper bound of the truth, and
        vice versa."""
        lm = ss.pow_logmag(b, k)
        exact = b ** k
        assert lm.log10_lo <= ea.log10_frac_up(exact)
        assert lm.log10_hi >= ea.log10_frac_down(exact)

    @given(st.fractions(min_value=F(1, 50), max_value=50, max_denominator=100),
           st.fractions(min_value=F(1, 50), max_value=50, max_denominator=100))
    def test_mul_consistent(self, a, b):
        p = ss.LogMag.from_fraction(a).mul(ss.LogMag.from_fraction(b))
        assert p.log10_lo <= ea.log10_frac_up(a * b)
        assert p.log10_hi >= ea.log10_frac_down(a * b)

    def test_zero_and_signs(self):
        z = ss.LogMag.zero()
        assert z.mul(ss.LogMag.from_int(7)).sign == 0
        assert ss.LogMag.from_fraction(F(-3, 2)).pow_int(2).sign == 1
        assert ss.LogMag.from_fraction(F(-3, 2)).pow_int(3).sign == -1


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

class TestHelpers:
    @given(st.fractions(min_value=F(-10**6), max_value=10**6,
                        max_denominator=10**9))
    def test_directed_conversion(self, x):
        if x != 0:
            assert ea.fraction_from_mpfr(ea.mpfr_down(x)) <= x
            assert ea.fraction_from_mpfr(ea.mpfr_up(x)) >= x

    @given(st.integers(1, 10**50))
    def test_log10_int_brackets(self, n):
        lo, hi = ea.log10_int_down(n), ea.log10_int_up(n)
        assert lo <= hi
        # 10^lo <= n <= 10^hi, checked through exponents
        assert n >= 10 ** int(gmpy2.floor(lo)) or int(gmpy2.floor(lo)) < 0
        d = len(str(n)) - 1
        assert lo <= d + 1 and hi >= d

    def test_decimal_str_deterministic(self):
        x = gmpy2.mpfr(1) / 3
        assert ea.decimal_str(x, 5) == "3.3333e-1"
        assert ea.decimal_str(-x, 5) == "-3.3333e-1"
        assert ea.decimal_str(gmpy2.mpfr(0)) == "0"

    def test_pi_brackets(self):
        assert ea.pi_down() < gmpy2.const_pi() < ea.pi_up()
        assert ea.PI_UPPER_RAT > F(314159265358979, 10**14)
