"""Tests for gap series, twist series, and their certified tails."""

import math
from fractions import Fraction as F

import gmpy2
import pytest
from hypothesis import given, strategies as st

from siegelshear.cfrac import golden_theta, make_liouville_theta
from siegelshear.errors import (
    GapViolation,
    OutsideDomain,
    OverflowBudget,
    TailNotCertifiable,
)
from siegelshear.exactarith import (
    CertifiedComplex,
    LogMag,
    RatInterval,
    unit_exp,
)
from siegelshear.lacunary import (
    CoefficientSeq,
    ExponentSubseq,
    divergence_probe,
    eval_h,
    eval_phi,
    eval_phi_prime,
    operator_norm,
    phi_coeff,
    radius_estimate,
    term_table_csv,
)


# -- oracles ----------------------------------------------------------------

def gap_partial_sum(exponents, coeffs, z: F, M: int) -> F:
    """Exact rational partial sum of sum u_n z^(q'_n + 1)."""
    total = F(0)
    for n in range(M + 1):
        re, im = coeffs(n)
        assert im == 0, "rational oracle handles real coefficients only"
        total += re * z ** (exponents[n] + 1)
    return total


POW2_EXPONENTS = [1, 2, 4, 8, 16]

# frozen from the oracle: sum over (1,2,4,8,16) of (1/2)^(q+1)
GAP_SUM_HALF = F(53505, 131072)


def test_oracle_gap_sum_frozen():
    got = gap_partial_sum(POW2_EXPONENTS, lambda n: (F(1), F(0)), F(1, 2), 4)
    assert got == GAP_SUM_HALF


def sqrt5_bounds(digits=120):
    scale = 10 ** digits
    r = math.isqrt(5 * scale * scale)
    return F(r, scale), F(r + 1, scale)


def golden_dist5_window():
    """Exact rational window for dist(5*theta, Z) at the golden ratio.

    5*theta - 3 = (5 sqrt(5) - 11)/2, squeezed through isqrt bounds.
    """
    lo5, hi5 = sqrt5_bounds()
    lo = (5 * lo5 - 11) / 2
    hi = (5 * hi5 - 11) / 2
    assert 0 < lo < hi < F(1, 2)
    return lo, hi


def test_oracle_golden_dist5_frozen():
    lo, hi = golden_dist5_window()
    assert F(901, 10000) < lo < hi < F(902, 10000)


# -- fixtures ---------------------------------------------------------------

@pytest.fixture(scope="module")
def fast_theta():
    return make_liouville_theta()


@pytest.fixture(scope="module")
def fast_seq(fast_theta):
    return ExponentSubseq.from_parent(fast_theta, [1, 2, 3])


@pytest.fixture(scope="module")
def golden():
    g = golden_theta()
    g.convergents(14)
    return g


def ball(re, im=0):
    return CertifiedComplex.from_rationals(F(re), F(im))


ONES = CoefficientSeq.ones()


# -- exponent subsequences --------------------------------------------------

class TestExponentSubseq:
    def test_detached_powers_of_two(self):
        s = ExponentSubseq.detached(POW2_EXPONENTS)
        assert len(s) == 5
        assert s.exponents() == POW2_EXPONENTS
        assert s.parent is None and s.parent_index(0) is None

    def test_gap_violation(self):
        with pytest.raises(GapViolation):
            ExponentSubseq.detached([10, 11])

    def test_gap_boundary_accepted(self):
        # 7^2 = 49 < 2*25 fails; 8 passes for base 5 (64 >= 50)
        with pytest.raises(GapViolation):
            ExponentSubseq.detached([5, 7])
        ExponentSubseq.detached([5, 8])

    def test_from_parent_records_levels(self, fast_theta):
        s = ExponentSubseq.from_parent(fast_theta, [1, 2, 3])
        assert s.exponent(0) == 2
        assert s.exponent(1) == 57
        assert s.parent_index(2) == 3
        assert s.exponent(2) == fast_theta.q(3)

    def test_parent_mismatch_rejected(self, fast_theta):
        with pytest.raises(ValueError):
            ExponentSubseq([3, 57], parent=fast_theta, parent_indices=[1, 2])

    def test_empty_and_nonpositive(self):
        with pytest.raises(ValueError):
            ExponentSubseq.detached([])
        with pytest.raises(ValueError):
            ExponentSubseq.detached([0, 2])

    @given(st.lists(st.integers(1, 50), min_size=2, max_size=6))
    def test_gap_check_matches_exact_predicate(self, raw):
        exps = sorted(set(raw))
        if len(exps) < 2:
            return
        ok = all(exps[k + 1] ** 2 >= 2 * exps[k] ** 2 for k in range(len(exps) - 1))
        if ok:
            ExponentSubseq.detached(exps)
        else:
            with pytest.raises(GapViolation):
                ExponentSubseq.detached(exps)


# -- coefficient sequences --------------------------------------------------

class TestCoefficientSeq:
    def test_defaults_and_overrides(self):
        u = CoefficientSeq(overrides={2: (F(1, 3), F(1, 3))})
        assert u.at(0) == (F(1), F(0))
        assert u.at(2) == (F(1, 3), F(1, 3))
        assert u.sup_norm == 1

    def test_sup_norm_enforced(self):
        with pytest.raises(ValueError):
            CoefficientSeq(default=(2, 0), sup_norm=1)
        with pytest.raises(ValueError):
            CoefficientSeq(overrides={0: (1, 1)}, sup_norm=1)

    def test_rule_checked_lazily(self):
        u = CoefficientSeq(rule=lambda n: (n, 0), sup_norm=1)
        assert u.at(1) == (F(1), F(0))
        with pytest.raises(ValueError):
            u.at(2)

    def test_alternating(self):
        u = CoefficientSeq.alternating()
        assert u.at(0) == (F(1), F(0))
        assert u.at(3) == (F(-1), F(0))

    def test_abs_log10_upper(self):
        u = CoefficientSeq(default=(F(1, 100), 0))
        b = u.abs_log10_upper(0)
        assert -2 <= b < F(-199, 100)
        assert CoefficientSeq.zeros().abs_log10_upper(5) is None


# -- gap series -------------------------------------------------------------

class TestGapSeries:
    def test_frozen_value(self):
        seq = ExponentSubseq.detached(POW2_EXPONENTS)
        sv = eval_h(seq, ONES, ball(F(1, 2)), 4)
        assert sv.value.contains_exact(GAP_SUM_HALF)
        # tail = 2 sup |z|^(e*+1)/(1-|z|) with e* = ceil(16 sqrt 2) = 23
        assert sv.tail_bound <= gmpy2.mpfr(2) ** -21
        assert sv.truncation_index == 4

    def test_zero_inputs(self):
        seq = ExponentSubseq.detached(POW2_EXPONENTS)
        assert eval_h(seq, ONES, ball(0), 3).value.contains_exact(0)
        z = ball(F(1, 3), F(1, 7))
        sv = eval_h(seq, CoefficientSeq.zeros(), z, 3)
        assert sv.value.contains_exact(0) and sv.tail_bound == 0

    def test_outside_domain(self):
        seq = ExponentSubseq.detached(POW2_EXPONENTS)
        with pytest.raises(OutsideDomain):
            eval_h(seq, ONES, ball(1), 2)
        with pytest.raises(OutsideDomain):
            eval_h(seq, ONES, ball(F(3, 2)), 2)

    def test_truncation_validation(self):
        seq = ExponentSubseq.detached(POW2_EXPONENTS)
        with pytest.raises(ValueError):
            eval_h(seq, ONES, ball(F(1, 2)), 5)
        with pytest.raises(ValueError):
            eval_h(seq, ONES, ball(F(1, 2)), -1)

    def test_huge_exponent_folds_to_tiny(self):
        seq = ExponentSubseq.detached([1, 2, 10 ** 6])
        sv = eval_h(seq, ONES, ball(F(1, 2)), 2)
        partial = gap_partial_sum([1, 2], lambda n: (F(1), F(0)), F(1, 2), 1)
        assert sv.value.contains_exact(partial)
        # the 10^6 exponent never materializes: only rounding noise and the
        # tiny-clamped fold remain
        assert sv.value.err < gmpy2.mpfr("1e-70")
        assert sv.tail_bound < gmpy2.mpfr("1e-99000")

    def test_parent_linked_tail_uses_next_level(self, golden):
        seq = ExponentSubseq.from_parent(golden, [2, 3, 4])
        sv = eval_h(seq, ONES, ball(F(1, 2)), 2)
        # exponents 2,3,5; first omitted is q_5 = 8
        partial = gap_partial_sum([2, 3, 5], lambda n: (F(1), F(0)), F(1, 2), 2)
        assert sv.value.contains_exact(partial)
        assert sv.tail_bound <= gmpy2.mpfr(2) ** -7 * gmpy2.mpfr("1.01")

    @given(st.integers(1, 6), st.integers(2, 9))
    def test_partial_sum_always_inside(self, num, den):
        if num >= den:
            return
        z = F(num, den)
        seq = ExponentSubseq.detached(POW2_EXPONENTS)
        for M in (0, 2, 4):
            sv = eval_h(seq, ONES, ball(z), M)
            assert sv.value.contains_exact(
                gap_partial_sum(POW2_EXPONENTS, lambda n: (F(1), F(0)), z, M))

    def test_refinement_nests(self):
        seq = ExponentSubseq.detached(POW2_EXPONENTS)
        z = ball(F(3, 5))
        coarse = eval_h(seq, ONES, z, 1)
        fine = eval_h(seq, ONES, z, 4)
        assert coarse.value.certainly_intersects(fine.value)
        assert fine.value.err < coarse.value.err


# -- twist coefficients -----------------------------------------------------

class TestTwistCoefficient:
    def test_zero_multiple_exact(self, fast_theta, fast_seq):
        assert phi_coeff(fast_theta, fast_seq, ONES, 1, 0).contains_exact(0)

    def test_rational_root_of_unity_vanishes(self):
        seq = ExponentSubseq.detached([5, 8])
        mu = RatInterval.point(F(2, 5))
        pc = phi_coeff(mu, seq, ONES, 0, 1)
        assert pc.contains_exact(0)
        assert pc.abs_upper() < gmpy2.mpfr("1e-70")

    def test_golden_level3_matches_sine_oracle(self, golden):
        seq = ExponentSubseq.from_parent(golden, [1, 2, 3, 4])
        pc = phi_coeff(golden, seq, ONES, 3, 1)
        lo, hi = golden_dist5_window()
        # dist(5 theta) lies in the oracle window and below 1/q_5 = 1/8
        assert hi < F(1, 8)
        # |1 - e^(2 pi i x)| = 2 sin(pi x): frozen two-sided window
        assert gmpy2.mpfr("0.5590") < pc.abs_lower() < pc.abs_upper() < gmpy2.mpfr("0.5591")

    def test_smallness_along_fast_ladder(self, fast_theta, fast_seq):
        """|1 - e^(2 pi i q_n theta)| <= 2 pi / q_{n+1}, up to the additive
        precision floor 2^-(P-8) the ball's upper bound carries."""
        floor = gmpy2.mpfr(2) ** -240
        for n in range(3):
            p = fast_seq.parent_index(n)
            bound = F(710, 113) * fast_theta.delta_upper_fraction(p)
            pc = phi_coeff(fast_theta, fast_seq, ONES, n, 1)
            assert pc.abs_lower() <= bound
            assert pc.abs_upper() <= gmpy2.mpfr(bound.numerator) / gmpy2.mpfr(bound.denominator) + floor

    def test_coefficient_scales_with_u(self, fast_theta, fast_seq):
        u = CoefficientSeq(default=(F(1, 4), 0))
        a = phi_coeff(fast_theta, fast_seq, ONES, 0, 1)
        b = phi_coeff(fast_theta, fast_seq, u, 0, 1)
        assert b.abs_upper() < a.abs_upper() / 3

    def test_unresolvable_angle_degrades_to_radius_ball(self, golden):
        seq = ExponentSubseq.from_parent(golden, [1, 2, 3, 4])
        pc = phi_coeff(golden, seq, ONES, 3, 10 ** 40)
        assert pc.certainly_contains_zero()
        assert gmpy2.mpfr("1.9") < pc.abs_upper() < gmpy2.mpfr("2.1")


# -- twist series -----------------------------------------------------------

class TestTwistSeries:
    def test_entire_at_three_halves(self, fast_theta, fast_seq):
        sv = eval_phi(fast_theta, fast_seq, ONES, ball(F(3, 2)), 2, N=1)
        assert gmpy2.is_finite(sv.value.err)
        assert sv.value.err < gmpy2.mpfr("1e-60")
        assert sv.tail_bound < gmpy2.mpfr("1e-99000")

    def test_refinement_containment(self, fast_theta, fast_seq):
        z = ball(F(3, 2))
        coarse = eval_phi(fast_theta, fast_seq, ONES, z, 1, N=1)
        fine = eval_phi(fast_theta, fast_seq, ONES, z, 2, N=1)
        assert coarse.value.certainly_intersects(fine.value)

    def test_far_outside_disk_still_finite(self, fast_theta, fast_seq):
        sv = eval_phi(fast_theta, fast_seq, ONES, ball(10), 2, N=1)
        assert sv.value.err < gmpy2.mpfr("1e-10")

    def test_margin_failure_refuses(self, fast_theta, fast_seq):
        # at M=0 the first omitted level has g=3, so |z|=100 breaks the
        # ratio margin 3*log10(e) - 2 < 0.302
        with pytest.raises(TailNotCertifiable):
            eval_phi(fast_theta, fast_seq, ONES, ball(100), 0, N=1)

    def test_detached_needs_unit_disk(self):
        seq = ExponentSubseq.detached(POW2_EXPONENTS)
        mu = RatInterval.point(F(1, 7))
        with pytest.raises(TailNotCertifiable):
            eval_phi(mu, seq, ONES, ball(F(3, 2)), 3)

    def test_golden_needs_unit_disk(self, golden):
        seq = ExponentSubseq.from_parent(golden, [1, 2, 3, 4])
        with pytest.raises(TailNotCertifiable):
            eval_phi(golden, seq, ONES, ball(F(3, 2)), 3, N=1)

    def test_band_overflow_refused(self, fast_theta, fast_seq):
        with pytest.raises((OverflowBudget, TailNotCertifiable)):
            eval_phi(fast_theta, fast_seq, ONES, ball(10 ** 4000), 2, N=1)

    def test_zero_angle_multiple(self, fast_theta, fast_seq):
        sv = eval_phi(fast_theta, fast_seq, ONES, ball(F(3, 2)), 2, N=0)
        assert sv.value.contains_exact(0)

    def test_functional_equation_on_disk(self):
        """phi(mu, z) agrees with e^(2 pi i mu) h(z) - h(e^(2 pi i mu) z)."""
        seq = ExponentSubseq.detached(POW2_EXPONENTS)
        mu = RatInterval.point(F(1, 7))
        z = ball(F(2, 5), F(1, 10))
        lhs = eval_phi(mu, seq, ONES, z, 4).value
        rot = unit_exp(mu)
        rhs = rot * eval_h(seq, ONES, z, 4).value - eval_h(seq, ONES, rot * z, 4).value
        assert lhs.certainly_intersects(rhs)

    @given(st.integers(1, 12), st.integers(1, 5), st.integers(7, 11))
    def test_functional_equation_property(self, mu_num, z_num, z_den):
        mu = RatInterval.point(F(mu_num, 13))
        z = ball(F(z_num, z_den) - F(1, 2))  # spread through +/- values
        seq = ExponentSubseq.detached([1, 2, 4, 8])
        lhs = eval_phi(mu, seq, ONES, z, 3).value
        rot = unit_exp(mu)
        rhs = rot * eval_h(seq, ONES, z, 3).value - eval_h(seq, ONES, rot * z, 3).value
        assert lhs.certainly_intersects(rhs)


# -- derivative -------------------------------------------------------------

class TestTwistDerivative:
    def test_zero_at_origin(self, fast_theta, fast_seq):
        sv = eval_phi_prime(fast_theta, fast_seq, ONES, ball(0), 2, N=1)
        assert sv.value.contains_exact(0)

    def test_finite_difference_budget(self):
        """Symmetric finite differences agree within the certified radii
        amplified by 1/(2 delta), plus an explicit third-derivative term."""
        seq = ExponentSubseq.detached(POW2_EXPONENTS)
        mu = RatInterval.point(F(1, 7))
        d = F(1, 10 ** 6)
        z0 = (F(1, 2), F(1, 5))
        fp = eval_phi(mu, seq, ONES, ball(z0[0] + d, z0[1]), 4).value
        fm = eval_phi(mu, seq, ONES, ball(z0[0] - d, z0[1]), 4).value
        dv = eval_phi_prime(mu, seq, ONES, ball(*z0), 4).value
        fd = (fp - fm).scale_rational(F(1, 2 * d))
        # |phi'''| on the segment, crudely: sum 2 (q+1) q (q-1) |z'|^(q-2)
        zmag = F(6, 10)
        c3 = sum(2 * (q + 1) * q * (q - 1) * zmag ** max(0, q - 2)
                 for q in POW2_EXPONENTS)
        budget = (fp.err + fm.err) * gmpy2.mpfr(500000) + dv.err \
            + gmpy2.mpfr(c3.numerator) / gmpy2.mpfr(c3.denominator) * gmpy2.mpfr("1e-12")
        diff = fd - dv
        assert diff.abs_upper() <= budget * gmpy2.mpfr("1.001")
        # sharpness: the ball centers agree far better than the budget
        assert (fd - dv).abs_lower() <= gmpy2.mpfr("1e-8")

    def test_derivative_scale_matches_term_structure(self, fast_theta, fast_seq):
        """On a single dominant term, phi' ~ (1+q') phi / z."""
        z = ball(F(3, 2))
        v = eval_phi(fast_theta, fast_seq, ONES, z, 0, N=1).value
        dv = eval_phi_prime(fast_theta, fast_seq, ONES, z, 0, N=1).value
        lhs = dv.abs_upper()
        rhs = v.abs_upper() * gmpy2.mpfr(3) / gmpy2.mpfr("1.5")
        assert abs(lhs - rhs) < gmpy2.mpfr("1e-10") * max(lhs, rhs)

    def test_entire_derivative_far_out(self, fast_theta, fast_seq):
        sv = eval_phi_prime(fast_theta, fast_seq, ONES, ball(10), 2, N=1)
        assert gmpy2.is_finite(sv.value.err)


# -- operator norm ----------------------------------------------------------

class TestOperatorNorm:
    def test_frozen_window_fast(self, fast_theta, fast_seq):
        on = operator_norm(fast_theta, fast_seq, F(3, 2), 1, 2)
        assert F(74, 100) < on.lo <= on.hi < F(75, 100)

    def test_monotone_in_magnitude(self, fast_theta, fast_seq):
        a = operator_norm(fast_theta, fast_seq, F(1, 2), 1, 2)
        b = operator_norm(fast_theta, fast_seq, F(1), 1, 2)
        c = operator_norm(fast_theta, fast_seq, F(3, 2), 1, 2)
        assert a.hi <= b.hi * F(101, 100)
        assert b.lo <= c.hi and a.lo <= b.hi

    def test_zero_cases(self, fast_theta, fast_seq):
        assert operator_norm(fast_theta, fast_seq, 0, 1, 2) == RatInterval.point(0)
        assert operator_norm(fast_theta, fast_seq, F(3, 2), 0, 2) == RatInterval.point(0)

    def test_detached_disk(self):
        seq = ExponentSubseq.detached([1, 2, 4])
        mu = RatInterval.point(F(1, 7))
        on = operator_norm(mu, seq, F(1, 2), 1, 2)
        # head: sum(1+q) 2 sin(pi dist(q/7)) (1/2)^q ~ 2.65; the detached
        # geometric tail adds up to ~0.9 on the upper end
        assert F(2) < on.lo <= on.hi < F(4)


# -- radius heuristic -------------------------------------------------------

class TestRadiusEstimate:
    def test_unit_coefficients(self):
        pairs = [(2 ** k, LogMag.from_int(1)) for k in range(1, 8)]
        est = radius_estimate(pairs)
        assert not est.certified
        assert est.lo <= 1 <= est.hi
        assert est.hi - est.lo < gmpy2.mpfr("1e-50")

    def test_geometric_coefficients_recover_radius(self):
        # |c_k| = 2^(-k) at exponent k: radius 2
        pairs = [(2 ** k, LogMag.from_fraction(F(1, 2)).pow_int(2 ** k))
                 for k in range(1, 8)]
        est = radius_estimate(pairs)
        assert est.lo <= 2 <= est.hi
        assert est.hi - est.lo < gmpy2.mpfr("1e-40")

    def test_fast_theta_estimate_grows(self, fast_theta):
        def pairs(n_max):
            out = []
            for n in range(1, n_max + 1):
                out.append((fast_theta.q(n), fast_theta.delta_logmag(n)))
            return out
        shallow = radius_estimate(pairs(2))
        deep = radius_estimate(pairs(3))
        assert deep.lo > shallow.lo
        assert deep.lo > 10

    def test_degenerate_inputs(self):
        with pytest.raises(ValueError):
            radius_estimate([(2, LogMag.from_int(1))])
        est = radius_estimate([(2, LogMag.zero()), (4, LogMag.zero())])
        assert gmpy2.is_infinite(est.lo) and gmpy2.is_infinite(est.hi)


# -- divergence probe -------------------------------------------------------

class TestDivergenceProbe:
    def test_ones_threshold_five(self):
        r = divergence_probe(ONES, None, 5)
        assert r.found and r.index == 5
        assert r.partial_re == 6 and r.partial_im == 0

    def test_alternating_never_escapes(self):
        r = divergence_probe(CoefficientSeq.alternating(), None, 5, cap=3000)
        assert not r.found and r.index is None

    def test_zeros_never_escape(self):
        r = divergence_probe(CoefficientSeq.zeros(), None, F(1, 2), cap=100)
        assert not r.found

    @given(st.integers(1, 40), st.integers(1, 6))
    def test_constant_coefficients_hit_ceiling(self, K, c):
        u = CoefficientSeq(default=(c, 0), sup_norm=c)
        r = divergence_probe(u, None, K, cap=5000)
        # smallest N with (N+1) c > K
        assert r.found and r.index == K // c
        assert r.partial_re == (r.index + 1) * c

    def test_complex_partial_sums(self):
        u = CoefficientSeq(rule=lambda n: [(1, 0), (0, 1)][n % 2])
        r = divergence_probe(u, None, 2)
        # sums walk (1,0),(1,1),(2,1): |2+i|^2 = 5 first exceeds 4 at n=2
        assert r.found and r.index == 2 and r.partial_abs_sq == 5


# -- term tables ------------------------------------------------------------

class TestTermTable:
    def test_structure_and_frozen_rows(self, fast_theta, fast_seq):
        csv = term_table_csv(fast_theta, fast_seq, ONES, F(3, 2), 2, 1)
        lines = csv.strip().split("\n")
        assert lines[0] == ("n,q_exponent,coeff_abs_log10,term_abs_log10,"
                            "certified_upper_bound_log10")
        assert len(lines) == 4
        row1 = lines[2].split(",")
        assert row1[0] == "1" and row1[1] == "57"
        assert float(row1[2]) == pytest.approx(-73.47, abs=0.1)
        row2 = lines[3].split(",")
        assert row2[1] == str(fast_theta.q(3))
        assert float(row2[4]) == pytest.approx(-100000.0)

    def test_zero_coefficient_rows(self, fast_theta, fast_seq):
        csv = term_table_csv(fast_theta, fast_seq, CoefficientSeq.zeros(),
                             F(3, 2), 1, 1)
        for line in csv.strip().split("\n")[1:]:
            assert ",-inf,-inf," in line
