r"""Certified evaluation of lacunary gap series and twist series.

The objects here are power series supported on a sparse, Hadamard-gapped
set of exponents q'_0 < q'_1 < ... drawn from (or compatible with) the
denominator ladder of a continued fraction:

* the gap series      h(z)    = sum_n u_n z^(q'_n + 1),
* the twist series    phi(z)  = e^(2 pi i a) sum_n u_n (1 - e^(2 pi i q'_n a)) z^(q'_n + 1),
* its derivative      phi'(z) = e^(2 pi i a) sum_n u_n (1 + q'_n)(1 - e^(2 pi i q'_n a)) z^(q'_n),
* the twist operator norm   sum_n (1 + q'_n) |1 - e^(2 pi i q'_n a)| |z|^(q'_n),

where the angle a is either N*theta for a continued-fraction theta (the
exact small-divisor path) or an explicit rational interval.  Every result
is a ball or interval whose certified radius includes the analytic
truncation tail.

Tail discipline
---------------
Inside the unit disk tails close geometrically.  Outside, convergence
rests on coefficient smallness |1 - e^(2 pi i q_n N theta)| <=
2 pi N / q_{n+1}: the certified bound for every omitted term is kept in
the margin form

    log10(term_n) <= log10(2 pi N sup |z|) - q'_n (g(n) log10(e) - log10|z|),

which never materializes |z|^(q'_n) or q_{n+1} themselves -- essential
once exponents run to 10^74 digits.  A margin m = g log10(e) - log10|z|
of at least 0.302 makes successive bounds shrink by at least 1/2 per
level, so the whole tail is at most twice the first omitted bound; when
the margin fails, evaluation refuses rather than guesses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import gmpy2
from gmpy2 import mpfr

from . import config
from .cfrac import ContinuedFraction
from .errors import (
    EnclosureTooWide,
    GapViolation,
    OutsideDomain,
    OverflowBudget,
    StreamExhausted,
    TailNotCertifiable,
)
from .exactarith import (
    CertifiedComplex,
    RatInterval,
    bump_down,
    bump_up,
    decimal_str,
    dist_to_int,
    down_mul,
    down_sub,
    fraction_from_mpfr,
    log10_frac_up,
    log10_int_up,
    mpfr_down,
    mpfr_up,
    one_minus_unit_exp_bound,
    tiny,
    two_sin_pi_enclosure,
    unit_exp,
    up_add,
    up_mul,
)

__all__ = [
    "ExponentSubseq",
    "CoefficientSeq",
    "SeriesValue",
    "RadiusEstimate",
    "ProbeResult",
    "eval_h",
    "phi_coeff",
    "eval_phi",
    "eval_phi_prime",
    "operator_norm",
    "radius_estimate",
    "divergence_probe",
    "term_table_csv",
]

AngleSource = Union[ContinuedFraction, RatInterval]

# 2 pi < 710/113; reused as the small-divisor estimate constant
_TWO_PI_UP = Fraction(710, 113)


def _log10e_down() -> mpfr:
    return bump_down(gmpy2.log10(gmpy2.exp(mpfr(1))), 2)


def _down_add(a: mpfr, b: mpfr) -> mpfr:
    return bump_down(gmpy2.add(a, b))


# ---------------------------------------------------------------------------
# exponent subsequences
# ---------------------------------------------------------------------------

class ExponentSubseq:
    """Strictly increasing exponents with Hadamard gap ratio >= sqrt(2).

    Entries either come from a parent continued fraction (each exponent a
    materialized denominator q_n, with its level recorded so the next
    level's small-divisor data stays reachable for coefficient bounds and
    tails), or stand alone ("detached", e.g. plain powers of two).  The
    gap condition is checked exactly as q'_{k+1}^2 >= 2 q'_k^2.
    """

    def __init__(self, exponents: Sequence[int], parent: ContinuedFraction = None,
                 parent_indices: Sequence[int] = None):
        self._e = [int(e) for e in exponents]
        if not self._e:
            raise ValueError("empty exponent sequence")
        if any(e < 1 for e in self._e):
            raise ValueError("exponents must be >= 1")
        for k in range(len(self._e) - 1):
            if self._e[k + 1] * self._e[k + 1] < 2 * self._e[k] * self._e[k]:
                raise GapViolation(
                    f"gap ratio below sqrt(2) between entries {k} and {k + 1}")
        self.parent = parent
        if parent is not None:
            if parent_indices is None or len(parent_indices) != len(self._e):
                raise ValueError("parent-linked sequences need one level per entry")
            self._idx = [int(i) for i in parent_indices]
            for k, (e, i) in enumerate(zip(self._e, self._idx)):
                if parent.q(i) != e:
                    raise ValueError(
                        f"entry {k} ({e}) is not the parent denominator q_{i}")
        else:
            self._idx = None

    @classmethod
    def from_parent(cls, cf: ContinuedFraction, indices: Sequence[int]) -> "ExponentSubseq":
        return cls([cf.q(i) for i in indices], parent=cf,
                   parent_indices=list(indices))

    @classmethod
    def detached(cls, exponents: Sequence[int]) -> "ExponentSubseq":
        return cls(exponents)

    def __len__(self):
        return len(self._e)

    def exponent(self, k: int) -> int:
        return self._e[k]

    def parent_index(self, k: int) -> Optional[int]:
        return None if self._idx is None else self._idx[k]

    def exponents(self):
        return list(self._e)

    def growth_rate(self, level: int) -> Optional[Fraction]:
        """g(level) of the parent's growth prescription, if any."""
        if self.parent is None or self.parent._growth is None:
            return None
        try:
            return self.parent._growth.rate(level)
        except StreamExhausted:
            return None


# ---------------------------------------------------------------------------
# coefficient sequences
# ---------------------------------------------------------------------------

class CoefficientSeq:
    """Bounded coefficients u_n as exact rational complex numbers.

    ``default`` applies to every index without an override; an optional
    ``rule`` (index -> (re, im)) takes precedence over the default.  The
    sup-norm bound |u_n| <= sup_norm is enforced exactly.
    """

    def __init__(self, default=(1, 0), overrides: dict = None,
                 rule: Callable[[int], tuple] = None, sup_norm=1):
        self.sup_norm = Fraction(sup_norm)
        if self.sup_norm < 0:
            raise ValueError("sup_norm must be >= 0")
        self._default = (Fraction(default[0]), Fraction(default[1]))
        self._check(self._default)
        self._overrides = {}
        for k, v in (overrides or {}).items():
            val = (Fraction(v[0]), Fraction(v[1]))
            self._check(val)
            self._overrides[int(k)] = val
        self._rule = rule

    def _check(self, val):
        if val[0] * val[0] + val[1] * val[1] > self.sup_norm ** 2:
            raise ValueError(f"coefficient {val} exceeds sup_norm {self.sup_norm}")

    @classmethod
    def ones(cls) -> "CoefficientSeq":
        return cls()

    @classmethod
    def zeros(cls) -> "CoefficientSeq":
        return cls(default=(0, 0), sup_norm=0)

    @classmethod
    def alternating(cls) -> "CoefficientSeq":
        return cls(rule=lambda n: (1 if n % 2 == 0 else -1, 0))

    def at(self, n: int):
        if n in self._overrides:
            return self._overrides[n]
        if self._rule is not None:
            raw = self._rule(n)
            val = (Fraction(raw[0]), Fraction(raw[1]))
            self._check(val)
            return val
        return self._default

    def ball(self, n: int) -> CertifiedComplex:
        re, im = self.at(n)
        return CertifiedComplex.from_rationals(re, im)

    def abs_log10_upper(self, n: int) -> Optional[mpfr]:
        """Certified upper bound for log10 |u_n|; None when u_n = 0."""
        re, im = self.at(n)
        m2 = re * re + im * im
        if m2 == 0:
            return None
        return bump_up(gmpy2.div(log10_frac_up(m2), mpfr(2)), 2)


@dataclass(frozen=True)
class SeriesValue:
    """A certified partial sum: ball + the analytic tail already in err."""

    value: CertifiedComplex
    truncation_index: int
    tail_bound: mpfr


# ---------------------------------------------------------------------------
# angle plumbing
# ---------------------------------------------------------------------------

def _angle_frac(source: AngleSource, K: int) -> RatInterval:
    """Enclosure of K*angle (unreduced; unit_exp reduces mod 1 exactly)."""
    if isinstance(source, RatInterval):
        return source.scale(K)
    cf = source
    for _ in range(9):
        try:
            return cf.angle_multiple(K, max_width=Fraction(1, 2 ** 48))
        except EnclosureTooWide:
            if cf._rule is None:
                raise
            cf.convergents(cf.depth_exact + 4)  # deepen the anchor, retry
    raise EnclosureTooWide(f"angle of {K}*theta not resolvable to 2^-48")


def _dist_interval(source: AngleSource, seq: ExponentSubseq, n: int,
                   N: int) -> Optional[RatInterval]:
    """dist(q'_n N a, Z) when computable exactly; None when only log data."""
    qn = seq.exponent(n)
    if isinstance(source, RatInterval):
        return dist_to_int(source.scale(qn * N))
    p = seq.parent_index(n)
    if p is None or seq.parent is not source:
        return dist_to_int(_angle_frac(source, qn * N))
    try:
        return source.frac_qNtheta(p, N)
    except (EnclosureTooWide, StreamExhausted):
        return None


def _coeff_abs_log10_upper(source: AngleSource, seq: ExponentSubseq, n: int,
                           N: int) -> mpfr:
    """Certified log10 upper bound for |1 - e^(2 pi i q'_n N a)| (<= 2)."""
    best = bump_up(gmpy2.log10(mpfr(2)))
    try:
        d = _dist_interval(source, seq, n, N)
    except EnclosureTooWide:
        d = None
    if d is not None and 0 < d.hi < Fraction(1, 3):
        b = one_minus_unit_exp_bound(d)
        if b.hi > 0:
            best = min(best, log10_frac_up(b.hi))
    if (not isinstance(source, RatInterval) and seq.parent is source
            and seq.parent_index(n) is not None):
        p = seq.parent_index(n)
        try:
            # |1 - e| <= 2 pi dist <= 2 pi N |delta_p| <= 2 pi N / q_{p+1}
            lo_next, _ = source.log10_q(p + 1)
            est = up_add(log10_frac_up(_TWO_PI_UP * abs(N)), bump_up(-lo_next))
            best = min(best, est)
        except (StreamExhausted, OverflowBudget):
            pass
    return best


def phi_coeff(source: AngleSource, seq: ExponentSubseq, u: CoefficientSeq,
              n: int, N: int) -> CertifiedComplex:
    """Ball enclosing u_n (1 - e^(2 pi i q'_n N a)).

    The preferred route evaluates the unit exponential on an exact angle
    enclosure; when that is unresolvable (astronomical multiples of a
    shallow stream), the ball degrades gracefully to center 0 with the
    certified small-divisor magnitude bound as radius.
    """
    if N == 0:
        return CertifiedComplex.zero()
    re, im = u.at(n)
    if re == 0 and im == 0:
        return CertifiedComplex.zero()
    qn = seq.exponent(n)
    try:
        ang = _angle_frac(source, qn * N)
        gap = CertifiedComplex.exact_int(1) - unit_exp(ang)
        return u.ball(n) * gap
    except EnclosureTooWide:
        r_log10 = _coeff_abs_log10_upper(source, seq, n, N)
        ulog = u.abs_log10_upper(n)
        total = up_add(r_log10, ulog)
        cfg = config.get()
        rad = tiny() if total <= cfg.log_tiny else bump_up(gmpy2.exp10(total), 2)
        return CertifiedComplex(gmpy2.mpc(0), rad)


# ---------------------------------------------------------------------------
# tail machinery
# ---------------------------------------------------------------------------

def _next_exponent_exact(seq: ExponentSubseq, M: int) -> Optional[int]:
    """First omitted exponent as an exact integer, if one is available."""
    if M + 1 < len(seq):
        return seq.exponent(M + 1)
    if seq.parent is not None:
        p_next = seq.parent_index(M) + 1
        if seq.parent.level_kind(p_next) == "exact":
            return seq.parent.q(p_next)
        return None
    # detached: minimal Hadamard continuation q'_{M+1} = ceil(sqrt(2) q'_M)
    q = seq.exponent(M)
    e = math.isqrt(2 * q * q)
    if e * e < 2 * q * q:
        e += 1
    return e


def _pow_log10_upper(e: int, log10_z_hi: mpfr) -> mpfr:
    """Upper bound for log10 |z|^e, with e an exact nonnegative integer."""
    if log10_z_hi >= 0:
        return up_mul(bump_up(mpfr(e)), log10_z_hi)
    return bump_up(gmpy2.mul(bump_down(mpfr(e)), log10_z_hi))


def _tail_inside_disk(seq: ExponentSubseq, sup: Fraction, z_hi: mpfr,
                      log10_z_hi: mpfr, M: int, deriv: int) -> mpfr:
    """Geometric tail for |z| < 1 with coefficients bounded by 2*sup.

    deriv=0: sum_{k >= e*+1} 2 sup |z|^k  =  2 sup |z|^(e*+1)/(1-|z|);
    deriv=1: sum 2 sup k |z|^(k-1)  <=  2 sup (e*+1) |z|^(e*)/(1-|z|)^2.
    """
    if sup == 0:
        return mpfr(0)
    cfg = config.get()
    one_minus = down_sub(mpfr(1), z_hi)
    if one_minus <= 0:
        raise TailNotCertifiable("|z| upper bound touches 1")
    # -(1+deriv) log10(1-|z|), overestimated through the lower bound of 1-|z|
    pen = up_mul(mpfr(1 + deriv), bump_up(-bump_down(gmpy2.log10(one_minus), 2)))
    e_star = _next_exponent_exact(seq, M)
    if e_star is None:
        # soft continuation exponent e* >= 10^lo: certify e*|log10|z|| >= 1e6
        # in log-log form, then absorb the 1/(1-|z|) penalty explicitly
        p_next = seq.parent_index(M) + 1
        lo, _ = seq.parent.log10_q(p_next)
        neg = -log10_z_hi
        if neg <= 0:
            raise TailNotCertifiable("|z| upper bound touches 1")
        if _down_add(bump_down(gmpy2.log10(neg), 2), lo) < mpfr(6):
            raise TailNotCertifiable("soft exponent too shallow for the tail")
        if up_add(pen, mpfr(cfg.log_tiny + 100 - 10 ** 6)) > 0:
            raise TailNotCertifiable("1-|z| too small for the soft tail")
        return bump_up(2 * tiny())
    lead = _pow_log10_upper(e_star + (1 - deriv), log10_z_hi)
    lead = up_add(lead, log10_frac_up(2 * sup))
    if deriv:
        lead = up_add(lead, log10_int_up(e_star + 1))
    total = up_add(lead, pen)
    if total <= cfg.log_tiny:
        return bump_up(2 * tiny())
    if total > cfg.log_band:
        raise TailNotCertifiable("geometric tail bound overflows the band")
    return bump_up(gmpy2.exp10(total), 2)


def _check_deriv_ratio_exact(e1: int, margin: mpfr):
    """The (1+q') factor never outruns the 10^(-dq*m) shrinkage.

    Sufficient at the first omitted exponent Q (and then for all larger,
    by monotonicity past the turning point): log10(2Q) <= 0.29 Q m - 0.302.
    """
    Q = mpfr(e1)
    lhs = up_add(bump_up(gmpy2.log10(Q)), log10_frac_up(Fraction(2)))
    rhs = down_sub(down_mul(down_mul(mpfr("0.29"), bump_down(Q)), margin),
                   mpfr("0.302"))
    if not lhs <= rhs:
        raise TailNotCertifiable(
            f"derivative tail ratio not certified at exponent {e1}")


def _tail_by_margin(seq: ExponentSubseq, sup: Fraction, N: int,
                    log10_z_hi: mpfr, M: int, deriv: int) -> mpfr:
    """Tail for arbitrary |z| via the small-divisor margin argument.

    Requires a parent stream with a growth prescription covering the
    omitted levels.  With m = g log10(e) - log10|z| >= 0.302 at the first
    omitted level (g nondecreasing), certified per-term bounds shrink by
    at least 1/2 per level, so the tail is at most twice the first
    omitted bound; the derivative variant additionally checks that the
    (1+q') factor is dominated.
    """
    if sup == 0:
        return mpfr(0)
    if seq.parent is None:
        raise TailNotCertifiable(
            "outside the unit disk a parent stream with growth data is needed")
    if M + 1 < len(seq):
        p1 = seq.parent_index(M + 1)
        kind = "exact"
    else:
        p1 = seq.parent_index(M) + 1
        kind = seq.parent.level_kind(p1)
    if p1 is None or p1 < 1:
        raise TailNotCertifiable("growth certificates start at level 1")
    g = seq.growth_rate(p1)
    if g is None:
        raise TailNotCertifiable("no growth prescription covers the omitted levels")
    g_down = bump_down(gmpy2.div(mpfr(g.numerator), mpfr(g.denominator)), 2)
    margin = down_sub(down_mul(g_down, _log10e_down()), log10_z_hi)
    if margin < mpfr("0.302"):
        raise TailNotCertifiable(
            f"ratio-test margin {decimal_str(margin, 4)} < 0.302 at level {p1}; "
            "raise the truncation or reduce |z|")
    cfg = config.get()
    c_const = log10_frac_up(_TWO_PI_UP * max(1, abs(N)) * sup)
    if kind == "exact":
        e1 = seq.exponent(M + 1) if M + 1 < len(seq) else seq.parent.q(p1)
        # margin form: log10 b_1 <= C + log10|z| - e1 * m
        b = up_add(c_const, log10_z_hi)
        b = up_add(b, -down_mul(bump_down(mpfr(e1)), margin))
        if deriv:
            b = up_add(b, log10_int_up(1 + e1))
            _check_deriv_ratio_exact(e1, margin)
        if b <= cfg.log_tiny:
            return bump_up(4 * tiny())
        if b > cfg.log_band:
            raise TailNotCertifiable("first omitted bound overflows the band")
        return bump_up(2 * gmpy2.exp10(b), 2)
    # soft first-omitted exponent e1 >= 10^lo: certify e1*m >= 1e6 in
    # log-log form, which crushes the bound far below the tiny floor
    lo, _ = seq.parent.log10_q(p1)
    if _down_add(bump_down(gmpy2.log10(margin), 2), lo) < mpfr(6):
        raise TailNotCertifiable("soft level too shallow to crush the tail")
    if deriv:
        # (1+e1) 10^(-0.29 e1 m) <= 1/2 holds once 0.29 m 10^lo >= 2(lo+1);
        # compared in logs
        lhs = _down_add(bump_down(gmpy2.log10(down_mul(margin, mpfr("0.29"))), 2), lo)
        rhs = up_add(bump_up(gmpy2.log10(up_add(lo, mpfr(1)))),
                     bump_up(gmpy2.log10(mpfr(2))))
        if lhs < rhs:
            raise TailNotCertifiable("derivative factor not dominated at soft level")
    return bump_up(4 * tiny())


# ---------------------------------------------------------------------------
# series evaluation
# ---------------------------------------------------------------------------

def eval_h(seq: ExponentSubseq, u: CoefficientSeq, z: CertifiedComplex,
           M: int) -> SeriesValue:
    """The gap series sum_n u_n z^(q'_n + 1) truncated at M, on the disk.

    The geometric tail over the omitted exponents is folded into the
    error radius; |z| must be certifiably below 1.
    """
    z_hi = z.abs_upper()
    if z_hi >= 1:
        raise OutsideDomain(
            f"|z| <= {decimal_str(z_hi, 6)} is not certifiably inside the unit disk")
    if M < 0 or M >= len(seq):
        raise ValueError("truncation index outside the exponent list")
    cfg = config.get()
    acc = CertifiedComplex.zero()
    log10_z_hi = bump_up(gmpy2.log10(z_hi)) if z_hi > 0 else None
    for n in range(M + 1):
        ulog = u.abs_log10_upper(n)
        if ulog is None or z_hi == 0:
            continue
        qn = seq.exponent(n)
        if up_add(ulog, _pow_log10_upper(qn + 1, log10_z_hi)) <= cfg.log_tiny:
            acc = acc.widen(tiny())
            continue
        acc = acc + u.ball(n) * z.pow_int(qn + 1)
    if z_hi == 0 or u.sup_norm == 0:
        tail = mpfr(0)
    else:
        tail = _tail_inside_disk(seq, u.sup_norm, z_hi, log10_z_hi, M, deriv=0)
    return SeriesValue(value=acc.widen(tail), truncation_index=M,
                       tail_bound=tail)


def _eval_twist_core(source: AngleSource, seq: ExponentSubseq,
                     u: CoefficientSeq, z: CertifiedComplex, M: int,
                     N: int, deriv: int) -> SeriesValue:
    if M < 0 or M >= len(seq):
        raise ValueError("truncation index outside the exponent list")
    if N < 0:
        raise ValueError("the angle multiple N must be >= 0")
    if N == 0:
        return SeriesValue(CertifiedComplex.zero(), M, mpfr(0))
    cfg = config.get()
    z_hi = z.abs_upper()
    acc = CertifiedComplex.zero()
    log10_z_hi = bump_up(gmpy2.log10(z_hi)) if z_hi > 0 else None
    if z_hi != 0:
        for n in range(M + 1):
            ulog = u.abs_log10_upper(n)
            if ulog is None:
                continue
            qn = seq.exponent(n)
            c_log = _coeff_abs_log10_upper(source, seq, n, N)
            pw_log = _pow_log10_upper(qn + 1 - deriv, log10_z_hi)
            bound = up_add(up_add(c_log, ulog), pw_log)
            if deriv:
                bound = up_add(bound, log10_int_up(1 + qn))
            if bound <= cfg.log_tiny:
                acc = acc.widen(tiny())
                continue
            if bound > cfg.log_band:
                raise OverflowBudget(
                    f"term {n} magnitude ~1e{decimal_str(bound, 4)} exceeds "
                    "the materialization band")
            if pw_log > cfg.log_band:
                # the bare power is huge but the coefficient cancels it: keep
                # the certified product bound without materializing either
                acc = acc.widen(bump_up(gmpy2.exp10(bound), 2))
                continue
            term = phi_coeff(source, seq, u, n, N) * z.pow_int(qn + 1 - deriv)
            if deriv:
                term = term.scale_rational(1 + qn)
            acc = acc + term
    if u.sup_norm == 0 or z_hi == 0:
        tail = mpfr(0)
    else:
        try:
            tail = _tail_by_margin(seq, u.sup_norm, N, log10_z_hi, M, deriv)
        except TailNotCertifiable:
            if z_hi < 1:
                tail = _tail_inside_disk(seq, u.sup_norm, z_hi, log10_z_hi,
                                         M, deriv)
            else:
                raise
    prefac = unit_exp(_angle_frac(source, N))
    value = prefac * acc.widen(tail)
    return SeriesValue(value=value, truncation_index=M, tail_bound=tail)


def eval_phi(source: AngleSource, seq: ExponentSubseq, u: CoefficientSeq,
             z: CertifiedComplex, M: int, N: int = 1) -> SeriesValue:
    """The twist series at z, truncated at index M, with a certified tail.

    Entire in z for growth-prescribed parent streams (any z the band can
    express); for detached angle sources the domain is the open unit disk.
    """
    return _eval_twist_core(source, seq, u, z, M, N, deriv=0)


def eval_phi_prime(source: AngleSource, seq: ExponentSubseq, u: CoefficientSeq,
                   z: CertifiedComplex, M: int, N: int = 1) -> SeriesValue:
    """Derivative of the twist series, same certification discipline."""
    return _eval_twist_core(source, seq, u, z, M, N, deriv=1)


def operator_norm(source: AngleSource, seq: ExponentSubseq, z_mag,
                  N: int, M: int) -> RatInterval:
    """Enclosure of sum_(n<=M) (1+q'_n) |1-e^(2 pi i q'_n N a)| |z|^(q'_n),
    with the certified tail added on the upper end.

    ``z_mag`` is an exact nonnegative rational magnitude; the sum is
    nondecreasing in it term by term.
    """
    z_mag = Fraction(z_mag)
    if z_mag < 0:
        raise ValueError("negative magnitude")
    if M < 0 or M >= len(seq):
        raise ValueError("truncation index outside the exponent list")
    if N == 0 or z_mag == 0:
        return RatInterval.point(0)
    cfg = config.get()
    log10_z_hi = log10_frac_up(z_mag)
    lo_sum, hi_sum = mpfr(0), mpfr(0)
    for n in range(M + 1):
        qn = seq.exponent(n)
        c_log = _coeff_abs_log10_upper(source, seq, n, N)
        bound = up_add(up_add(c_log, _pow_log10_upper(qn, log10_z_hi)),
                       log10_int_up(1 + qn))
        if bound <= cfg.log_tiny:
            hi_sum = up_add(hi_sum, tiny())
            continue
        if bound > cfg.log_band:
            raise OverflowBudget(f"norm term {n} exceeds the band")
        try:
            d = _dist_interval(source, seq, n, N)
        except EnclosureTooWide:
            d = None
        if d is None:
            hi_sum = up_add(hi_sum, bump_up(gmpy2.exp10(bound), 2))
            continue
        g_abs = two_sin_pi_enclosure(d)
        if qn < 10 ** 4:
            t_lo = g_abs.lo * (1 + qn) * z_mag ** qn
            lo_sum = _down_add(lo_sum, bump_down(mpfr_down(t_lo), 4))
        if g_abs.hi == 0:
            continue
        t_hi_log = up_add(up_add(log10_frac_up(g_abs.hi),
                                 _pow_log10_upper(qn, log10_z_hi)),
                          log10_int_up(1 + qn))
        t_hi_log = min(t_hi_log, bound)
        if t_hi_log <= cfg.log_tiny:
            hi_sum = up_add(hi_sum, tiny())
        else:
            hi_sum = up_add(hi_sum, bump_up(gmpy2.exp10(t_hi_log), 2))
    try:
        tail = _tail_by_margin(seq, Fraction(1), N, log10_z_hi, M, deriv=1)
    except TailNotCertifiable:
        if z_mag < 1:
            tail = _tail_inside_disk(seq, Fraction(1), mpfr_up(z_mag),
                                     log10_z_hi, M, deriv=1)
        else:
            raise
    hi_sum = up_add(hi_sum, tail)
    lo_f = max(Fraction(0), fraction_from_mpfr(lo_sum))
    hi_f = fraction_from_mpfr(hi_sum)
    return RatInterval(min(lo_f, hi_f), hi_f)


# ---------------------------------------------------------------------------
# heuristics and probes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadiusEstimate:
    """Cauchy-Hadamard estimate from finite data -- explicitly heuristic."""

    lo: mpfr
    hi: mpfr
    window: int
    certified: bool = False


def radius_estimate(terms) -> RadiusEstimate:
    """1/limsup |c_k|^(1/k) estimated from (exponent, LogMag-of-|c|) samples.

    The limsup of log10|c_k|/k is approximated by its max over the
    trailing half-window; finite data cannot certify a limsup, so the
    result is labeled non-certified and should be read directionally.
    """
    pairs = [(int(k), lm) for k, lm in terms]
    if len(pairs) < 2:
        raise ValueError("need at least two coefficient samples")
    window = max(2, len(pairs) // 2)
    best_hi, best_lo = None, None
    for k, lm in pairs[-window:]:
        if lm.sign == 0:
            continue
        km = mpfr(k)
        if lm.log10_hi is not None:
            r = bump_up(gmpy2.div(lm.log10_hi, km))
            best_hi = r if best_hi is None else max(best_hi, r)
        if lm.log10_lo is not None:
            r = bump_down(gmpy2.div(lm.log10_lo, km))
            best_lo = r if best_lo is None else max(best_lo, r)
    if best_hi is None:
        # every sampled coefficient vanishes: no finite estimate
        return RadiusEstimate(mpfr("inf"), mpfr("inf"), window)
    lo = bump_down(gmpy2.exp10(-best_hi), 2)
    hi = mpfr("inf") if best_lo is None else bump_up(gmpy2.exp10(-best_lo), 2)
    if hi < lo:
        lo, hi = hi, lo
    return RadiusEstimate(lo, hi, window)


@dataclass(frozen=True)
class ProbeResult:
    """Witness (or absence) of |sum_(n<=N) u_n| exceeding a threshold."""

    found: bool
    index: Optional[int]
    partial_re: Fraction
    partial_im: Fraction

    @property
    def partial_abs_sq(self) -> Fraction:
        return self.partial_re ** 2 + self.partial_im ** 2


def divergence_probe(u: CoefficientSeq, seq: Optional[ExponentSubseq], K,
                     cap: int = 100_000) -> ProbeResult:
    """Smallest N with |sum_(n<=N) u_n| > K, scanned exactly up to cap.

    Partial sums use exact rational arithmetic, so a returned witness is
    a genuine membership certificate; not-found is only a statement about
    the scanned range.  The exponent values play no role in the partial
    sums, so ``seq`` may be None.
    """
    K = Fraction(K)
    if K < 0:
        raise ValueError("threshold must be >= 0")
    sre, sim = Fraction(0), Fraction(0)
    for n in range(cap + 1):
        re, im = u.at(n)
        sre += re
        sim += im
        if sre * sre + sim * sim > K * K:
            return ProbeResult(True, n, sre, sim)
    return ProbeResult(False, None, sre, sim)


# ---------------------------------------------------------------------------
# term tables
# ---------------------------------------------------------------------------

def term_table_csv(source: AngleSource, seq: ExponentSubseq, u: CoefficientSeq,
                   z_mag, M: int, N: int = 1) -> str:
    """CSV rows (n, q'_n, coeff_abs_log10, term_abs_log10,
    certified_upper_bound_log10) for the twist series at |z| = z_mag."""
    z_mag = Fraction(z_mag)
    if z_mag < 0:
        raise ValueError("negative magnitude")
    if M < 0 or M >= len(seq):
        raise ValueError("truncation index outside the exponent list")
    cfg = config.get()
    header = "n,q_exponent,coeff_abs_log10,term_abs_log10,certified_upper_bound_log10"
    lines = [header]
    log10_z = log10_frac_up(z_mag) if z_mag > 0 else None
    for n in range(M + 1):
        qn = seq.exponent(n)
        ulog = u.abs_log10_upper(n)
        if ulog is None or log10_z is None:
            lines.append(f"{n},{qn},-inf,-inf,{cfg.log_tiny}")
            continue
        coeff_log = up_add(_coeff_abs_log10_upper(source, seq, n, N), ulog)
        term_log = up_add(coeff_log, _pow_log10_upper(qn + 1, log10_z))
        cert = max(mpfr(cfg.log_tiny), term_log)
        lines.append(
            f"{n},{qn},{decimal_str(coeff_log, 8)},"
            f"{decimal_str(term_log, 8)},{decimal_str(cert, 8)}")
    return "\n".join(lines) + "\n"
