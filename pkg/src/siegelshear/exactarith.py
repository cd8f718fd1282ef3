r"""Exact and certified arithmetic kernels.

Three layers, from exact to bounded:

* :class:`RatInterval` -- closed intervals with ``fractions.Fraction``
  endpoints.  Field operations on rationals are exact, so interval
  arithmetic here involves *no* rounding at all.
* :class:`CertifiedComplex` -- a complex ball ``{v : |v - mid| <= err}``
  with an MPFR midpoint at the working precision and a proven error
  radius.  Every operation propagates input radii and charges its own
  local rounding.
* :class:`LogMag` -- certified two-sided bounds on the log10 of a
  nonnegative magnitude, for quantities (huge denominators, powers
  ``|z|**q`` with gigantic ``q``) that must never be materialized as MPFR
  values.

Rounding discipline
-------------------
MPFR rounds to nearest, so a single arithmetic result ``r`` satisfies
``|r - true| <= ulp(r)/2``; one ``next_above``/``next_below`` nudge is
therefore enough to land on the desired side of the true value.  Helpers
named ``*_up`` always return >= the exact quantity, ``*_down`` <= it.
Composite error formulas additionally charge ``|mid| * 2**-(P-8)`` per
operation (``P`` = working precision), a deliberately generous envelope
for the at-most-few-ulp local rounding of each midpoint operation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import gmpy2
from gmpy2 import mpfr, mpc, mpq

from . import config

__all__ = [
    "RatInterval",
    "CertifiedComplex",
    "LogMag",
    "unit_exp",
    "dist_to_int",
    "one_minus_unit_exp_bound",
    "two_sin_pi_enclosure",
    "pow_logmag",
    "decimal_str",
]

RationalLike = Union[int, Fraction]

# A rational upper bound on pi (355/113 exceeds pi by ~2.7e-7) for exact
# rational arc bounds; sharper bounds go through MPFR with nudges.
PI_UPPER_RAT = Fraction(355, 113)
TWO_PI_UPPER_RAT = 2 * PI_UPPER_RAT


# ---------------------------------------------------------------------------
# directed-rounding helpers
# ---------------------------------------------------------------------------

def bump_up(x: mpfr, k: int = 1) -> mpfr:
    for _ in range(k):
        x = gmpy2.next_above(x)
    return x


def bump_down(x: mpfr, k: int = 1) -> mpfr:
    for _ in range(k):
        x = gmpy2.next_below(x)
    return x


def up_add(a: mpfr, b: mpfr) -> mpfr:
    if a == 0 and b == 0:
        return mpfr(0)  # exact; a nudge here would leak subnormals around
    return bump_up(gmpy2.add(a, b))


def up_mul(a: mpfr, b: mpfr) -> mpfr:
    if a == 0 or b == 0:
        return mpfr(0)
    return bump_up(gmpy2.mul(a, b))


def up_div(a: mpfr, b: mpfr) -> mpfr:
    if a == 0:
        return mpfr(0)
    return bump_up(gmpy2.div(a, b))


def down_add(a: mpfr, b: mpfr) -> mpfr:
    if a == 0 and b == 0:
        return mpfr(0)
    return bump_down(gmpy2.add(a, b))


def down_mul(a: mpfr, b: mpfr) -> mpfr:
    if a == 0 or b == 0:
        return mpfr(0)
    return bump_down(gmpy2.mul(a, b))


def abs_up(z) -> mpfr:
    """|z| rounded upward; an exact zero stays zero."""
    a = abs(z)
    return a if a == 0 else bump_up(a)


def abs_down(z) -> mpfr:
    a = abs(z)
    return a if a == 0 else bump_down(a)


def down_sub(a_down: mpfr, b_up: mpfr) -> mpfr:
    """Lower bound for ``a - b`` given a lower bound on a, upper on b."""
    if a_down == b_up:
        return mpfr(0)  # exact cancellation
    return bump_down(gmpy2.sub(a_down, b_up))


def up_sub(a_up: mpfr, b_down: mpfr) -> mpfr:
    if a_up == b_down:
        return mpfr(0)
    return bump_up(gmpy2.sub(a_up, b_down))


def mpfr_up(x: RationalLike) -> mpfr:
    """Smallest representable value >= the rational x (within one nudge)."""
    f = Fraction(x)
    return bump_up(mpfr(mpq(f.numerator, f.denominator)))


def mpfr_down(x: RationalLike) -> mpfr:
    f = Fraction(x)
    return bump_down(mpfr(mpq(f.numerator, f.denominator)))


def fraction_from_mpfr(x: mpfr) -> Fraction:
    """Exact conversion; every finite mpfr is a dyadic rational."""
    if not gmpy2.is_finite(x):
        raise ValueError("cannot convert non-finite mpfr to Fraction")
    num, den = x.as_integer_ratio()
    return Fraction(int(num), int(den))


def pi_up() -> mpfr:
    return bump_up(gmpy2.const_pi())


def pi_down() -> mpfr:
    return bump_down(gmpy2.const_pi())


def eps_rel() -> mpfr:
    """Per-operation rounding envelope 2**-(P-8) at the ambient precision."""
    p = gmpy2.get_context().precision
    return mpfr(2) ** (-(p - 8))


def tiny() -> mpfr:
    """The representable ceiling used for bounds proven below the band."""
    return mpfr(10) ** config.get().log_tiny


def log10_int_down(n: int) -> mpfr:
    if n <= 0:
        raise ValueError("log10 of non-positive integer")
    return bump_down(gmpy2.log10(bump_down(mpfr(n))))


def log10_int_up(n: int) -> mpfr:
    if n <= 0:
        raise ValueError("log10 of non-positive integer")
    return bump_up(gmpy2.log10(bump_up(mpfr(n))))


def log10_frac_down(x: Fraction) -> mpfr:
    if x <= 0:
        raise ValueError("log10 of non-positive rational")
    return down_sub(log10_int_down(x.numerator), log10_int_up(x.denominator))


def log10_frac_up(x: Fraction) -> mpfr:
    return up_sub(log10_int_up(x.numerator), log10_int_down(x.denominator))


def decimal_str(x: mpfr, sig: int = 17) -> str:
    """Deterministic scientific-notation rendering (round-to-nearest)."""
    if gmpy2.is_nan(x):
        return "nan"
    if not gmpy2.is_finite(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"
    digits, exp, _ = x.digits(10, sig)
    sign = "-" if digits.startswith("-") else ""
    mant = digits.lstrip("-")
    return f"{sign}{mant[0]}.{mant[1:]}e{exp - 1:+d}"


# ---------------------------------------------------------------------------
# rational intervals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RatInterval:
    """Closed interval [lo, hi] with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval: lo={self.lo} > hi={self.hi}")

    # -- constructors ------------------------------------------------------

    @classmethod
    def point(cls, x: RationalLike) -> "RatInterval":
        f = Fraction(x)
        return cls(f, f)

    @classmethod
    def centered(cls, mid: RationalLike, rad: RationalLike) -> "RatInterval":
        m, r = Fraction(mid), Fraction(rad)
        if r < 0:
            raise ValueError("negative radius")
        return cls(m - r, m + r)

    # -- queries -----------------------------------------------------------

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x: RationalLike) -> bool:
        return self.lo <= Fraction(x) <= self.hi

    def contains_interval(self, other: "RatInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersects(self, other: "RatInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    # -- exact arithmetic --------------------------------------------------

    def __add__(self, other: "RatInterval") -> "RatInterval":
        return RatInterval(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "RatInterval") -> "RatInterval":
        return RatInterval(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> "RatInterval":
        return RatInterval(-self.hi, -self.lo)

    def __mul__(self, other: "RatInterval") -> "RatInterval":
        prods = [self.lo * other.lo, self.lo * other.hi,
                 self.hi * other.lo, self.hi * other.hi]
        return RatInterval(min(prods), max(prods))

    def scale(self, c: RationalLike) -> "RatInterval":
        c = Fraction(c)
        if c >= 0:
            return RatInterval(self.lo * c, self.hi * c)
        return RatInterval(self.hi * c, self.lo * c)

    def shift(self, c: RationalLike) -> "RatInterval":
        c = Fraction(c)
        return RatInterval(self.lo + c, self.hi + c)

    def hull(self, other: "RatInterval") -> "RatInterval":
        return RatInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def reduce_mod1(self) -> "RatInterval":
        """Translate by an integer so that lo lands in [0, 1)."""
        k = self.lo.numerator // self.lo.denominator  # floor for Fractions
        return self.shift(-k)

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


def dist_to_int(x: RatInterval) -> RatInterval:
    """Exact enclosure of dist(t, Z) = min_k |t - k| over t in x.

    The distance function is a 1-periodic tent; on an interval of width
    >= 1 the image is all of [0, 1/2].  Otherwise shift so lo sits in
    [0, 1) (hi then sits in [0, 2)) and take extrema of the tent over the
    endpoints and any interior knots (0, 1/2, 1, 3/2, 2).
    """
    if x.width >= 1:
        return RatInterval(Fraction(0), Fraction(1, 2))
    x = x.reduce_mod1()
    half = Fraction(1, 2)

    def tent(t: Fraction) -> Fraction:
        if t <= half:
            return t
        if t <= 1:
            return 1 - t
        if t <= Fraction(3, 2):
            return t - 1
        return 2 - t

    values = [tent(x.lo), tent(x.hi)]
    for knot in (Fraction(0), half, Fraction(1), Fraction(3, 2), Fraction(2)):
        if x.lo <= knot <= x.hi:
            values.append(tent(knot))
    return RatInterval(min(values), max(values))


# ---------------------------------------------------------------------------
# complex balls
# ---------------------------------------------------------------------------

class CertifiedComplex:
    """Complex ball: all v with ``|v - mid| <= err`` (Euclidean modulus)."""

    __slots__ = ("mid", "err")

    def __init__(self, mid: mpc, err: mpfr = None):
        self.mid = mpc(mid)
        self.err = mpfr(0) if err is None else mpfr(err)
        if self.err < 0 or not gmpy2.is_finite(self.err):
            raise ValueError(f"invalid error radius {self.err}")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_rationals(cls, re: RationalLike, im: RationalLike = 0,
                       err: RationalLike = 0) -> "CertifiedComplex":
        re, im = Fraction(re), Fraction(im)
        m = mpc(mpfr(mpq(re.numerator, re.denominator)),
                mpfr(mpq(im.numerator, im.denominator)))
        # midpoint conversion rounds each component within half an ulp
        slack = up_mul(abs_up(m), eps_rel())
        e = up_add(mpfr_up(Fraction(err)), slack)
        return cls(m, e)

    @classmethod
    def exact_int(cls, re: int, im: int = 0) -> "CertifiedComplex":
        # small integers convert exactly; no rounding charge
        return cls(mpc(mpfr(re), mpfr(im)), mpfr(0))

    @classmethod
    def zero(cls) -> "CertifiedComplex":
        return cls(mpc(0), mpfr(0))

    # -- component access --------------------------------------------------

    @property
    def re(self) -> mpfr:
        return self.mid.real

    @property
    def im(self) -> mpfr:
        return self.mid.imag

    # -- magnitude bounds --------------------------------------------------

    def abs_upper(self) -> mpfr:
        return up_add(abs_up(self.mid), self.err)

    def abs_lower(self) -> mpfr:
        lo = down_sub(abs_down(self.mid), self.err)
        return lo if lo > 0 else mpfr(0)

    def certainly_contains_zero(self) -> bool:
        return abs_up(self.mid) <= self.err

    # -- ball arithmetic ---------------------------------------------------

    def __add__(self, other: "CertifiedComplex") -> "CertifiedComplex":
        m = self.mid + other.mid
        rel = up_mul(abs_up(m), eps_rel())
        return CertifiedComplex(m, up_add(up_add(self.err, other.err), rel))

    def __sub__(self, other: "CertifiedComplex") -> "CertifiedComplex":
        m = self.mid - other.mid
        rel = up_mul(abs_up(m), eps_rel())
        return CertifiedComplex(m, up_add(up_add(self.err, other.err), rel))

    def __neg__(self) -> "CertifiedComplex":
        return CertifiedComplex(-self.mid, self.err)

    def __mul__(self, other: "CertifiedComplex") -> "CertifiedComplex":
        m = self.mid * other.mid
        a = abs_up(self.mid)
        b = abs_up(other.mid)
        cross = up_add(up_mul(a, other.err), up_mul(b, self.err))
        cross = up_add(cross, up_mul(self.err, other.err))
        rel = up_mul(abs_up(m), eps_rel())
        return CertifiedComplex(m, up_add(cross, rel))

    def scale_rational(self, c: RationalLike) -> "CertifiedComplex":
        f = Fraction(c)
        cm = mpfr(mpq(f.numerator, f.denominator))
        m = self.mid * cm
        cu = abs_up(cm)
        rel = up_mul(abs_up(m), eps_rel())
        # |c| converts within an ulp; fold that into the relative charge
        extra = mpfr(0) if self.err == 0 else up_mul(cu, bump_up(self.err, 2))
        return CertifiedComplex(m, up_add(extra, rel))

    def widen(self, extra: mpfr) -> "CertifiedComplex":
        if extra < 0:
            raise ValueError("widen() takes a nonnegative radius increment")
        return CertifiedComplex(self.mid, up_add(self.err, mpfr(extra)))

    def pow_int(self, k: int) -> "CertifiedComplex":
        """Binary powering; k >= 0."""
        if k < 0:
            raise ValueError("negative power of a ball is not supported")
        result = CertifiedComplex.exact_int(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    # -- relations ---------------------------------------------------------

    def certainly_intersects(self, other: "CertifiedComplex") -> bool:
        """True only if the two balls provably overlap."""
        d = self.mid - other.mid
        du = abs_up(d)
        du = up_add(du, up_mul(du, eps_rel()))
        esum = down_add(self.err, other.err)
        return du <= esum

    def contains_exact(self, re: RationalLike, im: RationalLike = 0) -> bool:
        """Exact membership test for a rational point (mid/err are dyadic).

        A subnormal-range radius is treated as zero: this only makes the
        test stricter, and it keeps the exact arithmetic below from
        building billion-bit dyadic denominators.
        """
        dre = fraction_from_mpfr(self.re) - Fraction(re)
        dim = fraction_from_mpfr(self.im) - Fraction(im)
        if self.err != 0 and gmpy2.get_exp(self.err) < -(10 ** 6):
            return dre == 0 and dim == 0
        return dre * dre + dim * dim <= fraction_from_mpfr(self.err) ** 2

    def __str__(self):
        return (f"({decimal_str(self.re)} + {decimal_str(self.im)}j) "
                f"+/- {decimal_str(self.err, 3)}")


# ---------------------------------------------------------------------------
# the unit-circle exponential
# ---------------------------------------------------------------------------

def unit_exp(x) -> CertifiedComplex:
    """Certified ball for exp(2*pi*i*t) with t ranging over the interval x.

    Accepts a RatInterval or an exact rational.  The midpoint is evaluated
    at the interval centre after exact mod-1 reduction; the radius charges
    the arc length 2*pi*halfwidth plus the transcendental-op envelope
    2**-(P-8), so the documented bound err <= 2*pi*width(x) + 2**-(P-8)
    holds with room to spare.
    """
    if not isinstance(x, RatInterval):
        x = RatInterval.point(x)
    x = x.reduce_mod1()
    t = x.mid
    t -= t.numerator // t.denominator  # exact fractional part
    tm = mpfr(mpq(t.numerator, t.denominator))
    ang = 2 * gmpy2.const_pi() * tm
    m = mpc(gmpy2.cos(ang), gmpy2.sin(ang))
    halfw = x.width / 2
    err = up_add(up_mul(bump_up(pi_up() + pi_up()), mpfr_up(halfw)), eps_rel())
    return CertifiedComplex(m, err)


def one_minus_unit_exp_bound(d: RatInterval) -> RatInterval:
    """Chord/arc sandwich for |1 - exp(2*pi*i*t)| given d = dist(t, Z).

    For d in [0, 1/2] the exact value is 2*sin(pi*d), and the concavity of
    sin gives 4*d <= 2*sin(pi*d) <= 2*pi*d.  Entirely rational: the upper
    arc bound uses the rational over-approximation 355/113 of pi.
    """
    if d.lo < 0 or d.hi > Fraction(1, 2):
        raise ValueError(f"dist interval {d} outside [0, 1/2]")
    lo = 4 * d.lo
    hi = min(Fraction(2), TWO_PI_UPPER_RAT * d.hi)
    return RatInterval(lo, hi)


def two_sin_pi_enclosure(d: RatInterval) -> RatInterval:
    """Sharp certified enclosure of 2*sin(pi*d) on d subset [0, 1/2].

    Rational endpoints obtained from directed MPFR evaluations (sin is
    increasing on [0, pi/2], so endpoint monotonicity applies; a 16-ulp
    nudge generously covers the <= 3 roundings per endpoint).  For d.hi
    within 1/100 of 1/2 the derivative argument degrades, so the upper
    endpoint falls back to the exact maximum 2.
    """
    if d.lo < 0 or d.hi > Fraction(1, 2):
        raise ValueError(f"dist interval {d} outside [0, 1/2]")
    if d.lo == 0:
        lo = Fraction(0)
    else:
        prod = bump_down(gmpy2.mul(pi_down(), mpfr_down(d.lo)))
        s = bump_down(gmpy2.sin(prod), 16)
        # the chord 4*d is also a valid lower bound (and exact at d=1/2)
        lo = max(4 * d.lo, 2 * fraction_from_mpfr(s))
    if d.hi > Fraction(49, 100):
        hi = Fraction(2)
    else:
        prod = bump_up(gmpy2.mul(pi_up(), mpfr_up(d.hi)))
        s = bump_up(gmpy2.sin(prod), 16)
        hi = min(TWO_PI_UPPER_RAT * d.hi, 2 * fraction_from_mpfr(s))
    return RatInterval(lo, min(hi, Fraction(2)))


# ---------------------------------------------------------------------------
# log10-domain magnitudes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LogMag:
    """Certified bounds on a nonnegative magnitude m via its log10.

    ``sign`` is the sign of the underlying real quantity when one is being
    tracked (0 means exactly zero, in which case both bounds are None).
    ``log10_lo``/``log10_hi`` bound log10(m) from below/above; ``None``
    means unbounded on that side (lo=None admits m arbitrarily small).
    """

    sign: int
    log10_lo: mpfr = None
    log10_hi: mpfr = None

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or 1")
        if self.sign == 0 and (self.log10_lo is not None or self.log10_hi is not None):
            raise ValueError("zero magnitude carries no log bounds")
        if (self.log10_lo is not None and self.log10_hi is not None
                and self.log10_lo > self.log10_hi):
            raise ValueError("crossed log10 bounds")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> "LogMag":
        return cls(0)

    @classmethod
    def from_fraction(cls, x: RationalLike) -> "LogMag":
        f = Fraction(x)
        if f == 0:
            return cls.zero()
        mag = abs(f)
        return cls(1 if f > 0 else -1, log10_frac_down(mag), log10_frac_up(mag))

    @classmethod
    def from_int(cls, n: int) -> "LogMag":
        return cls.from_fraction(n)

    @classmethod
    def from_mpfr_magnitude(cls, x: mpfr) -> "LogMag":
        if x == 0:
            return cls.zero()
        if x < 0:
            raise ValueError("from_mpfr_magnitude wants a magnitude >= 0")
        l = gmpy2.log10(x)
        return cls(1, bump_down(l), bump_up(l))

    # -- operations --------------------------------------------------------

    def mul(self, other: "LogMag") -> "LogMag":
        if self.sign == 0 or other.sign == 0:
            return LogMag.zero()
        lo = None
        if self.log10_lo is not None and other.log10_lo is not None:
            lo = down_add(self.log10_lo, other.log10_lo)
        hi = None
        if self.log10_hi is not None and other.log10_hi is not None:
            hi = up_add(self.log10_hi, other.log10_hi)
        return LogMag(self.sign * other.sign, lo, hi)

    def pow_int(self, k: int) -> "LogMag":
        if k < 0:
            raise ValueError("negative exponent")
        if k == 0:
            return LogMag(1, mpfr(0), mpfr(0))
        if self.sign == 0:
            return LogMag.zero()
        km_up, km_down = bump_up(mpfr(k)), bump_down(mpfr(k))
        lo = None if self.log10_lo is None else _scale_down(self.log10_lo, km_down, km_up)
        hi = None if self.log10_hi is None else _scale_up(self.log10_hi, km_down, km_up)
        sign = self.sign if (self.sign > 0 or k % 2 == 1) else 1
        return LogMag(sign, lo, hi)

    def magnitude_upper(self) -> mpfr:
        """Materialize a certified mpfr upper bound for m.

        Bounds proven below the representable band come back as the tiny()
        ceiling; bounds above the band raise, since no honest mpfr can
        carry them.
        """
        if self.sign == 0:
            return mpfr(0)
        if self.log10_hi is None:
            raise ValueError("no upper log bound to materialize")
        cfg = config.get()
        if self.log10_hi <= cfg.log_tiny:
            return tiny()
        if self.log10_hi > cfg.log_band:
            raise OverflowError(
                f"magnitude 1e{decimal_str(self.log10_hi, 6)} exceeds the "
                f"materialization band 1e{cfg.log_band}")
        return bump_up(gmpy2.exp10(self.log10_hi), 2)

    def __str__(self):
        lo = "?" if self.log10_lo is None else decimal_str(self.log10_lo, 8)
        hi = "?" if self.log10_hi is None else decimal_str(self.log10_hi, 8)
        s = {1: "+", -1: "-", 0: "0"}[self.sign]
        return f"LogMag({s}, 10^[{lo}, {hi}])"


def _scale_down(l: mpfr, k_down: mpfr, k_up: mpfr) -> mpfr:
    # lower bound for k*l where k > 0 exact-ish and l may be negative
    return down_mul(l, k_down) if l >= 0 else down_mul(l, k_up)


def _scale_up(l: mpfr, k_down: mpfr, k_up: mpfr) -> mpfr:
    return up_mul(l, k_up) if l >= 0 else up_mul(l, k_down)


def pow_logmag(base, exp: int) -> LogMag:
    """LogMag for base**exp with base a nonnegative rational or interval.

    The classic use is |z|**q with q far beyond any representable power;
    only log10 = exp * log10(base) is ever formed.
    """
    if isinstance(base, RatInterval):
        if base.lo < 0:
            raise ValueError("negative magnitude base")
        if base.lo == 0:
            lo = None
        else:
            lo = log10_frac_down(base.lo)
        hi = log10_frac_up(base.hi) if base.hi > 0 else None
        if base.hi == 0:
            return LogMag.zero() if exp > 0 else LogMag(1, mpfr(0), mpfr(0))
        lm = LogMag(1, lo, hi)
    else:
        f = Fraction(base)
        if f < 0:
            raise ValueError("negative magnitude base")
        if f == 0:
            return LogMag.zero() if exp > 0 else LogMag(1, mpfr(0), mpfr(0))
        lm = LogMag(1, log10_frac_down(f), log10_frac_up(f))
    return lm.pow_int(exp)
