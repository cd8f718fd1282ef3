r"""Continued fractions with exact convergents and controlled growth.

A rotation number is represented here by its partial quotients, never by a
float: every small-divisor quantity (dist(q_n N theta, Z), Brjuno partial
sums, angle multiples) is derived from exact big-integer convergents
``p_n/q_n`` satisfying

    p_{n+1} = a_{n+1} p_n + p_{n-1},   q_{n+1} = a_{n+1} q_n + q_{n-1},

with seeds ``p_{-2}=q_{-1}=0, p_{-1}=q_{-2}=1``.  Quotient streams come
from an explicit list, a generator rule (e.g. all ones), interval
ingestion via the Gauss map, or a super-exponential growth prescription
``a_{n+1} = ceil(exp(g(n) q_n)/q_n)``.

Levels of representation
------------------------
Growth prescriptions quickly leave the reach of big integers, so a
denominator lives in one of three regimes:

``exact``
    q_n is a materialized big integer (at most ``digit_cap`` digits).
``log``
    only a certified two-sided enclosure of log10(q_n) is stored; the
    integer itself would have ~1e74 digits or worse.
``astro``
    even log10(q_n) overflows every float format; all that is recorded is
    the (vastly understated) certified bound log10(q_n) >= 1e250.

The small-divisor accessors below understand all three regimes and clamp
unrepresentably small bounds up to the 1e-100000 ceiling, which keeps
every downstream estimate sound.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import gmpy2
from gmpy2 import mpfr, mpq

from . import config
from .errors import (
    AmbiguousQuotient,
    EnclosureTooWide,
    OverflowBudget,
    PrecisionExhausted,
    StreamExhausted,
)
from .exactarith import (
    LogMag,
    RatInterval,
    bump_down,
    bump_up,
    dist_to_int,
    down_add,
    down_mul,
    down_sub,
    fraction_from_mpfr,
    log10_int_down,
    log10_int_up,
    mpfr_down,
    mpfr_up,
    up_add,
    up_mul,
)

__all__ = [
    "GrowthRule",
    "ContinuedFraction",
    "BrjunoResult",
    "quotients_from_real",
    "build_fast_theta",
    "golden_theta",
    "make_liouville_theta",
]


def _floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator


def _log10e_down() -> mpfr:
    return bump_down(gmpy2.log10(gmpy2.exp(mpfr(1))), 2)


def _log10e_up() -> mpfr:
    return bump_up(gmpy2.log10(gmpy2.exp(mpfr(1))), 2)


# ---------------------------------------------------------------------------
# growth prescriptions
# ---------------------------------------------------------------------------

class GrowthRule:
    """Nondecreasing positive rate schedule g for a_{n+1} = ceil(e^{g(n) q_n}/q_n).

    Values are rational so that exponents g(n)*q_n stay exact.  Either a
    finite table or a callable (or both, table first) may be supplied.
    """

    def __init__(self, table: Sequence = (), func: Callable[[int], object] = None):
        self._table = [Fraction(v) for v in table]
        self._func = func
        for i in range(1, len(self._table)):
            if self._table[i] < self._table[i - 1]:
                raise ValueError("growth schedule must be nondecreasing")
        if not self._table and func is None:
            raise ValueError("empty growth rule")

    def rate(self, n: int) -> Fraction:
        if n < 0:
            raise IndexError("rate index must be >= 0")
        if n < len(self._table):
            return self._table[n]
        if self._func is None:
            raise StreamExhausted(f"growth schedule defined only up to n={len(self._table) - 1}")
        v = Fraction(self._func(n))
        if v <= 0:
            raise ValueError(f"growth rate g({n}) = {v} must be positive")
        if self._table and v < self._table[-1]:
            raise ValueError("growth schedule must be nondecreasing")
        return v


# ---------------------------------------------------------------------------
# non-exact levels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _SoftLevel:
    """A denominator known only through log10 bounds."""

    index: int
    kind: str                      # "log" | "astro"
    log10_q_lo: mpfr
    log10_q_hi: Optional[mpfr]     # None for astro levels


@dataclass(frozen=True)
class BrjunoResult:
    """Partial Brjuno sum with a desk-scale divergence verdict."""

    partial: RatInterval
    n_max: int
    diverges: bool
    term_lowers: tuple            # certified lower bound per term, as Fractions


# ---------------------------------------------------------------------------
# the main type
# ---------------------------------------------------------------------------

class ContinuedFraction:
    """Partial quotients plus cached exact convergents.

    ``quotients[0]`` is the integer part a_0 (any integer); all later
    quotients must be >= 1.  ``rule`` optionally extends the stream lazily
    (index -> quotient).  The convergent cache is append-only; extension
    is serialized behind a lock so concurrent readers stay safe.
    """

    def __init__(self, quotients: Sequence[int], rule: Callable[[int], int] = None,
                 growth: GrowthRule = None):
        if len(quotients) == 0 and rule is None:
            raise ValueError("need at least the integer part a_0")
        self._a = [int(q) for q in quotients]
        for i, a in enumerate(self._a[1:], start=1):
            if a < 1:
                raise ValueError(f"partial quotient a_{i} = {a} must be >= 1")
        self._rule = rule
        self._growth = growth          # set when built from a growth prescription
        self._soft: list[_SoftLevel] = []
        self._p: list[int] = []
        self._q: list[int] = []
        self._lock = threading.Lock()
        if not self._a and rule is not None:
            self._a.append(int(rule(0)))
        self._recompute_from(0)

    # -- cache maintenance -------------------------------------------------

    def _recompute_from(self, start: int):
        for n in range(start, len(self._a)):
            a = self._a[n]
            if n == 0:
                self._p.append(a)
                self._q.append(1)
            elif n == 1:
                self._p.append(a * self._p[0] + 1)
                self._q.append(a * self._q[0])
            else:
                self._p.append(a * self._p[n - 1] + self._p[n - 2])
                self._q.append(a * self._q[n - 1] + self._q[n - 2])

    def _ensure(self, n: int):
        """Materialize levels through index n (thread-safe, append-only)."""
        if n < len(self._a):
            return
        with self._lock:
            bit_cap = int(config.get().digit_cap * 3.3220)
            while len(self._a) <= n:
                m = len(self._a)
                if self._rule is None:
                    raise StreamExhausted(
                        f"quotient stream ends at index {len(self._a) - 1}, "
                        f"level {n} requested")
                a = int(self._rule(m))
                if a < 1:
                    raise ValueError(f"rule produced a_{m} = {a} < 1")
                if m >= 2 and (a * self._q[m - 1] + self._q[m - 2]).bit_length() > bit_cap:
                    raise OverflowBudget(
                        f"q_{m} exceeds the digit budget")
                self._a.append(a)
                self._recompute_from(m)

    # -- basic access ------------------------------------------------------

    @property
    def depth_exact(self) -> int:
        """Largest index with a materialized big-integer denominator."""
        return len(self._q) - 1

    def quotient(self, n: int) -> int:
        self._ensure(n)
        return self._a[n]

    def convergents(self, n_max: int):
        """Exact (p_n, q_n) for n = 0..n_max."""
        if n_max < 0:
            raise ValueError("n_max must be >= 0")
        self._ensure(n_max)
        return [(self._p[n], self._q[n]) for n in range(n_max + 1)]

    def convergent(self, n: int) -> Fraction:
        self._ensure(n)
        return Fraction(self._p[n], self._q[n])

    def p(self, n: int) -> int:
        self._ensure(n)
        return self._p[n]

    def q(self, n: int) -> int:
        self._ensure(n)
        return self._q[n]

    def level_kind(self, n: int) -> str:
        if n <= self.depth_exact:
            return "exact"
        for lv in self._soft:
            if lv.index == n:
                return lv.kind
        try:
            self._ensure(n)
        except (StreamExhausted, OverflowBudget):
            raise
        return "exact"

    def _soft_level(self, n: int) -> Optional[_SoftLevel]:
        for lv in self._soft:
            if lv.index == n:
                return lv
        return None

    def log10_q(self, n: int):
        """Certified (lo, hi) bounds on log10 q_n; hi is None for astro."""
        lv = self._soft_level(n)
        if lv is not None:
            return lv.log10_q_lo, lv.log10_q_hi
        self._ensure(n)
        qn = self._q[n]
        return log10_int_down(qn), log10_int_up(qn)

    # -- enclosures --------------------------------------------------------

    def theta_enclosure(self, depth: int) -> RatInterval:
        """The sandwich between convergents depth and depth+1.

        Consecutive convergents bracket the limit value, and their gap is
        exactly 1/(q_depth q_{depth+1}).
        """
        if depth < 1:
            raise ValueError("depth must be >= 1")
        self._ensure(depth + 1)
        x = self.convergent(depth)
        y = self.convergent(depth + 1)
        return RatInterval(min(x, y), max(x, y))

    def value_interval(self) -> RatInterval:
        """Best available exact enclosure (deepest materialized sandwich)."""
        d = self.depth_exact
        if d < 2:
            self._ensure(2)
            d = self.depth_exact
        return self.theta_enclosure(d - 1)

    # -- small divisors ----------------------------------------------------

    def delta_abs(self, n: int) -> RatInterval:
        """Exact bounds on |q_n theta - p_n|, namely
        [1/(q_{n+1}+q_n), 1/q_{n+1}]; needs level n+1 materialized."""
        self._ensure(n + 1)
        qn, qn1 = self._q[n], self._q[n + 1]
        return RatInterval(Fraction(1, qn1 + qn), Fraction(1, qn1))

    def delta_logmag(self, n: int) -> LogMag:
        """|q_n theta - p_n| as a LogMag, valid in every level regime."""
        lv = self._soft_level(n + 1)
        if lv is None and n + 1 <= self.depth_exact:
            iv = self.delta_abs(n)
            lo = bump_down(-log10_int_up(iv.lo.denominator))
            hi = bump_up(-log10_int_down(iv.hi.denominator))
            return LogMag(1, lo, hi)
        if lv is None:
            raise StreamExhausted(f"no data for level {n + 1}")
        if lv.kind == "astro":
            # |delta_n| <= 1/q_{n+1} <= 10^(-sat); no useful lower bound
            return LogMag(1, None, -lv.log10_q_lo)
        self._ensure(n)  # parent must at least have log data; exact here
        lo_q, hi_q = lv.log10_q_lo, lv.log10_q_hi
        # q_{n+1} + q_n <= 2 q_{n+1}: lower |delta| >= 1/(2 q_{n+1})
        lower = bump_down(-(up_add(hi_q, mpfr("0.302"))))
        upper = bump_up(-lo_q)
        return LogMag(1, lower, upper)

    def delta_upper_fraction(self, n: int) -> Fraction:
        """An exact rational upper bound for |q_n theta - p_n|.

        Materialized levels give the sharp 1/q_{n+1}; log/astro levels are
        clamped no lower than the representable 10^-100000 ceiling.
        """
        lv = self._soft_level(n + 1)
        if lv is None:
            return self.delta_abs(n).hi
        k = int(gmpy2.floor(lv.log10_q_lo))
        k = min(k, -config.get().log_tiny)
        if k < 1:
            raise PrecisionExhausted(f"level {n + 1} log bound too weak")
        return Fraction(1, 10 ** k)

    def frac_qNtheta(self, n: int, N: int, depth: int = None) -> RatInterval:
        """Exact rational enclosure of dist(q_n N theta, Z).

        With an explicit ``depth`` (> n) the interval is
        ``N q_n * theta_enclosure(depth)`` shifted by the witness integer
        ``N p_n`` and folded by dist_to_int -- sound for every value in
        the enclosure.  Without a depth, the smallest materialized depth
        bringing the reduced width under 2^-dist_width_bits is chosen
        (stepping by +2 on a miss); if no materialized depth can, and the
        scaled difference bound N/q_{n+1} is available and <= 1/2, the
        defect route dist = N*|q_n theta - p_n| is used instead.
        """
        if N < 0:
            N = -N  # distance to Z is even in N
        if N == 0:
            return RatInterval.point(0)
        self._ensure(n)
        if depth is not None:
            if depth <= n:
                raise ValueError("depth must exceed n")
            iv = self._frac_by_enclosure(n, N, depth)
            if iv.width >= Fraction(1, 2):
                raise EnclosureTooWide(
                    f"reduced width {float(iv.width):.3g} >= 1/2 at depth {depth}")
            return iv
        target = Fraction(1, 2 ** config.get().dist_width_bits)
        depth = n + 1
        while True:
            try:
                self._ensure(depth + 1)
            except (StreamExhausted, OverflowBudget):
                break
            width = Fraction(N * self._q[n], self._q[depth] * self._q[depth + 1])
            if width < target:
                iv = self._frac_by_enclosure(n, N, depth)
                if iv.width < target:
                    return iv
                depth += 2
                continue
            depth += 1
        return self._frac_by_defect(n, N, target)

    def _frac_by_enclosure(self, n: int, N: int, depth: int) -> RatInterval:
        base = self.theta_enclosure(depth)
        scaled = base.scale(N * self._q[n]).shift(-N * self._p[n])
        return dist_to_int(scaled)

    def _frac_by_defect(self, n: int, N: int, target: Fraction) -> RatInterval:
        """dist(q_n N theta, Z) = dist(N delta_n, Z) since N p_n is an integer."""
        lv = self._soft_level(n + 1)
        if lv is None and n + 1 > self.depth_exact:
            raise EnclosureTooWide(
                f"no convergent data beyond level {self.depth_exact}")
        if lv is None:
            d = self.delta_abs(n)
            hi = N * d.hi
            lo = N * d.lo
            if hi > Fraction(1, 2):
                raise EnclosureTooWide(
                    f"N|delta_{n}| reaches {float(hi):.3g} > 1/2; "
                    "no materialized depth is fine enough")
            return RatInterval(lo, hi)
        # soft level: upper bound N * 10^-k with the tiny clamp; lower
        # bounds below the representable floor are reported as 0
        rho = self.delta_upper_fraction(n)
        hi = N * rho
        if hi > Fraction(1, 2):
            raise EnclosureTooWide("log-level bound too weak for this N")
        return RatInterval(Fraction(0), hi)

    def angle_multiple(self, K: int, max_width: Fraction = None) -> RatInterval:
        """Exact rational enclosure of the fractional part of K*theta.

        Uses the deepest materialized convergent p_L/q_L as an anchor:
        K theta = K p_L/q_L + K delta_L/q_L, and |delta_L| has a certified
        upper bound even when q_{L+1} lives beyond the big-int budget.
        The result may protrude slightly outside [0,1); callers fold it
        with dist_to_int or reduce_mod1 as needed.
        """
        if max_width is None:
            max_width = Fraction(1, 2 ** config.get().dist_width_bits)
        L = self.depth_exact
        rho = None
        for lvl in range(L, 0, -1):
            try:
                rho = Fraction(self.delta_upper_fraction(lvl), self._q[lvl])
            except (StreamExhausted, PrecisionExhausted):
                continue
            L = lvl
            break
        if rho is None:
            raise StreamExhausted("need at least two convergents")
        K = int(K)
        sign = 1 if K >= 0 else -1
        Ka = abs(K)
        width = 2 * Ka * rho
        if width > max_width:
            raise EnclosureTooWide(
                f"width {float(width):.3g} exceeds target {float(max_width):.3g}")
        anchor = Fraction(sign * (Ka * self._p[L] % self._q[L]), self._q[L])
        anchor -= _floor_frac(anchor)
        return RatInterval(anchor - Ka * rho, anchor + Ka * rho)

    # -- Brjuno ------------------------------------------------------------

    def brjuno_sum(self, n_max: int, witness: Callable[[int], Fraction] = None) -> BrjunoResult:
        """Partial sum over n = 0..n_max of log(q_{n+1})/q_n, certified.

        The divergence verdict is desk-scale: True iff every computed term
        clears the configured increasing witness sequence (default n/2),
        which distinguishes bounded-type streams (terms -> 0) from the
        super-exponential prescriptions (terms >= g(n) -> infinity).
        """
        if n_max < 1:
            raise ValueError("n_max must be >= 1")
        if witness is None:
            witness = lambda n: Fraction(n + 1, 2)
        ln10_d, ln10_u = _ln10_enclosure()
        total_lo, total_hi = mpfr(0), mpfr(0)
        term_lowers = []
        diverges = True
        for n in range(0, n_max + 1):
            if n > self.depth_exact:
                raise StreamExhausted(
                    "Brjuno terms need materialized denominators q_n")
            lo_l10, hi_l10 = self.log10_q(n + 1)
            if hi_l10 is None:
                raise StreamExhausted(
                    f"level {n + 1} is saturated; no two-sided sum beyond it")
            qn = mpfr(self._q[n])
            t_lo = bump_down(gmpy2.div(down_mul(lo_l10, ln10_d), qn), 2)
            t_hi = bump_up(gmpy2.div(up_mul(hi_l10, ln10_u), qn), 2)
            total_lo = down_add(total_lo, max(t_lo, mpfr(0)))
            total_hi = up_add(total_hi, t_hi)
            t_lo_frac = fraction_from_mpfr(max(t_lo, mpfr(0)))
            if self._growth is not None and n >= 1:
                # construction guarantees log q_{n+1} >= g(n) q_n
                try:
                    t_lo_frac = max(t_lo_frac, self._growth.rate(n))
                except StreamExhausted:
                    pass
            term_lowers.append(t_lo_frac)
            if t_lo_frac < witness(n):
                diverges = False
        partial = RatInterval(fraction_from_mpfr(total_lo),
                              fraction_from_mpfr(total_hi))
        return BrjunoResult(partial=partial, n_max=n_max, diverges=diverges,
                            term_lowers=tuple(term_lowers))

    # -- growth-rule extension (log/astro levels) --------------------------

    def extend_soft(self, levels: int):
        """Append ``levels`` further denominators as certified log10 data.

        Requires a growth prescription.  Each new level n+1 records bounds
        on log10 q_{n+1} derived from q_{n+1} in [e^t, e^t + 2 q_n] with
        t = g(n) q_n; once even the log10 overflows (parent beyond the
        magnitude band), levels degrade to the saturated 'astro' regime.
        """
        if self._growth is None:
            raise StreamExhausted("extend_soft needs a growth prescription")
        cfg = config.get()
        l10e_d, l10e_u = _log10e_down(), _log10e_up()
        for _ in range(levels):
            n1 = (self._soft[-1].index if self._soft else self.depth_exact) + 1
            n = n1 - 1
            g = self._growth.rate(n)
            parent = self._soft_level(n)
            if parent is None:
                qn = self._q[n]
                t_lo = down_mul(mpfr_down(g), bump_down(mpfr(qn)))
                t_hi = up_mul(mpfr_up(g), bump_up(mpfr(qn)))
                lq_lo = down_mul(t_lo, l10e_d)
                # q_{n+1} <= e^t + 2 q_n = e^t (1 + 2 q_n e^{-t})
                r_log10 = up_add(log10_int_up(2 * qn),
                                 -down_mul(t_lo, l10e_d))
                slack = mpfr("1e-30") if r_log10 < -40 else bump_up(
                    gmpy2.exp10(r_log10), 2)
                lq_hi = up_add(up_mul(t_hi, l10e_u), slack)
                self._soft.append(_SoftLevel(n1, "log", lq_lo, lq_hi))
            elif parent.kind == "log" and parent.log10_q_hi is not None \
                    and parent.log10_q_hi <= cfg.log_band:
                if g < 1:
                    raise PrecisionExhausted(
                        "soft extension beyond exact levels needs g >= 1")
                q_lo = bump_down(gmpy2.exp10(parent.log10_q_lo), 2)
                q_hi = bump_up(gmpy2.exp10(parent.log10_q_hi), 2)
                t_lo = down_mul(mpfr_down(g), q_lo)
                t_hi = up_mul(mpfr_up(g), q_hi)
                lq_lo = down_mul(t_lo, l10e_d)
                lq_hi = up_add(up_mul(t_hi, l10e_u), mpfr(1))
                self._soft.append(_SoftLevel(n1, "log", lq_lo, lq_hi))
            else:
                # parent's value is beyond every float: certify the
                # saturated bound log10 q_{n+1} >= g(n) q_n log10(e)
                #                              >= q_n/3 >= 10^sat_floor
                sat = mpfr(cfg.sat_log10)
                if parent.log10_q_lo is None:
                    raise PrecisionExhausted("parent level carries no bound")
                need = up_add(gmpy2.log10(sat), mpfr(1))
                if not parent.log10_q_lo >= need:
                    raise PrecisionExhausted(
                        "parent too small to certify the saturated bound")
                if self._growth.rate(n) < 1:
                    raise PrecisionExhausted("saturation step needs g >= 1")
                self._soft.append(_SoftLevel(n1, "astro", sat, None))

    # -- serialization -----------------------------------------------------

    def quotients_json(self, n_max: int = None) -> str:
        n_max = self.depth_exact if n_max is None else n_max
        self._ensure(n_max)
        return json.dumps([str(a) for a in self._a[:n_max + 1]])

    @classmethod
    def from_quotients_json(cls, text: str) -> "ContinuedFraction":
        data = json.loads(text)
        return cls([int(s) for s in data])

    def __str__(self):
        tail = ",".join(str(a) if a < 10**8 else f"~1e{len(str(a)) - 1}"
                        for a in self._a[1:6])
        more = ",..." if (len(self._a) > 6 or self._rule or self._soft) else ""
        return f"[{self._a[0]};{tail}{more}]"


def _ln10_enclosure():
    l = gmpy2.log(mpfr(10))
    return bump_down(l, 2), bump_up(l, 2)


# ---------------------------------------------------------------------------
# quotient ingestion from an interval
# ---------------------------------------------------------------------------

def quotients_from_real(x: RatInterval, n_max: int):
    """Partial quotients certain for every real in the interval x.

    Gauss-map iteration on the exact endpoints; stops with
    AmbiguousQuotient (carrying the quotients found so far in
    ``.partial``) as soon as the interval straddles a quotient boundary.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    out = []
    lo, hi = x.lo, x.hi
    while True:
        flo, fhi = _floor_frac(lo), _floor_frac(hi)
        if flo != fhi:
            exc = AmbiguousQuotient(
                f"interval [{lo}, {hi}] straddles a quotient boundary "
                f"after {len(out)} terms")
            exc.partial = out
            raise exc
        a = flo
        if len(out) >= 1 and a < 1:
            exc = AmbiguousQuotient(
                f"non-positive quotient a_{len(out)} = {a}; enclosure "
                "contains the previous convergent")
            exc.partial = out
            raise exc
        out.append(a)
        if len(out) > n_max:
            return out
        lo, hi = lo - a, hi - a
        if lo == 0 and hi == 0:
            raise StreamExhausted(
                f"expansion terminates after {len(out)} terms "
                f"(rational value), {n_max + 1} requested")
        if lo == 0 or hi == 0:
            exc = AmbiguousQuotient(
                "enclosure endpoint is exactly rational; next quotient "
                "unbounded across the interval")
            exc.partial = out
            raise exc
        lo, hi = 1 / hi, 1 / lo


# ---------------------------------------------------------------------------
# super-exponential builders
# ---------------------------------------------------------------------------

def _ceil_exp_quotient(t: Fraction, q: int) -> int:
    """Exact ceil(e^t / q) via adaptive-precision directed enclosures."""
    if t <= 0 or q < 1:
        raise ValueError("need t > 0, q >= 1")
    # magnitude of e^t/q is ~ t/ln2 bits; add room for the fractional part
    prec = max(256, int(float(t) * 1.4427) + 160)
    for _ in range(24):
        with config.working_precision(prec):
            t_lo, t_hi = mpfr_down(t), mpfr_up(t)
            lo = bump_down(gmpy2.exp(t_lo), 2)
            hi = bump_up(gmpy2.exp(t_hi), 2)
        # exact from here: mpfr endpoints are dyadic rationals
        clo = math.ceil(fraction_from_mpfr(lo) / q)
        chi = math.ceil(fraction_from_mpfr(hi) / q)
        if clo == chi:
            return int(clo)
        prec *= 2
    raise PrecisionExhausted(
        f"ceil(e^{float(t):.6g}/{q}) still ambiguous at {prec} bits")


def build_fast_theta(rule: GrowthRule, n_max: int, seeds=(0, 1)) -> ContinuedFraction:
    """Construct quotients achieving log q_{n+1} >= g(n) q_n, exactly checked.

    ``seeds`` supplies (a_0, a_1); levels n >= 1 then follow the
    prescription a_{n+1} = ceil(exp(g(n) q_n)/q_n).  Seed levels are
    exempt from the growth inequality (they merely position the early
    denominators); every generated level is verified exactly on big
    integers against an independently re-derived enclosure of e^{g(n)q_n}.
    Raises OverflowBudget before materializing any q beyond the digit cap.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    cap = config.get().digit_cap
    if n_max == 0:
        return ContinuedFraction([seeds[0]], growth=rule)
    a = [int(seeds[0]), int(seeds[1])]
    if a[1] < 1:
        raise ValueError("seed a_1 must be >= 1")
    p = [a[0], a[1] * a[0] + 1]
    q = [1, a[1]]
    for n in range(1, n_max):
        g = rule.rate(n)
        t = g * q[n]
        # digits of q_{n+1} ~ t*log10(e); refuse before any heavy work
        est_digits = float(t) * 0.4343
        if est_digits > cap:
            raise OverflowBudget(
                f"q_{n + 1} would have ~{est_digits:.3g} digits "
                f"(cap {cap}); stop at n_max={n} or extend softly")
        an1 = _ceil_exp_quotient(t, q[n])
        a.append(an1)
        p.append(an1 * p[n] + p[n - 1])
        q.append(an1 * q[n] + q[n - 1])
        if q[n + 1].bit_length() > int(cap * 3.3220):
            raise OverflowBudget(f"q_{n + 1} exceeds the {cap}-digit budget")
        # exact certificate: q_{n+1} >= ceil(e^t) implies log q_{n+1} >= g(n) q_n
        e_t_floor = _ceil_exp_quotient(t, 1) - 1
        if not q[n + 1] > e_t_floor:
            raise PrecisionExhausted(
                f"growth certificate failed at level {n + 1}")
    return ContinuedFraction(a, growth=rule)


def golden_theta() -> ContinuedFraction:
    """All partial quotients one: the slowest-approximable stream."""
    return ContinuedFraction([0, 1], rule=lambda n: 1)


def make_liouville_theta(soft_levels: int = 2) -> ContinuedFraction:
    """The package's standard super-exponential rotation number.

    Quotients [0; 2, 28, ...] from the rate schedule g(n) = n+1: the seed
    a_1 = 2 places a mid-scale denominator (q_2 = 57) early, so that the
    recurrence ladder has a workable middle rung before the 75-digit q_3
    and the astronomically large later levels; 28 = ceil(e^4/2) and the
    next quotient ceil(e^171/57) are generated, all later levels tracked
    through certified log10 data only.
    """
    rule = GrowthRule(func=lambda n: n + 1)
    cf = build_fast_theta(rule, n_max=3, seeds=(0, 2))
    if soft_levels:
        cf.extend_soft(soft_levels)
    return cf
