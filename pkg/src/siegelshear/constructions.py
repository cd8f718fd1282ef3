"""Effective witnesses: recurrence schedules and boundary-pinning angles.

Two inductive constructions sit on top of the gap-series machinery, each
with a verifier that recomputes its guarantee independently.

**Recurrence schedule.**  For a fast-approximable angle ``a`` with
denominators q_0 < q_1 < ... and a target sequence eps_p -> 0, we choose
iteration counts N_p and a denominator subsequence q'_p such that

    |1 - e^(2 pi i N_p a)| + sum_n |1 - e^(2 pi i q'_n N_p a)| p^(q'_n)
        <= eps_p          for every stage p >= 1.

The induction keeps four properties: (i) N_p > N_(p-1); (ii) the head
plus the already-committed rows stay below eps_p/2; (iii) q'_p is a
parent denominator with q'_p >= 2 N_p; (iv) the parent-level tail
sum_(q_n >= q'_p) p^(q_n)/q_(n+1) stays below eps_p/(4 pi N_p).  Taking
N_p among the parent denominators q_m makes (ii) effective: every
committed row obeys dist(q'_n q_m a, Z) <= q'_n |q_m a - p_m|.  The
certified per-stage enclosure of the master sum is stored with the
schedule.  Stages whose denominator exceeds exact representation are
kept as *virtual* rows carrying only certified log10 bounds.

**Boundary-pinning angle.**  Given exponents with 4x growth
(s_(n+1) >= 4 s_n), a nest of rational intervals I_n with |I_n| = 1/s_n
and s_n * I_(n+1) inside [1/4, 3/4] + Z pins an angle mu whose divisors
never come close to resonance: |1 - e^(2 pi i s_n mu)| >= sqrt(2) for
every n.  The nest is placed leftmost at each level; the final interval
is shrunk to its middle half so each certificate is *strictly* interior
and the sqrt(2) lower bound survives outward rounding.

All interval data is exact rational; magnitudes beyond representation
ride in log10 space (LogMag) with directed rounding.
"""

import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import gmpy2
from gmpy2 import mpfr

from . import config
from .cfrac import ContinuedFraction
from .errors import (
    CertificationError,
    EnclosureTooWide,
    GapViolation,
    SearchExhausted,
)
from .exactarith import (
    LogMag,
    RatInterval,
    TWO_PI_UPPER_RAT,
    bump_down,
    bump_up,
    decimal_str,
    dist_to_int,
    down_add,
    down_mul,
    down_sub,
    fraction_from_mpfr,
    log10_frac_up,
    log10_int_up,
    mpfr_down,
    one_minus_unit_exp_bound,
    pow_logmag,
    two_sin_pi_enclosure,
    up_add,
    up_mul,
)
from .lacunary import (
    CoefficientSeq,
    ExponentSubseq,
    divergence_probe,
    eval_phi_prime,
)

__all__ = [
    "RecurrenceSchedule",
    "VirtualRow",
    "RecurrenceCheck",
    "build_recurrence",
    "verify_recurrence",
    "MuCertificate",
    "build_mu",
    "verify_mu",
    "DivergenceWitness",
    "e1_witness",
    "activation_times",
    "derivative_records",
]

# Ratio margin (in log10 per unit exponent) under which successive
# certified tail terms provably at least halve; shared convention with
# the gap-series tail discipline.
_MARGIN_FLOOR = mpfr("0.302")

# The last suffix bound is doubled to cover the whole geometric tail.
_CLOSURE_FACTOR = 2

# Candidate-scan ceiling for the inductive searches.
_SEARCH_CAP = 1000


def _tiny_fraction() -> Fraction:
    return Fraction(1, 10 ** (-config.get().log_tiny))


def _digits_guard(n: int):
    """Lift CPython's int<->str conversion cap to cover n digits.

    Certified bounds routinely live at the 10^-100000 floor, whose exact
    denominators overflow the interpreter's default guard when schedules
    are serialized for cross-process verification.
    """
    if sys.get_int_max_str_digits() < n + 16:
        sys.set_int_max_str_digits(n + 16)


def _frac_digits(f) -> int:
    f = Fraction(f)
    return max(f.numerator.bit_length(), f.denominator.bit_length()) // 3 + 2


def _guard_for_text(text: str):
    _digits_guard(len(text))


def _log10e_down() -> mpfr:
    return bump_down(gmpy2.log10(gmpy2.exp(mpfr(1))))


def _two_pi_lm() -> LogMag:
    # upper endpoint of log10(710/113) also upper-bounds log10(2 pi)
    return LogMag.from_fraction(TWO_PI_UPPER_RAT)


def _materialize_up(lm: LogMag) -> Optional[Fraction]:
    """Exact rational upper bound for a LogMag, or None when unusable.

    Bounds proven under the representable band come back as the tiny()
    ceiling; bounds above it yield None (the candidate simply fails).
    """
    if lm.sign == 0:
        return Fraction(0)
    if lm.log10_hi is None:
        return None
    cfg = config.get()
    if lm.log10_hi <= cfg.log_tiny:
        return _tiny_fraction()
    if lm.log10_hi > cfg.log_band:
        return None
    return fraction_from_mpfr(bump_up(gmpy2.exp10(lm.log10_hi), 2))


def _level_kind(theta: ContinuedFraction, n: int) -> Optional[str]:
    try:
        return theta.level_kind(n)
    except Exception:
        return None


def _growth_rate(theta: ContinuedFraction, n: int) -> Optional[Fraction]:
    if theta._growth is None:
        return None
    try:
        return theta._growth.rate(n)
    except Exception:
        return None


def _margin(theta: ContinuedFraction, level: int, radix: int) -> Optional[mpfr]:
    """Certified lower bound for g(level)*log10(e) - log10(radix).

    Positive margin m means p^(q_k)/q_(k+1) <= 10^(-q_k m) at that level;
    the growth prescription is nondecreasing, so the bound propagates to
    every deeper level.
    """
    g = _growth_rate(theta, level)
    if g is None:
        return None
    m = down_mul(mpfr_down(g), _log10e_down())
    if radix > 1:
        m = down_sub(m, log10_frac_up(Fraction(radix)))
    return m


def _suffix_closure(theta: ContinuedFraction, level: int,
                    radix: int) -> Optional[Fraction]:
    """Bound sum_(k>=level) radix^(q_k)/q_(k+1) from a soft level onward.

    Requires ratio margin >= _MARGIN_FLOOR at ``level`` (so consecutive
    certified bounds at least halve) and a certified lower bound on
    log10 q_level.  Returns an exact rational upper bound, or None.
    """
    m = _margin(theta, level, radix)
    if m is None or m < _MARGIN_FLOOR:
        return None
    try:
        lo_q, _ = theta.log10_q(level)
    except Exception:
        return None
    if lo_q is None:
        return None
    # first suffix bound B = 10^(-q_level * m) with q_level >= 10^lo_q
    if down_add(bump_down(gmpy2.log10(m)), lo_q) >= 6:
        # -log10 B >= 10^6: far beyond the representable floor
        return _CLOSURE_FACTOR * _tiny_fraction()
    # small enough here that 10^lo_q cannot overflow
    neg_exp = down_mul(m, bump_down(gmpy2.exp10(lo_q)))
    if not neg_exp > 0:
        return None
    b = _materialize_up(LogMag(1, None, bump_up(-neg_exp)))
    if b is None:
        return None
    return _CLOSURE_FACTOR * b


# ---------------------------------------------------------------------------
# recurrence schedules
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class VirtualRow:
    """A schedule row whose denominator exists only as log10 bounds."""

    level: int
    log10_lo: mpfr
    log10_hi: Optional[mpfr]


@dataclass(frozen=True, eq=False)
class RecurrenceSchedule:
    """Iteration counts N_p and denominators q'_p with stage certificates.

    ``qprime`` holds the exactly-representable rows (parent-linked);
    ``virtual_rows`` holds any trailing rows known only through log10
    bounds.  ``eps`` are the per-stage budgets for p = 1..p_max, and
    ``certificates[p-1]`` encloses that stage's master sum.  Row 0 is
    the inductive seed (N_0 = 1, q'_0 = q_0) and carries no budget.
    """

    eps: tuple
    qprime: ExponentSubseq
    Ns: tuple
    certificates: tuple = ()
    virtual_rows: tuple = ()

    def __post_init__(self):
        if len(self.Ns) < 1 or self.Ns[0] < 1:
            raise ValueError("schedule needs the seed iterate N_0 >= 1")
        for a, b in zip(self.Ns, self.Ns[1:]):
            if b <= a:
                raise ValueError("iteration counts must increase strictly")
        if len(self.Ns) != self.rows():
            raise ValueError("one N per row expected")
        if len(self.eps) != len(self.Ns) - 1:
            raise ValueError("one budget per stage p >= 1 expected")
        for e in self.eps:
            if e <= 0:
                raise ValueError("stage budgets must be positive")
        if self.certificates and len(self.certificates) != len(self.eps):
            raise ValueError("certificates, when present, cover every stage")
        # condition (iii): q'_p >= 2 N_p, exact where the row is exact
        for p in range(1, len(self.Ns)):
            ex = self.row_exponent(p)
            if ex is not None:
                if ex < 2 * self.Ns[p]:
                    raise ValueError(f"row {p} violates q' >= 2N")
            else:
                row = self.virtual_rows[p - len(self.qprime)]
                if not row.log10_lo > log10_int_up(2 * self.Ns[p]):
                    raise ValueError(f"virtual row {p} cannot certify q' >= 2N")

    def rows(self) -> int:
        return len(self.qprime) + len(self.virtual_rows)

    def row_exponent(self, n: int) -> Optional[int]:
        """Exact denominator of row n, or None for a virtual row."""
        if n < len(self.qprime):
            return self.qprime.exponent(n)
        if n < self.rows():
            return None
        raise IndexError(f"row {n} out of range")

    def row_level(self, n: int) -> Optional[int]:
        if n < len(self.qprime):
            return self.qprime.parent_index(n)
        if n < self.rows():
            return self.virtual_rows[n - len(self.qprime)].level
        raise IndexError(f"row {n} out of range")

    def to_json(self) -> str:
        _digits_guard(max(
            [_frac_digits(e) for e in self.eps]
            + [_frac_digits(Fraction(n)) for n in self.Ns]
            + [max(_frac_digits(c.lo), _frac_digits(c.hi))
               for c in self.certificates]
            + [max(_frac_digits(q) for q in (self.qprime.exponents() or (1,)))]))
        rows = []
        for n in range(self.rows()):
            ex = self.row_exponent(n)
            if ex is not None:
                rows.append({"exact": True, "level": self.row_level(n),
                             "q": str(ex)})
            else:
                v = self.virtual_rows[n - len(self.qprime)]
                rows.append({
                    "exact": False, "level": v.level,
                    "log10_lo": decimal_str(v.log10_lo, 30),
                    "log10_hi": (None if v.log10_hi is None
                                 else decimal_str(v.log10_hi, 30)),
                })
        obj = {
            "eps": [str(e) for e in self.eps],
            "Ns": [str(n) for n in self.Ns],
            "rows": rows,
            "certificates": [{"lo": str(c.lo), "hi": str(c.hi)}
                             for c in self.certificates],
        }
        return json.dumps(obj, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str, theta: ContinuedFraction) -> "RecurrenceSchedule":
        _guard_for_text(text)
        obj = json.loads(text)
        levels = [r["level"] for r in obj["rows"] if r["exact"]]
        virtual = tuple(
            VirtualRow(r["level"], bump_down(mpfr(r["log10_lo"])),
                       None if r["log10_hi"] is None
                       else bump_up(mpfr(r["log10_hi"])))
            for r in obj["rows"] if not r["exact"])
        return cls(
            eps=tuple(Fraction(e) for e in obj["eps"]),
            qprime=ExponentSubseq.from_parent(theta, levels),
            Ns=tuple(int(n) for n in obj["Ns"]),
            certificates=tuple(RatInterval(Fraction(c["lo"]), Fraction(c["hi"]))
                               for c in obj["certificates"]),
            virtual_rows=virtual,
        )


@dataclass(frozen=True)
class RecurrenceCheck:
    """Outcome of an independent recomputation of one stage's master sum."""

    p: int
    truncation: int
    bound: Fraction
    eps: Optional[Fraction]
    passes: bool


def _stage_head_and_committed(theta: ContinuedFraction, m: int,
                              committed: Sequence[int], p: int) -> Optional[mpfr]:
    """Certified upper bound (mpfr, rounded up) for condition (ii).

    With the candidate N_p = q_m, the head obeys
    |1 - e^(2 pi i q_m a)| <= min(2, 2 pi d_m) and each committed row
    |1 - e^(2 pi i q' q_m a)| <= min(2, 2 pi q' d_m), d_m = |q_m a - p_m|.
    """
    try:
        d = theta.delta_logmag(m)
    except Exception:
        return None
    two = LogMag.from_fraction(Fraction(2))
    total = mpfr(0)
    pieces = [(1, 0)] + [(q, q) for q in committed]
    for mult, power in pieces:
        pw = pow_logmag(p, power)
        div = _two_pi_lm().mul(LogMag.from_int(mult)).mul(d)
        got = [v for v in (_materialize_up(div.mul(pw)),
                           _materialize_up(two.mul(pw))) if v is not None]
        if not got:
            return None
        total = up_add(total, bump_up(mpfr(min(got)), 2))
    return total


def _tail_sum_bound(theta: ContinuedFraction, p: int,
                    j: int) -> Optional[mpfr]:
    """Certified upper bound for sum_(i>=j) p^(q_i)/q_(i+1), or None.

    Exact levels are summed term by term; the first soft level closes the
    remainder through the ratio-margin argument.
    """
    if p == 0:
        return mpfr(0)  # 0^q vanishes at every level
    total = mpfr(0)
    i = j
    while i - j <= 200:
        kind = _level_kind(theta, i)
        if kind is None:
            return None
        if kind != "exact":
            c = _suffix_closure(theta, i, p)
            if c is None:
                return None
            return up_add(total, bump_up(mpfr(c), 2))
        kind_next = _level_kind(theta, i + 1)
        if kind_next is None:
            return None
        lo_next = theta.log10_q(i + 1)[0]
        if lo_next is None:
            return None
        if p == 1:
            term_log = bump_up(-lo_next)
        else:
            term_log = up_add(up_mul(bump_up(mpfr(theta.q(i)), 2),
                                     log10_frac_up(Fraction(p))),
                              bump_up(-lo_next))
        term = _materialize_up(LogMag(1, None, term_log))
        if term is None:
            return None
        total = up_add(total, bump_up(mpfr(term), 2))
        i += 1
    return None


def build_recurrence(theta: ContinuedFraction, eps: Sequence,
                     p_max: int) -> RecurrenceSchedule:
    """Inductively choose (N_p, q'_p) with certified stage enclosures.

    N_p is the smallest parent denominator exceeding N_(p-1) whose
    condition-(ii) bound clears eps_p/2; q'_p is then the smallest
    admissible parent denominator clearing condition (iv).  A stage whose
    denominator lives beyond exact representation is recorded as a
    virtual row; no further stage can be built past one, since later
    committed sums would need its exact value.

    Raises SearchExhausted when no admissible candidate exists in the
    available data: grow the angle's quotient table or relax eps.
    """
    if p_max < 0:
        raise ValueError("p_max must be >= 0")
    budgets = [Fraction(e) for e in eps][:p_max]
    if len(budgets) < p_max:
        raise ValueError(f"need {p_max} budgets, got {len(budgets)}")
    for a, b in zip(budgets, budgets[1:]):
        if b > a:
            raise ValueError("stage budgets must not increase")
    if any(e <= 0 for e in budgets):
        raise ValueError("stage budgets must be positive")

    levels = [0]
    Ns = [1]
    virtual = []
    certificates = []
    for p in range(1, p_max + 1):
        if virtual:
            raise SearchExhausted(
                "cannot extend a schedule past a virtual row: its committed "
                "sums would need the exact denominator")
        eps_p = budgets[p - 1]
        committed = [theta.q(l) for l in levels]

        # stage A: the iterate count
        m, bound_a = None, None
        for cand in range(1, _SEARCH_CAP):
            kind = _level_kind(theta, cand)
            if kind != "exact":
                break
            if theta.q(cand) <= Ns[-1]:
                continue
            bound_a = _stage_head_and_committed(theta, cand, committed, p)
            if bound_a is not None and bound_a <= mpfr_down(eps_p / 2):
                m = cand
                break
        if m is None:
            raise SearchExhausted(
                f"no exact parent denominator certifies stage {p} "
                f"closeness-to-identity; grow the angle or relax eps")
        Np = theta.q(m)

        # stage B: the denominator
        target = eps_p / (2 * TWO_PI_UPPER_RAT * Np)
        chosen, bound_b = None, None
        for j in range(levels[-1] + 1, levels[-1] + _SEARCH_CAP):
            kind = _level_kind(theta, j)
            if kind is None:
                break
            if kind == "exact":
                if theta.q(j) < 2 * Np:
                    continue
            else:
                lo_j = theta.log10_q(j)[0]
                if lo_j is None or not lo_j > log10_int_up(2 * Np):
                    continue
            bound_b = _tail_sum_bound(theta, p, j)
            if bound_b is not None and bound_b <= mpfr_down(target):
                chosen = (j, kind)
                break
        if chosen is None:
            raise SearchExhausted(
                f"no parent denominator certifies stage {p} tail; "
                f"grow the angle or relax eps")

        # stage certificate: head enclosure + committed + Est1 tail
        head = one_minus_unit_exp_bound(theta.frac_qNtheta(m, 1))
        hi = fraction_from_mpfr(bound_a) \
            + TWO_PI_UPPER_RAT * Np * fraction_from_mpfr(bound_b)
        if hi > eps_p:
            raise CertificationError(
                f"stage {p} certificate misses its budget; this cannot "
                f"happen for admissible candidates")
        certificates.append(RatInterval(head.lo, hi))

        Ns.append(Np)
        j, kind = chosen
        if kind == "exact":
            levels.append(j)
        else:
            lo_j, hi_j = theta.log10_q(j)
            virtual.append(VirtualRow(j, lo_j, hi_j))

    return RecurrenceSchedule(
        eps=tuple(budgets), qprime=ExponentSubseq.from_parent(theta, levels),
        Ns=tuple(Ns), certificates=tuple(certificates),
        virtual_rows=tuple(virtual))


def _match_parent_level(theta: ContinuedFraction, N: int) -> Optional[int]:
    for m in range(theta.depth_exact + 1):
        if theta.q(m) == N:
            return m
    return None


def _loglog_tiny(next_lo: mpfr, extra_log10_up: mpfr, q_log10_hi: mpfr,
                 radix: int) -> Optional[Fraction]:
    """Certify extra * radix^(s) / q_next <= tiny when s <= 10^(q_log10_hi).

    Sound when both the prefactor and the power's log10 stay under a
    quarter of log10(q_next): the quotient then sits below
    10^(-log10(q_next)/2), which must itself clear the tiny floor.
    """
    quarter = down_mul(next_lo, mpfr("0.25"))
    if quarter < -2 * config.get().log_tiny:
        return None
    if not extra_log10_up <= quarter:
        return None
    if radix > 1:
        lg = bump_up(gmpy2.log10(log10_frac_up(Fraction(radix))))
        if not up_add(q_log10_hi, lg) <= bump_down(gmpy2.log10(quarter)):
            return None
    return _tiny_fraction()


def _row_term_upper(theta: ContinuedFraction, sched: RecurrenceSchedule,
                    n: int, Np: int, radix: int,
                    m_p: Optional[int]) -> Optional[Fraction]:
    """Certified upper bound for |1 - e^(2 pi i q'_n N_p a)| radix^(q'_n).

    Exact rows race two routes -- the folded-distance enclosure and, when
    N_p is itself a parent denominator q_m, the defect product
    q'_n |q_m a - p_m| -- and keep the sharper.  Virtual rows certify
    through log-log comparison only.
    """
    if radix == 0:
        return Fraction(0)
    q = sched.row_exponent(n)
    if q is None:
        row = sched.virtual_rows[n - len(sched.qprime)]
        if row.log10_hi is None:
            return None
        try:
            d = theta.delta_logmag(row.level)
        except Exception:
            return None
        if d.log10_hi is None:
            return None
        extra = up_add(_two_pi_lm().log10_hi, log10_int_up(Np))
        # dist(q' N a) <= N |q_level a - p_level| <= N / 10^(-log10_hi(d))
        return _loglog_tiny(-d.log10_hi, extra, row.log10_hi, radix)

    candidates = []
    pw = pow_logmag(radix, q)
    try:
        iv = theta.frac_qNtheta(sched.row_level(n), Np)
        ob = one_minus_unit_exp_bound(iv)
        val = _materialize_up(LogMag.from_fraction(ob.hi).mul(pw)
                              if ob.hi > 0 else LogMag.zero())
        if val is not None:
            candidates.append(val)
    except Exception:
        pass
    if m_p is not None:
        try:
            d = theta.delta_logmag(m_p)
        except Exception:
            d = None
        if d is not None:
            div = _two_pi_lm().mul(LogMag.from_int(q)).mul(d)
            for lm in (div.mul(pw), LogMag.from_fraction(Fraction(2)).mul(pw)):
                val = _materialize_up(lm)
                if val is not None:
                    candidates.append(val)
    if not candidates:
        return None
    return min(candidates)


def _est1_row_upper(theta: ContinuedFraction, sched: RecurrenceSchedule,
                    n: int, Np: int, radix: int) -> Optional[Fraction]:
    """Row bound 2 pi N_p radix^(q'_n) / q_(j+1), j the row's parent level.

    The small-divisor estimate dist(q'_n N a, Z) <= N |q_j a - p_j|
    <= N / q_(j+1) needs no side condition for an upper bound.  The last
    row may instead close through the exact-walk + growth-margin parent
    tail, which covers every deeper level at once.
    """
    if radix == 0:
        return Fraction(0)
    q = sched.row_exponent(n)
    lvl = sched.row_level(n)
    if lvl is None:
        return None
    try:
        lo_next = theta.log10_q(lvl + 1)[0]
    except Exception:
        lo_next = None
    if lo_next is not None:
        if q is not None:
            lm = _two_pi_lm().mul(LogMag.from_int(Np)) \
                .mul(pow_logmag(radix, q)).mul(LogMag(1, None, -lo_next))
            val = _materialize_up(lm)
            if val is not None:
                return val
        else:
            row = sched.virtual_rows[n - len(sched.qprime)]
            if row.log10_hi is not None:
                extra = up_add(_two_pi_lm().log10_hi, log10_int_up(Np))
                val = _loglog_tiny(lo_next, extra, row.log10_hi, radix)
                if val is not None:
                    return val
    if n + 1 == sched.rows():
        # the prescription's own growth closes the whole parent tail
        c = _tail_sum_bound(theta, radix, lvl)
        if c is not None:
            return TWO_PI_UPPER_RAT * Np * fraction_from_mpfr(c)
    return None


def verify_recurrence(theta: ContinuedFraction, sched: RecurrenceSchedule,
                      p: int, M: int) -> RecurrenceCheck:
    """Recompute stage p's master sum bound from the raw schedule data.

    Rows below max(p, M) go through folded-distance enclosures; rows from
    there on use the small-divisor estimate 2 pi N_p / q'_(n+1), whose
    precondition 2 N_p <= q'_(n+1) is checked, not assumed.  The result
    is a one-sided certified upper bound compared against eps_p; the seed
    stage p = 0 carries no budget and passes vacuously.
    """
    if p < 0 or p >= len(sched.Ns):
        raise ValueError(f"stage {p} outside the schedule")
    if M < 0:
        raise ValueError("truncation must be >= 0")
    Np = sched.Ns[p]
    radix = p
    m_p = _match_parent_level(theta, Np)

    if m_p is not None:
        head = one_minus_unit_exp_bound(theta.frac_qNtheta(m_p, 1)).hi
    else:
        head = one_minus_unit_exp_bound(theta.frac_qNtheta(0, Np)).hi
    bound = head

    for n in range(sched.rows()):
        if n >= max(p, M):
            # the small-divisor regime; rows below p are the committed
            # head, where the distance enclosure is the sharp route
            term = _est1_row_upper(theta, sched, n, Np, radix)
            if term is None:
                term = _row_term_upper(theta, sched, n, Np, radix, m_p)
        else:
            term = _row_term_upper(theta, sched, n, Np, radix, m_p)
            if term is None:
                term = _est1_row_upper(theta, sched, n, Np, radix)
        if term is None:
            raise EnclosureTooWide(
                f"row {n} of stage {p} admits no certified bound")
        bound += term

    eps_p = sched.eps[p - 1] if p >= 1 else None
    passes = True if eps_p is None else bound <= eps_p
    return RecurrenceCheck(p=p, truncation=M, bound=bound, eps=eps_p,
                           passes=passes)


# ---------------------------------------------------------------------------
# boundary-pinning angle
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MuCertificate:
    """A nested-interval certificate pinning an angle off resonance.

    ``intervals`` is the nest I_0, ..., I_L (one more than the exponent
    count; the last width is 1/(4 s_last)); ``mu`` is the final rational
    interval containing the angle.  Construction validates the nest, the
    widths, and the quarter-distance bound dist(s_n mu, Z) >= 1/4 at
    every level; levels where the bound is attained exactly are legal but
    flagged by boundary_levels().
    """

    qpp: ExponentSubseq
    intervals: tuple
    mu: RatInterval

    def __post_init__(self):
        e = self.qpp.exponents()
        if not e:
            raise ValueError("need at least one exponent")
        for a, b in zip(e, e[1:]):
            if b < 4 * a:
                raise GapViolation(f"4x growth fails: {a} -> {b}")
        if len(self.intervals) != len(e) + 1:
            raise ValueError("nest must have one more interval than levels")
        widths = [Fraction(1, q) for q in e] + [Fraction(1, 4 * e[-1])]
        for n, (iv, w) in enumerate(zip(self.intervals, widths)):
            if iv.width != w:
                raise ValueError(f"interval {n} must have width {w}")
        for outer, inner in zip(self.intervals, self.intervals[1:]):
            if not outer.contains_interval(inner):
                raise ValueError("intervals must be nested")
        if not self.intervals[-1].contains_interval(self.mu):
            raise ValueError("mu must lie in the last interval")
        for n, q in enumerate(e):
            d = dist_to_int(self.mu.scale(q))
            if d.lo < Fraction(1, 4):
                raise ValueError(
                    f"level {n} leaves the quarter-distance band: {d}")

    def boundary_levels(self) -> tuple:
        """Levels whose divisor bound is exactly sqrt(2) (non-strict)."""
        out = []
        for n, q in enumerate(self.qpp.exponents()):
            if dist_to_int(self.mu.scale(q)).lo == Fraction(1, 4):
                out.append(n)
        return tuple(out)

    def to_json(self) -> str:
        obj = {
            "exponents": [str(q) for q in self.qpp.exponents()],
            "intervals": [[str(iv.lo), str(iv.hi)] for iv in self.intervals],
            "mu": [str(self.mu.lo), str(self.mu.hi)],
        }
        return json.dumps(obj, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "MuCertificate":
        obj = json.loads(text)
        return cls(
            qpp=ExponentSubseq.detached([int(q) for q in obj["exponents"]]),
            intervals=tuple(RatInterval(Fraction(a), Fraction(b))
                            for a, b in obj["intervals"]),
            mu=RatInterval(Fraction(obj["mu"][0]), Fraction(obj["mu"][1])),
        )


def _leftmost_admissible_run(window: RatInterval, q: int,
                             need: Fraction) -> RatInterval:
    """Leftmost run of {x : q x mod 1 in [1/4, 3/4]} inside the window.

    The window spans one full period 1/q, so the admissible set meets it
    in at most two runs of total measure 1/(2q); the larger is at least
    1/(4q) wide, which the 4x growth keeps sufficient.
    """
    a, b = window.lo, window.hi
    j0 = math.floor(q * a - Fraction(1, 4))
    for j in range(j0 - 1, j0 + 3):
        lo = max(a, Fraction(4 * j + 1, 4 * q))
        hi = min(b, Fraction(4 * j + 3, 4 * q))
        if hi >= lo and hi - lo >= need:
            return RatInterval(lo, hi)
    raise GapViolation("no admissible subinterval of the required width")


def build_mu(qpp_source: ExponentSubseq) -> MuCertificate:
    """Pin an angle whose given divisors all stay >= sqrt(2) in modulus.

    The nest is placed leftmost level by level; the final interval is its
    admissible run's leftmost quarter-width piece, and the angle interval
    is that piece's middle half, so every distance certificate is
    strictly inside [1/4, 3/4] and survives outward rounding.
    """
    e = qpp_source.exponents()
    if not e:
        raise ValueError("need at least one exponent")
    for a, b in zip(e, e[1:]):
        if b < 4 * a:
            raise GapViolation(f"4x growth fails: {a} -> {b}")
    intervals = [RatInterval(Fraction(0), Fraction(1, e[0]))]
    for n, q in enumerate(e):
        need = Fraction(1, e[n + 1]) if n + 1 < len(e) else Fraction(1, 4 * q)
        run = _leftmost_admissible_run(intervals[-1], q, need)
        intervals.append(RatInterval(run.lo, run.lo + need))
    last = intervals[-1]
    quarter = last.width / 4
    mu = RatInterval(last.lo + quarter, last.hi - quarter)
    return MuCertificate(qpp=qpp_source, intervals=tuple(intervals), mu=mu)


def verify_mu(cert: MuCertificate, n: int) -> RatInterval:
    """Certified enclosure of |1 - e^(2 pi i s_n mu)| at level n.

    The distance of s_n mu to the integers is exact rational data; the
    modulus 2 sin(pi d) is enclosed with directed rounding.  The lower
    endpoint squares to at least 2 whenever the level is strictly
    interior (boundary-touching levels land exactly on sqrt(2) and are
    reported by the certificate's boundary_levels).
    """
    q = cert.qpp.exponent(n)
    return two_sin_pi_enclosure(dist_to_int(cert.mu.scale(q)))


# ---------------------------------------------------------------------------
# divergence and activation witnesses
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DivergenceWitness:
    """The constant-one coefficients with their partial-sum escape times."""

    coeffs: CoefficientSeq
    probes: tuple

    def escape_index(self, K: int) -> Optional[int]:
        return self.probes[K - 1].index


def e1_witness(qprime: ExponentSubseq) -> DivergenceWitness:
    """Coefficients u == 1 with exact divergence certificates.

    The partial sums 1, 2, 3, ... escape every threshold, so the
    constant sequence witnesses the full divergence hierarchy; the probe
    results record the exact escape indices for K = 1..10.
    """
    ones = CoefficientSeq.ones()
    probes = tuple(divergence_probe(ones, qprime, K) for K in range(1, 11))
    return DivergenceWitness(coeffs=ones, probes=probes)


def activation_times(theta: ContinuedFraction, level: int,
                     count: int = 20) -> tuple:
    """Iteration counts sweeping one small divisor from dormant to full.

    dist(q_level N a, Z) grows like N |q_level a - p_level| ~ N / q_(level+1),
    so N = k q_(level+1) / (2 count) walks the divisor modulus up the sine
    arc to its maximum near N ~ q_(level+1)/2.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    q_next = theta.q(level + 1)
    step = q_next // (2 * count)
    if step < 1:
        raise ValueError("denominator too small for this resolution")
    return tuple(k * step for k in range(1, count + 1))


def derivative_records(source, seq: ExponentSubseq, u: CoefficientSeq,
                       z, M: int, times: Sequence[int]):
    """Certified twist-derivative magnitudes along an iterate sweep.

    Returns (samples, records): samples holds one
    (N, lower, upper) triple per sweep entry, and records keeps the
    strictly increasing running maxima of the certified lower bounds --
    the growth witness used by the unboundedness probes.
    """
    samples = []
    records = []
    best = None
    for N in times:
        v = eval_phi_prime(source, seq, u, z, M, N=N).value
        lo, hi = v.abs_lower(), v.abs_upper()
        samples.append((int(N), lo, hi))
        if best is None or lo > best:
            best = lo
            records.append((int(N), lo))
    return samples, records
