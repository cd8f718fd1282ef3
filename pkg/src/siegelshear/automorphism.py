r"""Shear automorphisms of C^2 with certified closed-form iterates.

The map studied here acts on pairs (w, z) by

    A(w, z) = (e^(2 pi i a) w + phi(z),  e^(2 pi i a) z),

where phi is the lacunary twist series attached to an angle a (a
continued-fraction theta or an explicit rational interval) and an
exponent subsequence with bounded coefficients.  Because the z-coordinate
is a pure rotation, the N-th iterate has the same shape with angle N*a
and the twist evaluated at that angle:

    A^N(w, z) = (e^(2 pi i N a) w + phi_N(z),  e^(2 pi i N a) z).

Iteration therefore costs a single series evaluation regardless of N --
the angle N*a is reduced mod 1 in exact rational arithmetic before any
transcendental step, so certified radii stay O(1) in N.  Step-by-step
composition survives only as a cross-check oracle in the tests.

The conjugate route evaluates the same map on C x (unit disk) as
unshear-rotate-shear with the gap series h, which is how the twist arises
in the first place; the two paths must always agree within their radii.

All norms on C^2 are max(|w|, |z|).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import gmpy2
from gmpy2 import mpfr

from . import config
from .exactarith import CertifiedComplex, RatInterval, bump_up, unit_exp
from .lacunary import (
    AngleSource,
    CoefficientSeq,
    ExponentSubseq,
    _angle_frac,
    eval_h,
    eval_phi,
    eval_phi_prime,
)

__all__ = ["ShearAuto", "Point2", "DerivativeResult", "apply", "iterate_closed",
           "apply_conjugate", "derivative", "inverse_apply"]


@dataclass(frozen=True, eq=False)
class Point2:
    """A certified point (w, z) of C^2."""

    w: CertifiedComplex
    z: CertifiedComplex

    @classmethod
    def from_rationals(cls, w_re, w_im=0, z_re=0, z_im=0) -> "Point2":
        return cls(CertifiedComplex.from_rationals(Fraction(w_re), Fraction(w_im)),
                   CertifiedComplex.from_rationals(Fraction(z_re), Fraction(z_im)))

    def max_norm_upper(self) -> mpfr:
        return max(self.w.abs_upper(), self.z.abs_upper())

    def max_norm_lower(self) -> mpfr:
        return max(self.w.abs_lower(), self.z.abs_lower())

    def certainly_intersects(self, other: "Point2") -> bool:
        return (self.w.certainly_intersects(other.w)
                and self.z.certainly_intersects(other.z))

    def contains_exact(self, w_re, w_im=0, z_re=0, z_im=0) -> bool:
        return (self.w.contains_exact(Fraction(w_re), Fraction(w_im))
                and self.z.contains_exact(Fraction(z_re), Fraction(z_im)))


@dataclass(frozen=True, eq=False)
class ShearAuto:
    """The certified shear automorphism determined by (angle, q', u, M).

    For a growth-prescribed continued-fraction angle the map is entire in
    z; for a generic interval angle its certified domain is C x (unit
    disk).  ``truncation`` fixes the series index at which evaluation
    stops and tails take over; ``precision`` optionally pins the working
    precision (bits) for every evaluation of this map.
    """

    angle: AngleSource
    exponents: ExponentSubseq
    coeffs: CoefficientSeq
    truncation: int
    precision: Optional[int] = None

    def __post_init__(self):
        if not (0 <= self.truncation < len(self.exponents)):
            raise ValueError("truncation index outside the exponent list")

    def _scope(self):
        if self.precision is None:
            return _NULL_SCOPE
        return config.working_precision(self.precision)


class _NullScope:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


_NULL_SCOPE = _NullScope()


def _conj(b: CertifiedComplex) -> CertifiedComplex:
    """Conjugate ball; exact for the real-angle rotations used here."""
    m = b.mid
    return CertifiedComplex(gmpy2.mpc(m.real, -m.imag), b.err)


def _rotation(A: ShearAuto, N: int) -> CertifiedComplex:
    return unit_exp(_angle_frac(A.angle, N))


def iterate_closed(A: ShearAuto, p: Point2, N: int) -> Point2:
    """The N-th iterate in closed form: one twist evaluation at angle N*a.

    Certified radii are O(1) in N; only the exact big-integer angle
    reduction grows with it.
    """
    if N < 0:
        raise ValueError("closed-form iteration needs N >= 0; "
                         "use inverse_apply for single backward steps")
    if N == 0:
        return p
    with A._scope():
        rot = _rotation(A, N)
        tw = eval_phi(A.angle, A.exponents, A.coeffs, p.z, A.truncation, N=N)
        return Point2(w=rot * p.w + tw.value, z=rot * p.z)


def apply(A: ShearAuto, p: Point2) -> Point2:
    """One certified step of the automorphism."""
    return iterate_closed(A, p, 1)


def apply_conjugate(A: ShearAuto, p: Point2) -> Point2:
    """One step through the unshear-rotate-shear factorization on C x disk.

    Computes (w + h(z), z), rotates both coordinates, then subtracts h
    again.  Must agree with ``apply`` within combined radii wherever both
    are defined; used as the structural cross-check of the twist series.
    """
    with A._scope():
        M = A.truncation
        rot = _rotation(A, 1)
        sheared = p.w + eval_h(A.exponents, A.coeffs, p.z, M).value
        w_rot = rot * sheared
        z_rot = rot * p.z
        w_out = w_rot - eval_h(A.exponents, A.coeffs, z_rot, M).value
        return Point2(w=w_out, z=z_rot)


@dataclass(frozen=True, eq=False)
class DerivativeResult:
    """DA^N(p) = [[diag, off], [0, diag]] with certified side data.

    ``det`` encloses the Jacobian determinant e^(4 pi i N a); its modulus
    must always contain 1.  ``norm_lower`` is a certified lower bound for
    the operator max-norm, dominated by the off-diagonal twist derivative.
    """

    diag: CertifiedComplex
    off: CertifiedComplex
    det: CertifiedComplex
    norm_lower: mpfr

    @property
    def matrix(self):
        zero = CertifiedComplex.zero()
        return ((self.diag, self.off), (zero, self.diag))


def derivative(A: ShearAuto, p: Point2, N: int) -> DerivativeResult:
    """Certified derivative of the N-th iterate at p.

    The matrix is upper triangular with unimodular diagonal, so
    |det| = 1 and the operator norm is bounded below by |phi_N'(z)|.
    """
    if N < 0:
        raise ValueError("derivative of closed-form iterates needs N >= 0")
    if N == 0:
        one = CertifiedComplex.exact_int(1)
        return DerivativeResult(diag=one, off=CertifiedComplex.zero(),
                                det=one, norm_lower=mpfr(1))
    with A._scope():
        rot = _rotation(A, N)
        dtw = eval_phi_prime(A.angle, A.exponents, A.coeffs, p.z,
                             A.truncation, N=N)
        det = rot * rot
        norm_lower = max(dtw.value.abs_lower(), rot.abs_lower())
        return DerivativeResult(diag=rot, off=dtw.value, det=det,
                                norm_lower=norm_lower)


def inverse_apply(A: ShearAuto, p: Point2) -> Point2:
    """One certified backward step: A^(-1)(w, z).

    With r = e^(2 pi i a): z0 = r^(-1) z, then w0 = r^(-1)(w - phi(z0))
    undoes the forward display.  The angle is real, so r^(-1) is the
    exact conjugate ball.
    """
    with A._scope():
        rot_inv = _conj(_rotation(A, 1))
        z0 = rot_inv * p.z
        tw = eval_phi(A.angle, A.exponents, A.coeffs, z0, A.truncation, N=1)
        w0 = rot_inv * (p.w - tw.value)
        return Point2(w=w0, z=z0)
