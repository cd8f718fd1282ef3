"""
A ladder of certified return times
==================================

The shear map looks like a pure rotation from far away, so orbits keep
coming back.  Here we build a three-stage schedule of return times with
error budgets 1/2, 1/4, 1/8, verify every stage rigorously, and then
watch a concrete orbit land back inside each shrinking window.
"""

from fractions import Fraction

from gmpy2 import mpfr

from siegelshear import constructions
from siegelshear.automorphism import Point2, ShearAuto, iterate_closed
from siegelshear.cfrac import make_liouville_theta
from siegelshear.exactarith import decimal_str
from siegelshear.lacunary import CoefficientSeq

theta = make_liouville_theta()
budgets = [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)]
sched = constructions.build_recurrence(theta, budgets, 3)

# Each stage p gets a return time N_p drawn from the convergent
# denominators; stage 0 is the trivial seed.
print("return times")
for p, N in enumerate(sched.Ns):
    print(f"  stage {p}: N has {len(str(N))} digits")

# Independent verification: the certified displacement bound at every
# stage must sit below its budget.
for p in range(len(sched.Ns)):
    chk = constructions.verify_recurrence(theta, sched, p, 2)
    shown = "--" if chk.bound is None else decimal_str(mpfr(chk.bound), 3)
    print(f"  stage {p}: bound {shown}  passes={chk.passes}")

# Now iterate an actual point through the scheduled times.  The starting
# point sits in the annulus 1 < |z| <= 2 where the recurrence applies.
A = ShearAuto(theta, sched.qprime, CoefficientSeq.ones(),
              truncation=2, precision=240)
start = Point2.from_rationals(1, 0, Fraction(3, 2), 0)
for p in (1, 2, 3):
    out = iterate_closed(A, start, sched.Ns[p])
    dist = max((out.w - start.w).abs_upper(), (out.z - start.z).abs_upper())
    print(f"  orbit at N_{p}: distance to start <= {decimal_str(dist, 3)}"
          f"  (budget {budgets[p - 1]})")
