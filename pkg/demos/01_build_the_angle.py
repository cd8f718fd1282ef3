"""
Building a rapidly approximable angle
=====================================

The recurrence construction needs a rotation number whose continued
fraction grows explosively: each denominator must at least exponentiate
the one before it.  This script builds the stock angle, prints the exact
part of its convergent tower, and shows the certified log-scale data for
the levels that no longer fit in big integers.
"""

import math

from siegelshear import cfrac
from siegelshear.exactarith import decimal_str

theta = cfrac.make_liouville_theta()

# The exact levels: partial quotients and convergents as plain integers.
print("exact levels")
for n in range(theta.depth_exact + 1):
    print(f"  n={n}  a_n has {len(str(theta.quotient(n)))} digits, "
          f"q_n has {len(str(theta.q(n)))} digits")

# The sandwich between the two deepest convergents pins the value down to
# about 1 / (q_2 q_3) -- roughly 10^-76 here.
enc = theta.theta_enclosure(theta.depth_exact - 1)
print("value enclosure width ~ 1e%d" % math.floor(math.log10(enc.width)))

# Beyond the exact levels the stream continues in certified log scale.
# Level 4 carries two-sided log10 bounds; level 5 only a saturated floor.
for level in (4, 5):
    lo, hi = theta.log10_q(level)
    print(f"  log10 q_{level} in [{decimal_str(lo, 8)}, "
          f"{'unbounded' if hi is None else decimal_str(hi, 8)}]")

# The size-based sum over log(q_{n+1}) / q_n diverges: log q_{n+1} is
# about (n+1) q_n here, so the terms themselves grow without bound.  The
# angle sits firmly on the wild side of the small-divisor dichotomy,
# which is exactly why every later estimate must be certified instead of
# linearized away.
res = theta.brjuno_sum(theta.depth_exact - 1)
print("small-divisor partial sum through level", res.n_max,
      "in [%.6f, %.6f]" % (float(res.partial.lo), float(res.partial.hi)))
print("certified divergent:", res.diverges)

# Compare with the golden ratio: every quotient is 1, the denominators
# grow only geometrically, and the same growth requirement fails at once:
# q_3 would have to beat e^(3 q_2) ~ 403.
golden = cfrac.ContinuedFraction([0] + [1] * 14)
print("golden q_2 =", golden.q(2), " q_3 =", golden.q(3),
      " required > %.0f" % math.exp(3 * golden.q(2)))
