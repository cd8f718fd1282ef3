"""
Watching the derivative wake up
===============================

Along ordinary iteration counts the twist derivative stays tame, because
every series coefficient carries a factor |1 - e(N q' theta)| that is
astronomically small until N catches up with the matching denominator.
Sweeping N through fractions of q_3 walks that factor up the sine arc,
and the certified lower bounds climb by orders of magnitude.  The sweep
is written out as an SVG picture.
"""

from fractions import Fraction

from siegelshear import constructions, svg
from siegelshear.cfrac import make_liouville_theta
from siegelshear.exactarith import CertifiedComplex, decimal_str
from siegelshear.lacunary import CoefficientSeq, eval_phi_prime

theta = make_liouville_theta()
sched = constructions.build_recurrence(
    theta, [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)], 3)
seq = sched.qprime
ones = CoefficientSeq.ones()
z = CertifiedComplex.from_rationals(Fraction(3, 2))

# Baseline: a single application barely moves the derivative.
base = eval_phi_prime(theta, seq, ones, z, 2, N=1).value.abs_upper()
print("baseline |phi'| at N=1 <=", decimal_str(base, 3))

# Sweep eight activation times up to ~q_3/2 and keep running records.
times = constructions.activation_times(theta, 2, 8)
samples, records = constructions.derivative_records(
    theta, seq, ones, z, 2, times)
for k, (N, lo, hi) in enumerate(samples):
    mark = " <- record" if any(rn == N for rn, _ in records) else ""
    print(f"  step {k + 1}: |phi'| in [{decimal_str(lo, 3)}, "
          f"{decimal_str(hi, 3)}]{mark}")
print(f"{len(records)} records; last one beats the baseline by "
      f"{decimal_str(records[-1][1] / base, 3)}x")

# Picture: certified lower bounds against the sweep position (log scale).
fig = svg.Figure("derivative lower bounds along the sweep",
                 "sweep step", "certified lower bound", log_y=True)
fig.scatter([(k + 1.0, float(lo)) for k, (_, lo, _) in enumerate(samples)])
fig.line([(k + 1.0, float(lo)) for k, (_, lo, _) in enumerate(samples)],
         size=1.0)
with open("derivative_sweep.svg", "w") as fh:
    fh.write(fig.render())
print("wrote derivative_sweep.svg")
