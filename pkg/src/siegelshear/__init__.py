"""siegelshear: certified shear automorphisms of C^2 with unbounded
rotation domains.

The package builds Liouville-type rotation numbers through controlled
continued fractions, evaluates the lacunary gap series and twist maps they
drive, and certifies -- with explicit error radii at every step -- the
recurrence, escape and derivative-growth behaviour that places the origin
inside an unbounded Siegel-type domain.
"""

from .config import Settings, get, set_precision, working_precision
from .errors import (
    CertificationError,
    AmbiguousQuotient,
    EnclosureTooWide,
    StreamExhausted,
    OverflowBudget,
    TailNotCertifiable,
    OutsideDomain,
    GapViolation,
    SearchExhausted,
    PrecisionExhausted,
)
from .exactarith import (
    RatInterval,
    CertifiedComplex,
    LogMag,
    unit_exp,
    dist_to_int,
    one_minus_unit_exp_bound,
    two_sin_pi_enclosure,
    pow_logmag,
)

__version__ = "0.1.0"
