"""Exception hierarchy for certified computations.

Every failure mode that a caller might want to catch programmatically gets
its own class.  ``CertificationError`` is the umbrella for "the requested
bound could not be certified at the current precision/depth"; it is *not*
used for plain bad input (those raise ``ValueError`` like everything else
in Python).
"""


class CertificationError(Exception):
    """A certified enclosure or bound could not be produced."""


class AmbiguousQuotient(CertificationError):
    """Interval straddles a Gauss-map discontinuity; the next partial
    quotient is not determined by the input enclosure."""


class EnclosureTooWide(CertificationError):
    """A reduced interval is too wide to be useful (width >= 1/2 after
    mod-1 reduction, or wider than the requested target)."""


class StreamExhausted(CertificationError):
    """More partial quotients were requested than the stream provides."""


class OverflowBudget(CertificationError):
    """A denominator would exceed the configured digit cap."""


class TailNotCertifiable(CertificationError):
    """The ratio-test margin failed at the requested truncation, so the
    series tail has no certified bound there.  Increase the truncation
    order or shrink |z|."""


class OutsideDomain(CertificationError):
    """Evaluation requested outside the certified domain (e.g. |z| >= 1
    for a series only known to converge on the unit disk)."""


class GapViolation(CertificationError):
    """A subsequence with the required growth gaps could not be extracted."""


class SearchExhausted(CertificationError):
    """A constructive search (return times, admissible exponents) ran out
    of candidates before satisfying its side conditions."""


class PrecisionExhausted(CertificationError):
    """Raising working precision within the configured budget did not
    separate the quantities being compared."""
