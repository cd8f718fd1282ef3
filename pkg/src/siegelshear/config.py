"""Global numeric configuration.

All certified arithmetic runs on gmpy2's MPFR/MPC types at a single working
precision ``P`` (bits).  The precision is deliberately *global*: every value
produced under a given configuration carries error bounds valid for that
configuration, and mixing precisions silently is a classic soundness bug.
Use :func:`working_precision` to rerun a computation at higher precision
(e.g. for enclosure-soundness tests).

Magnitude discipline
--------------------
The MPFR build in use clamps exponents to roughly +/-1.07e9 binary, i.e.
decimal magnitudes beyond about 1e+-3.2e8 silently overflow/underflow.
Certified code must therefore never materialize a number whose decimal
exponent could leave ``[-log_band, log_band]``; anything else is handled in
the log10 domain (see ``exactarith.LogMag``) and, when a concrete upper
bound is needed, clamped *upward* to ``tiny()`` = 10**log_tiny, which is a
perfectly representable -- merely unbelievably small -- ceiling.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass

import gmpy2


@dataclass
class Settings:
    # Working precision in bits for all ball arithmetic.
    precision_bits: int = 256
    # Hard cap on the decimal-digit count of any materialized big integer
    # (continued-fraction denominators under fast growth rules explode).
    digit_cap: int = 1_000_000
    # Default width target for reduced fractional-part enclosures: 2**-32.
    dist_width_bits: int = 32
    # Decimal-exponent band for materialized mpfr values.  Bounds whose
    # log10 falls below -log_band are clamped up to 10**log_tiny.
    log_band: int = 200_000
    log_tiny: int = -100_000
    # When multiplying "at least this big" level values into margins we cap
    # the certified floor at 10**value_floor_log10; any true value beyond
    # the cap only makes the bound better.
    value_floor_log10: int = 300
    # Saturation ceiling for log10 lower bounds of astronomically deep
    # levels (their logs are themselves only known to exceed this).
    sat_log10: str = "1e250"


_settings = Settings()


def get() -> Settings:
    return _settings


def apply() -> None:
    """Install the working precision into the ambient gmpy2 context."""
    ctx = gmpy2.get_context()
    ctx.precision = _settings.precision_bits


def install(settings: Settings) -> None:
    """Replace the active settings wholesale (CLI and tests use this)."""
    global _settings
    _settings = settings
    apply()


def set_precision(bits: int) -> None:
    if bits < 64:
        raise ValueError("working precision below 64 bits is not supported")
    _settings.precision_bits = bits
    apply()


@contextlib.contextmanager
def working_precision(bits: int):
    """Temporarily run at a different working precision.

    >>> with working_precision(512):
    ...     refined = some_certified_op(...)
    """
    old = _settings.precision_bits
    set_precision(bits)
    try:
        yield
    finally:
        set_precision(old)


apply()
