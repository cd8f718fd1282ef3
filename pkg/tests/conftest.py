from hypothesis import settings

# Multi-hundred-bit MPFR work makes individual examples slow enough to trip
# the default 200ms deadline on shared CI boxes; wall-clock flakiness is not
# what these properties are about.
settings.register_profile("siegelshear", deadline=None, max_examples=60)
settings.load_profile("siegelshear")
