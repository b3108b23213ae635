import numpy as np

from poisson_filter.exceptions import PoissonFilterConfigException

MAX_SEED = 2**64 - 1


def make_generator(seed: int, *keys: int) -> np.random.Generator:
    """PCG64 stream for ``seed``; each distinct ``keys`` tuple is an independent stream.

    Trials derive their stream from (master seed, trial index) so any trial can be
    regenerated alone.
    """
    if not 0 <= seed <= MAX_SEED:
        raise PoissonFilterConfigException(
            exception_message=f"seed must be an unsigned 64-bit integer, got {seed}"
        )
    sequence = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(sequence))
