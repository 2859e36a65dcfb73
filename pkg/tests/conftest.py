import math

import pytest

from ilw import wave as wv

L_REF, DELTA_REF = math.pi, 1.0


@pytest.fixture(scope="session")
def profiles():
    """Cache of reference profiles keyed by (k, N)."""
    cache = {}

    def get(k, N=256):
        if (k, N) not in cache:
            cache[(k, N)] = wv.make_profile(L_REF, DELTA_REF, k, N)
        return cache[(k, N)]

    return get
