import numpy as np
import pytest

from mixmrrr.precision import DOUBLE_QUAD, SINGLE_DOUBLE

MODES = [SINGLE_DOUBLE, DOUBLE_QUAD]


@pytest.fixture(params=MODES, ids=lambda m: m.value)
def mode(request):
    return request.param


def random_tridiag(rng, n, dtype=np.float64):
    from mixmrrr.tridiag import SymTridiag

    return SymTridiag(rng.standard_normal(n).astype(dtype), rng.standard_normal(n - 1).astype(dtype))
