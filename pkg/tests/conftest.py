import numpy as np
import pytest

from squeezed_com import reference_params


@pytest.fixture
def baseline():
    """Reference operating point (resonant, OPA off, T = 0)."""
    return reference_params()


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
