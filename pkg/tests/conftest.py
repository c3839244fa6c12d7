import numpy as np
import pytest

from detchain.model import ChainParams, DisorderRealization


@pytest.fixture
def clean_disorder():
    def make(n):
        return DisorderRealization(np.zeros(n), 0.0, 0, 0)

    return make


@pytest.fixture
def small_chain():
    def make(n, alpha, **kw):
        return ChainParams(n_sites=n, alpha=alpha, **kw)

    return make
