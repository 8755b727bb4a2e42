import numpy as np
import pytest

from kcones._random import stream
from kcones.linalg import complex_normal


def random_hermitian(rng, d):
    G = complex_normal(rng, d, d)
    return 0.5 * (G + G.conj().T)


def random_psd(rng, d, rank=None):
    rank = d if rank is None else rank
    G = complex_normal(rng, d, rank)
    return G @ G.conj().T


def schmidt_rank_k_psd(rng, n, m, k, terms):
    """``W W^*`` with every column of W of Schmidt rank at most k."""
    W = np.array([(complex_normal(rng, n, k) @ complex_normal(rng, k, m)).reshape(-1)
                  for _ in range(terms)]).T
    return W @ W.conj().T


@pytest.fixture
def rng(request):
    # one independent stream per test, keyed by the test name
    key = sum(map(ord, request.node.name))
    return stream(12345, key)
