"""Randomized invariants checked with hypothesis."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from kcones._random import stream
from kcones.choi import ChannelRep, dual_channel, pairing
from kcones.cones import certify_block_positive, in_kmin_cone, reduction_map
from kcones.linalg import complex_normal, partial_transpose, schmidt_decompose
from kcones.maps import is_cp
from kcones.serialization import dumps, loads, matrix_from_json, matrix_to_json

dims = st.integers(min_value=1, max_value=4)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=60, deadline=None)
@given(n=dims, m=dims, seed=seeds)
def test_schmidt_coefficients_are_norm_preserving(n, m, seed):
    U = complex_normal(stream(seed, 0), n * m)
    sd = schmidt_decompose(U, n, m)
    assert np.isclose(np.sum(sd.coefficients**2), np.vdot(U, U).real)
    assert np.all(np.diff(sd.coefficients) <= 1e-12)


@settings(max_examples=40, deadline=None)
@given(p=dims, m=dims, seed=seeds)
def test_dual_of_dual_is_identity(p, m, seed):
    G = complex_normal(stream(seed, 1), p * m, p * m)
    phi = ChannelRep.from_choi(G, p, m)
    np.testing.assert_array_equal(dual_channel(dual_channel(phi)).choi.data, phi.choi.data)


@settings(max_examples=40, deadline=None)
@given(p=dims, m=dims, count=st.integers(1, 3), seed=seeds)
def test_kraus_built_maps_are_cp(p, m, count, seed):
    rng = stream(seed, 2)
    phi = ChannelRep.from_kraus([complex_normal(rng, m, p) for _ in range(count)])
    assert is_cp(phi).status == "member"


@settings(max_examples=40, deadline=None)
@given(n=dims, m=dims, seed=seeds)
def test_partial_transpose_is_an_involution_preserving_pairing(n, m, seed):
    rng = stream(seed, 3)
    A = complex_normal(rng, n * m, n * m)
    B = complex_normal(rng, n * m, n * m)
    np.testing.assert_array_equal(partial_transpose(partial_transpose(A, n, m), n, m), A)
    assert np.isclose(pairing(partial_transpose(A, n, m), partial_transpose(B, n, m)), pairing(A, B))


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 3), m=st.integers(2, 3), k=st.integers(1, 2), seed=seeds)
def test_reduction_images_are_never_refuted(n, m, k, seed):
    q = complex_normal(stream(seed, 4), n * m)
    A = reduction_map(np.outer(q, q.conj()), n, m, k)
    margin, _ = certify_block_positive(A, n, m, k)
    assert margin >= -1e-9
    assert in_kmin_cone(A, k, n=n, m=m, budget=2, seed=seed).status == "member"


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 3), m=st.integers(2, 3), seed=seeds)
def test_certified_margin_never_exceeds_search_value(n, m, seed):
    rng = stream(seed, 5)
    G = complex_normal(rng, n * m, n * m)
    A = G + G.conj().T
    margin, _ = certify_block_positive(A, n, m, 1)
    v = in_kmin_cone(A, 1, n=n, m=m, budget=2, seed=seed)
    if v.status == "not_member":
        # a certified lower bound sits below every value actually attained
        assert margin <= v.margin + 1e-9


@settings(max_examples=60, deadline=None)
@given(r=st.integers(0, 4), c=st.integers(0, 4), seed=seeds)
def test_matrix_json_round_trip(r, c, seed):
    M = complex_normal(stream(seed, 6), r, c)
    back = matrix_from_json(loads(dumps(matrix_to_json(M))))
    assert back.shape == (r, c)
    np.testing.assert_array_equal(back, M)
