"""Structural invariants across modules, on seeded random instances."""

import numpy as np
import pytest

from kcones._random import stream
from kcones.choi import ChannelRep, apply, apply_ampliated, choi_of_map, dual_channel, pairing
from kcones.cones import in_kmax_cone, in_kmin_cone, verify_certificate
from kcones.kpeb import build_kpeb, is_kpeb, random_kpeb_form
from kcones.linalg import block_congruence, complex_normal, schmidt_rank
from kcones.maps import diagonalize_positive_map, is_cp, is_k_positive, sample_unital_k_cp
from kcones.norms import k_min_norm, op_norm

from conftest import random_hermitian, random_psd, schmidt_rank_k_psd


def test_schmidt_rank_is_conjugation_invariant():
    for t in range(50):
        rng = stream(30, t)
        n, m = (int(x) for x in rng.integers(1, 5, size=2))
        k = int(rng.integers(1, min(n, m) + 1))
        U = (complex_normal(rng, n, k) @ complex_normal(rng, k, m)).reshape(-1)
        assert schmidt_rank(U, n, m) == schmidt_rank(U.conj(), n, m) == k


def test_block_congruence_composes():
    rng = stream(31, 0)
    a = random_hermitian(rng, 3 * 2)
    X, Y = complex_normal(rng, 2, 3), complex_normal(rng, 3, 2)
    X2, Y2 = complex_normal(rng, 4, 2), complex_normal(rng, 2, 4)
    inner = block_congruence(X, a, Y, r=2)
    np.testing.assert_allclose(block_congruence(X2, inner, Y2).data,
                               block_congruence(X2 @ X, a, Y @ Y2, r=2).data, atol=1e-10)


def test_choi_and_apply_are_inverse():
    for t in range(200):
        rng = stream(32, t)
        p, m = (int(x) for x in rng.integers(1, 6, size=2))
        phi = ChannelRep.from_choi(complex_normal(rng, p * m, p * m), p, m)
        again = choi_of_map(lambda X: apply(phi, X), p, m)
        np.testing.assert_allclose(again.choi.data, phi.choi.data, atol=1e-12)


def test_dual_channel_preserves_cp():
    for t in range(100):
        rng = stream(33, t)
        p, m = (int(x) for x in rng.integers(1, 5, size=2))
        phi = ChannelRep.from_kraus([complex_normal(rng, m, p) for _ in range(2)])
        assert is_cp(dual_channel(phi)).status == "member"


def test_pairing_of_hermitian_operators_is_real():
    rng = stream(34, 0)
    for _ in range(20):
        assert abs(pairing(random_hermitian(rng, 6), random_hermitian(rng, 6)).imag) < 1e-12


def test_k_positivity_agrees_with_definition_side_refutation():
    # phi^{(k)}(P) for random PSD P can only refute; a refutation forces not_member
    for t in range(100):
        rng = stream(35, t)
        p, m = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        C = random_hermitian(rng, p * m) + rng.uniform(0, 3) * np.eye(p * m)
        phi = ChannelRep.from_choi(C, p, m)
        for k in (1, 2):
            refuted = False
            for _ in range(20):
                P = random_psd(rng, k * p, rank=1)
                out = apply_ampliated(phi, P, k)
                if np.linalg.eigvalsh(0.5 * (out + out.conj().T))[0] < -1e-9:
                    refuted = True
                    break
            if refuted:
                assert is_k_positive(phi, k, budget=8, seed=t).status == "not_member"


def test_k_positivity_is_monotone():
    for t in range(30):
        rng = stream(36, t)
        C = random_hermitian(rng, 9) + rng.uniform(0, 4) * np.eye(9)
        phi = ChannelRep.from_choi(C, 3, 3)
        statuses = [is_k_positive(phi, k, budget=8, seed=t).status for k in (1, 2, 3)]
        for lo in range(3):
            for hi in range(lo + 1, 3):
                assert not (statuses[hi] == "member" and statuses[lo] == "not_member")


def test_diagonalize_round_trip():
    for t in range(20):
        rng = stream(37, t)
        phi = ChannelRep.from_kraus([complex_normal(rng, 3, 2) for _ in range(2)])
        U, _, psi = diagonalize_positive_map(phi)
        X = complex_normal(rng, 2, 2)
        np.testing.assert_allclose(U @ psi(X) @ U.conj().T, phi(X), atol=1e-10)


def test_separation_by_unital_cp_maps():
    # v is PSD exactly when every sampled unital CP map and every vector state sends it to PSD
    for t in range(20):
        rng = stream(38, t)
        v = random_hermitian(rng, 3) + rng.uniform(-1, 3) * np.eye(3)
        maps_ok = all(np.linalg.eigvalsh(sample_unital_k_cp(3, 2, seed=100 * t + s)(v))[0] >= -1e-9
                      for s in range(50))
        states_ok = all(np.vdot(e, v @ e).real >= -1e-9 for e in np.linalg.eigh(v)[1].T)
        assert (maps_ok and states_ok) == bool(np.linalg.eigvalsh(v)[0] >= -1e-9)


def test_witnesses_are_k_block_positive():
    for t in range(15):
        rng = stream(39, t)
        w = complex_normal(rng, 9)
        rho = np.outer(w, w.conj()) + 0.05 * random_psd(rng, 9)
        v = in_kmax_cone(rho, 1, n=3, m=3, budget=8, seed=t, strategies=("witness",))
        assert v.status == "not_member" and v.certificate["type"] == "witness"
        W = v.certificate["W"]
        assert in_kmin_cone(W, 1, n=3, m=3).status == "member"
        assert pairing(W, rho).real < 0


def test_decompositions_reverify_at_higher_levels():
    for t in range(10):
        rng = stream(40, t)
        rho = schmidt_rank_k_psd(rng, 3, 3, 1, 4)
        v = in_kmax_cone(rho, 1, n=3, m=3, seed=t)
        assert v.status == "member"
        for h in (1, 2, 3):
            assert verify_certificate(rho, v, h, n=3, m=3, cone="kmax")


def test_adding_identity_preserves_kmax_membership():
    rng = stream(41, 0)
    rho = schmidt_rank_k_psd(rng, 2, 3, 1, 3)
    for r in (0.0, 1e-3, 1.0):
        assert in_kmax_cone(rho + r * np.eye(6), 1, n=2, m=3).status == "member"


def test_sandwich_properties():
    rng = stream(42, 0)
    A = random_psd(rng, 9)
    for k in (1, 2, 3):
        assert in_kmin_cone(A, k, n=3, m=3).status == "member"
    assert in_kmax_cone(random_hermitian(rng, 9) - 10 * np.eye(9), 3, n=3, m=3).status == "not_member"


@pytest.mark.parametrize("seed", range(6))
def test_kpeb_dual_symmetry_and_monotonicity(seed):
    rng = stream(43, seed)
    p, m = int(rng.integers(2, 4)), int(rng.integers(2, 4))
    k = int(rng.integers(1, 3))
    phi = build_kpeb(random_kpeb_form(p, m, k, 2, seed=seed), p, m)
    assert is_kpeb(phi, k, seed=seed).status == "member"
    assert is_kpeb(dual_channel(phi), k, seed=seed).status == "member"
    assert is_kpeb(phi, k + 1, seed=seed).status == "member"


@pytest.mark.parametrize("seed", range(4))
def test_kpeb_closed_under_precomposition(seed):
    rng = stream(44, seed)
    phi = build_kpeb(random_kpeb_form(3, 3, 1, 2, seed=seed), 3, 3)
    cp = ChannelRep.from_kraus([complex_normal(rng, 3, 2) for _ in range(2)])
    assert is_kpeb(phi.compose(cp), 1, seed=seed).status == "member"


def test_norm_estimates_respect_ceiling():
    for t in range(10):
        v = complex_normal(stream(45, t), 3, 3)
        for k in (1, 2):
            assert k_min_norm(v, k, budget=2, seed=t).value <= op_norm(v) + 1e-12
