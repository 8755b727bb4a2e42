import numpy as np
import pytest

from kcones.choi import ChannelRep, FunctionalRep
from kcones.kpeb import (
    KpebForm,
    build_kpeb,
    compose_state_channel,
    convert_form,
    form_from_decomposition,
    is_k_separable_state,
    is_kpeb,
    kpeb_audit,
    random_kpeb_form,
)
from kcones.linalg import (
    BipartiteOperator,
    DimensionError,
    NotPSDError,
    complex_normal,
    maximally_entangled_vector,
    partial_transpose,
)
from kcones.maps import depolarizing_channel, identity_channel, transpose_channel
from kcones.serialization import FormatError, dumps, loads


def test_identity_is_kpeb_only_at_full_level():
    phi = identity_channel(2)
    assert is_kpeb(phi, 1).status == "not_member"
    assert is_kpeb(phi, 2).status == "member"


def test_identity_on_three_is_not_two_peb():
    v = is_kpeb(identity_channel(3), 2, budget=64)
    assert v.status == "not_member"
    assert v.certificate["type"] == "witness"


def test_depolarizing_is_entanglement_breaking():
    v = is_kpeb(depolarizing_channel(3), 1)
    assert v.status == "member"
    form = v.certificate["form"]
    assert form.variant == "rank_kraus"
    assert all(np.linalg.matrix_rank(A, tol=1e-9) <= 1 for A in form.ops)
    np.testing.assert_allclose(build_kpeb(form, 3, 3).choi.data, depolarizing_channel(3).choi.data, atol=1e-8)


def test_measure_and_prepare_channel():
    # X -> sum_i <i|X|i> |psi_i><psi_i| has rank-one Kraus operators |psi_i><i|
    psis = [np.array([1.0, 0.0]), np.array([1.0, 1.0]) / np.sqrt(2)]
    K = [np.outer(psi, np.eye(2)[i]) for i, psi in enumerate(psis)]
    phi = ChannelRep.from_kraus(K)
    assert is_kpeb(phi, 1).status == "member"


def test_build_rank_kraus_matches_kraus_sum(rng):
    A = [complex_normal(rng, 3, 1) @ complex_normal(rng, 1, 2) for _ in range(2)]
    phi = build_kpeb(KpebForm("rank_kraus", 1, A), 3, 2)
    X = complex_normal(rng, 3, 3)
    np.testing.assert_allclose(phi(X), sum(a.conj().T @ X @ a for a in A), atol=1e-12)


def test_build_sandwich_matches_definition(rng):
    M = complex_normal(rng, 3, 2)
    K = complex_normal(rng, 2, 2)
    psi = ChannelRep.from_kraus([K])
    phi = build_kpeb(KpebForm("sandwich", 2, [(M, psi)]), 2, 3)
    X = complex_normal(rng, 2, 2)
    np.testing.assert_allclose(phi(X), M @ psi(X) @ M.conj().T, atol=1e-12)


def test_invalid_forms_are_rejected(rng):
    with pytest.raises(ValueError):
        build_kpeb(KpebForm("rank_kraus", 1, [np.eye(2)]), 2, 2)
    with pytest.raises(ValueError):
        build_kpeb(KpebForm("sandwich", 2, [(np.eye(2), transpose_channel(2))]), 2, 2)
    with pytest.raises(DimensionError):
        build_kpeb(KpebForm("rank_kraus", 1, [np.ones((2, 3))]), 2, 2)
    with pytest.raises(ValueError):
        KpebForm("other", 1)


@pytest.mark.parametrize("variant", ["rank_kraus", "sandwich"])
def test_convert_form_round_trip(variant):
    form = random_kpeb_form(3, 4, 2, 3, seed=1, variant=variant)
    phi = build_kpeb(form, 3, 4)
    other = convert_form(form)
    assert other.variant != variant
    np.testing.assert_allclose(build_kpeb(other, 3, 4).choi.data, phi.choi.data, atol=1e-10)
    np.testing.assert_allclose(build_kpeb(convert_form(other), 3, 4).choi.data, phi.choi.data, atol=1e-10)


def test_form_json_round_trip():
    form = random_kpeb_form(2, 3, 2, 2, seed=4, variant="sandwich")
    back = KpebForm.from_json(loads(dumps(form)))
    np.testing.assert_allclose(build_kpeb(back, 2, 3).choi.data, build_kpeb(form, 2, 3).choi.data, atol=1e-12)
    with pytest.raises(FormatError):
        KpebForm.from_json({"variant": "sandwich"})


def test_form_from_decomposition_reproduces_choi(rng):
    W = np.array([(complex_normal(rng, 2, 1) @ complex_normal(rng, 1, 3)).reshape(-1) for _ in range(3)]).T
    form = form_from_decomposition(W, 2, 3, 1)
    np.testing.assert_allclose(build_kpeb(form, 2, 3).choi.data, W @ W.conj().T, atol=1e-12)


def test_compose_with_maximally_entangled_state_is_normalized_choi():
    phi = identity_channel(2)
    w = maximally_entangled_vector(2)
    s = FunctionalRep.from_density(np.outer(w, w.conj()), 2, 2)
    rho = compose_state_channel(s, phi)
    np.testing.assert_allclose(rho.density.data, phi.choi.data / 2, atol=1e-12)


def test_compose_with_transpose_gives_partial_transpose(rng):
    G = complex_normal(rng, 6, 6)
    s = FunctionalRep.from_density(G @ G.conj().T, 3, 2)
    rho = compose_state_channel(s, transpose_channel(2))
    np.testing.assert_allclose(rho.density.data, partial_transpose(s.density.data, 3, 2), atol=1e-12)


def test_k_separable_state():
    w = maximally_entangled_vector(2)
    bell = np.outer(w, w.conj())
    assert is_k_separable_state(BipartiteOperator(2, 2, bell), 1).status == "not_member"
    assert is_k_separable_state(BipartiteOperator(2, 2, bell), 2).status == "member"
    assert is_k_separable_state(BipartiteOperator(2, 2, np.eye(4) / 4), 1).status == "member"
    with pytest.raises(NotPSDError):
        is_k_separable_state(BipartiteOperator(2, 2, -np.eye(4)), 1)


@pytest.mark.parametrize("seed", range(5))
def test_audit_on_constructed_channels_agrees(seed):
    form = random_kpeb_form(3, 3, 1 + seed % 2, 2, seed=seed)
    phi = build_kpeb(form, 3, 3)
    rep = kpeb_audit(phi, form.k, budget=8, seed=seed)
    assert rep["iii"]["status"] == "member"
    assert not rep["disagreement"]


def test_audit_on_identity_refutes_every_side():
    rep = kpeb_audit(identity_channel(2), 1, budget=8)
    assert rep["iii"]["status"] == "not_member"
    assert rep["ii"]["status"] == "not_member"
    assert rep["i"]["status"] == "not_member"
    assert not rep["disagreement"]
