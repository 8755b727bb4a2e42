import numpy as np
import pytest

from kcones import _pykernels, kernels
from kcones._random import stream
from kcones.cones import in_kmin_cone
from kcones.linalg import complex_normal, schmidt_rank, swap_operator

needs_ext = pytest.mark.skipif("cython" not in kernels.available_backends(),
                               reason="compiled kernels not built")


def _hermitian(rng, d):
    G = complex_normal(rng, d, d)
    return G + G.conj().T


def test_backend_is_known():
    assert kernels.BACKEND in ("cython", "python")
    assert "python" in kernels.available_backends()


def test_use_backend_switches_and_restores():
    before = kernels.BACKEND
    with kernels.use_backend("python"):
        assert kernels.BACKEND == "python"
    assert kernels.BACKEND == before
    with pytest.raises(ValueError):
        with kernels.use_backend("fortran"):
            pass


def test_orthonormalize():
    rng = stream(0, 1)
    Q = _pykernels.orthonormalize(complex_normal(rng, 5, 3))
    np.testing.assert_allclose(Q.conj().T @ Q, np.eye(3), atol=1e-12)


def test_altmin_finds_swap_minimum():
    # min over product vectors of <u, F u> is 0; over Schmidt rank 2 it is -1
    F = swap_operator(2)
    rng = stream(0, 2)
    with kernels.use_backend("python"):
        val1, u1, _ = kernels.altmin(F, 2, 2, 1, complex_normal(rng, 2, 1))
        val2, u2, _ = kernels.altmin(F, 2, 2, 2, complex_normal(rng, 2, 2))
    assert val1 >= -1e-12
    assert val2 == pytest.approx(-1.0)
    assert schmidt_rank(u1, 2, 2) == 1
    assert np.linalg.norm(u2) == pytest.approx(1.0)


@needs_ext
@pytest.mark.parametrize("n,m,k", [(2, 2, 1), (3, 3, 2), (2, 4, 2)])
def test_altmin_backends_agree(n, m, k):
    from kcones import _ckernels

    rng = stream(1, n, m, k)
    A = _hermitian(rng, n * m)
    Y0 = complex_normal(rng, m, k)
    vp, up, sp = _pykernels.altmin(A, n, m, k, Y0)
    vc, uc, sc = _ckernels.altmin(A, n, m, k, Y0)
    assert sp == sc
    assert vp == pytest.approx(vc, abs=1e-12)
    np.testing.assert_allclose(up, uc, atol=1e-10)


@needs_ext
def test_column_tail_backends_agree():
    from kcones import _ckernels

    w = complex_normal(stream(2, 0), 9)
    assert _pykernels.column_tail(w, 3, 3, 1) == pytest.approx(_ckernels.column_tail(w, 3, 3, 1), abs=1e-12)


@needs_ext
def test_anneal_backends_agree():
    from kcones import _ckernels

    rng = stream(3, 0)
    n, m, k, L, P = 3, 3, 2, 10, 128
    V = complex_normal(rng, n * m, L)
    pairs = np.array([rng.choice(L, 2, replace=False) for _ in range(P)], dtype=np.int64)
    angles = rng.uniform(-np.pi / 2, np.pi / 2, P)
    phases = rng.uniform(0, 2 * np.pi, P)
    uniforms = rng.uniform(0, 1, P)
    args = (n, m, k, pairs, angles, phases, uniforms, 0.1, 0.95, L)
    out_p = _pykernels.anneal_frame(V.copy(), *args)
    out_c = _ckernels.anneal_frame(V.copy(), *args)
    np.testing.assert_allclose(out_p[0], out_c[0], atol=1e-10)
    # annealing is a unitary remix: the frame's Gram operator is unchanged
    np.testing.assert_allclose(out_p[0] @ out_p[0].conj().T, V @ V.conj().T, atol=1e-9)


@needs_ext
def test_verdicts_do_not_depend_on_backend():
    A = _hermitian(stream(4, 0), 9)
    with kernels.use_backend("python"):
        vp = in_kmin_cone(A, 1, n=3, m=3, budget=4)
    with kernels.use_backend("cython"):
        vc = in_kmin_cone(A, 1, n=3, m=3, budget=4)
    assert vp.status == vc.status
    assert vp.margin == pytest.approx(vc.margin, abs=1e-10)
