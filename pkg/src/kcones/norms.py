"""Order norms on M_n.

``||v||_{k-min} = sup ||phi(v)||`` over unital CP maps phi: M_n -> M_k.
For ``k >= n`` the identity (padded by a state) attains the operator norm,
so the value is exact.  Below that the supremum is a nonconvex problem and
only lower bounds are reported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ._random import stream
from .choi import ChannelRep
from .linalg import (
    DEFAULT_TOL,
    DimensionError,
    as_matrix,
    complex_normal,
    inv_sqrt_psd,
    require_hermitian,
)
from .maps import is_cp

NM_ITERATIONS = 128


class NormCheckError(RuntimeError):
    """The norm identity for positive maps failed on a sampled input."""


@dataclass
class NormEstimate:
    """``value`` is exact or a lower bound; ``achiever`` attains it."""

    value: float
    kind: str
    achiever: ChannelRep

    def to_json(self) -> dict:
        return {"value": float(self.value), "kind": self.kind, "achiever": self.achiever.to_json()}


def op_norm(M) -> float:
    return float(np.linalg.norm(as_matrix(M), 2))


def order_norm_sa(v, tol: float = DEFAULT_TOL) -> float:
    """``inf{r : -r I <= v <= r I}`` for Hermitian ``v``: its largest |eigenvalue|."""
    v = as_matrix(v)
    require_hermitian(v, tol)
    w = np.linalg.eigvalsh(0.5 * (v + v.conj().T))
    return float(np.max(np.abs(w)))


def _unitalize(K: np.ndarray) -> np.ndarray:
    """Rescale a Kraus stack ``K[i]`` (k x n) so that ``sum K_i K_i^* = I_k``."""
    Q = np.einsum("iab,icb->ac", K, K.conj())
    R = inv_sqrt_psd(Q, 1e-12)
    return np.einsum("ab,ibc->iac", R, K)


def _value(K, v):
    return op_norm(np.einsum("iab,bc,idc->ad", K, v, K.conj()))


def _compression_seed(v, k):
    """Isometric compression onto a k-dimensional subspace rich in v's top singular data."""
    n = v.shape[0]
    U, _, Vh = np.linalg.svd(v)
    cols = [U[:, 0], Vh[0].conj()]
    if np.allclose(v, v.conj().T):
        w, E = np.linalg.eigh(v)
        order = np.argsort(-np.abs(w), kind="stable")
        cols = [E[:, i] for i in order]
    else:
        cols += [U[:, i] for i in range(1, n)]
    B = np.array(cols).T
    Q, R = np.linalg.qr(B)
    keep = np.abs(np.diag(R)) > 1e-10
    Q = Q[:, keep][:, :k]
    if Q.shape[1] < k:
        # complete with any orthonormal vectors outside the span
        full, _ = np.linalg.qr(np.hstack([Q, np.eye(n)]))
        Q = full[:, :k]
    return Q.conj().T[None, :, :]


def _embed_lower(K: np.ndarray, v, k: int) -> np.ndarray:
    """Phi = phi (+) s (+) ... (+) s from an achiever phi into M_r, r < k.

    ``s`` is the vector state of the top eigen/singular vector of v.
    The Kraus stack grows by one operator per padding row.
    """
    count, r, n = K.shape
    U, _, _ = np.linalg.svd(v)
    t = U[:, 0]
    out = np.zeros((count + (k - r), k, n), dtype=complex)
    out[:count, :r, :] = K
    for j in range(k - r):
        out[count + j, r + j, :] = t.conj()
    return out


def _channel_from_stack(K) -> ChannelRep:
    return ChannelRep.from_kraus(list(K))


def _exact_achiever(v, k):
    n = v.shape[0]
    K = np.zeros((1, k, n), dtype=complex)
    K[0, :n, :] = np.eye(n)
    if k > n:
        K = _embed_lower(K[:, :n, :], v, k)
    return K


def _local_search(K0, v, maxiter):
    shape = K0.shape

    def f(z):
        K = z.view(complex).reshape(shape)
        try:
            return -_value(_unitalize(K), v)
        except np.linalg.LinAlgError:
            return 0.0

    res = minimize(f, np.ascontiguousarray(K0).reshape(-1).view(float).copy(), method="Nelder-Mead",
                   options={"maxiter": maxiter, "xatol": 1e-12, "fatol": 1e-14})
    return _unitalize(res.x.view(complex).reshape(shape))


def _level(v, k, budget, seed, lower_stack):
    n = v.shape[0]
    seeds = [_compression_seed(v, k)]
    if lower_stack is not None:
        seeds.append(_embed_lower(lower_stack, v, k))
    best_K, best = None, -np.inf
    for K in seeds:
        val = _value(K, v)
        if val > best:
            best, best_K = val, K
    for r in range(budget):
        rng = stream(seed, 10, k, r)
        count = max(1, n // k)
        K = _unitalize(complex_normal(rng, count, k, n))
        K = _local_search(K, v, NM_ITERATIONS)
        val = _value(K, v)
        if val > best:
            best, best_K = val, K
    return best, best_K


def k_min_norm(v, k: int, budget: int = 8, seed: int = 0) -> NormEstimate:
    """Estimate ``||v||_{k-min}``.

    ``k >= n``: exact, equal to the operator norm.  ``k < n``: a lower bound
    from unital CP maps M_n -> M_k.  The search at level k is seeded with
    eigen-compressions of v and with the level k-1 achiever padded by a state,
    so the reported values never decrease in k for a fixed seed.  Each of the
    ``budget`` random restarts is refined by a Nelder-Mead run on the Kraus
    parameters, with unitality restored after every move.

    Examples
    --------
    >>> import numpy as np
    >>> k_min_norm(np.eye(3), 1).value
    1.0
    """
    v = as_matrix(v)
    if v.shape[0] != v.shape[1]:
        raise DimensionError(f"expected a square matrix, got {v.shape}")
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    n = v.shape[0]
    ceiling = op_norm(v)
    if k >= n:
        K = _exact_achiever(v, k)
        return NormEstimate(ceiling, "exact", _channel_from_stack(K))
    stack = None
    for level in range(1, k + 1):
        _, stack = _level(v, level, budget, seed, stack)
    value = min(_value(stack, v), ceiling)
    return NormEstimate(value, "lower_bound", _channel_from_stack(stack))


def positive_map_norm_check(phi: ChannelRep, samples: int = 200, seed: int = 0,
                            tol: float = DEFAULT_TOL) -> float:
    """Return ``||phi(I)||`` after checking ``||phi(v)|| <= ||phi(I)|| ||v||``.

    ``phi`` maps into M_k and must be k-positive, hence CP.  The check runs
    over ``samples`` random Hermitian v of unit norm (for which the k-minimal
    norm equals the operator norm); a violation beyond 1e-8 raises :class:`NormCheckError`.
    """
    if is_cp(phi, tol).status != "member":
        raise ValueError("phi is not completely positive")
    p = phi.p
    bound = op_norm(phi(np.eye(p)))
    for t in range(samples):
        G = complex_normal(stream(seed, 11, t), p, p)
        v = G + G.conj().T
        v = v / op_norm(v)
        out = op_norm(phi(v))
        if out > bound + 1e-8:
            raise NormCheckError(f"||phi(v)|| = {out:.12g} exceeds ||phi(I)|| = {bound:.12g}")
    return bound


def ladder(v, kmax: int | None = None, budget: int = 8, seed: int = 0) -> list[float]:
    """``[||v||_{1-min}, ..., ||v||_{kmax-min}]`` with shared seeds."""
    v = as_matrix(v)
    kmax = v.shape[0] if kmax is None else kmax
    return [k_min_norm(v, k, budget=budget, seed=seed).value for k in range(1, kmax + 1)]


__all__ = [
    "NormEstimate",
    "NormCheckError",
    "order_norm_sa",
    "k_min_norm",
    "positive_map_norm_check",
    "ladder",
]
