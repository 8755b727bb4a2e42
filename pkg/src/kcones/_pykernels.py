"""Pure-Python (numpy) implementations of the hot kernels.

``_ckernels.pyx`` mirrors these functions one for one; the two must agree
to rounding on generic inputs (see tests/test_kernels.py).
"""

from __future__ import annotations

import numpy as np


def orthonormalize(M: np.ndarray) -> np.ndarray:
    """Orthonormal basis whose span contains the columns of ``M``.

    Modified Gram-Schmidt; a column that collapses is replaced by the first
    standard basis vector that is not yet spanned.
    """
    M = np.array(M, dtype=complex)
    rows, cols = M.shape
    Q = np.zeros((rows, cols), dtype=complex)
    basis_next = 0
    for c in range(cols):
        v = M[:, c].copy()
        for _ in range(2):
            for d in range(c):
                v -= np.vdot(Q[:, d], v) * Q[:, d]
        nv = np.linalg.norm(v)
        while nv < 1e-12 and basis_next < rows:
            v = np.zeros(rows, dtype=complex)
            v[basis_next] = 1.0
            basis_next += 1
            for _ in range(2):
                for d in range(c):
                    v -= np.vdot(Q[:, d], v) * Q[:, d]
            nv = np.linalg.norm(v)
        Q[:, c] = v / nv
    return Q


def altmin(A, n, m, k, Y0, max_sweeps=200, rtol=1e-12):
    """Minimize ``<u, A u>`` over unit u of Schmidt rank <= k.

    ``u = sum_c X[:, c] (x) Y[:, c]``; with one factor held orthonormal the
    objective is a Hermitian quadratic form in the other, minimized by its
    lowest eigenvector.  Sides alternate until the relative improvement
    drops below ``rtol`` or ``max_sweeps`` is reached.

    Returns ``(value, u, sweeps)``.
    """
    A = np.ascontiguousarray(A, dtype=complex)
    Y = orthonormalize(Y0)
    In = np.eye(n)
    Im = np.eye(m)
    prev = np.inf
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        L = np.kron(In, Y)
        B = L.conj().T @ A @ L
        _, V = np.linalg.eigh(B)
        X = orthonormalize(V[:, 0].reshape(n, k))
        R = np.kron(X, Im)
        B2 = R.conj().T @ A @ R
        w2, V2 = np.linalg.eigh(B2)
        y = V2[:, 0].reshape(k, m)
        val = w2[0]
        if prev - val <= rtol * max(1.0, abs(val)):
            break
        prev = val
        Y = orthonormalize(y.T)
    u = (X @ y).reshape(n * m)
    u = u / np.linalg.norm(u)
    return float(np.real(np.vdot(u, A @ u))), u, sweeps


def column_tail(w, n, m, k):
    """Squared Schmidt mass of ``w`` beyond the ``k`` largest coefficients."""
    s = np.linalg.svd(w.reshape(n, m), compute_uv=False)
    return float(np.sum(s[k:] ** 2))


def anneal_frame(V, n, m, k, pairs, angles, phases, uniforms, T0, ratio, sweep_len):
    """Simulated annealing over Givens rotations of the columns of ``V``.

    Minimizes the total Schmidt tail ``sum_l column_tail(W[:, l])``; the
    rotations keep ``W W^*`` fixed.  Randomness is supplied by the caller
    (``pairs``, ``angles``, ``phases``, ``uniforms``), one entry per proposal.
    The temperature is multiplied by ``ratio`` every ``sweep_len`` proposals.

    Returns ``(best_W, best_objective)``.
    """
    W = np.array(V, dtype=complex)
    L = W.shape[1]
    tails = np.array([column_tail(W[:, l], n, m, k) for l in range(L)])
    obj = float(tails.sum())
    best, best_W = obj, W.copy()
    T = T0
    for t in range(len(pairs)):
        a, b = int(pairs[t, 0]), int(pairs[t, 1])
        c, s = np.cos(angles[t]), np.sin(angles[t])
        e = np.exp(1j * phases[t])
        wa = c * W[:, a] + s * e * W[:, b]
        wb = -s * np.conj(e) * W[:, a] + c * W[:, b]
        ta, tb = column_tail(wa, n, m, k), column_tail(wb, n, m, k)
        delta = ta + tb - tails[a] - tails[b]
        if delta <= 0.0 or (T > 0.0 and uniforms[t] < np.exp(-delta / T)):
            W[:, a], W[:, b] = wa, wb
            tails[a], tails[b] = ta, tb
            obj += delta
            if obj < best:
                best, best_W = obj, W.copy()
        if (t + 1) % sweep_len == 0:
            T *= ratio
    # recompute to shed accumulated drift in the running sum
    best = float(sum(column_tail(best_W[:, l], n, m, k) for l in range(L)))
    return best_W, best
