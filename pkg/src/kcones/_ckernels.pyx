# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_pykernels``.

Same signatures and semantics; Hermitian eigenproblems go through LAPACK
``zheev`` via scipy's Cython bindings.
"""

import numpy as np

from libc.math cimport sqrt, cos, sin, exp, fabs, INFINITY
from scipy.linalg.cython_lapack cimport zheev

ctypedef double complex z


cdef extern from "complex.h" nogil:
    double creal(z)
    double cimag(z)
    z conj(z)


cdef inline double abs2(z v) noexcept nogil:
    return creal(v) * creal(v) + cimag(v) * cimag(v)


cdef int heev(z[:, ::1] a, double[::1] w, z[::1] work, double[::1] rwork, bint vectors) noexcept nogil:
    # a is row-major, LAPACK sees conj(a); eigenvector j of a is conj(a[j, :]) on exit
    cdef int nn = a.shape[0]
    cdef int lda = nn
    cdef int lwork = work.shape[0]
    cdef int info = 0
    cdef char jobz = b'V' if vectors else b'N'
    cdef char uplo = b'L'
    zheev(&jobz, &uplo, &nn, &a[0, 0], &lda, &w[0], &work[0], &lwork, &rwork[0], &info)
    return info


cdef void mgs(z[:, ::1] M, int rows, int cols) noexcept nogil:
    """In-place modified Gram-Schmidt on the columns, with basis completion."""
    cdef int c, d, i, rep, basis_next = 0
    cdef z proj
    cdef double nv
    for c in range(cols):
        for rep in range(2):
            for d in range(c):
                proj = 0
                for i in range(rows):
                    proj = proj + conj(M[i, d]) * M[i, c]
                for i in range(rows):
                    M[i, c] = M[i, c] - proj * M[i, d]
        nv = 0.0
        for i in range(rows):
            nv += abs2(M[i, c])
        nv = sqrt(nv)
        while nv < 1e-12 and basis_next < rows:
            for i in range(rows):
                M[i, c] = 0
            M[basis_next, c] = 1
            basis_next += 1
            for rep in range(2):
                for d in range(c):
                    proj = 0
                    for i in range(rows):
                        proj = proj + conj(M[i, d]) * M[i, c]
                    for i in range(rows):
                        M[i, c] = M[i, c] - proj * M[i, d]
            nv = 0.0
            for i in range(rows):
                nv += abs2(M[i, c])
            nv = sqrt(nv)
        for i in range(rows):
            M[i, c] = M[i, c] / nv


def orthonormalize(M):
    cdef z[:, ::1] Q = np.array(M, dtype=complex, order="C")
    mgs(Q, Q.shape[0], Q.shape[1])
    return np.asarray(Q)


def altmin(A, int n, int m, int k, Y0, int max_sweeps=200, double rtol=1e-12):
    cdef z[:, ::1] Am = np.ascontiguousarray(A, dtype=complex)
    cdef z[:, ::1] Y = np.array(Y0, dtype=complex, order="C")
    cdef z[:, ::1] X = np.zeros((n, k), dtype=complex)
    cdef int nk = n * k, km = k * m, nm = n * m
    cdef int big = nk if nk > km else km
    cdef z[:, ::1] T = np.zeros((nm, big), dtype=complex)
    cdef z[:, ::1] B1 = np.zeros((nk, nk), dtype=complex)
    cdef z[:, ::1] B2 = np.zeros((km, km), dtype=complex)
    cdef double[::1] w1 = np.zeros(nk)
    cdef double[::1] w2 = np.zeros(km)
    cdef z[::1] work = np.zeros(max(1, 64 * big), dtype=complex)
    cdef double[::1] rwork = np.zeros(max(1, 3 * big))
    cdef z[::1] y = np.zeros(km, dtype=complex)
    cdef z[::1] u = np.zeros(nm, dtype=complex)
    cdef int i, j, r, s, c, d, sweeps = 0, info
    cdef double prev = INFINITY, val = 0.0, nrm
    cdef z acc

    with nogil:
        mgs(Y, m, k)
        while sweeps < max_sweeps:
            sweeps += 1
            # T[(i,r),(j,d)] = sum_s A[(i,r),(j,s)] Y[s,d]
            for i in range(nm):
                for j in range(n):
                    for d in range(k):
                        acc = 0
                        for s in range(m):
                            acc = acc + Am[i, j * m + s] * Y[s, d]
                        T[i, j * k + d] = acc
            # B1[(i,c),(j,d)] = sum_r conj(Y[r,c]) T[(i,r),(j,d)]
            for i in range(n):
                for c in range(k):
                    for j in range(nk):
                        acc = 0
                        for r in range(m):
                            acc = acc + conj(Y[r, c]) * T[i * m + r, j]
                        B1[i * k + c, j] = acc
            info = heev(B1, w1, work, rwork, True)
            for i in range(n):
                for c in range(k):
                    X[i, c] = conj(B1[0, i * k + c])
            mgs(X, n, k)
            # T[(i,r),(d,s)] = sum_j A[(i,r),(j,s)] X[j,d]
            for i in range(nm):
                for d in range(k):
                    for s in range(m):
                        acc = 0
                        for j in range(n):
                            acc = acc + Am[i, j * m + s] * X[j, d]
                        T[i, d * m + s] = acc
            # B2[(c,r),(d,s)] = sum_i conj(X[i,c]) T[(i,r),(d,s)]
            for c in range(k):
                for r in range(m):
                    for j in range(km):
                        acc = 0
                        for i in range(n):
                            acc = acc + conj(X[i, c]) * T[i * m + r, j]
                        B2[c * m + r, j] = acc
            info = heev(B2, w2, work, rwork, True)
            for j in range(km):
                y[j] = conj(B2[0, j])
            val = w2[0]
            if prev - val <= rtol * (fabs(val) if fabs(val) > 1.0 else 1.0):
                break
            prev = val
            for c in range(k):
                for r in range(m):
                    Y[r, c] = y[c * m + r]
            mgs(Y, m, k)
        # u[(i,r)] = sum_c X[i,c] y[(c,r)]
        nrm = 0.0
        for i in range(n):
            for r in range(m):
                acc = 0
                for c in range(k):
                    acc = acc + X[i, c] * y[c * m + r]
                u[i * m + r] = acc
                nrm += abs2(acc)
        nrm = sqrt(nrm)
        for i in range(nm):
            u[i] = u[i] / nrm
        val = 0.0
        for i in range(nm):
            acc = 0
            for j in range(nm):
                acc = acc + Am[i, j] * u[j]
            val += creal(conj(u[i]) * acc)
    return float(val), np.asarray(u).copy(), sweeps


cdef double tail_of(z[:, ::1] W, int col, int n, int m, int k, z[:, ::1] G, double[::1] ev,
                    z[::1] work, double[::1] rwork) noexcept nogil:
    # Gram matrix of the associated n x m matrix on its smaller side (G is dim x dim);
    # tail = sum of the smallest (dim - k) eigenvalues
    cdef int i, j, r
    cdef int dim = G.shape[0]
    cdef z acc
    cdef double t = 0.0
    if k >= dim:
        return 0.0
    if n <= m:
        for i in range(n):
            for j in range(n):
                acc = 0
                for r in range(m):
                    acc = acc + W[i * m + r, col] * conj(W[j * m + r, col])
                G[i, j] = acc
    else:
        for i in range(m):
            for j in range(m):
                acc = 0
                for r in range(n):
                    acc = acc + conj(W[r * m + i, col]) * W[r * m + j, col]
                G[i, j] = acc
    heev(G, ev, work, rwork, False)
    for i in range(dim - k):
        if ev[i] > 0.0:
            t += ev[i]
    return t


def column_tail(w, int n, int m, int k):
    cdef int dim = n if n <= m else m
    cdef z[:, ::1] W = np.ascontiguousarray(np.asarray(w, dtype=complex).reshape(n * m, 1))
    cdef z[:, ::1] G = np.zeros((dim, dim), dtype=complex)
    cdef double[::1] ev = np.zeros(dim)
    cdef z[::1] work = np.zeros(64 * dim, dtype=complex)
    cdef double[::1] rwork = np.zeros(3 * dim)
    return tail_of(W, 0, n, m, k, G, ev, work, rwork)


def anneal_frame(V, int n, int m, int k, pairs, angles, phases, uniforms,
                 double T0, double ratio, int sweep_len):
    cdef z[:, ::1] W = np.array(V, dtype=complex, order="C")
    cdef z[:, ::1] best_W = np.array(V, dtype=complex, order="C")
    cdef long[:, ::1] pr = np.ascontiguousarray(pairs, dtype=np.int64)
    cdef double[::1] th = np.ascontiguousarray(angles, dtype=float)
    cdef double[::1] ph = np.ascontiguousarray(phases, dtype=float)
    cdef double[::1] un = np.ascontiguousarray(uniforms, dtype=float)
    cdef int nm = n * m, L = W.shape[1], P = pr.shape[0]
    cdef int dim = n if n <= m else m
    cdef z[:, ::1] G = np.zeros((dim, dim), dtype=complex)
    cdef double[::1] ev = np.zeros(dim)
    cdef z[::1] work = np.zeros(64 * dim, dtype=complex)
    cdef double[::1] rwork = np.zeros(3 * dim)
    cdef z[:, ::1] scratch = np.zeros((nm, 2), dtype=complex)
    cdef double[::1] tails = np.zeros(L)
    cdef int t, a, b, i, l
    cdef double c, s, ta, tb, delta, obj = 0.0, best, T = T0
    cdef z e, wa, wb
    with nogil:
        for l in range(L):
            tails[l] = tail_of(W, l, n, m, k, G, ev, work, rwork)
            obj += tails[l]
        best = obj
        for t in range(P):
            a = pr[t, 0]
            b = pr[t, 1]
            c = cos(th[t])
            s = sin(th[t])
            e = cos(ph[t]) + 1j * sin(ph[t])
            for i in range(nm):
                wa = c * W[i, a] + s * e * W[i, b]
                wb = -s * conj(e) * W[i, a] + c * W[i, b]
                scratch[i, 0] = wa
                scratch[i, 1] = wb
            ta = tail_of(scratch, 0, n, m, k, G, ev, work, rwork)
            tb = tail_of(scratch, 1, n, m, k, G, ev, work, rwork)
            delta = ta + tb - tails[a] - tails[b]
            if delta <= 0.0 or (T > 0.0 and un[t] < exp(-delta / T)):
                for i in range(nm):
                    W[i, a] = scratch[i, 0]
                    W[i, b] = scratch[i, 1]
                tails[a] = ta
                tails[b] = tb
                obj += delta
                if obj < best:
                    best = obj
                    best_W[:, :] = W
            if (t + 1) % sweep_len == 0:
                T *= ratio
        best = 0.0
        for l in range(L):
            best += tail_of(best_W, l, n, m, k, G, ev, work, rwork)
    return np.asarray(best_W).copy(), float(best)
