"""Choi matrices of linear maps, and functionals under the trace duality.

A linear map phi: M_p -> M_m is stored by its Choi matrix, the element of
M_p(M_m) whose (i, j) block is ``phi(E_ij)``.  A linear functional f on
M_n (x) M_m is stored by its density

    rho_f[(i,k), (j,l)] = f(E_ij (x) E_kl),

so that ``f(A) = sum_{x,y} rho_f[x, y] * A[x, y]``.  This evaluation is the
*bilinear* pairing ``tr(rho A^T)``; it is positive on PSD inputs exactly when
``rho_f`` is PSD.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import serialization as ser
from .linalg import (
    DEFAULT_TOL,
    BipartiteOperator,
    DimensionError,
    as_bipartite,
    as_matrix,
    hermitian_defect,
    matrix_unit,
    vec,
)


@dataclass(frozen=True)
class FunctionalRep:
    """A linear functional on M_n (x) M_m, stored by its density matrix."""

    n: int
    m: int
    density: BipartiteOperator

    def __post_init__(self):
        dens = as_bipartite(self.density, self.n, self.m)
        object.__setattr__(self, "density", dens)

    @classmethod
    def from_density(cls, rho, n: int, m: int) -> "FunctionalRep":
        return cls(n, m, BipartiteOperator(n, m, rho))

    def __call__(self, A) -> complex:
        return pairing(self, A)

    def is_positive(self, tol: float = DEFAULT_TOL) -> bool:
        from .linalg import is_psd

        return is_psd(self.density.data, tol).is_psd

    def is_state(self, tol: float = 1e-10) -> bool:
        return self.is_positive(tol) and abs(np.trace(self.density.data) - 1.0) <= tol

    def to_json(self) -> dict:
        return ser.wrapped_to_json("functional", self.n, self.m, self.density.data)


@dataclass(frozen=True)
class ChannelRep:
    """A linear map M_p -> M_m, stored by its Choi matrix in M_p(M_m)."""

    p: int
    m: int
    choi: BipartiteOperator

    def __post_init__(self):
        object.__setattr__(self, "choi", as_bipartite(self.choi, self.p, self.m))

    @classmethod
    def from_choi(cls, C, p: int, m: int) -> "ChannelRep":
        return cls(p, m, BipartiteOperator(p, m, C))

    @classmethod
    def from_kraus(cls, kraus, p: int | None = None) -> "ChannelRep":
        """The map ``X -> sum_i K_i X K_i^*`` with each ``K_i`` of shape (m, p)."""
        kraus = [as_matrix(K) for K in kraus]
        if not kraus:
            raise DimensionError("empty Kraus list")
        m, p0 = kraus[0].shape
        if p is not None and p != p0:
            raise DimensionError(f"Kraus operators act on C^{p0}, expected C^{p}")
        C = np.zeros((p0 * m, p0 * m), dtype=complex)
        for K in kraus:
            if K.shape != (m, p0):
                raise DimensionError("Kraus operators have inconsistent shapes")
            c = K.T.reshape(p0 * m)  # c[(i, r)] = K[r, i]
            C += np.outer(c, c.conj())
        return cls(p0, m, BipartiteOperator(p0, m, C))

    def __call__(self, X) -> np.ndarray:
        return apply(self, X)

    def is_hermiticity_preserving(self, tol: float = DEFAULT_TOL) -> bool:
        return hermitian_defect(self.choi.data) <= tol

    def kraus(self, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
        from .maps import kraus_from_choi

        return kraus_from_choi(self, tol)

    def compose(self, other: "ChannelRep") -> "ChannelRep":
        """``self o other`` (apply ``other`` first)."""
        if other.m != self.p:
            raise DimensionError("channels do not compose")
        return choi_of_map(lambda X: self(other(X)), other.p, self.m)

    def to_json(self) -> dict:
        return ser.wrapped_to_json("channel", self.p, self.m, self.choi.data)


def choi_of_map(apply_fn: Callable[[np.ndarray], np.ndarray], p: int, m: int) -> ChannelRep:
    """Choi matrix ``(apply_fn(E_ij))_{ij}`` of a linear map M_p -> M_m."""
    C = np.zeros((p * m, p * m), dtype=complex)
    for i in range(p):
        for j in range(p):
            B = as_matrix(apply_fn(matrix_unit(p, p, i, j)))
            if B.shape != (m, m):
                raise DimensionError(f"map returned shape {B.shape}, expected ({m}, {m})")
            C[i * m:(i + 1) * m, j * m:(j + 1) * m] = B
    return ChannelRep(p, m, BipartiteOperator(p, m, C))


def apply(phi: ChannelRep, X) -> np.ndarray:
    """``phi(X) = sum_ij X[i, j] * phi(E_ij)``."""
    X = as_matrix(X)
    p, m = phi.p, phi.m
    if X.shape != (p, p):
        raise DimensionError(f"input is {X.shape}, expected ({p}, {p})")
    blocks = phi.choi.data.reshape(p, m, p, m)
    return np.einsum("ij,irjs->rs", X, blocks)


def apply_ampliated(phi: ChannelRep, A, n: int) -> np.ndarray:
    """``(id_n (x) phi)(A)`` for ``A`` in M_n(M_p); result in M_n(M_m)."""
    A = as_matrix(A)
    p, m = phi.p, phi.m
    if A.shape != (n * p, n * p):
        raise DimensionError(f"input is {A.shape}, expected ({n*p}, {n*p})")
    C = phi.choi.data.reshape(p, m, p, m)
    out = np.einsum("aibj,irjs->arbs", A.reshape(n, p, n, p), C)
    return out.reshape(n * m, n * m)


def gamma(X) -> FunctionalRep:
    """The functional ``a -> sum_ij X[i, j] a[i, j]`` on M_n.

    ``gamma(I_n)`` is the trace and ``gamma(E_ij)`` is the coordinate
    functional picking out entry ``(i, j)``.
    """
    X = as_matrix(X)
    if X.shape[0] != X.shape[1]:
        raise DimensionError(f"gamma needs a square matrix, got {X.shape}")
    n = X.shape[0]
    return FunctionalRep(n, 1, BipartiteOperator(n, 1, X))


def dual_channel(phi: ChannelRep) -> ChannelRep:
    """The adjoint of ``phi`` under the bilinear trace pairing.

    ``sum(Y * phi(X)) == sum(dual(Y) * X)`` for all X, Y.  Its Choi matrix is
    the Choi matrix of ``phi`` with the two tensor factors swapped.
    """
    p, m = phi.p, phi.m
    C = phi.choi.data.reshape(p, m, p, m).transpose(1, 0, 3, 2).reshape(p * m, p * m)
    return ChannelRep(m, p, BipartiteOperator(m, p, C))


def _density_of(f) -> np.ndarray:
    if isinstance(f, FunctionalRep):
        return f.density.data
    if isinstance(f, BipartiteOperator):
        return f.data
    return as_matrix(f)


def pairing(f, A) -> complex:
    """Bilinear evaluation ``sum_{x,y} rho[x, y] * A[x, y] = tr(rho A^T)``.

    Both arguments accept plain arrays as well as the wrapper classes;
    ``f`` may also be a :class:`FunctionalRep`.
    """
    rho = _density_of(f)
    Ad = A.data if isinstance(A, BipartiteOperator) else as_matrix(A)
    if rho.shape != Ad.shape:
        raise DimensionError(f"cannot pair {rho.shape} with {Ad.shape}")
    if isinstance(f, (FunctionalRep, BipartiteOperator)) and isinstance(A, BipartiteOperator):
        fn = f.n
        if (fn, f.m) != (A.n, A.m):
            raise DimensionError(f"functional on M_{fn}(M_{f.m}) paired with M_{A.n}(M_{A.m})")
    val = complex(np.sum(rho * Ad))
    return val


def functional_grid(G) -> np.ndarray:
    """Validate a functional grid ``G[k, l, x, y]``.

    Entry ``(k, l)`` of the grid is the functional ``a -> sum_xy G[k,l,x,y] a[x,y]``
    on M_r, so the grid is a linear map M_r -> M_{n,m}.
    """
    G = np.asarray(G, dtype=complex)
    if G.ndim != 4 or G.shape[2] != G.shape[3]:
        raise DimensionError(f"functional grid must have shape (n, m, r, r), got {G.shape}")
    return G


def apply_grid(G, v, p: int, q: int) -> np.ndarray:
    """``phi^{(p,q)}(v)`` for ``v`` in M_{p,q}(M_r); result in M_{p,q}(M_{n,m}).

    The result has composite row index ``a*n + k`` and column ``b*m + l``.
    """
    G = functional_grid(G)
    n, m, r, _ = G.shape
    v = v.data if isinstance(v, BipartiteOperator) else as_matrix(v)
    if v.shape != (p * r, q * r):
        raise DimensionError(f"v has shape {v.shape}, expected ({p*r}, {q*r})")
    out = np.einsum("klxy,axby->akbl", G, v.reshape(p, r, q, r))
    return out.reshape(p * n, q * m)


def eval_compressed(G, A, B, v) -> complex:
    """Evaluate ``F_{A^* phi B}(v) = vec(A)^* phi^{(p,q)}(v) vec(B)``.

    Parameters
    ----------
    G : array, shape (n, m, r, r)
        Functional grid (see :func:`functional_grid`).
    A : array, shape (n, p)
    B : array, shape (m, q)
    v : BipartiteOperator or array of shape (p*r, q*r)
        Element of M_{p,q}(M_r).
    """
    G = functional_grid(G)
    n, m, r, _ = G.shape
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape[0] != n or B.shape[0] != m:
        raise DimensionError(f"A must have {n} rows and B {m} rows")
    p, q = A.shape[1], B.shape[1]
    Phi = apply_grid(G, v, p, q)
    return complex(vec(A).conj() @ Phi @ vec(B))
