"""Dense complex linear algebra on bipartite spaces.

Index convention used throughout the package: an element of M_n(M_m) is an
``(n*m, n*m)`` array whose composite row index is ``i*m + r`` (left factor
outer, 0-based).  This is exactly the layout of ``np.kron(E_ij, b)``, so
``block(i, j)`` is the ``m x m`` sub-array at rows ``i*m:(i+1)*m``.

Vectors in C^n (x) C^m use the same composite index, so ``np.kron(u, v)``
is the product vector u (x) v.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

DEFAULT_TOL = 1e-9


class DimensionError(ValueError):
    """Operand shapes do not conform."""


class NotHermitianError(ValueError):
    """A self-adjoint operand was required."""


class NotPSDError(ValueError):
    """A positive semidefinite operand was required."""


def as_matrix(x) -> np.ndarray:
    a = np.asarray(x, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d array, got shape {a.shape}")
    return a


def as_vector(x) -> np.ndarray:
    a = np.asarray(x, dtype=complex)
    if a.ndim == 2 and 1 in a.shape:
        a = a.reshape(-1)
    if a.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {a.shape}")
    return a


def hermitian_defect(M: np.ndarray) -> float:
    """Max-entry norm of ``M - M^*``."""
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(M - M.conj().T)))


def require_hermitian(M: np.ndarray, tol: float = DEFAULT_TOL) -> None:
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    d = hermitian_defect(M)
    if d > tol:
        raise NotHermitianError(f"matrix is not Hermitian (max |M - M*| = {d:.3g})")


def hermitian_part(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.conj().T)


@dataclass(frozen=True)
class BipartiteOperator:
    """An element of M_n(M_m) stored as an ``(n*m, n*m)`` complex array."""

    n: int
    m: int
    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if self.n < 1 or self.m < 1:
            raise DimensionError("factor dimensions must be positive")
        d = self.n * self.m
        if data.shape != (d, d):
            raise DimensionError(
                f"data has shape {data.shape}, expected ({d}, {d}) for n={self.n}, m={self.m}"
            )
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    def block(self, i: int, j: int) -> np.ndarray:
        """The ``m x m`` block in block-row ``i``, block-column ``j`` (0-based)."""
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(f"block ({i}, {j}) out of range for n={self.n}")
        m = self.m
        return self.data[i * m:(i + 1) * m, j * m:(j + 1) * m].copy()

    def blocks(self) -> np.ndarray:
        """All blocks as an ``(n, n, m, m)`` array."""
        return self.data.reshape(self.n, self.m, self.n, self.m).transpose(0, 2, 1, 3).copy()

    @classmethod
    def from_blocks(cls, blocks) -> "BipartiteOperator":
        b = np.asarray(blocks, dtype=complex)
        if b.ndim != 4 or b.shape[0] != b.shape[1] or b.shape[2] != b.shape[3]:
            raise DimensionError(f"expected (n, n, m, m) blocks, got {b.shape}")
        n, m = b.shape[0], b.shape[2]
        return cls(n, m, b.transpose(0, 2, 1, 3).reshape(n * m, n * m))

    @property
    def dim(self) -> int:
        return self.n * self.m

    def is_hermitian(self, tol: float = DEFAULT_TOL) -> bool:
        return hermitian_defect(self.data) <= tol

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.data, dtype=dtype)


def as_bipartite(a, n: int | None = None, m: int | None = None) -> BipartiteOperator:
    if isinstance(a, BipartiteOperator):
        if (n is not None and n != a.n) or (m is not None and m != a.m):
            raise DimensionError(f"operator is over M_{a.n}(M_{a.m}), expected M_{n}(M_{m})")
        return a
    if n is None or m is None:
        raise DimensionError("factor dimensions are required for a raw array")
    return BipartiteOperator(n, m, a)


# ---------------------------------------------------------------------------
# vec / unvec / associated matrix


def vec(X) -> np.ndarray:
    """Stack the columns of ``X`` (so ``vec(E_ij) = e_j (x) e_i``)."""
    X = as_matrix(X)
    if X.size == 0:
        raise DimensionError("vec of an empty matrix")
    return X.reshape(-1, order="F").copy()


def unvec(u, n: int, m: int) -> np.ndarray:
    """Inverse of :func:`vec` for an ``n x m`` matrix."""
    u = as_vector(u)
    if u.shape[0] != n * m:
        raise DimensionError(f"vector of length {u.shape[0]} cannot be unvec'd to {n}x{m}")
    return u.reshape((n, m), order="F").copy()


def assoc_matrix(U, n: int, m: int) -> np.ndarray:
    """The ``n x m`` matrix associated with ``U`` in C^n (x) C^m.

    Linear: ``u (x) v`` is sent to ``u v^T`` (equal to ``u v^*`` for real v).
    Its rank is the Schmidt rank of ``U`` and its singular values are the
    Schmidt coefficients.
    """
    U = as_vector(U)
    if U.shape[0] != n * m:
        raise DimensionError(f"vector of length {U.shape[0]} is not in C^{n} (x) C^{m}")
    return U.reshape(n, m).copy()


@dataclass(frozen=True)
class SchmidtDecomposition:
    """``U = sum_i coefficients[i] * left[:, i] (x) right[:, i]``."""

    coefficients: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.coefficients.shape[0])

    def reconstruct(self) -> np.ndarray:
        n = self.left_vectors.shape[0]
        m = self.right_vectors.shape[0]
        T = (self.left_vectors * self.coefficients) @ self.right_vectors.T
        return T.reshape(n * m)

    def terms(self) -> list[np.ndarray]:
        return [
            c * np.kron(self.left_vectors[:, i], self.right_vectors[:, i])
            for i, c in enumerate(self.coefficients)
        ]


def schmidt_decompose(U, n: int, m: int, tol: float = DEFAULT_TOL) -> SchmidtDecomposition:
    """Schmidt decomposition via the SVD of the associated matrix."""
    A = assoc_matrix(U, n, m)
    W, s, Vh = np.linalg.svd(A, full_matrices=False)
    r = int(np.sum(s > tol))
    # A = sum_i s_i w_i (Vh[i])^T with Vh rows orthonormal
    return SchmidtDecomposition(
        coefficients=s[:r].copy(),
        left_vectors=W[:, :r].copy(),
        right_vectors=Vh[:r, :].T.copy(),
    )


def schmidt_coefficients(U, n: int, m: int) -> np.ndarray:
    return np.linalg.svd(assoc_matrix(U, n, m), compute_uv=False)


def schmidt_rank(U, n: int, m: int, tol: float = DEFAULT_TOL) -> int:
    return int(np.sum(schmidt_coefficients(U, n, m) > tol))


def top_schmidt_weight(U, n: int, m: int, k: int) -> float:
    """Sum of the ``k`` largest squared Schmidt coefficients.

    This is ``max |<U, w>|^2`` over unit vectors w of Schmidt rank <= k.
    """
    s = schmidt_coefficients(U, n, m)
    return float(np.sum(s[:k] ** 2))


def truncate_schmidt(U, n: int, m: int, k: int) -> np.ndarray:
    """Best Schmidt-rank-``k`` approximation of ``U``."""
    W, s, Vh = np.linalg.svd(assoc_matrix(U, n, m), full_matrices=False)
    s = s.copy()
    s[k:] = 0.0
    return ((W * s) @ Vh).reshape(n * m)


# ---------------------------------------------------------------------------
# block operations


def block_congruence(X, a, Y, r: int | None = None) -> np.ndarray | BipartiteOperator:
    """``X a Y = (X (x) I_r) a (Y (x) I_r)`` for ``a`` in M_{n,q'}(M_r).

    ``a`` may be a :class:`BipartiteOperator` (then ``r = a.m``) or a raw
    ``(n*r, q'*r)`` array together with ``r``.  A square result is returned
    as a :class:`BipartiteOperator`, a rectangular one as an array.
    """
    X = as_matrix(X)
    Y = as_matrix(Y)
    if isinstance(a, BipartiteOperator):
        r = a.m
        data = a.data
    else:
        if r is None:
            raise DimensionError("block size r is required for a raw array")
        data = as_matrix(a)
    if data.shape[0] % r or data.shape[1] % r:
        raise DimensionError(f"array of shape {data.shape} is not blocked by {r}")
    nb_rows, nb_cols = data.shape[0] // r, data.shape[1] // r
    if X.shape[1] != nb_rows or Y.shape[0] != nb_cols:
        raise DimensionError(
            f"cannot form X a Y with X {X.shape}, a {nb_rows}x{nb_cols} blocks, Y {Y.shape}"
        )
    I = np.eye(r)
    out = np.kron(X, I) @ data @ np.kron(Y, I)
    if X.shape[0] == Y.shape[1]:
        return BipartiteOperator(X.shape[0], r, out)
    return out


def partial_transpose(A, n: int, m: int) -> np.ndarray:
    """Transpose the right tensor factor of ``A`` in M_n(M_m)."""
    A = as_matrix(A)
    if A.shape != (n * m, n * m):
        raise DimensionError(f"shape {A.shape} is not ({n*m}, {n*m})")
    return A.reshape(n, m, n, m).transpose(0, 3, 2, 1).reshape(n * m, n * m)


def partial_trace_right(A, n: int, m: int) -> np.ndarray:
    A = as_matrix(A)
    return np.einsum("irjr->ij", A.reshape(n, m, n, m))


def swap_operator(n: int, m: int | None = None) -> np.ndarray:
    """The flip ``x (x) y -> y (x) x`` from C^n (x) C^m to C^m (x) C^n."""
    m = n if m is None else m
    S = np.zeros((m * n, n * m), dtype=complex)
    for i in range(n):
        for r in range(m):
            S[r * n + i, i * m + r] = 1.0
    return S


def matrix_unit(n: int, m: int, i: int, j: int) -> np.ndarray:
    E = np.zeros((n, m), dtype=complex)
    E[i, j] = 1.0
    return E


def maximally_entangled_vector(d: int) -> np.ndarray:
    """``sum_i e_i (x) e_i / sqrt(d)``."""
    return np.eye(d, dtype=complex).reshape(d * d) / np.sqrt(d)


class PSDCheck(NamedTuple):
    is_psd: bool
    min_eigenvalue: float
    witness: np.ndarray


def is_psd(M, tol: float = DEFAULT_TOL) -> PSDCheck:
    """Positivity test: Hermitian within ``tol`` and smallest eigenvalue >= -tol."""
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    herm = hermitian_defect(M) <= tol
    w, V = np.linalg.eigh(hermitian_part(M))
    return PSDCheck(bool(herm and w[0] >= -tol), float(w[0]), V[:, 0].copy())


def psd_sqrt_frame(M, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Columns ``sqrt(lambda_i) v_i`` over eigenvalues above ``tol``."""
    w, V = np.linalg.eigh(hermitian_part(as_matrix(M)))
    keep = w > tol
    return V[:, keep][:, ::-1] * np.sqrt(w[keep][::-1])


def inv_sqrt_psd(Q, tol: float = 1e-12) -> np.ndarray:
    w, V = np.linalg.eigh(hermitian_part(Q))
    if w[0] <= tol * max(1.0, w[-1]):
        raise np.linalg.LinAlgError("matrix is numerically singular")
    return (V / np.sqrt(w)) @ V.conj().T


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    Q, R = np.linalg.qr(Z)
    ph = np.diag(R) / np.abs(np.diag(R))
    return Q * ph


def complex_normal(rng: np.random.Generator, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
