"""Positivity of linear maps between matrix algebras.

A map phi: M_p -> M_m is k-positive when ``id_k (x) phi`` preserves
positivity.  In terms of the Choi matrix C this is k-block-positivity of C:
``<u, C u> >= 0`` for every u in C^p (x) C^m of Schmidt rank at most k, so
the test reuses :func:`kcones.cones.in_kmin_cone`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import serialization as ser
from ._random import stream
from .choi import ChannelRep, choi_of_map
from .cones import DEFAULT_BUDGET, INCONCLUSIVE, MEMBER, NOT_MEMBER, in_kmin_cone
from .linalg import (
    DEFAULT_TOL,
    BipartiteOperator,
    NotPSDError,
    complex_normal,
    hermitian_part,
    inv_sqrt_psd,
    is_psd,
)


@dataclass
class PositivityVerdict:
    """Result of a positivity test on a map.

    ``certificate`` is a violating vector u in C^p (x) C^m for
    ``not_member`` (with ``<u, C u> = margin < -tol``), or the certificate
    dict of the underlying cone test otherwise.
    """

    status: str
    margin: float
    certificate: object = None
    restarts_used: int = 0

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "margin": float(self.margin),
            "certificate": ser.to_jsonable(self.certificate),
            "restarts_used": int(self.restarts_used),
        }


def is_cp(phi: ChannelRep, tol: float = DEFAULT_TOL) -> PositivityVerdict:
    """Complete positivity via the Choi matrix (exact)."""
    chk = is_psd(phi.choi.data, tol)
    if chk.is_psd:
        return PositivityVerdict(MEMBER, chk.min_eigenvalue, {"type": "psd"})
    return PositivityVerdict(NOT_MEMBER, chk.min_eigenvalue, chk.witness)


def is_k_positive(
    phi: ChannelRep,
    k: int,
    tol: float = DEFAULT_TOL,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
) -> PositivityVerdict:
    """Decide k-positivity of ``phi``.

    For ``k >= min(p, m)`` this is :func:`is_cp`.  Below that, certified
    lower bounds are tried first and then a restarted alternating search for
    a violating vector of Schmidt rank <= k (see
    :func:`kcones.cones.in_kmin_cone`).

    Examples
    --------
    >>> from kcones.choi import choi_of_map
    >>> T = choi_of_map(lambda X: X.T, 2, 2)
    >>> is_k_positive(T, 1).status, is_k_positive(T, 2).status
    ('member', 'not_member')
    """
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    if k >= min(phi.p, phi.m):
        return is_cp(phi, tol)
    v = in_kmin_cone(phi.choi, int(k), tol=tol, budget=budget, seed=seed)
    if v.status == NOT_MEMBER:
        return PositivityVerdict(NOT_MEMBER, v.margin, v.certificate["u"], v.budget_spent)
    return PositivityVerdict(v.status, v.margin, v.certificate, v.budget_spent)


def ampliate_test(phi: ChannelRep, P, k: int) -> float:
    """Smallest eigenvalue of ``(id_k (x) phi)(P)`` for P in M_k(M_p)."""
    from .choi import apply_ampliated

    out = apply_ampliated(phi, P, k)
    return float(np.linalg.eigvalsh(hermitian_part(out))[0])


def diagonalize_positive_map(phi: ChannelRep, tol: float = DEFAULT_TOL):
    """Rotate a positive map so that it sends the unit to a diagonal matrix.

    Returns ``(U, r, psi)`` with ``psi(X) = U^* phi(X) U``,
    ``psi(I_p) = diag(d_1, ..., d_r, 0, ..., 0)`` with ``d_1 >= ... >= d_r > tol``
    and ``r`` the rank of ``phi(I_p)``.
    """
    P = phi(np.eye(phi.p))
    chk = is_psd(P, tol)
    if not chk.is_psd:
        raise NotPSDError(f"phi(I) is not PSD (min eigenvalue {chk.min_eigenvalue:.3g})")
    w, U = np.linalg.eigh(hermitian_part(P))
    order = np.argsort(-w, kind="stable")
    w, U = w[order], U[:, order]
    r = int(np.sum(w > tol))
    IU = np.kron(np.eye(phi.p), U)
    C = IU.conj().T @ phi.choi.data @ IU
    return U, r, ChannelRep(phi.p, phi.m, BipartiteOperator(phi.p, phi.m, C))


def sample_unital_k_cp(m: int, k: int, kraus_count: int | None = None, seed: int = 0) -> ChannelRep:
    """Random unital CP map M_m -> M_k.

    Draws Gaussian ``K_i`` of shape (k, m), then renormalizes
    ``K_i <- Q^{-1/2} K_i`` with ``Q = sum_i K_i K_i^*`` so that
    ``sum_i K_i K_i^* = I_k``.  ``kraus_count`` defaults to ``k * m``.
    """
    if m < 1 or k < 1:
        raise ValueError("dimensions must be positive")
    kraus_count = k * m if kraus_count is None else int(kraus_count)
    if kraus_count < 1:
        raise ValueError("kraus_count must be positive")
    for attempt in range(100):
        rng = stream(seed, 5, attempt)
        K = [complex_normal(rng, k, m) for _ in range(kraus_count)]
        Q = sum(Ki @ Ki.conj().T for Ki in K)
        try:
            R = inv_sqrt_psd(Q, 1e-10)
        except np.linalg.LinAlgError:
            continue
        return ChannelRep.from_kraus([R @ Ki for Ki in K])
    raise np.linalg.LinAlgError("could not draw a nonsingular Kraus set")


def kraus_from_choi(phi: ChannelRep, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    """Kraus operators ``K_i`` (shape (m, p)) with ``phi(X) = sum K_i X K_i^*``.

    One operator per eigenvalue of the Choi matrix above ``tol``.
    """
    C = phi.choi.data
    chk = is_psd(C, tol)
    if not chk.is_psd:
        raise NotPSDError(f"Choi matrix is not PSD (min eigenvalue {chk.min_eigenvalue:.3g})")
    w, V = np.linalg.eigh(hermitian_part(C))
    out = []
    for lam, c in zip(w[::-1], V[:, ::-1].T):
        if lam <= tol:
            break
        out.append((np.sqrt(lam) * c).reshape(phi.p, phi.m).T.copy())
    return out


def identity_channel(d: int) -> ChannelRep:
    return choi_of_map(lambda X: X, d, d)


def transpose_channel(d: int) -> ChannelRep:
    return choi_of_map(lambda X: X.T, d, d)


def depolarizing_channel(p: int, m: int | None = None) -> ChannelRep:
    """``X -> tr(X) I_m / m``."""
    m = p if m is None else m
    return choi_of_map(lambda X: np.trace(X) * np.eye(m) / m, p, m)


def conjugation_channel(A) -> ChannelRep:
    """``X -> A^* X A`` for ``A`` of shape (p, m)."""
    A = np.asarray(A, dtype=complex)
    return ChannelRep.from_kraus([A.conj().T])


__all__ = [
    "PositivityVerdict",
    "is_cp",
    "is_k_positive",
    "ampliate_test",
    "diagonalize_positive_map",
    "sample_unital_k_cp",
    "kraus_from_choi",
    "identity_channel",
    "transpose_channel",
    "depolarizing_channel",
    "conjugation_channel",
    "INCONCLUSIVE",
]
