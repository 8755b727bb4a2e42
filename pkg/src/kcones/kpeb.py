"""k-partially entanglement breaking (k-PEB) channels.

A CP map phi: M_p -> M_m is k-PEB when ``s o (id_n (x) phi)`` has Schmidt
number at most k for every state s and every n.  The following are
equivalent and are all exercised here:

* the Choi matrix of phi has Schmidt number <= k (:func:`is_kpeb`);
* ``phi(X) = sum_l A_l^* X A_l`` with every ``A_l`` (p x m) of rank <= k
  (a ``rank_kraus`` form);
* ``phi(X) = sum_l M_l psi_l(X) M_l^*`` with ``M_l`` (m x k) and CP maps
  ``psi_l: M_p -> M_k`` (a ``sandwich`` form);
* composing phi with any state gives a state of Schmidt number <= k;
* ``id_n (x) phi`` sends every k-block-positive operator to a PSD one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import serialization as ser
from ._random import stream
from .choi import ChannelRep, FunctionalRep, apply_ampliated
from .cones import (
    DEFAULT_BUDGET,
    INCONCLUSIVE,
    MEMBER,
    NOT_MEMBER,
    ConeVerdict,
    _rank_one_witness,
    certify_block_positive,
    in_kmax_cone,
    reduction_map,
)
from .linalg import (
    DEFAULT_TOL,
    BipartiteOperator,
    DimensionError,
    NotPSDError,
    as_matrix,
    complex_normal,
    hermitian_part,
    is_psd,
)
from .maps import is_cp, kraus_from_choi


@dataclass
class KpebForm:
    """An explicit k-PEB representation of a channel.

    ``variant == "rank_kraus"``: ``ops`` is a list of ``A_l`` of shape
    (p, m) and the channel is ``X -> sum_l A_l^* X A_l``.

    ``variant == "sandwich"``: ``ops`` is a list of pairs ``(M_l, psi_l)``
    with ``M_l`` of shape (m, k) and ``psi_l`` a CP :class:`ChannelRep`
    M_p -> M_k; the channel is ``X -> sum_l M_l psi_l(X) M_l^*``.
    """

    variant: str
    k: int
    ops: list = field(default_factory=list)

    def __post_init__(self):
        if self.variant not in ("rank_kraus", "sandwich"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.k < 1:
            raise ValueError("k must be at least 1")

    def validate(self, tol: float = DEFAULT_TOL) -> None:
        """Raise ``ValueError`` when a rank or CP invariant fails."""
        if self.variant == "rank_kraus":
            for i, A in enumerate(self.ops):
                s = np.linalg.svd(as_matrix(A), compute_uv=False)
                if np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)) > self.k:
                    raise ValueError(f"operator {i} has rank above k={self.k}")
        else:
            for i, (M, psi) in enumerate(self.ops):
                if as_matrix(M).shape[1] != self.k or psi.m != self.k:
                    raise DimensionError(f"term {i} does not pass through M_{self.k}")
                if is_cp(psi, tol).status != MEMBER:
                    raise ValueError(f"psi_{i} is not completely positive")

    def to_json(self) -> dict:
        if self.variant == "rank_kraus":
            ops = [ser.matrix_to_json(A) for A in self.ops]
        else:
            ops = []
            for M, psi in self.ops:
                ops.append(ser.matrix_to_json(M))
                ops.append(ser.matrix_to_json(psi.choi.data))
        return {"variant": self.variant, "k": int(self.k), "ops": ops}

    @classmethod
    def from_json(cls, d: dict, p: int | None = None) -> "KpebForm":
        if not isinstance(d, dict) or "variant" not in d or "k" not in d or "ops" not in d:
            raise ser.FormatError('KpebForm JSON needs "variant", "k" and "ops"')
        k = d["k"]
        mats = [ser.matrix_from_json(o) for o in d["ops"]]
        if d["variant"] == "rank_kraus":
            return cls("rank_kraus", k, mats)
        if len(mats) % 2:
            raise ser.FormatError("sandwich ops must alternate M_l and Choi(psi_l)")
        ops = []
        for M, C in zip(mats[::2], mats[1::2]):
            pp = C.shape[0] // k
            ops.append((M, ChannelRep.from_choi(C, pp, k)))
        return cls("sandwich", k, ops)


def build_kpeb(form: KpebForm, p: int, m: int, tol: float = DEFAULT_TOL) -> ChannelRep:
    """The channel represented by ``form``; raises when the form is invalid."""
    form.validate(tol)
    C = np.zeros((p * m, p * m), dtype=complex)
    if form.variant == "rank_kraus":
        for A in form.ops:
            A = as_matrix(A)
            if A.shape != (p, m):
                raise DimensionError(f"operator has shape {A.shape}, expected ({p}, {m})")
            c = A.conj().reshape(p * m)  # Kraus A^*: c[(i,r)] = conj(A[i, r])
            C += np.outer(c, c.conj())
    else:
        for M, psi in form.ops:
            M = as_matrix(M)
            if M.shape != (m, form.k) or psi.p != p:
                raise DimensionError("sandwich term does not conform")
            IM = np.kron(np.eye(p), M)
            C += IM @ psi.choi.data @ IM.conj().T
    return ChannelRep(p, m, BipartiteOperator(p, m, C))


def form_from_decomposition(W, p: int, m: int, k: int) -> KpebForm:
    """``rank_kraus`` form from Choi vectors ``w_l`` (columns of ``W``)."""
    W = as_matrix(W) if np.size(W) else np.zeros((p * m, 0))
    return KpebForm("rank_kraus", k, [W[:, l].reshape(p, m).conj() for l in range(W.shape[1])])


def convert_form(form: KpebForm, tol: float = DEFAULT_TOL) -> KpebForm:
    """Switch between the ``rank_kraus`` and ``sandwich`` variants.

    ``sandwich -> rank_kraus``: every Kraus operator ``K_j`` of ``psi_l``
    gives ``A = (M_l K_j)^* = B_j M_l^*`` with ``B_j = K_j^*``.

    ``rank_kraus -> sandwich``: a truncated SVD ``A = B M~`` with
    ``B = U_k S_k`` (p x k) and ``M~ = V_k^*`` (k x m) gives the term
    ``M = M~^*`` with ``psi(X) = B^* X B``.
    """
    k = form.k
    if form.variant == "sandwich":
        ops = []
        for M, psi in form.ops:
            M = as_matrix(M)
            for K in kraus_from_choi(psi, tol):
                ops.append(K.conj().T @ M.conj().T)
        return KpebForm("rank_kraus", k, ops)
    terms = []
    for i, A in enumerate(form.ops):
        A = as_matrix(A)
        p, m = A.shape
        U, s, Vh = np.linalg.svd(A, full_matrices=False)
        if s.size > k and s[k] > tol * max(1.0, s[0]):
            raise ValueError(f"operator {i} has numerical rank above k={k}")
        r = min(k, s.size)
        B = np.zeros((p, k), dtype=complex)
        Mt = np.zeros((k, m), dtype=complex)
        B[:, :r] = U[:, :r] * s[:r]
        Mt[:r] = Vh[:r]
        psi = ChannelRep.from_kraus([B.conj().T])
        terms.append((Mt.conj().T, psi))
    return KpebForm("sandwich", k, terms)


def is_kpeb(
    phi: ChannelRep,
    k: int,
    tol: float = DEFAULT_TOL,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
) -> ConeVerdict:
    """k-PEB test: Schmidt number of the Choi matrix at most ``k``.

    A ``member`` verdict carries, besides the Choi decomposition, an explicit
    ``rank_kraus`` form under ``certificate["form"]``.
    """
    v = in_kmax_cone(phi.choi, k, tol=tol, budget=budget, seed=seed)
    if v.status == MEMBER:
        v.certificate["form"] = form_from_decomposition(v.certificate["vectors"], phi.p, phi.m, k)
    return v


def compose_state_channel(s, phi: ChannelRep) -> FunctionalRep:
    """The functional ``s o (id_n (x) phi)`` on M_n (x) M_p.

    ``rho'[(i,x),(j,y)] = sum_{r,t} rho_s[(i,r),(j,t)] C_phi[(x,r),(y,t)]``.
    """
    if not isinstance(s, FunctionalRep):
        raise DimensionError("expected a FunctionalRep")
    n, m = s.n, s.m
    if m != phi.m:
        raise DimensionError(f"state is on M_{n} (x) M_{m} but the channel outputs M_{phi.m}")
    p = phi.p
    rho = s.density.data.reshape(n, m, n, m)
    C = phi.choi.data.reshape(p, m, p, m)
    out = np.einsum("irjt,xryt->ixjy", rho, C).reshape(n * p, n * p)
    return FunctionalRep(n, p, BipartiteOperator(n, p, out))


def is_k_separable_state(
    rho,
    k: int,
    tol: float = DEFAULT_TOL,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    strategies: tuple[str, ...] = ("decompose", "witness"),
) -> ConeVerdict:
    """Is the (unnormalized) state of Schmidt number at most ``k``?"""
    dens = rho.density if isinstance(rho, FunctionalRep) else rho
    data = dens.data if isinstance(dens, BipartiteOperator) else as_matrix(dens)
    chk = is_psd(data, tol)
    if not chk.is_psd:
        raise NotPSDError(f"density is not PSD (min eigenvalue {chk.min_eigenvalue:.3g})")
    return in_kmax_cone(dens, k, tol=tol, budget=budget, seed=seed, strategies=strategies)


def _pure_state(v, n, m):
    v = v / np.linalg.norm(v)
    return FunctionalRep(n, m, BipartiteOperator(n, m, np.outer(v, v.conj())))


def _audit_states(n, m, trials, seed):
    d = min(n, m)
    me = np.zeros((n, m), dtype=complex)
    me[np.arange(d), np.arange(d)] = 1.0
    yield _pure_state(me.reshape(-1), n, m)
    for t in range(trials):
        yield _pure_state(complex_normal(stream(seed, 6, n, t), n * m), n, m)


def _kmin_samples(n, p, k, trials, seed):
    """Certified k-block-positive operators in M_n(M_p)."""
    d = n * p
    dd = min(n, p)
    me = np.zeros((n, p), dtype=complex)
    me[np.arange(dd), np.arange(dd)] = 1.0
    hs = [me.reshape(-1)] + [complex_normal(stream(seed, 7, n, t), d) for t in range(trials)]
    for h in hs:
        yield "rank_one", _rank_one_witness(h, n, p, k)
        if p * k > 1:
            yield "reduction", reduction_map(np.outer(h, h.conj()), n, p, k)
    for t in range(trials):
        G = complex_normal(stream(seed, 8, n, t), d, d)
        yield "psd", G @ G.conj().T / d


def kpeb_audit(
    phi: ChannelRep,
    k: int,
    tol: float = DEFAULT_TOL,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    trials: int | None = None,
) -> dict:
    """Cross-check equivalent characterizations of k-PEB on one channel.

    Sides
    -----
    ``iii``
        :func:`is_kpeb` (certificate-backed in both directions).
    ``ii``
        Compose phi with the maximally entangled and ``trials`` random pure
        states on M_n (x) M_m, n = 1..k+1, and search for a certified witness
        of Schmidt number > k.  It can refute but never certify, so its
        status is ``member`` whenever nothing was refuted.
    ``i``
        Apply ``id_n (x) phi`` to certified k-block-positive operators and
        test the image for positivity.  Refutes only.

    ``disagreement`` is true when one side reports ``member`` and another
    ``not_member``.
    """
    trials = max(1, budget // 4) if trials is None else trials
    report: dict = {"k": int(k), "p": phi.p, "m": phi.m}
    v3 = is_kpeb(phi, k, tol=tol, budget=budget, seed=seed)
    report["iii"] = {"status": v3.status, "margin": float(v3.margin)}

    refuted = None
    checked = 0
    for n in range(1, k + 2):
        for s in _audit_states(n, phi.m, trials, seed):
            rho = compose_state_channel(s, phi)
            checked += 1
            if k >= min(n, phi.p):
                continue
            v = is_k_separable_state(rho, k, tol=tol, budget=max(1, budget // 8), seed=seed,
                                     strategies=("witness",))
            if v.status == NOT_MEMBER:
                refuted = {"n": n, "pairing": float(v.margin)}
                break
        if refuted:
            break
    report["ii"] = {
        "status": NOT_MEMBER if refuted else MEMBER,
        "certified": bool(refuted),
        "states_checked": checked,
        "refutation": refuted,
    }

    refuted = None
    checked = 0
    for n in range(1, k + 2):
        for kind, X in _kmin_samples(n, phi.p, k, trials, seed):
            margin, _ = certify_block_positive(X, n, phi.p, k, tol)
            if margin < -tol:
                continue  # not certified; skip rather than trust
            checked += 1
            out = hermitian_part(apply_ampliated(phi, X, n))
            lam = float(np.linalg.eigvalsh(out)[0])
            if lam < -tol * max(1.0, float(np.abs(out).max())):
                refuted = {"n": n, "sample": kind, "min_eigenvalue": lam}
                break
        if refuted:
            break
    report["i"] = {
        "status": NOT_MEMBER if refuted else MEMBER,
        "certified": bool(refuted),
        "samples_checked": checked,
        "refutation": refuted,
    }

    statuses = {report[s]["status"] for s in ("i", "ii", "iii")}
    report["disagreement"] = MEMBER in statuses and NOT_MEMBER in statuses
    report["inconclusive"] = INCONCLUSIVE in statuses
    return report


def random_kpeb_form(p: int, m: int, k: int, terms: int, seed: int, variant: str = "sandwich") -> KpebForm:
    """A random valid form (used by tests and the benchmark)."""
    rng = stream(seed, 9)
    if variant == "rank_kraus":
        ops = [complex_normal(rng, p, k) @ complex_normal(rng, k, m) for _ in range(terms)]
        return KpebForm("rank_kraus", k, ops)
    ops = []
    for _ in range(terms):
        M = complex_normal(rng, m, k)
        K = complex_normal(rng, k, p)
        ops.append((M, ChannelRep.from_kraus([K])))
    return KpebForm("sandwich", k, ops)
