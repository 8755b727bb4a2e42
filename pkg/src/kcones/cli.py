"""Command-line interface: ``kcones <command> [options]``.

Commands
--------
schmidt         Schmidt decomposition of a vector in C^n (x) C^m.
cone            k-minimal / k-maximal cone membership of an operator.
kpeb            k-PEB test (or full audit) of a channel given by its Choi matrix.
norm            k-minimal order norm of a square matrix.
duality-audit   Random pairing checks between the cones and their duals.

Exit codes: 0 member / success, 1 not_member (or a rejected certificate
under ``--verify-certificate``), 2 malformed input, 3 dimension mismatch or
non-Hermitian input, 4 inconclusive, 5 duality violation or audit
disagreement.

Reports are JSON with sorted keys; rerunning a command with the same
arguments gives a byte-identical report.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

import numpy as np

from . import choi as _choi
from . import serialization as ser
from ._random import stream
from .choi import ChannelRep, FunctionalRep
from .cones import (
    INCONCLUSIVE,
    MEMBER,
    NOT_MEMBER,
    _decomposition_ok,
    _rank_one_witness,
    certificate_from_json,
    certify_block_positive,
    in_kmax_cone,
    in_kmin_cone,
    in_qkmax_dual,
    make_qkmin_element,
    reduction_map,
    verify_certificate,
)
from .kpeb import is_kpeb, kpeb_audit
from .linalg import (
    BipartiteOperator,
    DimensionError,
    NotHermitianError,
    NotPSDError,
    complex_normal,
    hermitian_part,
    schmidt_decompose,
)
from .norms import k_min_norm

EXIT_OK = 0
EXIT_NOT_MEMBER = 1
EXIT_MALFORMED = 2
EXIT_DIMENSION = 3
EXIT_INCONCLUSIVE = 4
EXIT_VIOLATION = 5

_STATUS_EXIT = {MEMBER: EXIT_OK, NOT_MEMBER: EXIT_NOT_MEMBER, INCONCLUSIVE: EXIT_INCONCLUSIVE}

PAIRING_FLOOR = -1e-9


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ser.FormatError(f"cannot read {path}: {exc}") from None
    if not text.strip():
        raise ser.FormatError(f"{path} is empty")
    return ser.loads(text)


def _emit(report, out: str | None) -> None:
    text = ser.dumps(report)
    if out is None:
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".kcones-", suffix=".json")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, out)


def _verify_from_report(A, args, cone):
    report = _read_json(args.verify_certificate)
    if not isinstance(report, dict) or "status" not in report or "certificate" not in report:
        raise ser.FormatError("certificate report needs \"status\" and \"certificate\"")
    cert = certificate_from_json(report["certificate"])
    ok = verify_certificate(A, {"status": report["status"], "certificate": cert}, args.k,
                            cone=cone, tol=args.tol)
    out = {"cone": cone, "k": args.k, "status": report["status"], "valid": bool(ok)}
    _emit(out, args.out)
    return EXIT_OK if ok else EXIT_NOT_MEMBER


# ---------------------------------------------------------------------------
# commands


def cmd_schmidt(args) -> int:
    d = _read_json(args.input)
    if not isinstance(d, dict):
        raise ser.FormatError("expected a JSON object")
    body = d.get("vector", d)
    u = ser.vector_from_json(body)
    n = args.n if args.n is not None else d.get("n")
    m = args.m if args.m is not None else d.get("m")
    if n is None or m is None:
        raise DimensionError("factor dimensions n and m are required (flags or JSON keys)")
    sd = schmidt_decompose(u, int(n), int(m), tol=args.tol)
    report = {
        "n": int(n),
        "m": int(m),
        "rank": sd.rank,
        "coefficients": [float(c) for c in sd.coefficients],
        "left_vectors": ser.matrix_to_json(sd.left_vectors) if sd.rank else None,
        "right_vectors": ser.matrix_to_json(sd.right_vectors) if sd.rank else None,
    }
    _emit(report, args.out)
    return EXIT_OK


def _load_operator(path) -> BipartiteOperator:
    kind, n, m, M = ser.wrapped_from_json(_read_json(path))
    return BipartiteOperator(n, m, M)


def cmd_cone(args) -> int:
    A = _load_operator(args.input)
    if args.verify_certificate:
        return _verify_from_report(A, args, args.cone)
    fn = in_kmin_cone if args.cone == "kmin" else in_kmax_cone
    v = fn(A, args.k, tol=args.tol, budget=args.budget, seed=args.seed)
    report = v.to_json()
    report.update({"cone": args.cone, "k": args.k, "n": A.n, "m": A.m})
    _emit(report, args.out)
    return _STATUS_EXIT[v.status]


def cmd_kpeb(args) -> int:
    kind, p, m, C = ser.wrapped_from_json(_read_json(args.input), kinds=("channel",))
    phi = ChannelRep(p, m, BipartiteOperator(p, m, C))
    if args.verify_certificate:
        return _verify_from_report(phi.choi, args, "kmax")
    if args.audit:
        rep = kpeb_audit(phi, args.k, tol=args.tol, budget=args.budget, seed=args.seed)
        _emit(rep, args.out)
        if rep["disagreement"]:
            return EXIT_VIOLATION
        return _STATUS_EXIT[rep["iii"]["status"]]
    v = is_kpeb(phi, args.k, tol=args.tol, budget=args.budget, seed=args.seed)
    report = v.to_json()
    report.update({"k": args.k, "p": p, "m": m})
    _emit(report, args.out)
    return _STATUS_EXIT[v.status]


def cmd_norm(args) -> int:
    d = _read_json(args.input)
    if isinstance(d, dict) and "matrix" in d:
        d = d["matrix"]
    v = ser.matrix_from_json(d)
    if v.shape[0] != v.shape[1]:
        raise DimensionError(f"expected a square matrix, got {v.shape[0]}x{v.shape[1]}")
    est = k_min_norm(v, args.k, budget=args.budget, seed=args.seed)
    report = est.to_json()
    report["k"] = args.k
    _emit(report, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# duality audit


def _kmin_sample(n, m, k, rng, t):
    """A certified k-block-positive operator in M_n(M_m), unit Frobenius norm."""
    d = n * m
    kind = t % 4
    if kind == 0:
        a = complex_normal(rng, d)
        A = np.outer(a, a.conj())
    elif kind == 1:
        A = _rank_one_witness(complex_normal(rng, d), n, m, k)
    elif kind == 2 and m * k > 1:
        q = complex_normal(rng, d)
        A = reduction_map(np.outer(q, q.conj()), n, m, k)
    else:
        G = complex_normal(rng, d, d)
        A = hermitian_part(G)
        margin, _ = certify_block_positive(A, n, m, k)
        A = A - min(margin, 0.0) * np.eye(d)
    A = hermitian_part(A)
    return A / np.linalg.norm(A)


def _random_cp(m, k, rng):
    count = int(rng.integers(1, 3))
    return ChannelRep.from_kraus([complex_normal(rng, k, m) for _ in range(count)])


def duality_audit(n: int, m: int, k: int, trials: int, seed: int = 0, tol: float = 1e-9) -> dict:
    """Check both cone dualities on ``trials`` random pairs each.

    kmin side: ``pairing(f, A) >= floor`` for f built by
    :func:`make_qkmin_element` and A certified k-block-positive.
    kmax side: ``pairing(F, A) >= floor`` for F accepted by
    :func:`in_qkmax_dual` and A with a Schmidt-rank-k decomposition.
    """
    report = {"n": n, "m": m, "k": k, "trials": trials, "floor": PAIRING_FLOOR}
    violation = None

    worst, checked = np.inf, 0
    for t in range(trials):
        rng = stream(seed, 20, t)
        A = _kmin_sample(n, m, k, rng, t)
        if in_kmin_cone(A, k, n=n, m=m, tol=tol, budget=4, seed=seed).status != MEMBER:
            continue
        q = int(rng.integers(1, 3))
        X = complex_normal(rng, q * k, n)
        f = make_qkmin_element(X, [_random_cp(m, k, rng) for _ in range(q)], n, m, k)
        rho = f.density.data / np.linalg.norm(f.density.data)
        val = float(_choi.pairing(rho, A).real)
        checked += 1
        worst = min(worst, val)
        if val < PAIRING_FLOOR and violation is None:
            violation = {"side": "kmin", "trial": t, "pairing": val,
                         "functional": rho, "operator": A}
    report["kmin_dual"] = {"checked": checked, "min_pairing": float(worst)}

    worst, checked = np.inf, 0
    for t in range(trials):
        rng = stream(seed, 21, t)
        F = FunctionalRep(n, m, BipartiteOperator(n, m, _kmin_sample(n, m, k, rng, t)))
        if in_qkmax_dual(F, k, tol=tol, budget=4, seed=seed).status != MEMBER:
            continue
        terms = int(rng.integers(1, 4))
        W = np.array([(complex_normal(rng, n, k) @ complex_normal(rng, k, m)).reshape(-1)
                      for _ in range(terms)]).T
        A = W @ W.conj().T
        scale = np.linalg.norm(A)
        A, W = A / scale, W / np.sqrt(scale)
        err, ok = _decomposition_ok(W, A, n, m, k, tol)
        if not ok or err > 1e-8:
            continue
        val = float(_choi.pairing(F.density.data, A).real)
        checked += 1
        worst = min(worst, val)
        if val < PAIRING_FLOOR and violation is None:
            violation = {"side": "kmax", "trial": t, "pairing": val,
                         "functional": F.density.data, "operator": A}
    report["kmax_dual"] = {"checked": checked, "min_pairing": float(worst)}
    report["pass"] = violation is None
    report["violation"] = violation
    return report


def cmd_duality_audit(args) -> int:
    rep = duality_audit(args.n, args.m, args.k, args.trials, seed=args.seed, tol=args.tol)
    _emit(rep, args.out)
    return EXIT_OK if rep["pass"] else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# parser


def _positive_float(s):
    x = float(s)
    if not x > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def _positive_int(s):
    x = int(s)
    if x < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return x


def _seed(s):
    x = int(s)
    if not 0 <= x < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return x


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive_float, default=1e-9, help="numerical tolerance (default 1e-9)")
    common.add_argument("--budget", type=_positive_int, default=32, help="random restarts (default 32)")
    common.add_argument("--seed", type=_seed, default=0, help="64-bit seed (default 0)")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")

    parser = argparse.ArgumentParser(prog="kcones", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schmidt", parents=[common], help="Schmidt decomposition of a vector")
    p.add_argument("input")
    p.add_argument("--n", type=_positive_int)
    p.add_argument("--m", type=_positive_int)
    p.set_defaults(func=cmd_schmidt)

    p = sub.add_parser("cone", parents=[common], help="cone membership of an operator")
    p.add_argument("input")
    p.add_argument("--cone", choices=["kmin", "kmax"], default="kmin")
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--verify-certificate", metavar="REPORT", default=None,
                   help="re-check the certificate in REPORT instead of searching")
    p.set_defaults(func=cmd_cone)

    p = sub.add_parser("kpeb", parents=[common], help="k-PEB test of a channel")
    p.add_argument("input")
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--audit", action="store_true", help="cross-check the equivalent characterizations")
    p.add_argument("--verify-certificate", metavar="REPORT", default=None)
    p.set_defaults(func=cmd_kpeb)

    p = sub.add_parser("norm", parents=[common], help="k-minimal order norm")
    p.add_argument("input")
    p.add_argument("--k", type=_positive_int, required=True)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("duality-audit", parents=[common], help="random duality checks")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--trials", type=_positive_int, default=100)
    p.set_defaults(func=cmd_duality_audit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ser.FormatError as exc:
        print(f"kcones: malformed input: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except (DimensionError, NotHermitianError, NotPSDError) as exc:
        print(f"kcones: {exc}", file=sys.stderr)
        return EXIT_DIMENSION


if __name__ == "__main__":
    sys.exit(main())
