"""Exit criteria for the package.

Every test prints exactly one line ``PASS <id>: ...`` or ``FAIL <id>: ...``
(visible under ``pytest -s`` and in ``-v`` logs) and then asserts.
Run just this file with ``pytest -m acceptance -s``.
"""

import json

import numpy as np
import pytest

from kcones import cli
from kcones._random import stream
from kcones.choi import ChannelRep, choi_of_map
from kcones.cones import (
    MEMBER,
    NOT_MEMBER,
    _rank_one_witness,
    in_kmax_cone,
    in_kmin_cone,
    schmidt_number_bounds,
    verify_certificate,
)
from kcones.kpeb import build_kpeb, convert_form, is_kpeb, kpeb_audit, random_kpeb_form
from kcones.linalg import complex_normal, schmidt_decompose
from kcones.maps import depolarizing_channel, identity_channel, is_cp, is_k_positive
from kcones.norms import k_min_norm, ladder, op_norm
from kcones.serialization import matrix_to_json, vector_to_json, wrapped_to_json

from conftest import random_hermitian, random_psd, schmidt_rank_k_psd

pytestmark = pytest.mark.acceptance


def report(capsys, ident, ok, detail):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} {ident}: {detail}")
    assert ok, detail


def test_schmidt_reconstruction(capsys):
    worst_rec, worst_orth = 0.0, 0.0
    for t in range(500):
        rng = stream(1, t)
        n, m = (int(x) for x in rng.integers(1, 9, size=2))
        U = complex_normal(rng, n * m)
        sd = schmidt_decompose(U, n, m)
        rec = sum(sd.terms()) if sd.rank else np.zeros(n * m)
        worst_rec = max(worst_rec, float(np.linalg.norm(U - rec)))
        for V in (sd.left_vectors, sd.right_vectors):
            worst_orth = max(worst_orth, float(np.abs(V.conj().T @ V - np.eye(sd.rank)).max()))
    ok = worst_rec < 1e-10 and worst_orth < 1e-10
    report(capsys, "schmidt_reconstruction",
           ok, f"500 vectors, max residual {worst_rec:.2e}, max orthonormality defect {worst_orth:.2e}")


def test_k_positivity_oracle(capsys):
    mismatches = 0
    counts = {MEMBER: 0, NOT_MEMBER: 0}
    for t in range(100):
        rng = stream(2, t)
        p, m = (int(x) for x in rng.integers(1, 5, size=2))
        d = p * m
        C = random_psd(rng, d, rank=int(rng.integers(1, d + 1)))
        # shift some maps out of the CP cone and leave others inside
        C = C - rng.uniform(-0.5, 1.5) * np.linalg.eigvalsh(C)[0] * np.eye(d) - rng.uniform(0, 0.5) * np.eye(d)
        phi = ChannelRep.from_choi(C, p, m)
        got = is_k_positive(phi, min(p, m)).status
        want = is_cp(phi).status
        counts[want] += 1
        mismatches += got != want
    T = choi_of_map(lambda X: X.T, 2, 2)
    v1 = is_k_positive(T, 1)
    v2 = is_k_positive(T, 2)
    ok = (mismatches == 0 and min(counts.values()) > 0 and v1.status == MEMBER
          and v2.status == NOT_MEMBER and abs(v2.margin + 1.0) <= 1e-9)
    report(capsys, "k_positivity_oracle",
           ok, f"{mismatches} mismatches over 100 maps ({counts[MEMBER]} CP); "
           f"transpose: k=1 {v1.status}, k=2 {v2.status} margin {v2.margin:.12f}")


def _nesting_instance(rng, n, m):
    d = n * m
    kind = int(rng.integers(0, 4))
    if kind == 3:
        # k-block-positive but not PSD once k < min(n, m)
        return _rank_one_witness(complex_normal(rng, d), n, m, int(rng.integers(1, 4)))
    if kind == 0:
        return schmidt_rank_k_psd(rng, n, m, int(rng.integers(1, min(n, m) + 1)), int(rng.integers(1, d + 1)))
    if kind == 1:
        return random_psd(rng, d, rank=int(rng.integers(1, d + 1)))
    H = random_hermitian(rng, d)
    return H - np.linalg.eigvalsh(H)[0] * rng.uniform(0.0, 1.2) * np.eye(d)


def test_cone_nesting(capsys):
    violations = []
    strict = 0
    for t in range(200):
        rng = stream(3, t)
        n, m = (int(x) for x in rng.integers(1, 4, size=2))
        A = _nesting_instance(rng, n, m)
        kmin = {k: in_kmin_cone(A, k, n=n, m=m, budget=4, seed=t).status for k in (1, 2, 3)}
        kmax = {k: in_kmax_cone(A, k, n=n, m=m, budget=4, seed=t).status for k in (1, 2, 3)}
        strict += kmin[1] == MEMBER and NOT_MEMBER in kmin.values()
        for k in (1, 2):
            # k-min cones shrink as k grows, k-max cones grow
            if kmin[k + 1] == MEMBER and kmin[k] == NOT_MEMBER:
                violations.append((t, "kmin", k))
            if kmax[k] == MEMBER and kmax[k + 1] == NOT_MEMBER:
                violations.append((t, "kmax", k))
        for k in (1, 2, 3):
            for h in (1, 2, 3):
                if kmax[k] == MEMBER and kmin[h] == NOT_MEMBER:
                    violations.append((t, "kmax-in-kmin", k, h))
    report(capsys, "cone_nesting", not violations,
           f"{len(violations)} violations over 200 instances, {strict} separating k-min levels"
           + (f", first {violations[:3]}" if violations else ""))


@pytest.mark.parametrize("n,m,k", [(2, 2, 1), (2, 2, 2), (3, 3, 2)])
def test_duality_audit(capsys, n, m, k):
    rep = cli.duality_audit(n, m, k, trials=100, seed=0)
    floor = min(rep["kmin_dual"]["min_pairing"], rep["kmax_dual"]["min_pairing"])
    ok = rep["pass"] and floor >= -1e-9 and rep["kmin_dual"]["checked"] > 0 and rep["kmax_dual"]["checked"] > 0
    report(capsys, f"duality_audit[{n},{m},{k}]", ok,
           f"kmin checked {rep['kmin_dual']['checked']}, kmax checked {rep['kmax_dual']['checked']}, "
           f"min pairing {floor:.3e}")


def test_maximally_entangled_hardness(capsys):
    phi = identity_channel(3)
    b = schmidt_number_bounds(phi.choi, budget=64, seed=0)
    v = is_kpeb(phi, 2, budget=64, seed=0)
    verified = verify_certificate(phi.choi, v, 2, cone="kmax")
    ok = (b.lower, b.upper) == (3, 3) and v.status == NOT_MEMBER and verified
    report(capsys, "maximally_entangled_hardness", ok,
           f"bounds ({b.lower}, {b.upper}); is_kpeb k=2 {v.status}, witness verified {verified}")


def test_entanglement_breaking_baseline(capsys):
    phi = depolarizing_channel(2)
    v = is_kpeb(phi, 1)
    form = v.certificate.get("form") if v.status == MEMBER else None
    err, ranks = np.inf, []
    if form is not None:
        ranks = [int(np.linalg.matrix_rank(A, tol=1e-9)) for A in form.ops]
        err = float(np.abs(build_kpeb(form, 2, 2).choi.data - phi.choi.data).max())
    ok = v.status == MEMBER and ranks and max(ranks) == 1 and err < 1e-8
    report(capsys, "entanglement_breaking_baseline", ok,
           f"{v.status} with {len(ranks)} Kraus operators of ranks {sorted(set(ranks))}, reassembly error {err:.2e}")


def test_six_way_audit(capsys):
    disagreements, worst_rt, inconclusive = 0, 0.0, 0
    for t in range(50):
        rng = stream(7, t)
        p, m = (int(x) for x in rng.integers(1, 5, size=2))
        k = int(rng.integers(1, 4))
        variant = "sandwich" if t % 2 else "rank_kraus"
        form = random_kpeb_form(p, m, k, int(rng.integers(1, 4)), seed=t, variant=variant)
        phi = build_kpeb(form, p, m)
        scale = max(1.0, float(np.abs(phi.choi.data).max()))
        once = convert_form(form)
        back = convert_form(once)
        for f in (once, back):
            worst_rt = max(worst_rt, float(np.abs(build_kpeb(f, p, m).choi.data - phi.choi.data).max()) / scale)
        rep = kpeb_audit(phi, k, budget=16, seed=t)
        disagreements += rep["disagreement"]
        inconclusive += rep["iii"]["status"] != MEMBER
    ok = disagreements == 0 and worst_rt < 1e-10
    report(capsys, "six_way_audit", ok,
           f"50 channels, {disagreements} disagreements, {inconclusive} without a k-PEB certificate, "
           f"max round-trip error {worst_rt:.2e}")


def test_norm_ladder(capsys):
    bad = []
    for t in range(50):
        v = random_hermitian(stream(8, t), 4)
        vals = ladder(v, 4, seed=t)
        spectral = op_norm(v)
        mono = all(vals[i] <= vals[i + 1] + 1e-9 for i in range(3))
        if not (mono and vals[3] == spectral):
            bad.append((t, vals, spectral))
    ident = [k_min_norm(np.eye(4), k).value for k in (1, 2, 3, 4)]
    ok = not bad and all(x == 1.0 for x in ident)
    report(capsys, "norm_ladder", ok, f"{len(bad)} of 50 ladders out of order; ||I|| levels {ident}")


def _cli_inputs(d):
    bell = np.zeros(4)
    bell[[0, 3]] = 1 / np.sqrt(2)
    swap = np.eye(4)[[0, 2, 1, 3]]
    files = {
        "bell.json": {"vector": vector_to_json(bell), "n": 2, "m": 2},
        "swap.json": wrapped_to_json("operator", 2, 2, swap),
        "id3.json": identity_channel(3).to_json(),
        "dep.json": depolarizing_channel(2).to_json(),
        "v.json": matrix_to_json(np.diag([1.0, -2.0, 0.5])),
    }
    for name, obj in files.items():
        (d / name).write_text(json.dumps(obj))
    return [
        ["schmidt", "bell.json"],
        ["cone", "swap.json", "--k", "1"],
        ["cone", "swap.json", "--k", "2"],
        ["cone", "swap.json", "--cone", "kmax", "--k", "1"],
        ["kpeb", "dep.json", "--k", "1"],
        ["kpeb", "id3.json", "--k", "2", "--budget", "8"],
        ["kpeb", "dep.json", "--k", "1", "--audit", "--budget", "8"],
        ["norm", "v.json", "--k", "2"],
        ["duality-audit", "--n", "2", "--m", "2", "--k", "1", "--trials", "10"],
    ]


def test_cli_determinism(capsys, tmp_path):
    inputs = tmp_path / "in"
    inputs.mkdir()
    suite = _cli_inputs(inputs)
    runs = []
    for r in range(2):
        out = tmp_path / f"run{r}"
        out.mkdir()
        codes = []
        for i, argv in enumerate(suite):
            argv = [a if not a.endswith(".json") else str(inputs / a) for a in argv]
            codes.append(cli.main(argv + ["--seed", "7", "--out", str(out / f"{i}.json")]))
        runs.append((codes, [(out / f"{i}.json").read_bytes() for i in range(len(suite))]))
    same = runs[0] == runs[1]
    report(capsys, "cli_determinism", same,
           f"{len(suite)} commands, exit codes {runs[0][0]}, reports byte-identical {same}")
