"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line (visible with pytest -s) and
asserts both the exact expected values and the runtime bound of its
criterion.  The stretch computation at degree 6 is opt-in through
SPFEXT_STRETCH=1.
"""

import json
import os
import time
from contextlib import contextmanager

import pytest

from spfext import fp, young
from spfext.cli import main as cli_main
from spfext.functors import canonical_map
from spfext.homology import (duality_check, end_dimension, ext,
                             hom_pairing_check, kr_cohomology)
from spfext.suites import EX35_LAMBDAS, PAIRING_MODULES, THM32_TARGETS


@contextmanager
def criterion(name: str, budget_seconds: float):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"{name}: FAIL")
        raise
    elapsed = time.perf_counter() - start
    print(f"{name}: PASS ({elapsed:.1f}s)")
    assert elapsed < budget_seconds, f"{name} exceeded {budget_seconds}s"


def test_a1_endpoint_tables():
    with criterion("A1 twisted-identity endpoint tables", 10 * 6):
        for p in (2, 3):
            depth = 2 * p  # entries s = 0 .. 2p-1
            window = 2 * p - 2
            cases = [(f"S({p})", 0), (f"L({p})", p - 1), (f"G({p})", window)]
            for tgt, spot in cases:
                start = time.perf_counter()
                table = ext("twist(I,1)", tgt, p, i=1, depth=depth)
                expected = [1 if s == spot else 0 for s in range(depth)]
                assert table.dims == expected, (tgt, table.dims)
                assert time.perf_counter() - start < 10


def test_a2_parameterized_hom_and_ext():
    with criterion("A2 parameterized Hom/Ext at u=2, v=1", 30):
        hom_table = ext("twist(I,1)", "param(S(2),2)", 2, i=1)
        assert hom_table.dims[0] == 2
        assert hom_table.dims[1:] == [0, 0]
        ext_table = ext("twist(I,1)", "param(G(2),2)", 2, i=1)
        assert ext_table.dims == [0, 0, 2]


def _koszul_homology(kind: str, p: int, q: int, m: int) -> list[int]:
    maps = []
    for j in range(q, 0, -1):
        mk = "koszul_diff" if kind == "gamma-lambda" else "dual_koszul_diff"
        maps.append(canonical_map(mk, p, a=j, b=q - j, m=m, n=q))
    for first, second in zip(maps, maps[1:]):
        assert not fp.matmul(second.matrix, first.matrix, p).any()
    dims = [maps[0].source.dim] + [nat.target.dim for nat in maps]
    ranks = [fp.rank(nat.matrix, p) for nat in maps]
    homology = [dims[0] - ranks[0]]
    homology += [dims[k] - ranks[k - 1] - ranks[k] for k in range(1, q)]
    homology.append(dims[q] - ranks[-1])
    return homology


def test_a3_koszul_exactness():
    for p, i in ((2, 1), (3, 1), (2, 2)):
        q = p ** i
        for m in (1, 2):
            for kind in ("gamma-lambda", "lambda-sym"):
                with criterion(f"A3 Koszul {kind} p^i={q} m={m} exact", 60):
                    assert _koszul_homology(kind, p, q, m) == [0] * (q + 1)


def test_a4_kunneth_squeeze():
    with criterion("A4 Kunneth squeeze at p=2, d=2", 300):
        square = kr_cohomology("G(2)*G(2)", 1, 2, 1)
        assert square.dims == [0, 0, 0, 0, 1]
        single = kr_cohomology("G(4)", 1, 2, 1)
        assert single.dims == [0, 0, 0, 0, 1]
        assert sum(single.dims) == 1
        assert single.dims[4] == square.dims[4]


def test_a5_slicing_oracle():
    with criterion("A5 slicing oracle for all weight-4 diagrams", 600):
        src = "twist(I,1)*twist(I,1)"
        tables = {}
        for lam in EX35_LAMBDAS:
            name = "schur(" + ",".join(map(str, lam)) + ")"
            table = ext(src, name, 2, i=1)
            poly = young.poincare_polynomial(lam, 2)
            poly = poly + [0] * (len(table.dims) - len(poly))
            assert table.dims == poly, (lam, table.dims, poly)
            tables[lam] = table.dims
        for lam in EX35_LAMBDAS:
            conj = young.conjugate(lam)
            for s in range(3):
                assert tables[lam][s] == tables[conj][2 - s], (lam, s)


def test_a6_duality_with_tensor_square_source():
    with criterion("A6 mirror duality for the six degree-4 targets", 1800):
        for tgt in THM32_TARGETS:
            rep = duality_check("I*I", tgt, 2, i=1)
            assert rep.passed, (tgt, rep.rows)
            assert rep.window == 4
            assert len(rep.forward) == 5


def test_a7_weight_p_simples():
    with criterion("A7 simple targets of weight p", 600):
        assert ext("twist(I,1)", "simple(2)", 2, i=1).dims == [1, 0, 1]
        assert ext("twist(I,1)", "simple(1,1)", 2, i=1).dims == [0, 1, 0]
        for lam in ((3,), (2, 1), (1, 1, 1)):
            name = "simple(" + ",".join(map(str, lam)) + ")"
            table = ext("twist(I,1)", name, 3, i=1)
            assert len(table.dims) == 5
            assert table.dims == table.dims[::-1], (lam, table.dims)


def test_a8_endomorphisms_and_pairing():
    with criterion("A8 group-algebra endomorphisms and pairing", 60):
        assert end_dimension("I*I", 2) == 2
        assert end_dimension("I*I*I", 2) == 6
        for mod in PAIRING_MODULES:
            rep = hom_pairing_check("I*I", mod, 2)
            assert rep.dims_equal and rep.right_nondegenerate, mod


def _all_reference_tables(sweep: str) -> dict:
    out = {}
    for p in (2, 3):
        for tgt in (f"S({p})", f"L({p})", f"G({p})"):
            out[f"a1/{p}/{tgt}"] = ext("twist(I,1)", tgt, p, i=1, depth=2 * p,
                                       sweep=sweep).payload()
    out["a2/hom"] = ext("twist(I,1)", "param(S(2),2)", 2, i=1,
                        sweep=sweep).payload()
    out["a2/ext"] = ext("twist(I,1)", "param(G(2),2)", 2, i=1,
                        sweep=sweep).payload()
    out["a4/square"] = kr_cohomology("G(2)*G(2)", 1, 2, 1, sweep=sweep).payload()
    out["a4/single"] = kr_cohomology("G(4)", 1, 2, 1, sweep=sweep).payload()
    for lam in EX35_LAMBDAS:
        name = "schur(" + ",".join(map(str, lam)) + ")"
        out[f"a5/{name}"] = ext("twist(I,1)*twist(I,1)", name, 2, i=1,
                                sweep=sweep).payload()
    for tgt in THM32_TARGETS:
        rep = duality_check("I*I", tgt, 2, i=1, sweep=sweep)
        out[f"a6/{tgt}"] = {"forward": rep.forward, "backward": rep.backward}
    for p, lams in ((2, ((2,), (1, 1))), (3, ((3,), (2, 1), (1, 1, 1)))):
        for lam in lams:
            name = "simple(" + ",".join(map(str, lam)) + ")"
            out[f"a7/{p}/{name}"] = ext("twist(I,1)", name, p, i=1,
                                        sweep=sweep).payload()
    return out


def test_a9_determinism():
    with criterion("A9 sweep and worker-count determinism", 1800):
        forward = json.dumps(_all_reference_tables("dominance"), sort_keys=True)
        backward = json.dumps(_all_reference_tables("reversed"), sort_keys=True)
        assert forward == backward


def test_a9_jobs_byte_identical(capsys):
    with criterion("A9 CLI output identical across --jobs 1 and 4", 1800):
        outputs = {}
        for jobs in ("1", "4"):
            chunks = []
            for suite in ("lemma22", "koszul", "ex34", "ex35", "thm32",
                          "lemma31"):
                code = cli_main(["check", "--suite", suite, "--jobs", jobs,
                                 "--format", "json"])
                assert code == 0, suite
                chunks.append(capsys.readouterr().out)
            outputs[jobs] = "".join(chunks)
        assert outputs["1"] == outputs["4"]


@pytest.mark.skipif(not os.environ.get("SPFEXT_STRETCH"),
                    reason="degree-6 stretch run is opt-in (SPFEXT_STRETCH=1)")
def test_stretch_degree_six_duality():
    """Mirror symmetry for a twisted simple-projective source at p = 3,
    d = 2.  This runs in fallback generator mode on a 46656-dimensional
    tensor space and may take hours."""
    with criterion("Stretch simple-projective source at D=6", 6 * 3600):
        rep = duality_check("simple(1,1)", "schur(2,2,2)", 3, i=1)
        assert rep.window == 8
        assert rep.passed, rep.rows
