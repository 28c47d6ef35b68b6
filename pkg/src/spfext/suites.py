"""Named verification suites run by the CLI and the acceptance tests.

Each suite is a deterministic list of cases; a case computes an actual
value, compares against its expected value, and reports PASS/FAIL.
Cases are independent, so the runner may fan them out over a thread
pool; results are always emitted in definition order.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import fp, young
from .functors import canonical_map
from .homology import duality_check, end_dimension, ext, hom_pairing_check, kr_cohomology

SUITE_NAMES = ("lemma22", "koszul", "ex34", "ex35", "thm32", "lemma31")


@dataclass
class CaseResult:
    suite: str
    name: str
    passed: bool
    expected: str
    actual: str
    seconds: float = 0.0

    def payload(self) -> dict:
        return {"suite": self.suite, "name": self.name, "passed": self.passed,
                "expected": self.expected, "actual": self.actual}


@dataclass
class Case:
    suite: str
    name: str
    p: int
    i: int
    run: callable = field(repr=False)


def _table_case(suite, name, p, i, src, tgt, expected, depth=None, sweep="dominance",
                cache_dir=None):
    def run():
        table = ext(src, tgt, p, i=i, depth=depth, sweep=sweep, cache_dir=cache_dir)
        return table.dims == expected, str(expected), str(table.dims)
    return Case(suite, name, p, i, run)


def _pad(poly: list[int], length: int) -> list[int]:
    return poly + [0] * (length - len(poly))


def lemma22_cases(sweep="dominance", cache_dir=None) -> list[Case]:
    cases = []
    for p in (2, 3):
        window = 2 * (p - 1)
        for tgt, spot in ((f"S({p})", 0), (f"L({p})", p - 1), (f"G({p})", window)):
            expected = [1 if s == spot else 0 for s in range(window + 1)]
            cases.append(_table_case(
                "lemma22", f"p={p} Ext(I^(1), {tgt})", p, 1,
                "twist(I,1)", tgt, expected, sweep=sweep, cache_dir=cache_dir))
    # parameterized Hom/Ext for u = 2, v = 1 at p = 2, d = 1
    cases.append(_table_case(
        "lemma22", "p=2 parameterized Hom vs S^2_U", 2, 1,
        "twist(I,1)", "param(S(2),2)", [2, 0, 0], sweep=sweep,
        cache_dir=cache_dir))
    cases.append(_table_case(
        "lemma22", "p=2 parameterized Ext vs G^2_U", 2, 1,
        "twist(I,1)", "param(G(2),2)", [0, 0, 2], sweep=sweep,
        cache_dir=cache_dir))

    # Kunneth squeeze at p = 2, d = 2
    def kr_case(tgt):
        def run():
            table = kr_cohomology(tgt, 1, 2, 1, sweep=sweep)
            expected = [0, 0, 0, 0, 1]
            return table.dims == expected, str(expected), str(table.dims)
        return Case("lemma22", f"p=2 KR cohomology of {tgt}", 2, 1, run)

    cases.append(kr_case("G(2)*G(2)"))
    cases.append(kr_case("G(4)"))
    return cases


def _koszul_exact(kind: str, p: int, q: int, m: int) -> tuple[bool, str, str]:
    maps = []
    for j in range(q, 0, -1):
        mk = "koszul_diff" if kind == "gamma-lambda" else "dual_koszul_diff"
        maps.append(canonical_map(mk, p, a=j, b=q - j, m=m, n=q))
    for first, second in zip(maps, maps[1:]):
        if fp.matmul(second.matrix, first.matrix, p).any():
            return False, "d o d = 0", "nonzero square"
    dims = [maps[0].source.dim] + [nat.target.dim for nat in maps]
    ranks = [fp.rank(nat.matrix, p) for nat in maps]
    homology = [dims[0] - ranks[0]]
    homology += [dims[k] - ranks[k - 1] - ranks[k] for k in range(1, q)]
    homology.append(dims[q] - ranks[-1])
    return (not any(homology), "homology " + str([0] * (q + 1)),
            "homology " + str(homology))


def koszul_cases(**_) -> list[Case]:
    cases = []
    for p, i in ((2, 1), (3, 1), (2, 2)):
        q = p ** i
        for m in (1, 2):
            for kind in ("gamma-lambda", "lambda-sym"):
                def run(kind=kind, p=p, q=q, m=m):
                    return _koszul_exact(kind, p, q, m)
                cases.append(Case("koszul",
                                  f"p^i={q} (p={p}) m={m} {kind} complex exact",
                                  p, i, run))
    return cases


def ex34_cases(sweep="dominance", cache_dir=None) -> list[Case]:
    cases = [
        _table_case("ex34", "p=2 Ext(I^(1), F_(2))", 2, 1,
                    "twist(I,1)", "simple(2)", [1, 0, 1], sweep=sweep,
                    cache_dir=cache_dir),
        _table_case("ex34", "p=2 Ext(I^(1), F_(1,1))", 2, 1,
                    "twist(I,1)", "simple(1,1)", [0, 1, 0], sweep=sweep,
                    cache_dir=cache_dir),
    ]
    for lam in ((3,), (2, 1), (1, 1, 1)):
        name = "simple(" + ",".join(map(str, lam)) + ")"

        def run(name=name):
            table = ext("twist(I,1)", name, 3, i=1, sweep=sweep,
                        cache_dir=cache_dir)
            pal = table.dims == table.dims[::-1]
            return pal, "palindrome on [0,4]", str(table.dims)
        cases.append(Case("ex34", f"p=3 Ext(I^(1), F_{lam}) palindromic", 3, 1, run))
    return cases


EX35_LAMBDAS = ((4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1))


def ex35_cases(sweep="dominance", cache_dir=None) -> list[Case]:
    src = "twist(I,1)*twist(I,1)"
    cases = []
    for lam in EX35_LAMBDAS:
        name = "schur(" + ",".join(map(str, lam)) + ")"

        def run(lam=lam, name=name):
            table = ext(src, name, 2, i=1, sweep=sweep, cache_dir=cache_dir)
            poly = _pad(young.poincare_polynomial(lam, 2), len(table.dims))
            conj = young.conjugate(lam)
            conj_name = "schur(" + ",".join(map(str, conj)) + ")"
            conj_table = ext(src, conj_name, 2, i=1, sweep=sweep,
                             cache_dir=cache_dir)
            flip_ok = all(table.dims[s] == conj_table.dims[2 - s]
                          for s in range(3))
            ok = table.dims == poly and flip_ok
            return ok, f"{poly} and flip", f"{table.dims}, flip ok: {flip_ok}"
        cases.append(Case("ex35", f"p=2 Ext(I^2(1), S_{lam}) vs slicings", 2, 1,
                          run))
    return cases


THM32_TARGETS = ("S(4)", "L(4)", "G(4)", "schur(2,2)", "schur(3,1)",
                 "simple(2,2)")


def thm32_cases(sweep="dominance", cache_dir=None) -> list[Case]:
    cases = []
    for tgt in THM32_TARGETS:
        def run(tgt=tgt):
            rep = duality_check("I*I", tgt, 2, i=1, sweep=sweep)
            detail = f"{rep.forward} vs reversed {rep.backward}"
            return rep.passed, "mirror equality on [0,4]", detail
        cases.append(Case("thm32", f"p=2 duality I^2 vs {tgt}", 2, 1, run))
    return cases


PAIRING_MODULES = ("I*I", "S(2)", "L(2)", "G(2)", "simple(2)")


def lemma31_cases(**_) -> list[Case]:
    cases = []
    for d, p in ((2, 2), (3, 2), (2, 3)):
        expr = "*".join(["I"] * d)
        want = 1
        for k in range(2, d + 1):
            want *= k

        def run(expr=expr, p=p, want=want):
            dim = end_dimension(expr, p)
            return dim == want, str(want), str(dim)
        cases.append(Case("lemma31", f"p={p} dim End(I^{d}) = {d}!", p, 1, run))
    for mod in PAIRING_MODULES:
        def run(mod=mod):
            rep = hom_pairing_check("I*I", mod, 2)
            detail = (f"dims {rep.dim_hom_pm}/{rep.dim_hom_mp}, "
                      f"nondegenerate {rep.right_nondegenerate}")
            return rep.passed, "equal dims, right-nondegenerate", detail
        cases.append(Case("lemma31", f"p=2 pairing I^2 vs {mod}", 2, 1, run))

    def run_p3():
        rep = hom_pairing_check("I*I", "S(2)", 3)
        detail = (f"dims {rep.dim_hom_pm}/{rep.dim_hom_mp}, "
                  f"nondegenerate {rep.right_nondegenerate}")
        return rep.passed, "equal dims, right-nondegenerate", detail
    cases.append(Case("lemma31", "p=3 pairing I^2 vs S(2)", 3, 1, run_p3))
    return cases


_BUILDERS = {
    "lemma22": lemma22_cases,
    "koszul": koszul_cases,
    "ex34": ex34_cases,
    "ex35": ex35_cases,
    "thm32": thm32_cases,
    "lemma31": lemma31_cases,
}


def build_cases(suite: str, p: int | None = None, i: int | None = None,
                sweep: str = "dominance", cache_dir: str | None = None) -> list[Case]:
    if suite not in _BUILDERS:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITE_NAMES}")
    cases = _BUILDERS[suite](sweep=sweep, cache_dir=cache_dir)
    if p is not None:
        cases = [c for c in cases if c.p == p]
    if i is not None:
        cases = [c for c in cases if c.i == i]
    return cases


def run_cases(cases: list[Case], jobs: int = 1) -> list[CaseResult]:
    def execute(case: Case) -> CaseResult:
        start = time.perf_counter()
        passed, expected, actual = case.run()
        return CaseResult(case.suite, case.name, passed, expected, actual,
                          time.perf_counter() - start)

    if jobs <= 1 or len(cases) <= 1:
        return [execute(c) for c in cases]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(execute, cases))


def run_suite(suite: str, p: int | None = None, i: int | None = None,
              jobs: int = 1, sweep: str = "dominance",
              cache_dir: str | None = None) -> list[CaseResult]:
    return run_cases(build_cases(suite, p=p, i=i, sweep=sweep,
                                 cache_dir=cache_dir), jobs=jobs)
