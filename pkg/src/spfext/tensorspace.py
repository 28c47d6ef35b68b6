"""Tensor space E^(x)D over F_p and the Schur algebra acting on it.

The Schur algebra S(n, D) is realized through its xi-basis: orbits of
pairs of multi-indices under simultaneous place permutation.  An orbit
is canonically the sorted tuple of per-slot letter pairs, so orbit
identity is syntactic.  Letters are 0-based throughout.

Operators are built lazily as sparse matrices on E^(x)D and memoized per
space behind a lock, with least-recently-used eviction against a
configurable byte budget.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement
from math import comb

import numpy as np
from scipy import sparse

from .fp import FpMatrix

# Full xi-basis is used while its cardinality stays at or below this;
# beyond it a Chevalley-style generator set (weight idempotents plus
# divided root movers) is used instead.
FULL_BASIS_LIMIT = 10_000

DEFAULT_OP_BUDGET = 512 * 1024 * 1024

XiKey = tuple[tuple[int, int], ...]
OpRef = tuple


def distinct_permutations(items: tuple):
    """Yield the distinct permutations of a multiset, in lex order."""
    pool = sorted(items)
    n = len(pool)
    out: list = []

    def rec(remaining: list):
        if len(out) == n:
            yield tuple(out)
            return
        prev = object()
        for k in range(len(remaining)):
            if remaining[k] == prev:
                continue
            prev = remaining[k]
            out.append(remaining[k])
            yield from rec(remaining[:k] + remaining[k + 1:])
            out.pop()

    yield from rec(pool)


def xi_key(i: tuple[int, ...], j: tuple[int, ...]) -> XiKey:
    """Canonical orbit representative of the pair (i, j)."""
    if len(i) != len(j):
        raise ValueError("multi-indices of different lengths")
    return tuple(sorted(zip(i, j)))


def flip_ref(ref: OpRef) -> OpRef:
    kind = ref[0]
    if kind == "xi":
        return ("xi", tuple(sorted((b, a) for a, b in ref[1])))
    if kind == "div":
        _, a, b, r = ref
        return ("div", b, a, r)
    raise ValueError(f"unknown operator ref {ref!r}")


def key_row_content(key: XiKey, n: int) -> tuple[int, ...]:
    counts = [0] * n
    for a, _ in key:
        counts[a] += 1
    return tuple(counts)


def key_col_content(key: XiKey, n: int) -> tuple[int, ...]:
    counts = [0] * n
    for _, b in key:
        counts[b] += 1
    return tuple(counts)


def compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    """All compositions of `total` into exactly `parts` nonnegative parts."""
    out: list[tuple[int, ...]] = []

    def rec(rem, slots, prefix):
        if slots == 1:
            out.append(tuple(prefix) + (rem,))
            return
        for v in range(rem, -1, -1):
            rec(rem - v, slots - 1, prefix + [v])

    if parts == 0:
        return [()] if total == 0 else []
    rec(total, parts, [])
    return out


@dataclass(frozen=True)
class XiElement:
    """Basis element of the Schur algebra: an orbit of index pairs.

    The representative is the lexicographically least pair in the
    simultaneous place-permutation orbit, i.e. the sorted tuple of
    per-slot letter pairs.
    """

    key: XiKey
    n: int

    @property
    def row_index(self) -> tuple[int, ...]:
        return tuple(a for a, _ in self.key)

    @property
    def col_index(self) -> tuple[int, ...]:
        return tuple(b for _, b in self.key)

    @property
    def content_row(self) -> tuple[int, ...]:
        return key_row_content(self.key, self.n)

    @property
    def content_col(self) -> tuple[int, ...]:
        return key_col_content(self.key, self.n)


@dataclass(frozen=True)
class Operator:
    """A Schur algebra element as a concrete matrix on tensor space."""

    space: "TensorSpace"
    ref: OpRef
    matrix: FpMatrix


class TensorSpace:
    """E^(x)D for E = k^n over F_p, with the xi-operator factory."""

    def __init__(self, p: int, n: int, D: int, op_budget: int = DEFAULT_OP_BUDGET):
        if D < 1 or n < D:
            raise ValueError("need D >= 1 and n >= D for a faithful evaluation")
        self.p = p
        self.n = n
        self.D = D
        self.dim = n ** D
        self._op_budget = op_budget
        self._ops: OrderedDict[OpRef, sparse.csr_matrix] = OrderedDict()
        self._ops_bytes = 0
        self._lock = threading.RLock()
        # letters[idx] is the decoded multi-index of basis vector idx
        self.letters = np.zeros((self.dim, D), dtype=np.int64)
        idx = np.arange(self.dim)
        for s in range(D - 1, -1, -1):
            self.letters[:, s] = idx % n
            idx //= n
        self._weights = np.zeros((self.dim, n), dtype=np.int64)
        for a in range(n):
            self._weights[:, a] = (self.letters == a).sum(axis=1)
        self._content_groups: dict[tuple[int, ...], np.ndarray] | None = None

    def encode(self, letters: tuple[int, ...]) -> int:
        idx = 0
        for a in letters:
            if not 0 <= a < self.n:
                raise IndexError(f"letter {a} out of range for n={self.n}")
            idx = idx * self.n + a
        return idx

    def decode(self, idx: int) -> tuple[int, ...]:
        return tuple(int(x) for x in self.letters[idx])

    def content_groups(self) -> dict[tuple[int, ...], np.ndarray]:
        if self._content_groups is None:
            groups: dict[tuple[int, ...], list[int]] = {}
            for idx in range(self.dim):
                groups.setdefault(tuple(self._weights[idx]), []).append(idx)
            self._content_groups = {
                c: np.array(ix, dtype=np.int64) for c, ix in groups.items()
            }
        return self._content_groups

    # -- operator construction -------------------------------------------

    def _build(self, ref: OpRef) -> sparse.csr_matrix:
        kind = ref[0]
        if kind == "xi":
            return self._build_xi(ref[1])
        if kind == "div":
            return self._build_divided(*ref[1:])
        raise ValueError(f"unknown operator ref {ref!r}")

    def _build_xi(self, key: XiKey) -> sparse.csr_matrix:
        if len(key) != self.D:
            raise ValueError(f"xi key has {len(key)} slots, expected {self.D}")
        for a, b in key:
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise IndexError(f"xi key letter out of range: {key}")
        rows, cols = [], []
        for arrangement in distinct_permutations(key):
            i = tuple(a for a, _ in arrangement)
            j = tuple(b for _, b in arrangement)
            rows.append(self.encode(i))
            cols.append(self.encode(j))
        data = np.ones(len(rows), dtype=np.int64)
        mat = sparse.csr_matrix((data, (rows, cols)), shape=(self.dim, self.dim))
        mat.data %= self.p
        mat.eliminate_zeros()
        return mat

    def _build_divided(self, a: int, b: int, r: int) -> sparse.csr_matrix:
        """Divided power of the root mover b -> a: sum over r-subsets of
        the slots holding letter b, replaced by a."""
        rows, cols = [], []
        for idx in range(self.dim):
            slots = np.flatnonzero(self.letters[idx] == b)
            if slots.size < r:
                continue
            word = self.letters[idx].copy()
            for subset in combinations(slots.tolist(), r):
                new = word.copy()
                new[list(subset)] = a
                rows.append(self.encode(tuple(new)))
                cols.append(idx)
        data = np.ones(len(rows), dtype=np.int64)
        mat = sparse.csr_matrix((data, (rows, cols)), shape=(self.dim, self.dim))
        mat.data %= self.p
        mat.eliminate_zeros()
        return mat

    def matrix(self, ref: OpRef) -> sparse.csr_matrix:
        """The sparse matrix of an operator, memoized with LRU eviction."""
        with self._lock:
            hit = self._ops.get(ref)
            if hit is not None:
                self._ops.move_to_end(ref)
                return hit
        built = self._build(ref)
        nbytes = built.data.nbytes + built.indices.nbytes + built.indptr.nbytes
        with self._lock:
            if ref not in self._ops:
                self._ops[ref] = built
                self._ops_bytes += nbytes
                while self._ops_bytes > self._op_budget and len(self._ops) > 1:
                    _, old = self._ops.popitem(last=False)
                    self._ops_bytes -= (old.data.nbytes + old.indices.nbytes
                                        + old.indptr.nbytes)
            return self._ops[ref]

    def operator(self, ref: OpRef) -> Operator:
        return Operator(self, ref, FpMatrix(self.matrix(ref), self.p, storage="sparse"))

    def xi_element(self, i: tuple[int, ...], j: tuple[int, ...]) -> XiElement:
        return XiElement(xi_key(i, j), self.n)

    def xi_operator(self, i: tuple[int, ...], j: tuple[int, ...]) -> Operator:
        return self.operator(("xi", xi_key(i, j)))

    def spanning_operators(self) -> list[Operator]:
        return [self.operator(ref) for ref in self.spanning_refs()]

    def weight_key(self, comp: tuple[int, ...]) -> XiKey:
        comp = tuple(comp)
        if len(comp) != self.n or sum(comp) != self.D or any(c < 0 for c in comp):
            raise ValueError(f"{comp} is not a composition of {self.D} into "
                             f"{self.n} parts")
        pairs = []
        for a, mult in enumerate(comp):
            pairs.extend([(a, a)] * mult)
        return tuple(pairs)

    def weight_idempotent(self, comp: tuple[int, ...]) -> Operator:
        return self.operator(("xi", self.weight_key(comp)))

    def place_permutation(self, sigma: tuple[int, ...]) -> Operator:
        """Permutation matrix of e_j -> e_{j o sigma^-1} on slot positions."""
        if sorted(sigma) != list(range(self.D)):
            raise ValueError(f"{sigma} is not a permutation of {self.D} letters")
        inv = [0] * self.D
        for s, t in enumerate(sigma):
            inv[t] = s
        permuted = self.letters[:, inv]
        rows = np.zeros(self.dim, dtype=np.int64)
        for s in range(self.D):
            rows = rows * self.n + permuted[:, s]
        mat = sparse.csr_matrix(
            (np.ones(self.dim, dtype=np.int64), (rows, np.arange(self.dim))),
            shape=(self.dim, self.dim))
        return Operator(self, ("perm", tuple(sigma)), FpMatrix(mat, self.p,
                                                               storage="sparse"))

    # -- spanning sets ----------------------------------------------------

    def schur_dimension(self) -> int:
        return comb(self.n * self.n + self.D - 1, self.D)

    def uses_full_basis(self) -> bool:
        return self.schur_dimension() <= FULL_BASIS_LIMIT

    def full_basis_keys(self) -> list[XiKey]:
        pairs = [(a, b) for a in range(self.n) for b in range(self.n)]
        return [key for key in combinations_with_replacement(pairs, self.D)]

    def spanning_refs(self) -> list[OpRef]:
        """Operator refs spanning (full basis) or generating (fallback)
        the image of the Schur algebra in End(E^(x)D)."""
        if self.uses_full_basis():
            return [("xi", key) for key in self.full_basis_keys()]
        refs: list[OpRef] = [("xi", self.weight_key(c))
                             for c in compositions(self.D, self.n)]
        for a in range(self.n):
            for b in range(self.n):
                if a == b:
                    continue
                for r in range(1, self.D + 1):
                    refs.append(("div", a, b, r))
        return refs

    def refs_by_col_content(self) -> dict[tuple[int, ...], list[OpRef]]:
        """Spanning refs grouped by the content of their column multi-index.

        Only meaningful in full-basis mode, where an operator ref has a
        single column content; the fallback generator set is returned
        under a None key for closure-style iteration.
        """
        if not self.uses_full_basis():
            return {None: self.spanning_refs()}
        groups: dict[tuple[int, ...], list[OpRef]] = {}
        for key in self.full_basis_keys():
            groups.setdefault(key_col_content(key, self.n), []).append(("xi", key))
        return groups

    def sorted_letters(self, comp: tuple[int, ...]) -> tuple[int, ...]:
        """The canonical multi-index of content comp: letter a repeated comp[a]."""
        out: list[int] = []
        for a, mult in enumerate(comp):
            out.extend([a] * mult)
        return tuple(out)


_SPACES: dict[tuple[int, int, int], TensorSpace] = {}
_SPACES_LOCK = threading.Lock()


def get_space(p: int, n: int, D: int) -> TensorSpace:
    """Shared TensorSpace instances so operator caches are reused."""
    key = (p, n, D)
    with _SPACES_LOCK:
        if key not in _SPACES:
            _SPACES[key] = TensorSpace(p, n, D)
        return _SPACES[key]
