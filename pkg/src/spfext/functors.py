"""Functor expressions and their evaluation to Schur-algebra modules.

The mini-language (whitespace insignificant, "*" left-associative):

    expr  := atom | expr "*" expr | "twist(" expr "," int ")"
           | "dual(" expr ")" | "param(" expr "," int ")"
    atom  := "G(" parts ")" | "S(" parts ")" | "L(" parts ")" | "I"
           | "simple(" parts ")" | "schur(" parts ")" | "weyl(" parts ")"
    parts := int { "," int }

G/S/L are divided, symmetric and exterior power products; I is the
identity functor.  Expressions built from G/S/L/I with twist/param form
the substitution fragment and evaluate to ShapeModule subquotients of
tensor space; duals, simples and mixed tensor products evaluate to
derived module representations.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass

import numpy as np

from . import fp, young
from .errors import (ParseError, SemanticError, SpfextError,
                     UnsupportedExpressionError)
from .modules import (Block, DualModule, ModuleRep, ShapeModule, SubmoduleModule,
                      TensorModule, check_equivariance, hom_space)
from .tensorspace import distinct_permutations

MAX_PARAM = 2

_ATOM_KINDS = ("G", "S", "L", "simple", "schur", "weyl")


@dataclass(frozen=True)
class Node:
    pass


@dataclass(frozen=True)
class Ident(Node):
    pass


@dataclass(frozen=True)
class Atom(Node):
    kind: str
    parts: tuple[int, ...]


@dataclass(frozen=True)
class Tensor(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Twist(Node):
    inner: Node
    order: int


@dataclass(frozen=True)
class Dual(Node):
    inner: Node


@dataclass(frozen=True)
class Param(Node):
    inner: Node
    mult: int


_TOKEN = re.compile(r"\s*([A-Za-z]+|\d+|[(),*])")


def _tokenize(text: str) -> list[str]:
    text = text.strip()
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"bad character at {text[pos:]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens: list[str]):
        self.toks = tokens
        self.pos = 0

    def peek(self) -> str | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of expression")
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, found {tok!r}")
        self.pos += 1
        return tok

    def parse_int(self) -> int:
        tok = self.take()
        if not tok.isdigit():
            raise ParseError(f"expected integer, found {tok!r}")
        return int(tok)

    def parse_parts(self) -> tuple[int, ...]:
        parts = [self.parse_int()]
        while self.peek() == ",":
            self.take(",")
            parts.append(self.parse_int())
        return tuple(parts)

    def parse_expr(self) -> Node:
        node = self.parse_term()
        while self.peek() == "*":
            self.take("*")
            node = Tensor(node, self.parse_term())
        return node

    def parse_term(self) -> Node:
        tok = self.take()
        if tok == "I":
            return Ident()
        if tok == "twist":
            self.take("(")
            inner = self.parse_expr()
            self.take(",")
            order = self.parse_int()
            self.take(")")
            if order < 1:
                raise ParseError("twist order must be positive")
            return Twist(inner, order)
        if tok == "dual":
            self.take("(")
            inner = self.parse_expr()
            self.take(")")
            return Dual(inner)
        if tok == "param":
            self.take("(")
            inner = self.parse_expr()
            self.take(",")
            mult = self.parse_int()
            self.take(")")
            if mult < 1:
                raise ParseError("param multiplicity must be positive")
            return Param(inner, mult)
        if tok in _ATOM_KINDS:
            self.take("(")
            parts = self.parse_parts()
            self.take(")")
            if any(x < 1 for x in parts):
                raise ParseError(f"{tok} parts must be positive: {parts}")
            if tok in ("simple", "schur", "weyl"):
                try:
                    parts = young.check_partition(parts)
                except ValueError as exc:
                    raise ParseError(str(exc)) from exc
            return Atom(tok, parts)
        raise ParseError(f"unexpected token {tok!r}")


def parse(text: str) -> Node:
    parser = _Parser(_tokenize(text))
    node = parser.parse_expr()
    if parser.peek() is not None:
        raise ParseError(f"trailing input {parser.toks[parser.pos:]!r}")
    return node


def canon(node: Node) -> str:
    if isinstance(node, Ident):
        return "I"
    if isinstance(node, Atom):
        return f"{node.kind}({','.join(str(x) for x in node.parts)})"
    if isinstance(node, Tensor):
        return f"{canon(node.left)}*{canon(node.right)}"
    if isinstance(node, Twist):
        return f"twist({canon(node.inner)},{node.order})"
    if isinstance(node, Dual):
        return f"dual({canon(node.inner)})"
    if isinstance(node, Param):
        return f"param({canon(node.inner)},{node.mult})"
    raise TypeError(f"not a functor node: {node!r}")


def as_node(expr) -> Node:
    if isinstance(expr, Node):
        return expr
    return parse(str(expr))


def degree(node: Node, p: int) -> int:
    if isinstance(node, Ident):
        return 1
    if isinstance(node, Atom):
        return sum(node.parts)
    if isinstance(node, Tensor):
        return degree(node.left, p) + degree(node.right, p)
    if isinstance(node, Twist):
        return p ** node.order * degree(node.inner, p)
    if isinstance(node, (Dual, Param)):
        return degree(node.inner, p)
    raise TypeError(f"not a functor node: {node!r}")


def to_shape(node: Node, p: int) -> tuple[tuple[Block, ...], int] | None:
    """Blocks and parameter multiplicity when the expression lies in the
    substitution fragment, else None."""
    if isinstance(node, Ident):
        return (("G", 1, 0),), 1
    if isinstance(node, Atom) and node.kind in ("G", "S", "L"):
        return tuple((node.kind, s, 0) for s in node.parts), 1
    if isinstance(node, Twist):
        inner = to_shape(node.inner, p)
        if inner is None:
            return None
        blocks, m = inner
        return tuple((k, s, t + node.order) for k, s, t in blocks), m
    if isinstance(node, Param):
        inner = to_shape(node.inner, p)
        if inner is None:
            return None
        blocks, m = inner
        return blocks, m * node.mult
    if isinstance(node, Tensor):
        left = to_shape(node.left, p)
        right = to_shape(node.right, p)
        if left is None or right is None:
            return None
        if left[1] != right[1]:
            return None
        return left[0] + right[0], left[1]
    return None


_shape_cache: dict[tuple, ShapeModule] = {}
_eval_cache: dict[tuple, ModuleRep] = {}
_simple_cache: dict[tuple, ModuleRep] = {}
_cache_lock = threading.RLock()


def shape_module(p: int, n: int, blocks: tuple[Block, ...], m: int = 1) -> ShapeModule:
    key = (p, n, blocks, m)
    with _cache_lock:
        if key not in _shape_cache:
            _shape_cache[key] = ShapeModule(p, n, blocks, m)
        return _shape_cache[key]


def evaluate(expr, p: int, max_param: int = MAX_PARAM,
             n: int | None = None) -> ModuleRep:
    """The module over S(n, D) realizing the expression.

    By default n = D = degree (the minimal faithful evaluation); tensor
    factors are evaluated over the n of the whole product.
    """
    node = as_node(expr)
    deg = degree(node, p)
    if n is None:
        n = deg
    if n < deg:
        raise SemanticError(f"evaluation dimension {n} below degree {deg}")
    key = (canon(node), p, n)
    with _cache_lock:
        hit = _eval_cache.get(key)
    if hit is not None:
        return hit
    shape = to_shape(node, p)
    if shape is not None:
        blocks, m = shape
        if m > max_param:
            raise SemanticError(f"parameter multiplicity {m} above cap {max_param}")
        mod: ModuleRep = shape_module(p, n, blocks, m)
    elif isinstance(node, Dual):
        mod = DualModule(evaluate(node.inner, p, max_param, n))
    elif isinstance(node, Tensor):
        mod = TensorModule(evaluate(node.left, p, max_param, n),
                           evaluate(node.right, p, max_param, n))
    elif isinstance(node, Atom) and node.kind in ("simple", "schur", "weyl"):
        mod = schur_weyl_simple(node.parts, node.kind, p, n=n)
    else:
        raise UnsupportedExpressionError(
            f"{canon(node)} is outside the substitution fragment")
    with _cache_lock:
        _eval_cache.setdefault(key, mod)
        return _eval_cache[key]


def kuhn_dual(module: ModuleRep) -> ModuleRep:
    return DualModule(module)


def character(module: ModuleRep) -> dict[tuple[int, ...], int]:
    return module.character()


def frobenius_substitute(expr, r: int, p: int) -> ModuleRep:
    return evaluate(Twist(as_node(expr), r), p)


# canonical natural maps ----------------------------------------------------


@dataclass(frozen=True)
class NaturalMap:
    """An equivariant matrix between two module representations."""

    source: ModuleRep
    target: ModuleRep
    matrix: np.ndarray  # (target.dim, source.dim), column action

    @property
    def rank(self) -> int:
        return fp.rank(self.matrix, self.source.p)


def _compose_lift_project(src: ShapeModule, tgt: ShapeModule) -> np.ndarray:
    mat = (tgt.project_matrix() @ src.lift_matrix()).toarray()
    return mat % src.p


def _blocks(*sized: tuple[str, int]) -> tuple[Block, ...]:
    return tuple((kind, size, 0) for kind, size in sized if size > 0)


def canonical_map(kind: str, p: int, *, a: int = 0, b: int = 0,
                  lam: tuple[int, ...] = (), m: int = 1, n: int | None = None,
                  check: bool = True) -> NaturalMap:
    """Explicit equivariant matrices for the structural maps.

    kinds: gamma_comult (G^{a+b} -> G^a * G^b), sym_mult (S^a * S^b ->
    S^{a+b}), ext_mult (L^a * L^b -> L^{a+b}), koszul_diff (G^a * L^b ->
    G^{a-1} * L^{b+1}), dual_koszul_diff (L^a * S^b -> L^{a-1} * S^{b+1}),
    tableau_composite (L^{conjugate(lam)} -> S^{lam} through the
    column-to-row slot permutation).
    """
    if kind == "tableau_composite":
        return _tableau_composite(tuple(lam), p, check=check)
    D = a + b
    if n is None:
        n = D
    if kind == "gamma_comult":
        src = shape_module(p, n, _blocks(("G", a + b)), m)
        tgt = shape_module(p, n, _blocks(("G", a), ("G", b)), m)
        mat = _compose_lift_project(src, tgt)
    elif kind == "sym_mult":
        src = shape_module(p, n, _blocks(("S", a), ("S", b)), m)
        tgt = shape_module(p, n, _blocks(("S", a + b)), m)
        mat = _compose_lift_project(src, tgt)
    elif kind == "ext_mult":
        src = shape_module(p, n, _blocks(("L", a), ("L", b)), m)
        tgt = shape_module(p, n, _blocks(("L", a + b)), m)
        mat = _compose_lift_project(src, tgt)
    elif kind == "koszul_diff":
        if a < 1:
            raise SemanticError("koszul_diff needs a divided-power slot to move")
        src = shape_module(p, n, _blocks(("G", a), ("L", b)), m)
        tgt = shape_module(p, n, _blocks(("G", a - 1), ("L", b + 1)), m)
        mat = _compose_lift_project(src, tgt)
    elif kind == "dual_koszul_diff":
        if a < 1:
            raise SemanticError("dual_koszul_diff needs an exterior slot to move")
        src = shape_module(p, n, _blocks(("L", a), ("S", b)), m)
        tgt = shape_module(p, n, _blocks(("L", a - 1), ("S", b + 1)), m)
        mat = _lambda_comult_matrix(src, tgt, a, b, p)
    else:
        raise ValueError(f"unknown canonical map kind {kind!r}")
    nat = NaturalMap(src, tgt, mat)
    if check:
        check_equivariance(mat, src, tgt)
    return nat


def _lambda_comult_matrix(src: ShapeModule, tgt: ShapeModule, a: int, b: int,
                          p: int) -> np.ndarray:
    """Comultiply one letter out of the exterior block into the symmetric
    one, with the alternating sign that makes the squares cancel."""
    mat = fp.zeros(tgt.dim, src.dim)
    for idx in range(src.dim):
        tup = src.basis_tuple(idx)
        lam_part = tup[0]
        sym_part = tup[1] if b > 0 else ()
        for s, letter in enumerate(lam_part):
            rest = lam_part[:s] + lam_part[s + 1:]
            new_sym = tuple(sorted(sym_part + (letter,)))
            if a - 1 > 0:
                t_tup = (rest, new_sym)
            else:
                t_tup = (new_sym,)
            sign = 1 if s % 2 == 0 else -1
            t_idx = tgt.basis_index(t_tup)
            mat[t_idx, idx] = (mat[t_idx, idx] + sign) % p
    return mat


def _tableau_composite(lam: tuple[int, ...], p: int, check: bool = True,
                       n: int | None = None) -> NaturalMap:
    lam = young.check_partition(lam)
    d = sum(lam)
    if n is None:
        n = d
    conj = young.conjugate(lam)
    src = shape_module(p, n, _blocks(*(("L", c) for c in conj)))
    tgt = shape_module(p, n, _blocks(*(("S", r) for r in lam)))
    # slot bookkeeping: source slots read down columns, target slots along rows
    col_offsets = [0]
    for c in conj[:-1]:
        col_offsets.append(col_offsets[-1] + c)
    row_offsets = [0]
    for r in lam[:-1]:
        row_offsets.append(row_offsets[-1] + r)
    source_slot_of_cell = {}
    target_slot_of_cell = {}
    for c, height in enumerate(conj):
        for r in range(height):
            source_slot_of_cell[(r, c)] = col_offsets[c] + r
    for r, width in enumerate(lam):
        for c in range(width):
            target_slot_of_cell[(r, c)] = row_offsets[r] + c
    mat = fp.zeros(tgt.dim, src.dim)
    for idx in range(src.dim):
        tup = src.basis_tuple(idx)
        expansions = []
        for column in tup:
            signed = []
            base = list(column)
            for perm in distinct_permutations(tuple(range(len(base)))):
                sign = _perm_sign(perm)
                signed.append((tuple(base[k] for k in perm), sign))
            expansions.append(signed)
        for combo in _product(expansions):
            letters = {}
            sign = 1
            for c, (arranged, s) in enumerate(combo):
                sign *= s
                for r, letter in enumerate(arranged):
                    letters[(r, c)] = letter
            target_blocks = []
            for r, width in enumerate(lam):
                row_letters = tuple(sorted(letters[(r, c)] for c in range(width)))
                target_blocks.append(row_letters)
            t_idx = tgt.basis_index(tuple(target_blocks))
            mat[t_idx, idx] = (mat[t_idx, idx] + sign) % p
    nat = NaturalMap(src, tgt, mat)
    if check:
        check_equivariance(mat, src, tgt)
    return nat


def _perm_sign(perm: tuple[int, ...]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _product(lists):
    if not lists:
        yield ()
        return
    for head in lists[0]:
        for rest in _product(lists[1:]):
            yield (head,) + rest


# Schur, Weyl and simple functors -------------------------------------------


def schur_weyl_simple(lam: tuple[int, ...], which: str, p: int,
                      n: int | None = None) -> ModuleRep:
    """schur = image of the tableau composite; weyl = its Kuhn dual;
    simple = image of the (unique up to scalar) map weyl -> schur."""
    lam = young.check_partition(tuple(lam))
    if n is None:
        n = sum(lam)
    key = (lam, which, p, n)
    with _cache_lock:
        hit = _simple_cache.get(key)
    if hit is not None:
        return hit
    if which == "schur":
        nat = _tableau_composite(lam, p, check=True, n=n)
        rows = fp.image_basis(nat.matrix, p)
        mod: ModuleRep = SubmoduleModule(nat.target, rows)
    elif which == "weyl":
        mod = DualModule(schur_weyl_simple(lam, "schur", p, n=n))
    elif which == "simple":
        schur = schur_weyl_simple(lam, "schur", p, n=n)
        weyl = schur_weyl_simple(lam, "weyl", p, n=n)
        maps = hom_space(weyl, schur)
        if len(maps) != 1:
            raise SpfextError(
                f"Hom(weyl, schur) for {lam} at p={p} has dimension "
                f"{len(maps)}, expected 1")
        rows = fp.image_basis(maps[0], p)
        mod = SubmoduleModule(schur, rows)
    else:
        raise ValueError(f"unknown constructor {which!r}")
    with _cache_lock:
        _simple_cache.setdefault(key, mod)
        return _simple_cache[key]
