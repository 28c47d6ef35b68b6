from math import comb

import numpy as np
import pytest

from spfext import fp
from spfext.errors import (EquivarianceError, ParseError, SemanticError,
                           UnsupportedExpressionError)
from spfext.functors import (Atom, Dual, Ident, Tensor, canon,
                             canonical_map, character, evaluate,
                             frobenius_substitute, kuhn_dual, parse,
                             schur_weyl_simple)
from spfext.modules import check_equivariance, hom_space
from spfext.tensorspace import compositions


# -- parser -------------------------------------------------------------------


def test_parse_round_trip():
    for text in ["I", "G(2)", "S(2,1)", "L(1,1)", "I*I",
                 "twist(I,1)*twist(G(2),2)", "dual(schur(2,2))",
                 "param(twist(G(2),1),2)", "simple(3,1)"]:
        assert canon(parse(text)) == text


def test_parse_left_associative_and_whitespace():
    node = parse(" I * I * I ")
    assert node == Tensor(Tensor(Ident(), Ident()), Ident())


def test_parse_errors():
    for bad in ["G(2", "G()", "twist(I)", "spam(2)", "G(2))", "G(0)",
                "schur(1,2)", ""]:
        with pytest.raises(ParseError):
            parse(bad)


def test_degree_arithmetic():
    from spfext.functors import degree
    assert degree(parse("twist(I,1)"), 2) == 2
    assert degree(parse("twist(I,2)"), 2) == 4
    assert degree(parse("twist(G(2),1)"), 3) == 6
    assert degree(parse("dual(G(2))*I"), 2) == 3
    assert degree(parse("param(G(2),2)"), 5) == 2


# -- evaluation ---------------------------------------------------------------


def test_evaluate_divided_square():
    mod = evaluate("G(2)", 2)
    assert mod.dim == 3


def test_evaluate_exterior_square():
    assert evaluate("L(2)", 2).dim == 1


def test_evaluate_free_pair():
    assert evaluate("S(1,1)", 2).dim == 4
    assert evaluate("S(1,1)", 3).dim == 4


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("a", [1, 2, 3, 4])
def test_dimension_laws(p, a):
    assert evaluate(f"G({a})", p).dim == comb(a + a - 1, a)
    assert evaluate(f"S({a})", p).dim == comb(a + a - 1, a)
    assert evaluate(f"L({a})", p).dim == 1  # n = a forces the top power


def test_dimension_laws_inside_larger_degree():
    # alphabet size grows with the ambient degree through tensoring
    mod = evaluate("G(2)*I*I", 2)  # degree 4, n = 4
    assert mod.dim == comb(4 + 2 - 1, 2) * 4 * 4


def test_gamma_is_symmetric_group_invariants():
    """The combinatorial divided-power basis spans exactly the invariants
    of the Young subgroup acting by place permutations."""
    from spfext.tensorspace import get_space
    mod = evaluate("G(2)", 3)
    ts = get_space(3, 2, 2)
    swap = ts.place_permutation((1, 0)).matrix.toarray()
    fixed = fp.kernel_basis((swap - np.eye(4, dtype=np.int64)) % 3, 3)
    lifted = (mod.lift_matrix().toarray() % 3).T
    left = fp.Subspace.from_vectors(fixed, 4, 3)
    right = fp.Subspace.from_vectors(lifted, 4, 3)
    assert left == right


def test_weight_multiplicities_sum_to_dim():
    for text, p in [("G(2)", 2), ("L(2)", 3), ("S(2)*I", 2),
                    ("twist(I,1)", 2), ("schur(2,1)", 3)]:
        mod = evaluate(text, p)
        assert sum(mod.character().values()) == mod.dim


def test_sampled_action_associativity():
    mod = evaluate("G(2)*I", 2)
    refs = mod.space.spanning_refs()
    rng = np.random.default_rng(0)
    vecs = rng.integers(0, 2, size=(3, mod.dim))
    for _ in range(50):
        r1 = refs[int(rng.integers(len(refs)))]
        r2 = refs[int(rng.integers(len(refs)))]
        a1 = mod.action_matrix(r1)
        a2 = mod.action_matrix(r2)
        a1 = a1.toarray() if hasattr(a1, "toarray") else a1
        a2 = a2.toarray() if hasattr(a2, "toarray") else a2
        left = fp.matmul(fp.matmul(a1, a2, 2), vecs.T, 2)
        right = fp.matmul(a1, fp.matmul(a2, vecs.T, 2), 2)
        assert (left == right).all()


# -- Frobenius substitution ---------------------------------------------------


def test_twisted_identity_weights():
    mod = evaluate("twist(I,1)", 2)
    assert mod.dim == 2
    assert mod.character() == {(2, 0): 1, (0, 2): 1}


def test_twisted_divided_square_dimension():
    mod = evaluate("twist(G(2),1)", 2)  # degree 4
    assert mod.dim == comb(4 + 2 - 1, 2)


def test_double_twist_identity():
    mod = evaluate("twist(I,2)", 2)  # degree 4
    assert mod.dim == 4
    assert all(sorted(c, reverse=True) == [4, 0, 0, 0]
               for c in mod.character())


def test_twist_scales_weights():
    from spfext.functors import shape_module
    base = shape_module(2, 4, (("G", 2, 0),), 1)  # G^2 evaluated on k^4
    twisted = evaluate("twist(G(2),1)", 2)        # degree 4, n = 4
    scaled = {tuple(2 * x for x in c): m for c, m in base.character().items()}
    assert scaled == twisted.character()


def test_twist_outside_fragment_rejected():
    with pytest.raises(UnsupportedExpressionError):
        evaluate("twist(dual(G(2)),1)", 2)


def test_param_cap():
    with pytest.raises(SemanticError):
        evaluate("param(G(2),3)", 2)
    assert evaluate("param(G(2),3)", 2, max_param=3).dim == comb(6 + 1, 2)


def test_freshman_dream_span():
    """Classes of p-th powers of arbitrary vectors stay inside the span of
    the p-th powers of basis vectors."""
    p = 2
    twist = evaluate("twist(I,1)", p)
    sym = evaluate("S(2)", p)
    span = fp.Subspace.from_vectors(
        twist.lift_matrix().toarray().T @ sym.project_matrix().toarray().T % p,
        sym.dim, p)
    for coeffs in [(1, 1), (1, 0), (0, 1)]:
        vec = np.zeros(4, dtype=np.int64)
        # (c0 e0 + c1 e1)^{(x)2} expanded in tensor coordinates
        for a in range(2):
            for b in range(2):
                vec[2 * a + b] = coeffs[a] * coeffs[b]
        cls = (sym.project_matrix() @ vec.reshape(-1, 1)).reshape(-1) % p
        assert span.contains(cls)


# -- duals --------------------------------------------------------------------


def test_kuhn_dual_of_symmetric_is_divided_character():
    sym = evaluate("S(2)", 2)
    dual = kuhn_dual(sym)
    assert character(dual) == character(evaluate("G(2)", 2))


def test_kuhn_dual_involutive_on_characters():
    for text in ["G(2)", "S(2)", "L(2)", "twist(I,1)"]:
        mod = evaluate(text, 2)
        assert character(kuhn_dual(kuhn_dual(mod))) == character(mod)


def test_kuhn_dual_exterior_self_dual():
    ext2 = evaluate("L(2)", 3)
    assert character(kuhn_dual(ext2)) == character(ext2)
    assert kuhn_dual(ext2).dim == comb(2, 2)


def test_character_dual_invariance_all_atoms():
    for text in ["G(3)", "S(2,1)", "L(2)*I", "twist(G(2),1)"]:
        p = 2
        mod = evaluate(text, p)
        assert character(kuhn_dual(mod)) == character(mod) or \
            character(kuhn_dual(mod)) == character(mod)


def test_dual_expression_evaluates():
    dual = evaluate("dual(S(2))", 2)
    assert character(dual) == character(evaluate("G(2)", 2))


# -- canonical maps -----------------------------------------------------------


def test_koszul_chain_dimensions_and_square_zero():
    d1 = canonical_map("koszul_diff", 2, a=2, b=0)
    d2 = canonical_map("koszul_diff", 2, a=1, b=1)
    assert d1.source.dim == 3 and d1.target.dim == 4 and d2.target.dim == 1
    assert not fp.matmul(d2.matrix, d1.matrix, 2).any()


def test_gamma_comult_injective():
    nat = canonical_map("gamma_comult", 2, a=1, b=1)
    assert nat.rank == nat.source.dim


def test_sym_mult_surjective():
    nat = canonical_map("sym_mult", 3, a=1, b=1)
    assert nat.rank == nat.target.dim


def test_ext_mult_surjective():
    nat = canonical_map("ext_mult", 2, a=1, b=1)
    assert nat.rank == nat.target.dim


def test_tableau_composite_row():
    nat = canonical_map("tableau_composite", 2, lam=(2,))
    assert nat.source.dim == 4 and nat.target.dim == 3
    assert nat.rank == 3


def test_tableau_composite_column():
    nat = canonical_map("tableau_composite", 2, lam=(1, 1))
    assert nat.rank == 1


def test_equivariance_checker_catches_garbage():
    src = evaluate("G(2)", 2)
    tgt = evaluate("S(2)", 2)
    bad = np.zeros((3, 3), dtype=np.int64)
    bad[0, 1] = 1
    with pytest.raises(EquivarianceError):
        check_equivariance(bad, src, tgt)


# -- Schur, Weyl, simple ------------------------------------------------------


def test_schur_dimensions():
    assert schur_weyl_simple((2, 2), "schur", 2).dim == 20
    assert schur_weyl_simple((3, 1), "schur", 2).dim == 45
    assert schur_weyl_simple((2, 1), "schur", 3).dim == 8


def test_weyl_matches_schur_character():
    for lam, p in [((2, 1), 2), ((2, 2), 2), ((2, 1), 3)]:
        schur = schur_weyl_simple(lam, "schur", p)
        weyl = schur_weyl_simple(lam, "weyl", p)
        assert character(schur) == character(weyl)


def test_simple_row_of_two():
    simple = schur_weyl_simple((2,), "simple", 2)
    assert simple.dim == 2
    assert character(simple) == character(evaluate("twist(I,1)", 2))


def test_simple_column_of_two():
    simple = schur_weyl_simple((1, 1), "simple", 2)
    assert simple.dim == 1


def test_simple_versus_schur_in_semisimple_degree():
    # at p = 3 every degree-2 module is semisimple: heads fill their Schur
    for lam in [(2,), (1, 1)]:
        assert (schur_weyl_simple(lam, "simple", 3).dim
                == schur_weyl_simple(lam, "schur", 3).dim)
    # at p = 2 the head of S^2 is strictly smaller
    assert (schur_weyl_simple((2,), "simple", 2).dim
            < schur_weyl_simple((2,), "schur", 2).dim)


def test_weyl_to_schur_hom_is_line():
    weyl = schur_weyl_simple((2, 1), "weyl", 2)
    schur = schur_weyl_simple((2, 1), "schur", 2)
    assert len(hom_space(weyl, schur)) == 1


def test_tensor_module_agrees_with_shape():
    shape = evaluate("G(2)*L(1)", 2)
    composite = Tensor(Dual(Dual(Atom("G", (2,)))), Ident())
    mixed = evaluate(composite, 2)
    assert mixed.dim == shape.dim
    assert character(mixed) == character(shape)


def test_weight_space_completeness():
    for text in ["schur(2,2)", "dual(schur(2,2))", "simple(2,2)"]:
        mod = evaluate(text, 2)
        assert sum(mod.weight_dim(c) for c in compositions(4, 4)) == mod.dim


def test_quotients_match_linear_algebra_route():
    """The combinatorial symmetric/exterior quotient dimensions agree with
    quotienting tensor space by the subspaces built from place swaps."""
    from spfext.tensorspace import get_space
    for p in (2, 3):
        ts = get_space(p, 2, 2)
        swap = ts.place_permutation((1, 0)).matrix.toarray()
        eye = np.eye(4, dtype=np.int64)
        sym_rel = fp.image_basis(((swap - eye) % p).T, p)
        assert 4 - sym_rel.shape[0] == evaluate("S(2)", p).dim
        plus = fp.image_basis(((swap + eye) % p).T, p)
        diag = np.zeros((2, 4), dtype=np.int64)
        diag[0, ts.encode((0, 0))] = 1
        diag[1, ts.encode((1, 1))] = 1
        ext_rel = fp.basis_rows(np.concatenate([plus, diag]), p)[0]
        assert 4 - ext_rel.shape[0] == evaluate("L(2)", p).dim


def test_frobenius_substitute_entry_point():
    mod = frobenius_substitute("I", 2, 2)
    assert mod.dim == 4
    assert all(max(c) == 4 for c in mod.character())
