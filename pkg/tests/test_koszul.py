import random
from fractions import Fraction

import pytest

from rgbforge.acceptance import printed_dual_sga, printed_dual_sgb, random_compatible
from rgbforge.dgalg import (AlgebraError, Arrow, CapExceeded, FinDimDgAlgebra, FreeDgPresentation, GradedQuiver,
                            check_d_squared, lin_add)
from rgbforge.ginzburg import build_Qnn
from rgbforge.koszul import cobar, closed_form_dual, compare_presentations, dual_id, op
from rgbforge.rgb import build_rgb
from rgbforge.sgraph import DEFAULT_N, load_fixture

from helpers import leibniz_samples

FIXTURES = ["SG-A", "SG-B", "SG-C", "SG-E1", "SG-E2", "SG-M", "SG-O", "quot1"]


def _copy(P, rename=None, scale=None):
    """Relabel arrows by ``rename`` and rescale generators by ``scale`` (g -> s g)."""
    rename = rename or {}
    scale = scale or {}
    r = lambda a: rename.get(a, a)
    arrows = [Arrow(r(a.id), a.source, a.target, a.degree) for a in P.arrows.values()]
    diff = {}
    for g, dx in P.differential.items():
        out = {}
        for w, c in dx.items():
            f = Fraction(scale.get(g, 1))
            for x in w:
                f /= scale.get(x, 1)
            lin_add(out, tuple(r(x) for x in w), c * f)
        diff[r(g)] = out
    return FreeDgPresentation(GradedQuiver(list(P.quiver.vertices), arrows), diff, "copy")


# --- cobar -----------------------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["SG-A", "SG-B", "SG-M"])
def test_cobar_degrees_are_shifted(name):
    A = build_rgb(load_fixture(name), DEFAULT_N[name]).algebra
    P = cobar(A)
    aug = A.augmentation_ideal()
    assert len(P.arrows) == len(aug)
    for i in aug:
        b = A.basis[i]
        a = P.arrows[dual_id(b.label)]
        assert a.degree == 1 - b.degree
        assert (a.source, a.target) == (b.target, b.source)


@pytest.mark.parametrize("name,n,printed", [("SG-A", 3, printed_dual_sga), ("SG-B", 2, printed_dual_sgb)])
def test_cobar_matches_printed_dual(name, n, printed):
    P = cobar(build_rgb(load_fixture(name), n).algebra)
    assert compare_presentations(printed(), op(P)).isomorphic


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_cobar_single_edge(n):
    P = cobar(build_rgb(load_fixture("SG-E1"), n).algebra)
    (a,) = P.arrows.values()
    assert a.source == a.target and a.degree == 2 - n
    assert P.differential[a.id] == {}


def test_cobar_rejects_non_nilpotent():
    # one vertex with an invertible degree-0 element x, x^2 = e
    from rgbforge.dgalg import BasisElement
    basis = [BasisElement("e_1", "1", "1", 0, "e", ()), BasisElement("x", "1", "1", 0, "x", ("x",))]
    prod = {(0, 0): {0: Fraction(1)}, (0, 1): {1: Fraction(1)}, (1, 0): {1: Fraction(1)}, (1, 1): {0: Fraction(1)}}
    A = FinDimDgAlgebra(basis, {"1": 0}, prod, {})
    with pytest.raises(AlgebraError, match="nilpotent"):
        cobar(A)


def test_cobar_d_squared_random():
    rng = random.Random(611)
    for _ in range(200):
        S, n = random_compatible(rng, max_edges=5)
        assert check_d_squared(cobar(build_rgb(S, n).algebra)).ok


# --- closed form ----------------------------------------------------------------------------------

@pytest.mark.parametrize("name,n,printed", [("SG-A", 3, printed_dual_sga), ("SG-B", 2, printed_dual_sgb)])
def test_closed_form_matches_printed_dual(name, n, printed):
    D = closed_form_dual(load_fixture(name), n).presentation
    rep = compare_presentations(printed(), op(D))
    assert rep.isomorphic
    assert all(abs(c) == 1 for _, c in rep.matching.values())


def test_closed_form_single_edge_n4():
    D = closed_form_dual(load_fixture("SG-E1"), 4).presentation
    (a,) = D.arrows.values()
    assert a.id.startswith("t_") and a.degree == -2 and D.differential[a.id] == {}


def test_closed_form_sga_signs():
    D = closed_form_dual(load_fixture("SG-A"), 3).presentation
    assert len(D.arrows) == 6
    assert sorted(a.degree for a in D.arrows.values()) == [-2, -2, -1, -1, 0, 0]


def test_closed_form_incompatible():
    from rgbforge.sgraph import SGraphError
    with pytest.raises(SGraphError):
        closed_form_dual(load_fixture("SG-A"), 4)


@pytest.mark.parametrize("name", FIXTURES)
def test_closed_form_agrees_with_cobar_fixtures(name):
    S, n = load_fixture(name), DEFAULT_N[name]
    D = closed_form_dual(S, n).presentation
    assert check_d_squared(D).ok
    assert compare_presentations(cobar(build_rgb(S, n).algebra), D).isomorphic


def test_closed_form_agrees_with_cobar_random():
    rng = random.Random(612)
    for _ in range(50):
        S, n = random_compatible(rng, max_edges=5)
        rep = compare_presentations(cobar(build_rgb(S, n).algebra), closed_form_dual(S, n).presentation)
        assert rep.isomorphic, rep.mismatches[:2]


@pytest.mark.parametrize("name", ["SG-A", "SG-B", "SG-M", "SG-C"])
def test_closed_form_leibniz(name):
    D = closed_form_dual(load_fixture(name), DEFAULT_N[name]).presentation
    assert leibniz_samples(D, random.Random(3), 500) == []


# --- comparison -----------------------------------------------------------------------------------

def test_compare_identity():
    P = closed_form_dual(load_fixture("SG-A"), 3).presentation
    rep = compare_presentations(P, P)
    assert rep.isomorphic
    assert all(c == 1 for _, c in rep.matching.values())


def test_compare_distinguishes():
    a = closed_form_dual(load_fixture("SG-A"), 3).presentation
    b = closed_form_dual(load_fixture("SG-B"), 2).presentation
    rep = compare_presentations(a, b)
    assert not rep.isomorphic and rep.mismatches


def test_compare_relabel_and_sign_flip():
    P = closed_form_dual(load_fixture("SG-B"), 2).presentation
    ids = sorted(P.arrows)
    rename = {a: f"g{k}" for k, a in enumerate(reversed(ids))}
    Q = _copy(P, rename, {ids[0]: -1, ids[-1]: -1})
    rep = compare_presentations(P, Q)
    assert rep.isomorphic
    assert {rep.matching[a][0] for a in ids} == set(rename.values())


def test_compare_rejects_scaled_coefficient():
    P = build_Qnn(3).presentation
    diff = {g: dict(dx) for g, dx in P.differential.items()}
    w, c = next(iter(diff["L_1"].items()))
    w2 = next(x for x in diff["L_1"] if x != w)
    diff["L_1"][w2] = 2 * diff["L_1"][w2]
    Q = FreeDgPresentation(P.quiver, diff, "scaled")
    assert not compare_presentations(P, Q).isomorphic


def test_compare_node_cap():
    P = build_Qnn(5).presentation
    with pytest.raises(CapExceeded):
        compare_presentations(P, P, node_cap=2)
