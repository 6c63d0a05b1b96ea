import json
from collections import Counter
from fractions import Fraction

import pytest

from rgbforge.dgalg import Field, check_d_squared, class_is_coboundary, lin_add, truncated_cohomology
from rgbforge.ginzburg import (GinzburgError, arrow_multiset, build_Gnm, build_Qnn, covering_quotient_check,
                               cyclic_quotient, glue_ginzburg, local_boundary, local_interior, quot1_cover,
                               reduce_ginzburg, sheet_projection)
from rgbforge.koszul import cobar, compare_presentations
from rgbforge.rgb import build_rgb
from rgbforge.sgraph import DEFAULT_N, SGraph, Vertex, fixture_path, load_fixture

PAIRS = [(2, 1), (3, 1), (3, 3), (4, 1), (4, 2), (6, 2), (6, 3)]


def _degs(P):
    return {a.id: a.degree for a in P.arrows.values()}


# --- Q_{n,n} -----------------------------------------------------------------------------------------

def test_qnn_degrees_n3():
    d = _degs(build_Qnn(3).presentation)
    assert d["alpha_2,1"] == 0 and d["alpha_1,2"] == -1
    assert d["l_1"] == -1 and d["L_1"] == -2


def test_qnn_n2():
    P = build_Qnn(2).presentation
    d = _degs(P)
    assert len(P.quiver.vertices) == 2
    # d(L_i) contains alpha_{j,i} alpha_{i,j} and has degree 2 - n = 0, so the two
    # alpha degrees sum to 0; the degree formula puts both at 0
    assert (d["alpha_1,2"], d["alpha_2,1"]) == (0, 0)
    assert d["l_1"] == 0 and d["L_1"] == -1


def test_qnn_degree_formula():
    for n in range(2, 8):
        d = _degs(build_Qnn(n).presentation)
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if i != j:
                    assert d[f"alpha_{i},{j}"] == (j - i + 1 if j < i else j - i + 1 - n)


def test_qnn_n1_rejected():
    with pytest.raises(GinzburgError):
        build_Qnn(1)


def test_designated_loops_closed():
    for n, m in PAIRS:
        G = build_Gnm(n, m)
        for l in G.designated.values():
            assert G.presentation.differential[l] == {}


# --- cyclic quotients ----------------------------------------------------------------------------------

def test_quotient_q44_by_2():
    G = cyclic_quotient(build_Qnn(4), 2)
    ids = list(G.presentation.arrows)
    assert len(G.presentation.quiver.vertices) == 2
    assert sum(1 for a in ids if a.startswith("alpha")) == 6
    assert sum(1 for a in ids if a.startswith("l_")) == 2
    assert sum(1 for a in ids if a.startswith("L_")) == 2


def test_quotient_identity():
    Q = build_Qnn(3)
    assert cyclic_quotient(Q, 3) is Q


def test_quotient_characteristic_guard():
    with pytest.raises(GinzburgError, match="characteristic"):
        cyclic_quotient(build_Qnn(6), 2, Field(3))
    cyclic_quotient(build_Qnn(6), 2, Field(5))


def test_quotient_non_divisor():
    with pytest.raises(GinzburgError):
        cyclic_quotient(build_Qnn(6), 4)


@pytest.mark.parametrize("n,m", PAIRS)
def test_quotient_compatibility(n, m):
    """The image of d(lift) under the orbit map equals d(image), arrow by arrow."""
    Q, G = build_Qnn(n), build_Gnm(n, m)
    res = lambda v: str((int(v) - 1) % m + 1)

    def image(gid):
        key = Q.info[gid]
        k = ("alpha", res(key[1]), res(key[2]), key[3]) if key[0] == "alpha" else (key[0], res(key[1]))
        hits = [g for g, kk in G.info.items() if kk == k]
        assert len(hits) == 1
        return hits[0]

    for gid in Q.presentation.arrows:
        d: dict = {}
        for w, c in Q.presentation.differential[gid].items():
            lin_add(d, tuple(image(x) for x in w), c)
        assert d == G.presentation.differential[image(gid)]
    assert len(G.presentation.arrows) * (n // m) == len(Q.presentation.arrows)


@pytest.mark.parametrize("n,m", PAIRS)
def test_d_squared_gnm(n, m):
    assert check_d_squared(build_Gnm(n, m).presentation).ok


@pytest.mark.parametrize("n,m", [(3, 1)])
def test_cohomology_target_small(n, m):
    G = build_Gnm(n, m)
    lo = 3 * (2 - n) + 1
    dims = truncated_cohomology(G.presentation, cap=8, window=(lo, 1), weights=G.weights()).at_cap()
    for t in range(lo, 2):
        want = 2 * m if t in (0, 2 - n, 2 * (2 - n)) else 0
        assert dims[t] == (want, True)


@pytest.mark.parametrize("n,m", [(2, 1), (3, 1), (3, 3), (4, 1), (4, 2)])
def test_class_relation(n, m):
    G = build_Gnm(n, m)
    res = lambda k: str((k - 1) % m + 1)
    for i in range(1, m + 1):
        a = [g for g, key in G.info.items() if key == ("alpha", res(i + 1), res(i), 1)][0]
        x: dict = {}
        lin_add(x, (a, f"l_{res(i + 1)}"), Fraction(1))
        lin_add(x, (f"l_{res(i)}", a), Fraction(-(-1) ** n))
        assert class_is_coboundary(G.presentation, x, cap=8, weights=G.weights())


# --- local pieces ------------------------------------------------------------------------------------

def test_local_interior_full_valency():
    L = local_interior(3, 3, (1, 1, 1))
    assert compare_presentations(L.presentation, build_Gnm(3, 3).presentation).isomorphic


def test_local_interior_pruned():
    L = local_interior(3, 3, (1, 2))
    P = L.presentation
    assert sorted(P.quiver.vertices) == ["1", "2"]
    assert check_d_squared(P).ok
    # d(L_1) in G_{3,3} has the terms alpha_{2,1}alpha_{1,2} and alpha_{3,1}alpha_{1,3}; only the first survives
    G = build_Gnm(3, 3).presentation
    kept = {w: c for w, c in G.differential["L_1"].items() if all(x in P.arrows for x in w)}
    assert P.differential["L_1"] == kept
    assert len(G.differential["L_1"]) == 3 and len(kept) == 2


def test_local_interior_monogon_n4():
    L = local_interior(4, 1, (1,))
    P = L.presentation
    assert P.quiver.vertices == ["1"] or list(P.quiver.vertices) == ["1"]
    assert all(a.source == a.target for a in P.arrows.values())
    assert check_d_squared(P).ok


def test_local_interior_bad_corners():
    with pytest.raises(GinzburgError):
        local_interior(3, 3, (1, 1))


def test_local_boundary_n2():
    P = local_boundary(2, (1,)).presentation
    d = _degs(P)
    assert d == {"alpha_2,1": 0, "beta_1,1": 0, "beta_2,2": 0, "beta_2,1": -1}


def test_local_boundary_single():
    P = local_boundary(3, ()).presentation
    assert _degs(P) == {"beta_1,1": -1}


def test_local_boundary_three():
    L = local_boundary(3, (1, 1))
    d = _degs(L.presentation)
    assert sorted(v for k, v in d.items() if k.startswith("alpha")) == [-1, 0, 0]
    assert {d[f"beta_{i},{i}"] for i in (1, 2, 3)} == {-1}
    assert sorted(d[k] for k in ("beta_2,1", "beta_3,2", "beta_3,1")) == [-3, -2, -2]
    assert check_d_squared(L.presentation).ok
    assert set(L.designated.values()) == {"beta_1,1", "beta_2,2", "beta_3,3"}


# --- gluing and reduction ------------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["SG-A", "SG-B", "SG-C", "SG-E1", "SG-E2", "SG-M", "SG-O", "quot1"])
def test_glue_reduce_d_squared(name):
    G = glue_ginzburg(load_fixture(name), DEFAULT_N[name])
    assert check_d_squared(G.presentation).ok
    for mode in ("discard", "eliminate", "keep"):
        assert check_d_squared(reduce_ginzburg(G, mode)).ok


def test_glued_loops_identified():
    S = load_fixture("SG-C")
    G = glue_ginzburg(S, 3)
    assert len(G.loops_l) == 7
    for l in G.loops_l.values():
        assert G.presentation.differential[l] == {}


def test_reduced_sgc_shape():
    R = reduce_ginzburg(glue_ginzburg(load_fixture("SG-C"), 3))
    assert len(R.quiver.vertices) == 7
    loops = sorted(a.id for a in R.arrows.values() if a.source == a.target)
    assert loops == ["L_2", "L_4"]


def test_reduced_sga_matches_cobar():
    S = load_fixture("SG-A")
    R = reduce_ginzburg(glue_ginzburg(S, 3))
    assert compare_presentations(R, cobar(build_rgb(S, 3).algebra)).isomorphic


def test_reduced_int_int_merge_rule():
    """d(L_e) = d(L) - d(L') on an interior-interior edge, with l_e removed."""
    S = load_fixture("SG-A")
    G = glue_ginzburg(S, 3)
    R = reduce_ginzburg(G)
    for e, l in G.loops_l.items():
        assert l not in R.arrows
    for lid in (a for a in R.arrows if a.startswith("L_")):
        assert all(l not in w for w in R.differential[lid] for l in G.loops_l.values())


def test_quot1_loop_count_from_definitions():
    """Edge 5 joins the degree-2 vertex (2-valent, n/m = 2) and the degree-1 monogon
    (n/m = 4): the first contributes one alpha loop per halfedge, the second three."""
    R = reduce_ginzburg(glue_ginzburg(load_fixture("quot1"), 4))
    loops = Counter(a.source for a in R.arrows.values() if a.source == a.target and a.id.startswith("alpha"))
    assert loops == Counter({"4": 1, "5": 4})


def test_arrow_multiset_sorted():
    R = reduce_ginzburg(glue_ginzburg(load_fixture("SG-B"), 2))
    ms = arrow_multiset(R)
    assert ms == sorted(ms) and len(ms) == len(R.arrows)


def test_glue_rejects_n1():
    with pytest.raises(GinzburgError):
        glue_ginzburg(load_fixture("SG-E1"), 1)


def test_mixed_mode_validation():
    with pytest.raises(ValueError):
        reduce_ginzburg(glue_ginzburg(load_fixture("SG-B"), 2), "bogus")


# --- coverings -----------------------------------------------------------------------------------------

def _action():
    with open(fixture_path("quot1-cover-action"), encoding="utf-8") as fh:
        return json.load(fh)


def test_cover_fixture_matches_generator():
    S = load_fixture("quot1")
    Sc, action = quot1_cover(S)
    assert Sc == load_fixture("quot1-cover")
    assert action == _action()


def test_covering_check_quot1():
    rep = covering_quotient_check(load_fixture("quot1-cover"), _action(), load_fixture("quot1"), 4)
    assert rep.ok and rep.orbits == len(load_fixture("quot1").halfedges)


def test_covering_check_trivial_action():
    S = load_fixture("SG-C")
    ident = {h: h for h in S.halfedges}
    rep = covering_quotient_check(S, {"generators": [ident], "projection": ident}, S, 3)
    assert rep.ok


def test_covering_check_boundary_projection_order():
    S = load_fixture("SG-B")
    b = next(v for v in S.vertices.values() if not v.internal and len(v.halfedges) == 2)
    ident = {h: h for h in S.halfedges}
    assert covering_quotient_check(S, {"generators": [ident], "projection": ident}, S, 2).ok
    a, c = b.halfedges
    swapped = dict(ident, **{a: c, c: a})
    rep = covering_quotient_check(S, {"generators": [ident], "projection": swapped}, S, 2)
    assert not rep.ok


def test_covering_check_mismatched_corners():
    S = load_fixture("quot1")
    B = S.vertices["B"]
    swapped = Vertex(B.id, B.kind, (B.halfedges[1], B.halfedges[0]) + B.halfedges[2:], B.corners)
    S2 = SGraph([swapped if v.id == "B" else v for v in S.vertices.values()], S.pairing)
    rep = covering_quotient_check(load_fixture("quot1-cover"), _action(), S2, 4)
    assert not rep.ok and rep.failures


def test_covering_check_requires_degree_n():
    S = load_fixture("quot1")
    ident = {h: h for h in S.halfedges}
    rep = covering_quotient_check(S, {"generators": [ident], "projection": ident}, S, 4)
    assert not rep.ok


def test_covering_check_bad_generator():
    action = _action()
    g = dict(action["generators"][0])
    k = sorted(g)[0]
    g.pop(k)
    rep = covering_quotient_check(load_fixture("quot1-cover"), {"generators": [g],
                                  "projection": action["projection"]}, load_fixture("quot1"), 4)
    assert not rep.ok


def test_sheet_projection_consistent():
    Sc = load_fixture("quot1-cover")
    proj = sheet_projection(Sc)
    S = load_fixture("quot1")
    assert set(proj.values()) == set(S.halfedges)
    assert Counter(proj.values()) == Counter({h: 4 for h in S.halfedges})


@pytest.mark.parametrize("name", ["SG-A", "SG-B", "SG-C", "SG-M", "SG-E2"])
def test_keep_mode_matches_cobar(name):
    """Keeping both loops on interior-boundary edges recovers the cobar dual."""
    S, n = load_fixture(name), DEFAULT_N[name]
    R = reduce_ginzburg(glue_ginzburg(S, n), "keep")
    assert compare_presentations(R, cobar(build_rgb(S, n).algebra)).isomorphic
