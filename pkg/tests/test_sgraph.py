import itertools
import json
import random

import pytest

from rgbforge.sgraph import (BACKWARD, BOUNDARY, FORWARD, INTERNAL, FlipError, SGraph, SGraphError, Vertex,
                             canonical_code, check_orientation, corner_distance, exchange_graph, flip,
                             from_angulation, is_isomorphic, load_fixture, mirror, orientability, parse_sgraph,
                             random_sgraph, relabel, ribbon_invariants, serialize_sgraph, to_angulation, validate)

FIXTURES = ["SG-A", "SG-B", "SG-C", "SG-E1", "SG-E2", "SG-M", "SG-O", "quot1", "quot1-cover"]
SEED = 7311


def _doc(vertices, edges):
    return json.dumps({"vertices": vertices, "edges": edges})


# --- parsing -----------------------------------------------------------------------------------

def test_parse_sga_shape():
    S = load_fixture("SG-A")
    assert len(S.vertices) == 3 and len(S.edges) == 2


@pytest.mark.parametrize("name", FIXTURES)
def test_serialize_parse_identity(name):
    S = load_fixture(name)
    text = serialize_sgraph(S)
    assert serialize_sgraph(parse_sgraph(text)) == text
    assert text.endswith("\n")


def test_empty_vertex_list_rejected():
    with pytest.raises(SGraphError, match="empty"):
        parse_sgraph(_doc([], []))


def test_pairing_fixed_point_rejected():
    doc = _doc([{"id": "v", "kind": "boundary", "halfedges": ["h"], "corners": []}], [["h", "h"]])
    with pytest.raises(SGraphError, match="fixed point"):
        parse_sgraph(doc)


def test_syntax_error_reports_position():
    with pytest.raises(SGraphError, match=r"line 1 column \d+"):
        parse_sgraph('{"vertices": [,]}')


def test_dangling_and_corner_mismatch():
    dangling = _doc([{"id": "v", "kind": "boundary", "halfedges": ["h", "g"], "corners": [1]},
                     {"id": "w", "kind": "boundary", "halfedges": ["k"], "corners": []}], [["h", "k"]])
    with pytest.raises(SGraphError, match="dangling"):
        parse_sgraph(dangling)
    mismatch = _doc([{"id": "v", "kind": "internal", "halfedges": ["h", "g"], "corners": [1]}], [["h", "g"]])
    with pytest.raises(SGraphError, match="corner-count"):
        parse_sgraph(mismatch)


# --- validation and distances --------------------------------------------------------------------

def test_validate_examples():
    A = load_fixture("SG-A")
    d = validate(A, 3)
    assert d.compatible and sorted(x for x in d.degrees.values()) == [1, 3, 3]
    assert not validate(A, 4).compatible
    B = load_fixture("SG-B")
    d = validate(B, 2)
    assert d.compatible and [x for x in d.degrees.values() if x is not None] == [2]
    assert not validate(A, 0).compatible


def test_corner_distance_examples():
    S = load_fixture("SG-A")
    # the 2-valent vertex carries halfedges 1q (edge 1) then 2q (edge 2)
    assert corner_distance(S, "1q", "2q") == 1
    assert corner_distance(S, "2q", "1q") == 2
    assert corner_distance(S, "1q", "1q") == 0
    with pytest.raises(SGraphError):
        corner_distance(S, "1q", "2s")


def test_corner_distance_boundary_order():
    S = load_fixture("SG-B")
    assert corner_distance(S, "2w", "1w") == 1
    with pytest.raises(SGraphError):
        corner_distance(S, "1w", "2w")


def test_corner_sum_law_random():
    rng = random.Random(SEED)
    for _ in range(200):
        S = random_sgraph(rng, 6)
        for v in S.internal_vertices():
            for a, b in itertools.permutations(v.halfedges, 2):
                assert corner_distance(S, a, b) + corner_distance(S, b, a) == v.degree


# --- orientations ---------------------------------------------------------------------------------

def _brute_orientable(S):
    for bits in itertools.product((0, 1), repeat=len(S.edges)):
        eps = {}
        for (a, b), x in zip(S.edges, bits):
            eps[a], eps[b] = x, 1 - x
        if not check_orientation(S, eps):
            return True
    return False


def test_orientability_examples():
    assert orientability(load_fixture("SG-A")) is None
    o = orientability(load_fixture("SG-E2"))
    assert o is not None and not check_orientation(load_fixture("SG-E2"), o.toward)


def test_orientability_forced_pattern():
    S = SGraph([Vertex("v", INTERNAL, ("a", "b"), (2, 2)),
                Vertex("p", INTERNAL, ("a2",), (4,)),
                Vertex("q", INTERNAL, ("b2",), (2,))],
               {"a": "a2", "a2": "a", "b": "b2", "b2": "b"})
    o = orientability(S)
    assert o is not None
    # even corner: both ends at v point the same way
    assert o["a"] == o["b"]
    assert o["a"] + o["a2"] == 1
    assert _brute_orientable(S)


def test_orientation_soundness_random():
    rng = random.Random(SEED + 1)
    for _ in range(300):
        S = random_sgraph(rng, 8)
        o = orientability(S)
        if o is None:
            assert not _brute_orientable(S)
        else:
            assert check_orientation(S, o.toward) == []


# --- angulations ----------------------------------------------------------------------------------

def test_to_angulation_sga():
    A = to_angulation(load_fixture("SG-A"))
    sides = {vid: [s[0] for s in p.sides] for vid, p in A.polygons.items()}
    assert sides == {"p": ["arc"], "q": ["arc", "arc", "B"], "s": ["arc", "B", "B"]}


def test_to_angulation_se1():
    A = to_angulation(load_fixture("SG-E1"))
    assert len(A.polygons) == 2
    for p in A.polygons.values():
        assert [s[0] for s in p.sides].count("arc") == 1 and p.sides[0][0] == "INF"


@pytest.mark.parametrize("name", FIXTURES)
def test_angulation_round_trip_fixtures(name):
    S = load_fixture(name)
    A = to_angulation(S)
    assert from_angulation(A) == S
    for vid, v in S.vertices.items():
        if v.internal:
            assert len(A.polygons[vid].sides) == v.degree


def test_angulation_round_trip_random():
    rng = random.Random(SEED + 2)
    for _ in range(1000):
        S = random_sgraph(rng, 10)
        assert from_angulation(to_angulation(S)) == S


# --- flips -----------------------------------------------------------------------------------------

def test_flip_inverse_on_sgc():
    S = load_fixture("SG-C")
    h = S.edge_halfedges(1)[0]
    for d, back in ((FORWARD, BACKWARD), (BACKWARD, FORWARD)):
        F = flip(S, 1, d)
        assert is_isomorphic(flip(F, F.edge_of[h], back), S)


def test_flip_unknown_direction():
    with pytest.raises(FlipError):
        flip(load_fixture("SG-C"), 1, "sideways")


def test_flip_at_infinity_end_is_invisible():
    S = load_fixture("SG-E1")
    for d in (FORWARD, BACKWARD):
        assert canonical_code(flip(S, 1, d)) == canonical_code(S)


def _conservation(S):
    degs = sorted(v.degree for v in S.internal_vertices())
    for e in range(1, len(S.edges) + 1):
        h = S.edge_halfedges(e)[0]
        for d, back in ((FORWARD, BACKWARD), (BACKWARD, FORWARD)):
            try:
                F = flip(S, e, d)
            except (FlipError, SGraphError):
                continue
            assert len(F.edges) == len(S.edges)
            assert sorted(v.degree for v in F.internal_vertices()) == degs
            assert is_isomorphic(flip(F, F.edge_of[h], back), S)


@pytest.mark.parametrize("name", FIXTURES)
def test_flip_conservation_fixtures(name):
    _conservation(load_fixture(name))


def test_flip_conservation_random():
    rng = random.Random(SEED + 3)
    for _ in range(150):
        _conservation(random_sgraph(rng, 6))


# --- canonical codes ------------------------------------------------------------------------------

@pytest.mark.parametrize("name", FIXTURES)
def test_canonical_code_relabel_invariance(name):
    S = load_fixture(name)
    code = canonical_code(S)
    assert code == code.lower() and all(c in "0123456789abcdef" for c in code)
    rng = random.Random(SEED + 4)
    for _ in range(100):
        assert canonical_code(relabel(S, rng)) == code


def test_canonical_code_distinguishes():
    assert canonical_code(load_fixture("SG-A")) != canonical_code(load_fixture("SG-B"))


def _brute_iso(S1, S2):
    """Orientation-preserving isomorphism search over halfedge bijections."""
    h1, h2 = S1.halfedges, S2.halfedges
    if len(h1) != len(h2):
        return False
    for perm in itertools.permutations(h2):
        f = dict(zip(h1, perm))
        if any(f[S1.partner(h)] != S2.partner(f[h]) for h in h1):
            continue
        ok = True
        for v in S1.vertices.values():
            w = S2.vertex(f[v.halfedges[0]])
            img = tuple(f[h] for h in v.halfedges)
            if w.kind != v.kind or len(w.halfedges) != len(img):
                ok = False
                break
            if v.internal:
                k = w.halfedges.index(img[0])
                rot = w.halfedges[k:] + w.halfedges[:k]
                cs = w.corners[k:] + w.corners[:k]
                ok = rot == img and cs == v.corners
            else:
                ok = w.halfedges == img and w.corners == v.corners
            if not ok:
                break
        if ok:
            return True
    return False


def test_mirror_se2():
    S = load_fixture("SG-E2")
    M = mirror(S)
    assert _brute_iso(S, M)
    assert canonical_code(S) == canonical_code(M)


def test_canonical_code_matches_brute_force():
    rng = random.Random(SEED + 5)
    for _ in range(60):
        S = random_sgraph(rng, 2)
        T = random_sgraph(rng, 2)
        assert (canonical_code(S) == canonical_code(T)) == _brute_iso(S, T)
        assert (canonical_code(S) == canonical_code(mirror(S))) == _brute_iso(S, mirror(S))


# --- exchange graphs and ribbon invariants --------------------------------------------------------

def test_exchange_graph_examples():
    G = exchange_graph(load_fixture("SG-E1"), 1, 2)
    assert len(G.nodes) == 1
    G = exchange_graph(load_fixture("SG-A"), 0, 3)
    assert len(G.nodes) == 1 and not G.arcs


def test_exchange_graph_sgc_depth_one():
    S = load_fixture("SG-C")
    codes = {canonical_code(S)}
    for e in range(1, 8):
        for d in (FORWARD, BACKWARD):
            try:
                codes.add(canonical_code(flip(S, e, d)))
            except (FlipError, SGraphError):
                pass
    G = exchange_graph(S, 1, 3)
    assert set(G.nodes) == codes
    for H in G.nodes.values():
        assert validate(H, 3).compatible
        assert sorted(v.degree for v in H.internal_vertices()) == [3, 3, 3]


def test_ribbon_invariants():
    inv = ribbon_invariants(load_fixture("SG-A"))
    assert inv["edges"] == 2 and sorted(inv["degrees"]) == [1, 3, 3]
    inv = ribbon_invariants(load_fixture("SG-E1"))
    assert inv["edges"] == 1 and inv["degrees"] == ["inf", "inf"]
    inv = ribbon_invariants(load_fixture("SG-C"))
    assert inv["edges"] == 7 and [d for d in inv["degrees"] if d != "inf"] == [3, 3, 3]
    # five 1-valent boundary vertices, as read off the arrow set of the reduced quiver
    assert inv["degrees"].count("inf") == 5


def test_cover_fixture_is_a_punctured_torus():
    inv = ribbon_invariants(load_fixture("quot1-cover"))
    assert inv["genus"] == 1 and inv["faces"] == 1
    assert set(d for d in inv["degrees"] if d != "inf") == {4}
