import itertools
import random
from fractions import Fraction

import pytest

from rgbforge import rgb
from rgbforge.dgalg import check_findim_axioms, cohomology_graded_dims, normal_form
from rgbforge.rgb import (Refusal, TraceFunctional, build_rgb, closed_form_basis_count, cy_infeasibility, cy_trace,
                          deformation_check, family_dims)
from rgbforge.sgraph import DEFAULT_N, SGraphError, default_orientation, load_fixture, random_sgraph, relabel, validate

from helpers import dense_rank

FIXTURES = ["SG-A", "SG-B", "SG-C", "SG-E1", "SG-E2", "SG-M", "SG-O", "quot1"]


def _random_cases(seed, count, max_edges=6):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(1, 6)
        S = random_sgraph(rng, max_edges, n)
        if validate(S, n).compatible:
            out.append((S, n))
    return out


# --- construction ---------------------------------------------------------------------------------

def test_build_sga():
    A = build_rgb(load_fixture("SG-A"), 3)
    assert A.algebra.dim == 8 and A.algebra.graded_dims() == {0: 2, 1: 2, 2: 2, 3: 2}
    assert not A.algebra.differential
    top = sorted(b.label for b in A.algebra.basis if b.degree == 3)
    assert top == ["c_1p", "c_2q"]
    # c_2q is the printed a22 (the monogon loop), up to the identification of cycles
    assert A.element(["a:2s"]) == {A.algebra.index["c_2q"]: Fraction(1)}


def test_build_sgb():
    A = build_rgb(load_fixture("SG-B"), 2)
    assert A.algebra.dim == 7 and A.algebra.graded_dims() == {0: 2, 1: 3, 2: 2}
    d = A.presentation.differential
    assert d["t:2w"] == {("a:2b",): Fraction(1)} and d["t:1u"] == {}


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_build_se1(n):
    A = build_rgb(load_fixture("SG-E1"), n)
    assert A.algebra.dim == 2
    tau = [b for b in A.algebra.basis if b.family == "tau"]
    assert len(tau) == 1 and tau[0].degree == n - 1
    assert not A.algebra.differential


def test_incompatible_n_rejected():
    with pytest.raises(SGraphError):
        build_rgb(load_fixture("SG-A"), 4)


def test_relation_signs_sgb():
    A = build_rgb(load_fixture("SG-B"), 2)
    lhs = A.element(["t:1u", "a:2w"])
    rhs = A.element(["a:2w", "t:2w"])
    assert lhs and lhs == {k: -c for k, c in rhs.items()}
    assert A.element(["t:2w", "t:2w"]) == {}


@pytest.mark.parametrize("name", FIXTURES)
def test_axioms_and_counts_fixtures(name):
    S, n = load_fixture(name), DEFAULT_N[name]
    A = build_rgb(S, n)
    assert check_findim_axioms(A.algebra).ok
    assert A.algebra.dim == closed_form_basis_count(S, n)
    assert A.algebra.graded_dims() == family_dims(S, n)


def test_basis_count_oracle_random():
    for S, n in _random_cases(4242, 500):
        A = build_rgb(S, n)
        assert A.algebra.dim == closed_form_basis_count(S, n)
        assert A.algebra.graded_dims() == family_dims(S, n)


def test_axioms_random():
    for S, n in _random_cases(4343, 120):
        rep = check_findim_axioms(build_rgb(S, n).algebra)
        assert rep.ok, rep.failures[:3]


def _arrow_words(A, length):
    q = A.presentation.quiver
    ids = sorted(q.arrows)
    words = [(a,) for a in ids]
    out = list(words)
    for _ in range(length - 1):
        words = [(b,) + w for w in words for b in ids if q.arrows[b].source == q.arrows[w[0]].target]
        out += words
    return out


@pytest.mark.parametrize("name", ["SG-A", "SG-B", "SG-M", "SG-E2", "SG-E1"])
def test_degree_bound(name):
    S, n = load_fixture(name), DEFAULT_N[name]
    A = build_rgb(S, n)
    q = A.presentation.quiver
    c_words = {b.word for b in A.algebra.basis if b.family == "c"}
    for w in _arrow_words(A, min(3 * n, 7)):
        nf = normal_form(A.rewriting, {w: Fraction(1)})
        deg = q.word_degree(w)
        if deg > n:
            assert nf.is_zero(), w
        elif deg == n and not any(x.startswith("t:") for x in w) and not nf.is_zero():
            assert len(nf.terms) == 1
            (word, c), = nf.terms.items()
            assert word in c_words and abs(c) == 1


@pytest.mark.parametrize("name", FIXTURES)
def test_differential_support(name):
    S, n = load_fixture(name), DEFAULT_N[name]
    A = build_rgb(S, n)
    for i in A.algebra.differential:
        b = A.algebra.basis[i]
        assert b.family == "tau"
        h = b.label[len("tau_"):]
        assert S.is_internal_h(S.partner(h))


# --- Calabi-Yau -----------------------------------------------------------------------------------

def _gram(A, values):
    alg = A.algebra
    tr = {alg.index[k]: v for k, v in values.items()}
    G = [[Fraction(0)] * alg.dim for _ in range(alg.dim)]
    for (i, j), r in alg.product.items():
        G[i][j] = sum((c * tr.get(k, 0) for k, c in r.items()), Fraction(0))
    return G


@pytest.mark.parametrize("name,n,rank", [("SG-A", 3, 8), ("SG-E2", 2, 2)])
def test_cy_trace(name, n, rank):
    S = load_fixture(name)
    A = build_rgb(S, n)
    tr = cy_trace(S, n, A)
    assert isinstance(tr, TraceFunctional)
    G = _gram(A, tr.values)
    assert dense_rank(G) == rank == tr.gram_rank
    B = A.algebra.basis
    for i, j in itertools.product(range(len(B)), repeat=2):
        assert G[i][j] == (-1) ** (B[i].degree * B[j].degree) * G[j][i]
    if n % 2:
        assert set(tr.values.values()) == {1}


def test_cy_trace_refusals():
    S = load_fixture("SG-B")
    assert isinstance(cy_trace(S, 2, build_rgb(S, 2)), Refusal)
    S = load_fixture("SG-O")
    r = cy_trace(S, 6, build_rgb(S, 6))
    assert isinstance(r, Refusal) and "orientable" in r.reason


def test_cy_trace_relabel_naturality():
    S = load_fixture("SG-A")
    rng = random.Random(5)
    ranks = set()
    for _ in range(5):
        T = relabel(S, rng)
        ranks.add(cy_trace(T, 3, build_rgb(T, 3)).gram_rank)
    assert ranks == {8}


def test_cy_infeasibility_sgo():
    A = build_rgb(load_fixture("SG-O"), 6)
    rep = cy_infeasibility(A, 6)
    S = A.S
    assert set(rep.forced_zero) == set(S.halfedges)
    assert rep.no_cy_structure


def test_cy_infeasibility_sga_even():
    S = load_fixture("SG-A")
    rep = cy_infeasibility(build_rgb(S, 6), 6)
    # the degree-1 and degree-3 vertices carry odd degree; every halfedge there is forced
    odd_h = {h for v in S.internal_vertices() if v.degree % 2 for h in v.halfedges}
    assert set(rep.forced_zero) == odd_h
    assert rep.no_cy_structure and rep.degenerate_idempotents


def test_cy_infeasibility_independent_nullspace():
    """Brute force: every graded-symmetric functional on the top degree of A(SG-O,6)
    vanishes (solve tr(xy) = (-1)^{|x||y|} tr(yx) by dense elimination)."""
    A = build_rgb(load_fixture("SG-O"), 6)
    alg = A.algebra
    top = [i for i, b in enumerate(alg.basis) if b.degree == 6]
    rows = []
    for i, j in itertools.product(range(alg.dim), repeat=2):
        x, y = alg.basis[i], alg.basis[j]
        if x.degree + y.degree != 6:
            continue
        row = [Fraction(0)] * len(top)
        for k, c in alg.product.get((i, j), {}).items():
            row[top.index(k)] += c
        for k, c in alg.product.get((j, i), {}).items():
            row[top.index(k)] -= (-1) ** (x.degree * y.degree) * c
        rows.append(row)
    assert dense_rank(rows) == len(top)


def test_cy_infeasibility_odd_n_rejected():
    with pytest.raises(ValueError):
        cy_infeasibility(build_rgb(load_fixture("SG-A"), 3), 3)


# --- deformation ----------------------------------------------------------------------------------

@pytest.mark.parametrize("name,dims", [("SG-A", {0: 2, 1: 2, 2: 2, 3: 2}), ("SG-M", {0: 1, 1: 1, 2: 1})])
def test_deformation_examples(name, dims):
    S = load_fixture(name)
    n = DEFAULT_N[name]
    rep = deformation_check(S, n, W=2, eps=default_orientation(S))
    assert rep.ok and rep.ideal_acyclic and rep.quotient_isomorphic and rep.cohomology_match
    assert {t: d for t, d in rep.dims_rgb.items() if d} == dims
    assert rep.dims_rgb == cohomology_graded_dims(build_rgb(S, n).algebra)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_deformation_boundary_only(n):
    S = load_fixture("SG-E1")
    rep = deformation_check(S, n, W=2)
    assert rep.ok


@pytest.mark.parametrize("name", ["SG-B", "SG-E2", "SG-C"])
def test_deformation_more_fixtures(name):
    S = load_fixture(name)
    assert deformation_check(S, DEFAULT_N[name], eps=default_orientation(S)).ok


def test_deformation_detects_wrong_differential(monkeypatch):
    orig = rgb._TauAlgebra.d_mon

    def negated(self, k):
        return {i: -c for i, c in orig(self, k).items()}

    monkeypatch.setattr(rgb._TauAlgebra, "d_mon", negated)
    S = load_fixture("SG-B")
    rep = deformation_check(S, 2, eps=default_orientation(S))
    assert not rep.quotient_isomorphic and not rep.ok


def test_deformation_rejects_small_winding():
    with pytest.raises(ValueError):
        deformation_check(load_fixture("SG-A"), 3, W=1, eps=default_orientation(load_fixture("SG-A")))


def test_deformation_rejects_bad_eps():
    S = load_fixture("SG-A")
    eps = {h: 0 for h in S.halfedges}
    with pytest.raises(ValueError):
        deformation_check(S, 3, eps=eps)
