"""Relative graded Brauer graph algebras A(S, n): presentation by rewriting,
explicit basis, Calabi-Yau traces, and the deformation-complex identification."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .dgalg import (QQ, AlgebraError, Arrow, BasisElement, Eliminator, Field, FinDimDgAlgebra,
                    FreeDgPresentation, GradedQuiver, Lin, Report, RewriteSystem, Word, check_findim_axioms,
                    cohomology_graded_dims, d_word, dense_nullspace, lin_add, sparse_rank, _int_row)
from .sgraph import SGraph, SGraphError, Orientation, orientability, validate


class ConstructionError(RuntimeError):
    """An internal consistency check failed (indicates a bug, never bad input)."""


def A_ID(h: str) -> str:
    return f"a:{h}"


def T_ID(h: str) -> str:
    return f"t:{h}"


def sign(k: int) -> int:
    return -1 if k % 2 else 1


def cycle_length(S: SGraph, h: str, n: int) -> int:
    """Number of arrows in c_h: valency * n / degree."""
    v = S.vertex(h)
    return v.valency * n // v.degree


def internal_path(S: SGraph, j: str, length: int) -> Word:
    """Word for the path starting at halfedge j and going ``length`` steps counterclockwise."""
    hs = []
    h = j
    for _ in range(length):
        hs.append(h)
        h = S.next_h(h)
    return tuple(A_ID(x) for x in reversed(hs))


def boundary_path(S: SGraph, j: str, i: str) -> Word:
    """Path along a boundary vertex from halfedge j to the later halfedge i."""
    v = S.vertex(j)
    a, b = S.position[j], S.position[i]
    return tuple(A_ID(v.halfedges[k]) for k in range(b - 1, a - 1, -1))


def c_rep(S: SGraph, h: str) -> str:
    """Representative internal halfedge for the cycle on the edge of h."""
    return min(x for x in (h, S.partner(h)) if S.is_internal_h(x))


def tau_rep(S: SGraph, h: str) -> str:
    return min(x for x in (h, S.partner(h)) if not S.is_internal_h(x))


def tau_sign(S: SGraph, h: str, n: int) -> int:
    """tau_h = tau_sign * tau_rep."""
    return 1 if h == tau_rep(S, h) else sign(n)


def c_sign(S: SGraph, h: str, n: int) -> int:
    """c_h = c_sign * c_rep."""
    return 1 if h == c_rep(S, h) else sign(n - 1)


def corner_arrows(S: SGraph) -> List[str]:
    """Halfedges h that carry a corner arrow a_h : edge(h) -> edge(next h)."""
    out = []
    for h in S.halfedges:
        if S.next_h(h) is not None:
            out.append(h)
    return out


def rgb_quiver(S: SGraph, n: int) -> GradedQuiver:
    arrows = []
    for h in corner_arrows(S):
        arrows.append(Arrow(A_ID(h), str(S.edge_of[h]), str(S.edge_of[S.next_h(h)]), S.corner_after(h)))
    for h in S.halfedges:
        if not S.is_internal_h(h):
            arrows.append(Arrow(T_ID(h), str(S.edge_of[h]), str(S.edge_of[h]), n - 1))
    return GradedQuiver([str(i) for i in range(1, len(S.edges) + 1)], arrows)


def rgb_rules(S: SGraph, n: int, quadratic_only: bool = False) -> Dict[Word, Lin]:
    """Rewrite rules realizing the defining relations (plus the vanishing of
    overlong cycles and of tau against corner arrows at internal vertices)."""
    rules: Dict[Word, Lin] = {}
    arrows = corner_arrows(S)
    # products of consecutive corner arrows that do not turn at the same vertex
    for y in arrows:
        end = S.next_h(y)
        for x in arrows:
            if S.edge_of[x] == S.edge_of[end] and x != end:
                rules[(A_ID(x), A_ID(y))] = {}
    if quadratic_only:
        return rules
    for v in S.internal_vertices():
        for j in v.halfedges:
            N = cycle_length(S, j, n)
            rules[internal_path(S, j, N + 1)] = {}
            if j != c_rep(S, j):
                rules[internal_path(S, j, N)] = {internal_path(S, c_rep(S, j), cycle_length(S, c_rep(S, j), n)):
                                                 Fraction(sign(n - 1))}
    bnd = [h for h in S.halfedges if not S.is_internal_h(h)]
    for h in bnd:
        r = tau_rep(S, h)
        if h != r:
            rules[(T_ID(h),)] = {(T_ID(r),): Fraction(sign(n))}
    for h in bnd:
        r = tau_rep(S, h)
        if h != r:
            continue
        rules[(T_ID(r), T_ID(r))] = {}
        other = S.partner(h)
        if S.is_internal_h(other):
            for x in arrows:
                if S.is_internal_h(x) and S.next_h(x) == other:
                    rules[(T_ID(r), A_ID(x))] = {}
                if x == other:
                    rules[(A_ID(x), T_ID(r))] = {}
    for i in bnd:
        nxt = S.next_h(i)
        if nxt is None:
            continue
        deg = S.corner_after(i)
        coef = tau_sign(S, nxt, n) * tau_sign(S, i, n) * sign(deg)
        rules[(T_ID(tau_rep(S, nxt)), A_ID(i))] = {(A_ID(i), T_ID(tau_rep(S, i))): Fraction(coef)}
    return rules


def rgb_differential(S: SGraph, n: int) -> Dict[str, Lin]:
    diff: Dict[str, Lin] = {}
    for h in S.halfedges:
        if S.is_internal_h(h):
            continue
        other = S.partner(h)
        if S.is_internal_h(other):
            N = cycle_length(S, other, n)
            diff[T_ID(h)] = {internal_path(S, other, N): Fraction(sign(n))}
    return diff


FAMILY_ORDER = {"e": 0, "a^r": 1, "c": 2, "a": 3, "tau": 4, "b": 5}


@dataclass
class RgbAlgebra:
    S: SGraph
    n: int
    presentation: FreeDgPresentation
    rewriting: RewriteSystem
    algebra: FinDimDgAlgebra

    def basis_by_family(self) -> Dict[str, List[BasisElement]]:
        out: Dict[str, List[BasisElement]] = {}
        for b in self.algebra.basis:
            out.setdefault(b.family, []).append(b)
        return out

    def element(self, word: Sequence[str]) -> Dict[int, Fraction]:
        """Coordinates of a word (in generator ids) with respect to the basis."""
        nf = self.rewriting.normal_form({tuple(word): Fraction(1)})
        return self.to_basis(nf)

    def to_basis(self, nf: Mapping[Word, Fraction]) -> Dict[int, Fraction]:
        idx = self._word_index
        out = {}
        for w, c in nf.items():
            if w not in idx:
                raise ConstructionError(f"normal form {w} is not a basis word")
            out[idx[w]] = c
        return out

    @property
    def _word_index(self) -> Dict[Word, int]:
        return {b.word: i for i, b in enumerate(self.algebra.basis) if b.word}

    def table(self) -> str:
        """Degree / basis-element table."""
        rows: Dict[int, List[str]] = {}
        for b in self.algebra.basis:
            rows.setdefault(b.degree, []).append(b.label)
        lines = ["degree | basis elements"]
        for d in sorted(rows):
            lines.append(f"{d:>6} | " + ", ".join(rows[d]))
        return "\n".join(lines)


def _classify(S: SGraph, n: int, word: Word) -> Tuple[str, str]:
    """Family and label of a normal word (nonempty)."""
    has_tau = word[-1].startswith("t:")
    path = word[:-1] if has_tau else word
    if has_tau and any(x.startswith("t:") for x in path):
        raise ConstructionError(f"unexpected word {word}")
    if not path:
        h = word[-1][2:]
        return "tau", f"tau_{h}"
    first = path[-1][2:]
    last_arrow = path[0][2:]
    end = S.next_h(last_arrow)
    if S.is_internal_h(first):
        if has_tau:
            raise ConstructionError(f"tau next to internal path {word}")
        v = S.vertex(first)
        L = len(path)
        N = cycle_length(S, first, n)
        if L == N:
            return "c", f"c_{first}"
        q, s = divmod(L, v.valency)
        return "a^r", f"a^{q}_{end},{first}"
    if has_tau:
        return "b", f"b_{end},{first}"
    return "a", f"a_{end},{first}"


def build_rgb(S: SGraph, n: int, max_len: Optional[int] = None) -> RgbAlgebra:
    diag = validate(S, n)
    if not diag.compatible:
        raise SGraphError("incompatible: " + "; ".join(diag.messages))
    quiver = rgb_quiver(S, n)
    rules = RewriteSystem(quiver, rgb_rules(S, n))
    pres = FreeDgPresentation(quiver, rgb_differential(S, n), name=f"A(S,{n}) generators")
    cap = max_len or 4 * n * len(S.edges) + 8
    # normal words, grown by left multiplication (subwords of normal words are normal)
    outs = quiver.out_arrows()
    normal: List[Word] = []
    frontier: List[Word] = []
    for a in quiver.arrows.values():
        w = (a.id,)
        if rules.is_normal(w):
            frontier.append(w)
    while frontier:
        normal.extend(frontier)
        nxt = []
        for w in frontier:
            if len(w) >= cap:
                raise ConstructionError(f"normal words exceed length cap {cap}: {w}")
            tgt = quiver.arrows[w[0]].target
            for a in outs[tgt]:
                nw = (a.id,) + w
                if rules.find_redex(nw) is None:
                    nxt.append(nw)
        frontier = nxt
    elems: List[BasisElement] = []
    for k, v in enumerate(quiver.vertices):
        elems.append(BasisElement(f"e_{v}", v, v, 0, "e", ()))
    for w in normal:
        fam, label = _classify(S, n, w)
        elems.append(BasisElement(label, quiver.word_source(w), quiver.word_target(w), quiver.word_degree(w), fam, w))
    elems.sort(key=lambda b: (b.degree, FAMILY_ORDER[b.family], b.source, b.target, b.label))
    labels = [b.label for b in elems]
    if len(set(labels)) != len(labels):
        raise ConstructionError("duplicate basis labels")
    index = {b.word: i for i, b in enumerate(elems) if b.word}
    idem = {b.source: i for i, b in enumerate(elems) if b.family == "e"}

    def coords(nf: Mapping[Word, Fraction]) -> Dict[int, Fraction]:
        out = {}
        for w, c in nf.items():
            if w not in index:
                raise ConstructionError(f"normal form {w} not in basis")
            out[index[w]] = c
        return out

    product: Dict[Tuple[int, int], Dict[int, Fraction]] = {}
    for i, x in enumerate(elems):
        for j, y in enumerate(elems):
            if x.source != y.target:
                continue
            if x.family == "e":
                product[(i, j)] = {j: Fraction(1)}
            elif y.family == "e":
                product[(i, j)] = {i: Fraction(1)}
            else:
                nf = rules.normal_form({x.word + y.word: Fraction(1)})
                if nf:
                    product[(i, j)] = coords(nf)
    differential: Dict[int, Dict[int, Fraction]] = {}
    for i, x in enumerate(elems):
        if x.word:
            dx = rules.normal_form(d_word(pres, x.word))
            if dx:
                differential[i] = coords(dx)
    alg = FinDimDgAlgebra(elems, idem, product, differential, name=f"A(S,{n})")
    A = RgbAlgebra(S, n, pres, rules, alg)
    expected = closed_form_basis_count(S, n)
    if alg.dim != expected:
        raise ConstructionError(f"basis has {alg.dim} elements, family count predicts {expected}")
    return A


def closed_form_basis_count(S: SGraph, n: int) -> int:
    """Size of the six-family basis, computed from the S-graph data alone."""
    total = len(S.edges)
    for v in S.internal_vertices():
        r = v.valency
        total += r * (r * n // v.degree - 1)
    for a, b in S.edges:
        kinds = (S.is_internal_h(a), S.is_internal_h(b))
        total += any(kinds)          # c
        total += not all(kinds)      # tau
    for v in S.boundary_vertices():
        r = v.valency
        total += r * (r - 1)         # boundary paths and b's
    return total


def family_dims(S: SGraph, n: int) -> Dict[int, int]:
    """Graded dimensions predicted by the basis families."""
    out: Dict[int, int] = {}

    def add(d, k=1):
        out[d] = out.get(d, 0) + k

    add(0, len(S.edges))
    for v in S.internal_vertices():
        m, r = v.degree, v.valency
        for h in v.halfedges:
            g = h
            dist = 0
            for L in range(1, r * n // m):
                dist += S.corner_after(g)
                g = S.next_h(g)
                add(dist)
    for a, b in S.edges:
        kinds = (S.is_internal_h(a), S.is_internal_h(b))
        if any(kinds):
            add(n)
        if not all(kinds):
            add(n - 1)
    for v in S.boundary_vertices():
        hs = v.halfedges
        for x in range(len(hs)):
            for y in range(x + 1, len(hs)):
                d = sum(v.corners[x:y])
                add(d)
                add(d + n - 1)
    return dict(sorted(out.items()))


# ---------------------------------------------------------------------------
# Calabi-Yau traces


@dataclass
class TraceFunctional:
    values: Dict[str, Fraction]
    gram_rank: int
    symmetric: bool


@dataclass
class Refusal:
    reason: str


def _gram(A: FinDimDgAlgebra, tr: Mapping[int, Fraction]) -> List[List[Fraction]]:
    N = A.dim
    G = [[Fraction(0)] * N for _ in range(N)]
    for (i, j), r in A.product.items():
        G[i][j] = sum((c * tr.get(k, 0) for k, c in r.items()), Fraction(0))
    return G


def _symmetry_failures(A: FinDimDgAlgebra, tr: Mapping[int, Fraction]) -> List[str]:
    G = _gram(A, tr)
    bad = []
    for i, x in enumerate(A.basis):
        for j, y in enumerate(A.basis):
            if G[i][j] != sign(x.degree * y.degree) * G[j][i]:
                bad.append(f"tr({x.label}*{y.label}) != (-1)^(|x||y|) tr({y.label}*{x.label})")
    return bad


def cy_trace(S: SGraph, n: int, A: RgbAlgebra, field: Field = QQ):
    if S.boundary_vertices():
        return Refusal("boundary vertices present")
    alg = A.algebra
    tr: Dict[int, Fraction] = {}
    if n % 2:
        for i, b in enumerate(alg.basis):
            if b.family == "c":
                tr[i] = Fraction(1)
    else:
        eps = orientability(S)
        if eps is None:
            return Refusal("n is even and the S-graph is not orientable")
        for i, b in enumerate(alg.basis):
            if b.family == "c":
                h = b.label[2:]
                tr[i] = Fraction(sign(eps[h]))
    bad = _symmetry_failures(alg, tr)
    if bad:
        raise ConstructionError("trace is not graded symmetric: " + bad[0])
    G = _gram(alg, tr)
    rank = sparse_rank([{j: v for j, v in enumerate(row) if v} for row in G], field)
    if rank != alg.dim:
        raise ConstructionError(f"Gram matrix has rank {rank} < {alg.dim}")
    return TraceFunctional({alg.basis[i].label: v for i, v in tr.items()}, rank, True)


@dataclass
class InfeasibilityReport:
    symmetric_functionals: List[Dict[str, Fraction]]
    forced_zero: Dict[str, str]
    degenerate_idempotents: List[str]
    no_cy_structure: bool
    notes: List[str] = field(default_factory=list)


def cy_infeasibility(A: RgbAlgebra, n: int) -> InfeasibilityReport:
    S = A.S
    if n % 2 or n == 0:
        raise ValueError("n must be a nonzero even integer")
    odd = [v for v in S.internal_vertices() if v.degree % 2]
    if not odd:
        raise ValueError("no internal vertex of odd degree")
    alg = A.algebra
    top = [i for i, b in enumerate(alg.basis) if b.degree == n]
    col = {i: k for k, i in enumerate(top)}
    rows = []
    for (i, j), r in alg.product.items():
        x, y = alg.basis[i], alg.basis[j]
        if x.degree + y.degree != n:
            continue
        row = [Fraction(0)] * len(top)
        for k, c in r.items():
            row[col[k]] += c
        for k, c in alg.product.get((j, i), {}).items():
            row[col[k]] -= sign(x.degree * y.degree) * c
        if any(row):
            rows.append(row)
    # pairs whose forward product vanishes but the reverse does not
    for (j, i), r in alg.product.items():
        if (i, j) in alg.product:
            continue
        x, y = alg.basis[i], alg.basis[j]
        if x.degree + y.degree != n:
            continue
        row = [Fraction(0)] * len(top)
        for k, c in r.items():
            row[col[k]] -= sign(x.degree * y.degree) * c
        if any(row):
            rows.append(row)
    null = dense_nullspace(rows, len(top))
    funcs = [{alg.basis[top[k]].label: v for k, v in enumerate(vec) if v} for vec in null]
    forced: Dict[str, str] = {}
    for v in odd:
        for h in v.halfedges:
            rep = c_rep(S, h)
            label = f"c_{rep}"
            k = next(k for k, i in enumerate(top) if alg.basis[i].label == label)
            if all(vec[k] == 0 for vec in null):
                forced[h] = label
    degenerate = []
    for e, idx in sorted(alg.idempotents.items(), key=lambda kv: int(kv[0])):
        block = [k for k, i in enumerate(top) if alg.basis[i].source == e or alg.basis[i].target == e]
        if all(vec[k] == 0 for vec in null for k in block):
            degenerate.append(alg.basis[idx].label)
    return InfeasibilityReport(funcs, forced, degenerate, bool(degenerate))


# ---------------------------------------------------------------------------
# deformation complex F[tau]/tau^2 and its quotient


@dataclass
class DeformationReport:
    ok: bool
    ideal_acyclic: bool
    quotient_isomorphic: bool
    cohomology_match: bool
    certified_through: int
    dims_truncated: Dict[int, int]
    dims_rgb: Dict[int, int]
    details: List[str] = field(default_factory=list)


class _TauAlgebra:
    """Truncated F[tau]/tau^2 on monomials (word, flag); words use only corner arrows."""

    def __init__(self, S: SGraph, n: int, W: int, eps: Mapping[str, int]):
        self.S, self.n, self.W, self.eps = S, n, W, eps
        self.quiver = rgb_quiver(S, n)
        self.arrows = [h for h in corner_arrows(S)]
        self.kappa = {A_ID(h): (S.corner_after(h) + n * (eps[h] + eps[S.next_h(h)])) % 2 for h in self.arrows}
        self.deg = {A_ID(h): S.corner_after(h) for h in self.arrows}
        self.src_h = {A_ID(h): h for h in self.arrows}
        self.end_h = {A_ID(h): S.next_h(h) for h in self.arrows}
        # F basis: lazy paths and nonzero paths with internal degree <= W n
        words: List[Word] = []
        for h in self.arrows:
            frontier = [(A_ID(h),)]
            while frontier:
                nxt = []
                for w in frontier:
                    if self._wdeg(w) > W * n and S.is_internal_h(self.src_h[w[-1]]):
                        continue
                    words.append(w)
                    g = self.end_h[w[0]]
                    if S.next_h(g) is not None:
                        nxt.append((A_ID(g),) + w)
                frontier = nxt
        self.vertices = [str(i) for i in range(1, len(S.edges) + 1)]
        mons: List[Tuple[Word, int, str]] = []
        for v in self.vertices:
            mons.append(((), 0, v))
            mons.append(((), 1, v))
        for w in words:
            v = str(S.edge_of[self.src_h[w[-1]]])
            mons.append((w, 0, v))
            mons.append((w, 1, v))
        self.monomials = mons
        self.index = {(w, f, v if not w else None): k for k, (w, f, v) in enumerate(mons)}

    def _wdeg(self, w: Word) -> int:
        return sum(self.deg[x] for x in w)

    def key(self, w: Word, f: int, v: str):
        return (w, f, v if not w else None)

    def source(self, k: int) -> str:
        w, f, v = self.monomials[k]
        return v if not w else str(self.S.edge_of[self.src_h[w[-1]]])

    def target(self, k: int) -> str:
        w, f, v = self.monomials[k]
        return v if not w else str(self.S.edge_of[self.end_h[w[0]]])

    def degree(self, k: int) -> int:
        w, f, v = self.monomials[k]
        return self._wdeg(w) + f * (self.n - 1)

    def mul_mon(self, i: int, j: int) -> Optional[Tuple[int, int]]:
        """Product of monomials as (index, sign) or None when zero."""
        u, s, vu = self.monomials[i]
        w, t, vw = self.monomials[j]
        if s + t > 1:
            return None
        if self.source(i) != self.target(j):
            return None
        if u and w and self.src_h[u[-1]] != self.end_h[w[0]]:
            return None
        word = u + w
        v = vu if not word else None
        k = self.index.get((word, s + t, v))
        if k is None:
            return None  # truncated away
        sg = 1
        if s:
            sg = sign(sum(self.kappa[x] for x in w))
        return k, sg

    def mul(self, x: Mapping[int, Fraction], y: Mapping[int, Fraction]) -> Dict[int, Fraction]:
        acc: Dict[int, Fraction] = {}
        for i, a in x.items():
            for j, b in y.items():
                r = self.mul_mon(i, j)
                if r:
                    k, sg = r
                    val = acc.get(k, 0) + sg * a * b
                    if val:
                        acc[k] = val
                    else:
                        acc.pop(k, None)
        return acc

    def C(self, v: str) -> Dict[int, Fraction]:
        """sum over internal ends k of edge v of s_k c_k, as an element of the truncated algebra."""
        S, n = self.S, self.n
        a, b = S.edges[int(v) - 1]
        out: Dict[int, Fraction] = {}
        for k in (a, b):
            if not S.is_internal_h(k):
                continue
            s = 1 if self.eps[k] == 1 else sign(n)
            w = internal_path(S, k, cycle_length(S, k, n))
            idx = self.index.get((w, 0, None))
            if idx is not None:
                out[idx] = out.get(idx, 0) + s
        return {k: c for k, c in out.items() if c}

    def d_mon(self, k: int) -> Dict[int, Fraction]:
        w, f, v = self.monomials[k]
        if not f:
            return {}
        base = self.index[self.key(w, 0, v)]
        e = self.source(k)
        coef = sign(self._wdeg(w) + self.n)
        return {i: coef * c for i, c in self.mul({base: Fraction(1)}, self.C(e)).items()}

    def to_findim(self) -> FinDimDgAlgebra:
        N = len(self.monomials)
        basis = []
        for k, (w, f, v) in enumerate(self.monomials):
            lab = ("*".join(w) if w else f"e_{v}") + ("*tau" if f else "")
            basis.append(BasisElement(lab, self.source(k), self.target(k), self.degree(k), "tau" if f else "F", w))
        idem = {v: self.index[((), 0, v)] for v in self.vertices}
        prod = {}
        for i in range(N):
            for j in range(N):
                r = self.mul_mon(i, j)
                if r:
                    prod[(i, j)] = {r[0]: Fraction(r[1])}
        diff = {k: self.d_mon(k) for k in range(N)}
        return FinDimDgAlgebra(basis, idem, prod, diff, name="F[tau]/tau^2 truncated")


def deformation_check(S: SGraph, n: int, W: int = 2, eps: Optional[Mapping[str, int]] = None,
                      field: Field = QQ) -> DeformationReport:
    diag = validate(S, n)
    if not diag.compatible:
        raise SGraphError("incompatible: " + "; ".join(diag.messages))
    if W < 2:
        raise ValueError("winding cap too small to certify: required cap W >= 2")
    if eps is None:
        o = orientability(S)
        if o is None:
            raise ValueError("S-graph is not orientable; supply eps per halfedge")
        eps = o.toward
    eps = dict(eps.toward if isinstance(eps, Orientation) else eps)
    for a, b in S.edges:
        if eps[a] + eps[b] != 1:
            raise ValueError(f"eps must satisfy eps(h)+eps(h')=1 on edge {a}-{b}")
    details: List[str] = []
    T = _TauAlgebra(S, n, W, eps)
    F = T.to_findim()
    ax = check_findim_axioms(F)
    if not ax.ok:
        details.extend(ax.failures[:5])
        raise ConstructionError("truncated F[tau]/tau^2 violates dg axioms: " + ax.failures[0])
    N = len(T.monomials)
    one = Fraction(1)
    # generators of the ideal
    gens: List[Dict[int, Fraction]] = []
    for e_idx, (a, b) in enumerate(S.edges, start=1):
        if S.is_internal_h(a) and S.is_internal_h(b):
            g = {T.index[((), 1, str(e_idx))]: one}
            gens += [g, F.d(g)]
    for h in T.arrows:
        if S.is_internal_h(h):
            g = {T.index[((A_ID(h),), 1, None)]: one}
            gens += [g, F.d(g)]
    gens = [g for g in gens if g]
    # two-sided ideal span, per degree
    span_rows: Dict[int, List[Dict[int, Fraction]]] = {}
    by_tgt: Dict[str, List[int]] = {}
    by_src: Dict[str, List[int]] = {}
    for k in range(N):
        by_tgt.setdefault(T.target(k), []).append(k)
        by_src.setdefault(T.source(k), []).append(k)
    seen = set()
    for g in gens:
        k0 = next(iter(g))
        s, t = T.source(k0), T.target(k0)
        for j in by_tgt.get(s, []):
            gw = T.mul(g, {j: one})
            if not gw:
                continue
            for i in by_src.get(t, []):
                x = T.mul({i: one}, gw)
                if not x:
                    continue
                key = frozenset(x.items())
                if key in seen:
                    continue
                seen.add(key)
                span_rows.setdefault(T.degree(next(iter(x))), []).append(x)
    # echelon bases of I per degree
    I_basis: Dict[int, Eliminator] = {}
    I_vecs: Dict[int, List[Dict[int, Fraction]]] = {}
    for t, rows in span_rows.items():
        el = Eliminator(field.p)
        vecs = []
        for r in rows:
            if el.add(r):
                vecs.append(r)
        I_basis[t], I_vecs[t] = el, vecs
    dimI = {t: el.rank for t, el in I_basis.items()}
    # closure under d
    for t, vecs in I_vecs.items():
        for v in vecs:
            dv = F.d(v)
            if dv and (t + 1 not in I_basis or I_basis[t + 1].reduce(_int_row(dv, field.p))):
                raise ConstructionError("ideal is not closed under d")
    rank_d = {t: sparse_rank([F.d(v) for v in vecs], field) for t, vecs in I_vecs.items()}
    certified = W * n - 1
    acyclic = True
    for t in sorted(dimI):
        if t > certified:
            continue
        h = dimI[t] - rank_d.get(t, 0) - rank_d.get(t - 1, 0)
        if h:
            acyclic = False
            details.append(f"ideal has cohomology of dimension {h} in degree {t}")
    # quotient versus A(S, n)
    A = build_rgb(S, n)
    phi_gen: Dict[str, Dict[int, Fraction]] = {}
    for h in T.arrows:
        phi_gen[A_ID(h)] = {T.index[((A_ID(h),), 0, None)]: one}
    for h in S.halfedges:
        if not S.is_internal_h(h):
            phi_gen[T_ID(h)] = {T.index[((), 1, str(S.edge_of[h]))]: Fraction(sign(n * eps[h]))}

    def phi(word: Word, vertex: Optional[str] = None) -> Dict[int, Fraction]:
        if not word:
            return {T.index[((), 0, vertex)]: one}
        acc = phi_gen[word[-1]]
        for x in reversed(word[:-1]):
            acc = T.mul(phi_gen[x], acc)
        return acc

    def mod_I(x: Mapping[int, Fraction]) -> bool:
        """x lies in I."""
        x = {k: c for k, c in x.items() if c}
        if not x:
            return True
        t = T.degree(next(iter(x)))
        el = I_basis.get(t)
        return el is not None and not el.reduce(_int_row(x, field.p))

    def diff(x, y):
        out = dict(x)
        for k, c in y.items():
            v = out.get(k, 0) - c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return out

    def lin_phi(nf: Mapping[Word, Fraction], vertex=None) -> Dict[int, Fraction]:
        acc: Dict[int, Fraction] = {}
        for w, c in nf.items():
            for k, v in phi(w, vertex).items():
                val = acc.get(k, 0) + c * v
                if val:
                    acc[k] = val
                else:
                    acc.pop(k, None)
        return acc

    iso = True
    for lhs, rhs in A.rewriting.rules.items():
        if not mod_I(diff(phi(lhs), lin_phi(rhs))):
            iso = False
            details.append(f"relation {'*'.join(lhs)} -> {rhs} does not hold modulo I")
    for gid, dg in A.presentation.differential.items():
        lhs = F.d(phi((gid,)))
        if not mod_I(diff(lhs, lin_phi(dg))):
            iso = False
            details.append(f"differential of {gid} not preserved modulo I")
    # phi(basis) together with I spans everything, independently
    total_rank = 0
    by_deg: Dict[int, List[Dict[int, Fraction]]] = {}
    for b in A.algebra.basis:
        by_deg.setdefault(b.degree, []).append(phi(b.word, b.source if not b.word else None))
    for t in set(by_deg) | set(dimI):
        rows = list(I_vecs.get(t, [])) + by_deg.get(t, [])
        r = sparse_rank(rows, field)
        if r != dimI.get(t, 0) + len(by_deg.get(t, [])):
            iso = False
            details.append(f"basis images are dependent modulo I in degree {t}")
        total_rank += r
    if total_rank != N:
        iso = False
        details.append(f"I plus basis images span {total_rank} of {N} dimensions")
    dims_T = cohomology_graded_dims(F, field)
    dims_A = cohomology_graded_dims(A.algebra, field)
    match = all(dims_T.get(t, 0) == dims_A.get(t, 0) for t in range(0, n))
    if not match:
        details.append(f"low-degree cohomology differs: {dims_T} vs {dims_A}")
    ok = acyclic and iso and match
    return DeformationReport(ok, acyclic, iso, match, certified,
                             {t: v for t, v in dims_T.items() if t <= certified - 1}, dims_A, details)
