"""Relative Ginzburg-type presentations: the n-gon quiver Q_{n,n}, its cyclic
quotients G_{n,m}, local pieces at interior and boundary vertices, the glued
presentation of an S-graph, its reduction, and branched-cover quotient checks."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .dgalg import (QQ, AlgebraError, Arrow, Field, FreeDgPresentation, GradedQuiver, Lin, Word,
                    check_d_squared, eliminate_pair, format_lin, lin_add)
from .rgb import c_rep, sign
from .sgraph import SGraph, SGraphError, Vertex, validate


class GinzburgError(ValueError):
    pass


@dataclass
class LocalPresentation:
    """A free dg presentation with its gluing data.

    ``designated`` maps a quiver vertex to its closed degree 2-n loop (l_i or beta_ii);
    ``big_loops`` maps a vertex to its degree 1-n loop L_i when present;
    ``info`` records a structural key per generator, used to compare covers."""
    presentation: FreeDgPresentation
    designated: Dict[str, str] = field(default_factory=dict)
    big_loops: Dict[str, str] = field(default_factory=dict)
    info: Dict[str, tuple] = field(default_factory=dict)
    n: int = 0
    m: int = 0

    def weights(self) -> Dict[str, int]:
        """Grading preserved by d: minus the polygon distance spanned by an arrow."""
        out = {}
        for gid, key in self.info.items():
            out[gid] = -key[3] if key[0] == "alpha" else -self.n
        return out


def _checked(P: FreeDgPresentation) -> FreeDgPresentation:
    rep = check_d_squared(P)
    if not rep.ok:
        raise AlgebraError(f"{P.name}: " + rep.failures[0])
    return P


def build_Qnn(n: int) -> LocalPresentation:
    if n < 2:
        raise GinzburgError("Q_{n,n} needs n >= 2")
    V = range(1, n + 1)
    alpha = lambda i, j: f"alpha_{i},{j}"
    arrows, info = [], {}
    for i in V:
        for j in V:
            if i != j:
                deg = j - i + 1 if j < i else j - i + 1 - n
                arrows.append(Arrow(alpha(i, j), str(i), str(j), deg))
                info[alpha(i, j)] = ("alpha", str(i), str(j), (i - j) % n)
    for i in V:
        arrows.append(Arrow(f"l_{i}", str(i), str(i), 2 - n))
        arrows.append(Arrow(f"L_{i}", str(i), str(i), 1 - n))
        info[f"l_{i}"] = ("l", str(i))
        info[f"L_{i}"] = ("L", str(i))
    diff: Dict[str, Lin] = {}
    for i in V:
        for j in V:
            if i == j:
                continue
            d: Lin = {}
            if j < i:
                for k in range(j, i + 1):
                    if k not in (i, j):
                        lin_add(d, (alpha(k, j), alpha(i, k)), sign(j - k - 1))
            else:
                for k in range(1, i + 1):
                    if k not in (i, j):
                        lin_add(d, (alpha(k, j), alpha(i, k)), sign(j - k + n - 1))
                for k in range(j, n + 1):
                    if k not in (i, j):
                        lin_add(d, (alpha(k, j), alpha(i, k)), sign(j - k - 1))
            diff[alpha(i, j)] = d
        d = {(f"l_{i}",): Fraction(-1)}
        for j in V:
            if j < i:
                lin_add(d, (alpha(j, i), alpha(i, j)), sign(i - j + 1 - n))
            elif j > i:
                lin_add(d, (alpha(j, i), alpha(i, j)), sign(i - j - 1))
        diff[f"L_{i}"] = d
    P = FreeDgPresentation(GradedQuiver([str(i) for i in V], arrows), diff, f"G_{n},{n}")
    return LocalPresentation(_checked(P), {str(i): f"l_{i}" for i in V}, {str(i): f"L_{i}" for i in V}, info, n, n)


def _orbit_id(key: tuple, n: int, m: int) -> str:
    kind = key[0]
    if kind == "alpha":
        _, a, b, D = key
        r = (D - (int(a) - int(b)) % m) // m
        return f"alpha^{r}_{a},{b}"
    return f"{kind}_{key[1]}"


def cyclic_quotient(Q: LocalPresentation, m: int, field: Field = QQ) -> LocalPresentation:
    n = Q.n
    if m < 1 or n % m:
        raise GinzburgError(f"m = {m} does not divide n = {n}")
    if field.p and (n // m) % field.p == 0:
        raise GinzburgError(f"characteristic {field.p} divides the group order n/m = {n // m}")
    if m == n:
        return Q
    P = Q.presentation
    res = lambda v: str((int(v) - 1) % m + 1)

    def qkey(key):
        if key[0] == "alpha":
            return ("alpha", res(key[1]), res(key[2]), key[3])
        return (key[0], res(key[1]))

    image = {gid: _orbit_id(qkey(key), n, m) for gid, key in Q.info.items()}
    arrows, info, diff = {}, {}, {}
    for gid, a in P.arrows.items():
        q = image[gid]
        if q not in arrows:
            arrows[q] = Arrow(q, res(a.source), res(a.target), a.degree)
            info[q] = qkey(Q.info[gid])
    for gid, a in P.arrows.items():
        q = image[gid]
        d: Lin = {}
        for w, c in P.differential[gid].items():
            lin_add(d, tuple(image[x] for x in w), c)
        if q in diff and diff[q] != d:
            raise AlgebraError(f"differential of orbit {q} depends on the representative")
        diff[q] = d
    verts = [str(i) for i in range(1, m + 1)]
    G = FreeDgPresentation(GradedQuiver(verts, arrows.values()), diff, f"G_{n},{m}")
    return LocalPresentation(_checked(G), {v: f"l_{v}" for v in verts}, {v: f"L_{v}" for v in verts}, info, n, m)


def build_Gnm(n: int, m: int, field: Field = QQ) -> LocalPresentation:
    return cyclic_quotient(build_Qnn(n), m, field)


def restrict(G: LocalPresentation, keep: Sequence[str], name: str = "") -> LocalPresentation:
    """Sub-presentation on the vertices ``keep``; terms through other vertices are dropped."""
    keep = set(keep)
    P = G.presentation
    arrows = [a for a in P.arrows.values() if a.source in keep and a.target in keep]
    ids = {a.id for a in arrows}
    diff = {a.id: {w: c for w, c in P.differential[a.id].items() if all(x in ids for x in w)} for a in arrows}
    verts = [v for v in P.quiver.vertices if v in keep]
    Q = FreeDgPresentation(GradedQuiver(verts, arrows), diff, name or P.name)
    return LocalPresentation(_checked(Q), {v: l for v, l in G.designated.items() if v in keep},
                             {v: l for v, l in G.big_loops.items() if v in keep},
                             {g: k for g, k in G.info.items() if g in ids}, G.n, G.m)


def interior_positions(corners: Sequence[int]) -> List[str]:
    """Vertices of G_{n,m} selected by consecutive corner values."""
    out, p = [], 0
    for c in corners:
        out.append(str(p + 1))
        p += c
    return out


def local_interior(n: int, m: int, corners: Sequence[int], field: Field = QQ) -> LocalPresentation:
    corners = list(corners)
    if not corners or any(c < 1 for c in corners) or sum(corners) != m:
        raise GinzburgError(f"corner data {corners} must be positive and sum to m = {m}")
    if len(corners) > m:
        raise GinzburgError("valency exceeds degree")
    G = build_Gnm(n, m, field)
    if len(corners) == m:
        return G
    return restrict(G, interior_positions(corners), f"G_v(n={n},m={m},corners={corners})")


def local_boundary(n: int, corners: Sequence[int]) -> LocalPresentation:
    corners = list(corners)
    if n < 1 or any(c < 1 for c in corners):
        raise GinzburgError("need n >= 1 and positive corners")
    r1 = len(corners) + 1
    V = range(1, r1 + 1)
    dist = lambda j, i: sum(corners[j - 1:i - 1])
    alpha = lambda i, j: f"alpha_{i},{j}"
    beta = lambda i, j: f"beta_{i},{j}"
    arrows, info, diff = [], {}, {}
    for i in V:
        for j in V:
            if j < i:
                arrows.append(Arrow(alpha(i, j), str(i), str(j), 1 - dist(j, i)))
                info[alpha(i, j)] = ("balpha", str(i), str(j))
            if j <= i:
                arrows.append(Arrow(beta(i, j), str(i), str(j), 2 - n - dist(j, i)))
                info[beta(i, j)] = ("beta", str(i), str(j))
    for i in V:
        for j in V:
            if j < i:
                d: Lin = {}
                for k in range(j + 1, i):
                    lin_add(d, (alpha(k, j), alpha(i, k)), sign(dist(j, k) - 1))
                diff[alpha(i, j)] = d
            if j <= i:
                d = {}
                for k in range(j + 1, i + 1):
                    lin_add(d, (alpha(k, j), beta(i, k)), -1)
                for k in range(j, i):
                    lin_add(d, (beta(k, j), alpha(i, k)), sign(n + dist(j, k)))
                diff[beta(i, j)] = d
    P = FreeDgPresentation(GradedQuiver([str(i) for i in V], arrows), diff, f"G_v(n={n},boundary,{corners})")
    return LocalPresentation(_checked(P), {str(i): beta(i, i) for i in V}, {}, info, n, 0)


# ---------------------------------------------------------------------------
# gluing


@dataclass
class GluedPresentation:
    S: SGraph
    n: int
    presentation: FreeDgPresentation
    info: Dict[str, tuple]
    loops_l: Dict[int, str]
    loops_L: Dict[str, str]   # halfedge -> degree 1-n loop


def _local_for_vertex(S: SGraph, v: Vertex, n: int, field: Field):
    """Local piece and the map (local vertex -> halfedge of v)."""
    if v.internal:
        G = local_interior(n, v.degree, v.corners, field)
        pos = interior_positions(v.corners)
        return G, dict(zip(pos, v.halfedges))
    G = local_boundary(n, v.corners)
    return G, {str(k + 1): h for k, h in enumerate(v.halfedges)}


def glue_ginzburg(S: SGraph, n: int, field: Field = QQ) -> GluedPresentation:
    if n < 2:
        raise GinzburgError("gluing needs n >= 2")
    diag = validate(S, n)
    if not diag.compatible:
        raise SGraphError("incompatible: " + "; ".join(diag.messages))
    arrows: Dict[str, Arrow] = {}
    diff: Dict[str, Lin] = {}
    info: Dict[str, tuple] = {}
    loops_l: Dict[int, str] = {}
    loops_L: Dict[str, str] = {}
    edge = lambda h: str(S.edge_of[h])
    for v in S.vertices.values():
        G, hmap = _local_for_vertex(S, v, n, field)
        P = G.presentation
        rename: Dict[str, str] = {}
        gkey: Dict[str, tuple] = {}
        for gid, key in G.info.items():
            kind = key[0]
            if kind == "alpha":
                hi, hj = hmap[key[1]], hmap[key[2]]
                r = (key[3] - (int(key[1]) - int(key[2])) % v.degree) // v.degree
                rename[gid] = f"alpha^{r}_{hi},{hj}"
                gkey[gid] = ("alpha", hi, hj, key[3])
            elif kind == "L":
                h = hmap[key[1]]
                rename[gid] = f"L_{h}"
                gkey[gid] = ("L", h)
                loops_L[h] = rename[gid]
            elif kind == "balpha":
                hi, hj = hmap[key[1]], hmap[key[2]]
                rename[gid] = f"alpha_{hi},{hj}"
                gkey[gid] = ("balpha", hi, hj)
            elif kind == "beta" and key[1] != key[2]:
                hi, hj = hmap[key[1]], hmap[key[2]]
                rename[gid] = f"beta_{hi},{hj}"
                gkey[gid] = ("beta", hi, hj)
        for lv, gid in G.designated.items():
            e = S.edge_of[hmap[lv]]
            rename[gid] = f"l_{e}"
            gkey[gid] = ("l", tuple(sorted(S.edge_halfedges(e))))
            loops_l[e] = rename[gid]
        for gid, a in P.arrows.items():
            new = rename[gid]
            src, tgt = edge(hmap[a.source]), edge(hmap[a.target])
            arr = Arrow(new, src, tgt, a.degree)
            d = {tuple(rename[x] for x in w): c for w, c in P.differential[gid].items()}
            if new in arrows:
                if arrows[new] != arr or diff[new] != d:
                    raise AlgebraError(f"inconsistent identification of {new}")
                continue
            arrows[new] = arr
            diff[new] = d
            info[new] = gkey[gid]
    verts = [str(i) for i in range(1, len(S.edges) + 1)]
    P = FreeDgPresentation(GradedQuiver(verts, arrows.values()), diff, f"G(S,{n})")
    return GluedPresentation(S, n, _checked(P), info, loops_l, loops_L)


MIXED_MODES = ("discard", "eliminate", "keep")


def reduce_ginzburg(G: GluedPresentation, mixed: str = "discard") -> FreeDgPresentation:
    """Reduced presentation.  Interior-interior edges: drop l_e and merge the two
    degree 1-n loops into one with d = d(L) - d(L').  Interior-boundary edges
    depend on ``mixed``: "discard" drops l_e and the degree 1-n loop (l_e becomes 0
    wherever it occurs), "eliminate" cancels the pair (L, l_e) by substituting
    l_e from d(L), "keep" leaves both loops."""
    if mixed not in MIXED_MODES:
        raise ValueError(f"mixed must be one of {MIXED_MODES}")
    S = G.S
    P = G.presentation
    arrows = dict(P.arrows)
    diff = {k: dict(v) for k, v in P.differential.items()}
    zero: set = set()
    for e, (a, b) in enumerate(S.edges, start=1):
        ia, ib = S.is_internal_h(a), S.is_internal_h(b)
        l = G.loops_l[e]
        if ia and ib:
            first = c_rep(S, a)
            second = b if first == a else a
            L1, L2 = G.loops_L[first], G.loops_L[second]
            d = dict(diff[L1])
            for w, c in diff[L2].items():
                lin_add(d, w, -c)
            if any(l in w for w in d):
                raise AlgebraError(f"loop {l} survives in d(L_{e})")
            for x in (L1, L2, l):
                arrows.pop(x)
                diff.pop(x)
            new = f"L_{e}"
            arrows[new] = Arrow(new, str(e), str(e), 1 - G.n)
            diff[new] = d
            for k, dk in diff.items():
                if any(x in w for w in dk for x in (L1, L2, l)):
                    raise AlgebraError(f"removed loop occurs in d({k})")
        elif ia != ib and mixed == "discard":
            h = a if ia else b
            for x in (G.loops_L[h], l):
                arrows.pop(x)
                diff.pop(x)
            zero |= {G.loops_L[h], l}
    if zero:
        for k in diff:
            diff[k] = {w: c for w, c in diff[k].items() if not any(x in zero for x in w)}
    R = FreeDgPresentation(GradedQuiver(P.quiver.vertices, arrows.values()), diff, f"G(S,{G.n})^rd[{mixed}]")
    if mixed == "eliminate":
        for e, (a, b) in enumerate(S.edges, start=1):
            ia, ib = S.is_internal_h(a), S.is_internal_h(b)
            if ia != ib:
                h = a if ia else b
                R = eliminate_pair(R, G.loops_L[h], G.loops_l[e])
    return _checked(R)


def arrow_multiset(P: FreeDgPresentation) -> List[Tuple[str, str, int]]:
    return sorted((a.source, a.target, a.degree) for a in P.arrows.values())


# ---------------------------------------------------------------------------
# branched covers


def voltage_cover(S: SGraph, N: int, voltage: Mapping[str, int]) -> SGraph:
    """Z/N branched cover: halfedge h on sheet g becomes ``h.g``; going once around
    an internal vertex v moves to sheet g + voltage[v].  Edges keep their sheet."""
    hid = lambda h, g: f"{h}.{g}"
    verts = []
    for v in S.vertices.values():
        if not v.internal:
            for g in range(N):
                verts.append(Vertex(f"{v.id}.{g}", v.kind, [hid(h, g) for h in v.halfedges], list(v.corners)))
            continue
        gamma = voltage.get(v.id, 0) % N
        seen = set()
        for g0 in range(N):
            if g0 in seen:
                continue
            hs, cs, g = [], [], g0
            while True:
                seen.add(g)
                hs += [hid(h, g) for h in v.halfedges]
                cs += list(v.corners)
                g = (g + gamma) % N
                if g == g0:
                    break
            verts.append(Vertex(f"{v.id}.{g0}", v.kind, hs, cs))
    pairing = {}
    for a, b in S.edges:
        for g in range(N):
            pairing[hid(a, g)] = hid(b, g)
            pairing[hid(b, g)] = hid(a, g)
    return SGraph(verts, pairing)


def sheet_shift(S: SGraph, N: int) -> Dict[str, str]:
    out = {}
    for h in S.halfedges:
        base, g = h.rsplit(".", 1)
        out[h] = f"{base}.{(int(g) + 1) % N}"
    return out


def sheet_projection(Sc: SGraph) -> Dict[str, str]:
    return {h: h.rsplit(".", 1)[0] for h in Sc.halfedges}


@dataclass
class CoveringReport:
    ok: bool
    failures: List[str] = field(default_factory=list)
    orbits: int = 0

    def __bool__(self):
        return self.ok


def _cyclic_equal(a: Sequence, b: Sequence) -> bool:
    if len(a) != len(b):
        return False
    if not a:
        return True
    return any(list(a[k:]) + list(a[:k]) == list(b) for k in range(len(a)))


def _vertex_signature(S: SGraph, v: Vertex, f) -> List[tuple]:
    return [(f(h), c) for h, c in zip(v.halfedges, list(v.corners) + [None] * (len(v.halfedges) - len(v.corners)))]


def covering_quotient_check(Sc: SGraph, action: Mapping, S: SGraph, n: int) -> CoveringReport:
    """``action`` holds ``generators`` (halfedge permutations of the cover) and
    ``projection`` (cover halfedge -> halfedge of S)."""
    fails: List[str] = []
    gens = [dict(g) for g in action.get("generators", [])]
    proj = dict(action["projection"])
    H = set(Sc.halfedges)
    for k, g in enumerate(gens):
        if set(g) != H or set(g.values()) != H:
            return CoveringReport(False, [f"generator {k} is not a permutation of the halfedges"])
        for h in H:
            if g[Sc.partner(h)] != Sc.partner(g[h]):
                return CoveringReport(False, [f"generator {k} does not preserve the edge at {h}"])
        for v in Sc.vertices.values():
            w = Sc.vertex(g[v.halfedges[0]])
            mapped = [(g[h], c) for h, c in zip(v.halfedges, v.corners)]
            target = list(zip(w.halfedges, w.corners))
            ok = _cyclic_equal(mapped, target) if v.internal else (mapped == target and
                                                                  [g[h] for h in v.halfedges] == list(w.halfedges))
            if not ok or v.kind != w.kind:
                return CoveringReport(False, [f"generator {k} does not preserve the vertex {v.id}"])
    # orbits
    orbit: Dict[str, int] = {}
    count = 0
    for h in sorted(H):
        if h in orbit:
            continue
        stack = [h]
        orbit[h] = count
        while stack:
            x = stack.pop()
            for g in gens:
                y = g[x]
                if y not in orbit:
                    orbit[y] = count
                    stack.append(y)
        count += 1
    if set(proj) != H:
        return CoveringReport(False, ["projection must be defined on every halfedge of the cover"])
    per_orbit: Dict[int, set] = {}
    for h, o in orbit.items():
        per_orbit.setdefault(o, set()).add(proj[h])
    for o, imgs in per_orbit.items():
        if len(imgs) != 1:
            return CoveringReport(False, [f"projection is not constant on orbit {o}: {sorted(imgs)}"], count)
    images = [next(iter(s)) for s in per_orbit.values()]
    if sorted(images) != sorted(S.halfedges):
        return CoveringReport(False, ["orbits do not correspond bijectively to halfedges of the quotient"], count)
    for h in H:
        if proj[Sc.partner(h)] != S.partner(proj[h]):
            return CoveringReport(False, [f"edge of {h} does not project to an edge"], count)
    for v in Sc.vertices.values():
        w = S.vertex(proj[v.halfedges[0]])
        if v.internal != w.internal:
            fails.append(f"vertex {v.id} and its image {w.id} differ in kind")
            continue
        if v.internal:
            if v.degree != n:
                fails.append(f"internal vertex {v.id} of the cover has degree {v.degree} != {n}")
            k = len(v.halfedges) // max(1, len(w.halfedges))
            mapped = [(proj[h], c) for h, c in zip(v.halfedges, v.corners)]
            target = list(zip(w.halfedges, w.corners)) * k
            if len(v.halfedges) != k * len(w.halfedges) or not _cyclic_equal(mapped, target):
                fails.append(f"corner data at {v.id} does not cover {w.id}")
        else:
            if [proj[h] for h in v.halfedges] != list(w.halfedges) or list(v.corners) != list(w.corners):
                fails.append(f"corner data at {v.id} does not cover {w.id}")
    if fails:
        return CoveringReport(False, fails, count)
    Gc = glue_ginzburg(Sc, n)
    G = glue_ginzburg(S, n)
    by_key = {key: gid for gid, key in G.info.items()}

    def image_key(key):
        kind = key[0]
        if kind == "alpha":
            return ("alpha", proj[key[1]], proj[key[2]], key[3])
        if kind == "l":
            return ("l", tuple(sorted(proj[h] for h in key[1])))
        if kind == "L":
            return ("L", proj[key[1]])
        return (kind, proj[key[1]], proj[key[2]])

    phi: Dict[str, str] = {}
    for gid, key in sorted(Gc.info.items()):
        ik = image_key(key)
        if ik not in by_key:
            return CoveringReport(False, [f"generator {gid} has no image ({ik})"], count)
        phi[gid] = by_key[ik]
    if set(phi.values()) != set(G.presentation.arrows):
        missing = sorted(set(G.presentation.arrows) - set(phi.values()))
        return CoveringReport(False, [f"generators {missing[:5]} of the quotient are not hit"], count)
    emap = {str(S.edge_of[proj[a]]) for a, _ in Sc.edges}
    Pc, P = Gc.presentation, G.presentation
    for gid in sorted(Pc.arrows):
        a, b = Pc.arrows[gid], P.arrows[phi[gid]]
        if a.degree != b.degree:
            return CoveringReport(False, [f"degree of {gid} differs from its image {b.id}"], count)
        img: Lin = {}
        for w, c in Pc.differential[gid].items():
            lin_add(img, tuple(phi[x] for x in w), c)
        if img != P.differential[b.id]:
            return CoveringReport(False, [f"orbit of {b.id}: d({gid}) maps to {format_lin(img)}, "
                                          f"expected {format_lin(P.differential[b.id])}"], count)
    return CoveringReport(True, [], count)


def quot1_cover(S: SGraph) -> Tuple[SGraph, dict]:
    """Z/4 cover of the four-angulation example together with its action data."""
    voltage = {v.id: {1: 1, 2: 2, 4: 0}[v.degree] for v in S.internal_vertices()}
    Sc = voltage_cover(S, 4, voltage)
    return Sc, {"generators": [sheet_shift(Sc, 4)], "projection": sheet_projection(Sc)}
