"""Koszul duals: the generic cobar construction, the closed-form dual of an RGB
algebra, and an isomorphism search between free dg presentations."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .dgalg import (AlgebraError, Arrow, CapExceeded, FinDimDgAlgebra, FreeDgPresentation, GradedQuiver, Lin,
                    Word, check_d_squared, format_lin, lin_add)
from .rgb import c_rep, cycle_length, sign, tau_rep, tau_sign
from .sgraph import SGraph, SGraphError, validate


# ---------------------------------------------------------------------------
# cobar


def dual_id(label: str) -> str:
    return f"{label}^"


def check_augmented(A: FinDimDgAlgebra) -> List[int]:
    """Return the augmentation ideal after checking that each of its basis
    elements is nilpotent and that every vertex has an idempotent."""
    verts = {b.source for b in A.basis} | {b.target for b in A.basis}
    missing = verts - set(A.idempotents)
    if missing:
        raise AlgebraError(f"missing idempotents for vertices {sorted(missing)}")
    aug = A.augmentation_ideal()
    for i in aug:
        x = {i: Fraction(1)}
        power = x
        for _ in range(A.dim + 1):
            power = A.mul(power, x)
            if not power:
                break
        else:
            raise AlgebraError(f"basis element {A.basis[i].label} is not nilpotent")
    return aug


def cobar(A: FinDimDgAlgebra, name: str = "") -> FreeDgPresentation:
    aug = check_augmented(A)
    augset = set(aug)
    basis = A.basis
    ids = {i: dual_id(basis[i].label) for i in aug}
    arrows = [Arrow(ids[i], basis[i].target, basis[i].source, 1 - basis[i].degree) for i in aug]
    diff: Dict[str, Lin] = {ids[k]: {} for k in aug}
    for i, dx in A.differential.items():
        if i not in augset:
            continue
        for k, c in dx.items():
            if k in augset:
                lin_add(diff[ids[k]], (ids[i],), -c)
    for (j, i), prod in A.product.items():
        if j not in augset or i not in augset:
            continue
        s = sign(1 - basis[i].degree)
        for k, c in prod.items():
            if k in augset:
                lin_add(diff[ids[k]], (ids[i], ids[j]), s * c)
    vertices = sorted(A.idempotents, key=_vkey)
    P = FreeDgPresentation(GradedQuiver(vertices, arrows), diff, name or f"cobar({A.name})")
    rep = check_d_squared(P)
    if not rep.ok:
        raise AlgebraError("cobar differential does not square to zero: " + rep.failures[0])
    return P


def _vkey(v: str):
    return (0, int(v), "") if v.isdigit() else (1, 0, v)


def op(P: FreeDgPresentation, name: str = "") -> FreeDgPresentation:
    """Opposite presentation: arrows reversed, words reversed with their Koszul sign."""
    q = P.quiver
    arrows = [Arrow(a.id, a.target, a.source, a.degree) for a in q.arrows.values()]
    deg = {a.id: a.degree for a in q.arrows.values()}
    diff: Dict[str, Lin] = {}
    for aid, dx in P.differential.items():
        out: Lin = {}
        for w, c in dx.items():
            k = 0
            for x in range(len(w)):
                for y in range(x + 1, len(w)):
                    k += deg[w[x]] * deg[w[y]]
            lin_add(out, tuple(reversed(w)), sign(k) * c)
        diff[aid] = out
    return FreeDgPresentation(GradedQuiver(q.vertices, arrows), diff, name or f"op({P.name})", P.meta)


# ---------------------------------------------------------------------------
# closed-form dual


@dataclass
class DualPresentation:
    presentation: FreeDgPresentation
    families: Dict[str, str]
    aliases: Dict[str, Tuple[str, int]] = field(default_factory=dict)


def closed_form_dual(S: SGraph, n: int) -> DualPresentation:
    diag = validate(S, n)
    if not diag.compatible:
        raise SGraphError("incompatible: " + "; ".join(diag.messages))
    edge = lambda h: str(S.edge_of[h])
    arrows: List[Arrow] = []
    families: Dict[str, str] = {}
    diff: Dict[str, Lin] = {}

    def add(gid, family, src_h, tgt_h, degree):
        arrows.append(Arrow(gid, edge(src_h), edge(tgt_h), degree))
        families[gid] = family
        diff[gid] = {}

    # internal paths, identified by (start, length)
    def walk(j, L):
        h, total = j, 0
        for _ in range(L):
            total += S.corner_after(h)
            h = S.next_h(h)
        return h, total

    def alpha_int(j, L):
        end, _ = walk(j, L)
        q = L // S.vertex(j).valency
        return f"alpha^{q}_{end},{j}"

    int_paths = []
    for v in S.internal_vertices():
        for j in v.halfedges:
            for L in range(1, cycle_length(S, j, n)):
                end, dg = walk(j, L)
                add(alpha_int(j, L), "alpha^r", end, j, 1 - dg)
                int_paths.append((j, L))

    def splits(j, L) -> Lin:
        out: Lin = {}
        for L1 in range(1, L):
            mid, d1 = walk(j, L1)
            lin_add(out, (alpha_int(j, L1), alpha_int(mid, L - L1)), sign(1 - d1))
        return out

    for j, L in int_paths:
        diff[alpha_int(j, L)] = splits(j, L)

    aliases: Dict[str, Tuple[str, int]] = {}
    for a, b in S.edges:
        for h in (a, b):
            if not S.is_internal_h(h) and h == tau_rep(S, h):
                add(f"t_{h}", "t", h, h, 2 - n)
        for h in (a, b):
            if not S.is_internal_h(h):
                aliases[f"beta_{h},{h}"] = (f"t_{tau_rep(S, h)}", tau_sign(S, h, n))
    for a, b in S.edges:
        ends = [h for h in (a, b) if S.is_internal_h(h)]
        if not ends:
            continue
        i = c_rep(S, ends[0])
        j = S.partner(i)
        gid = f"sigma_{i}"
        add(gid, "sigma", i, i, 1 - n)
        d = splits(i, cycle_length(S, i, n))
        if S.is_internal_h(j):
            for w, c in splits(j, cycle_length(S, j, n)).items():
                lin_add(d, w, sign(n - 1) * c)
        else:
            lin_add(d, (f"t_{tau_rep(S, j)}",), sign(n - 1) * tau_sign(S, j, n))
        diff[gid] = d

    for v in S.boundary_vertices():
        hs = v.halfedges
        deg = lambda x, y: sum(v.corners[x:y])
        for x in range(len(hs)):
            for y in range(x + 1, len(hs)):
                add(f"alpha_{hs[y]},{hs[x]}", "alpha", hs[y], hs[x], 1 - deg(x, y))
                add(f"beta_{hs[y]},{hs[x]}", "beta", hs[y], hs[x], 2 - n - deg(x, y))

        def beta(y, x):
            if x == y:
                return aliases[f"beta_{hs[x]},{hs[x]}"]
            return f"beta_{hs[y]},{hs[x]}", 1

        for x in range(len(hs)):
            for y in range(x + 1, len(hs)):
                da: Lin = {}
                for k in range(x + 1, y):
                    lin_add(da, (f"alpha_{hs[k]},{hs[x]}", f"alpha_{hs[y]},{hs[k]}"), sign(1 - deg(x, k)))
                diff[f"alpha_{hs[y]},{hs[x]}"] = da
                db: Lin = {}
                for k in range(x, y):
                    g, s = beta(k, x)
                    lin_add(db, (g, f"alpha_{hs[y]},{hs[k]}"), s * sign(2 - n - deg(x, k)))
                for k in range(x + 1, y + 1):
                    g, s = beta(y, k)
                    lin_add(db, (f"alpha_{hs[k]},{hs[x]}", g), -s)
                diff[f"beta_{hs[y]},{hs[x]}"] = db
    vertices = [str(i) for i in range(1, len(S.edges) + 1)]
    P = FreeDgPresentation(GradedQuiver(vertices, arrows), diff, f"closed-form dual (n={n})")
    rep = check_d_squared(P)
    if not rep.ok:
        raise AlgebraError("closed-form differential does not square to zero: " + rep.failures[0])
    return DualPresentation(P, families, aliases)


# ---------------------------------------------------------------------------
# comparison


@dataclass
class IsoReport:
    isomorphic: bool
    vertex_map: Dict[str, str] = field(default_factory=dict)
    matching: Dict[str, Tuple[str, Fraction]] = field(default_factory=dict)
    unmatched: Tuple[List[str], List[str]] = field(default_factory=lambda: ([], []))
    mismatches: List[str] = field(default_factory=list)
    nodes: int = 0

    def __bool__(self):
        return self.isomorphic


class _F2System:
    """Incremental linear system over F_2 with bitmask rows."""

    def __init__(self):
        self.rows: Dict[int, Tuple[int, int]] = {}

    def copy(self):
        s = _F2System()
        s.rows = dict(self.rows)
        return s

    def add(self, mask: int, rhs: int) -> bool:
        while mask:
            top = mask.bit_length() - 1
            if top not in self.rows:
                self.rows[top] = (mask, rhs)
                return True
            m, r = self.rows[top]
            mask ^= m
            rhs ^= r
        return rhs == 0

    def solve(self) -> Dict[int, int]:
        sol: Dict[int, int] = {}
        for top in sorted(self.rows):
            m, r = self.rows[top]
            val = r
            rest = m & ~(1 << top)
            b = 0
            while rest:
                if rest & 1:
                    val ^= sol.get(b, 0)
                rest >>= 1
                b += 1
            sol[top] = val
        return sol


def _vertex_signature(P: FreeDgPresentation, v: str):
    outs = sorted((a.degree, a.target == v) for a in P.arrows.values() if a.source == v)
    ins = sorted((a.degree, a.source == v) for a in P.arrows.values() if a.target == v)
    return (tuple(outs), tuple(ins))


def _gen_signatures(P: FreeDgPresentation) -> Dict[str, tuple]:
    q = P.quiver
    occurs: Dict[str, List[int]] = {a: [] for a in q.arrows}
    for aid, dx in P.differential.items():
        for w in dx:
            for x in w:
                occurs[x].append(len(w))
    sig = {}
    for aid, a in q.arrows.items():
        dx = P.differential[aid]
        words = tuple(sorted((tuple(q.arrows[x].degree for x in w), abs(c)) for w, c in dx.items()))
        sig[aid] = (a.degree, a.source == a.target, words, tuple(sorted(occurs[aid])))
    return sig


def compare_presentations(P1: FreeDgPresentation, P2: FreeDgPresentation, node_cap: int = 200000) -> IsoReport:
    q1, q2 = P1.quiver, P2.quiver
    if len(q1.vertices) != len(q2.vertices) or len(q1.arrows) != len(q2.arrows):
        return IsoReport(False, mismatches=[f"sizes differ: {len(q1.vertices)} vertices/{len(q1.arrows)} arrows "
                                            f"vs {len(q2.vertices)}/{len(q2.arrows)}"],
                         unmatched=(sorted(q1.arrows), sorted(q2.arrows)))
    vs1 = {v: _vertex_signature(P1, v) for v in q1.vertices}
    vs2 = {v: _vertex_signature(P2, v) for v in q2.vertices}
    if sorted(vs1.values()) != sorted(vs2.values()):
        return _block_report(P1, P2, None, "vertex signatures differ")
    gs1, gs2 = _gen_signatures(P1), _gen_signatures(P2)
    if sorted(gs1.values()) != sorted(gs2.values()):
        return _block_report(P1, P2, None, "generator signatures differ")
    counter = [0]
    order1 = sorted(q1.vertices, key=lambda v: (sum(1 for u in q1.vertices if vs1[u] == vs1[v]), _vkey(v)))
    best: List[IsoReport] = []

    def vertex_search(k: int, vmap: Dict[str, str], used: set):
        if k == len(order1):
            rep = _match_generators(P1, P2, vmap, gs1, gs2, counter, node_cap)
            if rep.isomorphic:
                return rep
            if not best or len(rep.matching) > len(best[0].matching):
                best[:] = [rep]
            return None
        v = order1[k]
        for w in sorted(q2.vertices, key=_vkey):
            if w in used or vs2[w] != vs1[v]:
                continue
            if not _vertex_compatible(P1, P2, v, w, vmap):
                continue
            vmap[v] = w
            used.add(w)
            r = vertex_search(k + 1, vmap, used)
            if r:
                return r
            del vmap[v]
            used.discard(w)
        return None

    rep = vertex_search(0, {}, set())
    if rep:
        rep.nodes = counter[0]
        return rep
    out = best[0] if best else IsoReport(False, mismatches=["no vertex bijection respects arrow counts"])
    out.nodes = counter[0]
    return out


def _vertex_compatible(P1, P2, v, w, vmap) -> bool:
    q1, q2 = P1.quiver, P2.quiver
    for u, x in list(vmap.items()) + [(v, w)]:
        a = sorted(a.degree for a in q1.arrows.values() if a.source == v and a.target == u)
        b = sorted(a.degree for a in q2.arrows.values() if a.source == w and a.target == x)
        if a != b:
            return False
        a = sorted(a.degree for a in q1.arrows.values() if a.source == u and a.target == v)
        b = sorted(a.degree for a in q2.arrows.values() if a.source == x and a.target == w)
        if a != b:
            return False
    return True


def _block_report(P1, P2, vmap, why) -> IsoReport:
    from collections import Counter
    q1, q2 = P1.quiver, P2.quiver
    key1 = lambda a: (vmap.get(a.source, a.source) if vmap else "", vmap.get(a.target, a.target) if vmap else "", a.degree)
    key2 = lambda a: (a.source if vmap else "", a.target if vmap else "", a.degree)
    c1 = Counter(key1(a) for a in q1.arrows.values())
    c2 = Counter(key2(a) for a in q2.arrows.values())
    un1, un2 = [], []
    rem1, rem2 = c1 - c2, c2 - c1
    for a in sorted(q1.arrows.values(), key=lambda a: a.id):
        if rem1[key1(a)] > 0:
            un1.append(a.id)
            rem1[key1(a)] -= 1
    for a in sorted(q2.arrows.values(), key=lambda a: a.id):
        if rem2[key2(a)] > 0:
            un2.append(a.id)
            rem2[key2(a)] -= 1
    return IsoReport(False, dict(vmap or {}), {}, (un1, un2), [why])


def _match_generators(P1, P2, vmap, gs1, gs2, counter, node_cap) -> IsoReport:
    q1, q2 = P1.quiver, P2.quiver
    blocks2: Dict[tuple, List[str]] = {}
    for aid, a in q2.arrows.items():
        blocks2.setdefault((a.source, a.target, gs2[aid]), []).append(aid)
    key = lambda aid: (vmap[q1.arrows[aid].source], vmap[q1.arrows[aid].target], gs1[aid])
    for aid in q1.arrows:
        if key(aid) not in blocks2:
            return _block_report(P1, P2, vmap, "generator blocks differ under the vertex map")
    from collections import Counter
    if Counter(key(a) for a in q1.arrows) != Counter({k: len(v) for k, v in blocks2.items()}):
        return _block_report(P1, P2, vmap, "generator block sizes differ under the vertex map")
    # dependency order: closed generators first, then by the order in which inputs become available
    gens = sorted(q1.arrows, key=lambda a: (len(P1.differential[a]) > 0, len(blocks2[key(a)]), a))
    pos = {g: k for k, g in enumerate(gens)}
    # constraints for generator g become checkable once g and everything in d(g) is assigned
    ready_at: Dict[int, List[str]] = {}
    for g in gens:
        deps = {x for w in P1.differential[g] for x in w} | {g}
        ready_at.setdefault(max(pos[x] for x in deps), []).append(g)
    bit = {g: k for k, g in enumerate(gens)}
    deepest: List[Tuple[int, Dict[str, str], List[str]]] = [(-1, {}, [])]

    def check(g, gmap, system) -> Optional[str]:
        dx = P1.differential[g]
        dy = P2.differential[gmap[g]]
        mapped = {}
        for w, c in dx.items():
            mapped[tuple(gmap[x] for x in w)] = (c, w)
        if set(mapped) != set(dy):
            return f"d({g}) = {format_lin(dx)} does not map onto d({gmap[g]}) = {format_lin(dy)}"
        for u, (c, w) in mapped.items():
            c2 = dy[u]
            if abs(c) != abs(c2):
                return f"coefficient size differs in d({g}) at {'*'.join(w)}"
            mask = 1 << bit[g]
            for x in w:
                mask ^= 1 << bit[x]
            if not system.add(mask, 0 if c == c2 else 1):
                return f"signs in d({g}) cannot be matched"
        return None

    def search(k, gmap, used, system):
        counter[0] += 1
        if counter[0] > node_cap:
            sizes = {f"{s}->{t}": len(v) for (s, t, _), v in blocks2.items() if len(v) > 1}
            raise CapExceeded(f"comparison search exceeded {node_cap} nodes; block sizes {sizes}")
        if k == len(gens):
            return gmap, system
        g = gens[k]
        for h in blocks2[key(g)]:
            if h in used:
                continue
            gmap[g] = h
            sys2 = system.copy()
            err = None
            for r in ready_at.get(k, []):
                err = check(r, gmap, sys2)
                if err:
                    break
            if err is None:
                used.add(h)
                res = search(k + 1, gmap, used, sys2)
                if res:
                    return res
                used.discard(h)
            elif k > deepest[0][0]:
                deepest[0] = (k, dict(gmap), [err])
            del gmap[g]
        return None

    res = search(0, {}, set(), _F2System())
    if res is None:
        k, gm, errs = deepest[0]
        return IsoReport(False, dict(vmap), {g: (h, Fraction(1)) for g, h in gm.items()},
                         (sorted(set(q1.arrows) - set(gm)), sorted(set(q2.arrows) - set(gm.values()))), errs)
    gmap, system = res
    sol = system.solve()
    matching = {g: (gmap[g], Fraction(sign(sol.get(bit[g], 0)))) for g in gens}
    return IsoReport(True, dict(vmap), matching, ([], []), [])
