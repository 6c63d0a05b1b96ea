"""S-graphs: decorated ribbon graphs with internal and boundary vertices.

A vertex lists its halfedges in counterclockwise order (cyclic at internal
vertices, a total order at boundary vertices) together with the corner values
``d(h_k, h_{k+1})``.  Edges are the orbits of a fixed-point-free involution on
halfedges and are numbered 1, 2, ... by their smallest halfedge id; these numbers
double as quiver-vertex names downstream.
"""
from __future__ import annotations

import json
import os
import random
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

INTERNAL = "internal"
BOUNDARY = "boundary"


class SGraphError(ValueError):
    """Invalid S-graph data (semantic or syntactic)."""


class FlipError(ValueError):
    """The requested flip is a configuration this model refuses to handle."""


@dataclass(frozen=True)
class Vertex:
    id: str
    kind: str
    halfedges: Tuple[str, ...]
    corners: Tuple[int, ...]

    @property
    def valency(self) -> int:
        return len(self.halfedges)

    @property
    def internal(self) -> bool:
        return self.kind == INTERNAL

    @property
    def degree(self) -> Optional[int]:
        """Sum of corners for internal vertices, ``None`` (infinite) otherwise."""
        return sum(self.corners) if self.internal else None


class SGraph:
    def __init__(self, vertices: Iterable[Vertex], pairing: Mapping[str, str]):
        self.vertices: Dict[str, Vertex] = {}
        for v in vertices:
            if v.id in self.vertices:
                raise SGraphError(f"duplicate vertex id {v.id!r}")
            self.vertices[v.id] = Vertex(v.id, v.kind, tuple(v.halfedges), tuple(int(c) for c in v.corners))
        self.pairing: Dict[str, str] = dict(pairing)
        self._check()
        self.vertex_of: Dict[str, str] = {}
        self.position: Dict[str, int] = {}
        for v in self.vertices.values():
            for k, h in enumerate(v.halfedges):
                self.vertex_of[h] = v.id
                self.position[h] = k
        self.edges: List[Tuple[str, str]] = sorted(
            {tuple(sorted((h, self.pairing[h]))) for h in self.pairing})
        self.edge_of: Dict[str, int] = {}
        for i, (a, b) in enumerate(self.edges, start=1):
            self.edge_of[a] = i
            self.edge_of[b] = i

    # -- validation -----------------------------------------------------------------
    def _check(self) -> None:
        if not self.vertices:
            raise SGraphError("empty vertex list")
        seen: Dict[str, str] = {}
        for v in self.vertices.values():
            if v.kind not in (INTERNAL, BOUNDARY):
                raise SGraphError(f"vertex {v.id!r}: unknown kind {v.kind!r}")
            if not v.halfedges:
                raise SGraphError(f"vertex {v.id!r} has no halfedges")
            for h in v.halfedges:
                if h in seen:
                    raise SGraphError(f"halfedge {h!r} appears at {seen[h]!r} and {v.id!r}")
                seen[h] = v.id
            r = len(v.halfedges)
            expected = r if v.kind == INTERNAL else r - 1
            if len(v.corners) != expected:
                raise SGraphError(f"vertex {v.id!r}: corner-count mismatch ({len(v.corners)} given, {expected} expected)")
            if any(c < 1 for c in v.corners):
                raise SGraphError(f"vertex {v.id!r}: corner values must be positive")
        for h, g in self.pairing.items():
            if h not in seen:
                raise SGraphError(f"pairing mentions unknown halfedge {h!r}")
            if g == h:
                raise SGraphError(f"pairing has a fixed point {h!r}")
            if self.pairing.get(g) != h:
                raise SGraphError(f"pairing is not an involution at {h!r}")
        dangling = sorted(set(seen) - set(self.pairing))
        if dangling:
            raise SGraphError(f"dangling halfedge(s) {dangling}")

    # -- basic accessors -------------------------------------------------------------
    @property
    def halfedges(self) -> List[str]:
        return sorted(self.vertex_of)

    def vertex(self, h: str) -> Vertex:
        return self.vertices[self.vertex_of[h]]

    def partner(self, h: str) -> str:
        return self.pairing[h]

    def is_internal_h(self, h: str) -> bool:
        return self.vertex(h).internal

    def edge_halfedges(self, e: int) -> Tuple[str, str]:
        if not 1 <= e <= len(self.edges):
            raise SGraphError(f"no edge {e}")
        return self.edges[e - 1]

    def edge_kind(self, e: int) -> str:
        """'ii', 'ib' or 'bb' according to the kinds of the two end vertices."""
        a, b = self.edge_halfedges(e)
        k = sorted("i" if self.is_internal_h(x) else "b" for x in (a, b))
        return "".join(k)

    def next_h(self, h: str) -> Optional[str]:
        """Counterclockwise successor; ``None`` past the end of a boundary order."""
        v = self.vertex(h)
        k = self.position[h] + 1
        if k < v.valency:
            return v.halfedges[k]
        return v.halfedges[0] if v.internal else None

    def corner_after(self, h: str) -> int:
        """d(h, next(h))."""
        v = self.vertex(h)
        k = self.position[h]
        if v.internal:
            return v.corners[k]
        if k >= v.valency - 1:
            raise SGraphError(f"no corner after the last halfedge {h!r} of a boundary vertex")
        return v.corners[k]

    def degrees(self) -> Dict[str, Optional[int]]:
        return {vid: v.degree for vid, v in sorted(self.vertices.items())}

    def internal_vertices(self) -> List[Vertex]:
        return [v for _, v in sorted(self.vertices.items()) if v.internal]

    def boundary_vertices(self) -> List[Vertex]:
        return [v for _, v in sorted(self.vertices.items()) if not v.internal]

    def __eq__(self, other):
        if not isinstance(other, SGraph):
            return NotImplemented
        return self.vertices == other.vertices and self.pairing == other.pairing

    def __repr__(self):
        return f"SGraph({len(self.vertices)} vertices, {len(self.edges)} edges)"


def corner_distance(S: SGraph, h1: str, h2: str) -> int:
    """Additive extension of corner values from h1 counterclockwise to h2."""
    v1, v2 = S.vertex_of[h1], S.vertex_of[h2]
    if v1 != v2:
        raise SGraphError(f"halfedges {h1!r}, {h2!r} are at different vertices")
    v = S.vertices[v1]
    i, j = S.position[h1], S.position[h2]
    if v.internal:
        if v.valency == 1:
            return 0
        total = 0
        k = i
        while k != j:
            total += v.corners[k]
            k = (k + 1) % v.valency
        return total
    if i > j:
        raise SGraphError(f"{h1!r} does not precede {h2!r} at boundary vertex {v.id!r}")
    return sum(v.corners[i:j])


# ---------------------------------------------------------------------------
# interchange format


def parse_sgraph(text: str) -> SGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SGraphError(f"syntax error at line {exc.lineno} column {exc.colno} (offset {exc.pos}): {exc.msg}") from None
    return sgraph_from_doc(doc)


def sgraph_from_doc(doc) -> SGraph:
    if not isinstance(doc, dict) or "vertices" not in doc or "edges" not in doc:
        raise SGraphError("document must be an object with 'vertices' and 'edges'")
    verts = []
    for v in doc["vertices"]:
        try:
            verts.append(Vertex(str(v["id"]), v["kind"], tuple(str(h) for h in v["halfedges"]),
                                tuple(int(c) for c in v["corners"])))
        except (KeyError, TypeError) as exc:
            raise SGraphError(f"malformed vertex entry {v!r}: {exc}") from None
    pairing: Dict[str, str] = {}
    for e in doc["edges"]:
        if not isinstance(e, list) or len(e) != 2:
            raise SGraphError(f"edge {e!r} is not a pair")
        a, b = str(e[0]), str(e[1])
        if a == b:
            raise SGraphError(f"pairing has a fixed point {a!r}")
        for x, y in ((a, b), (b, a)):
            if x in pairing:
                raise SGraphError(f"halfedge {x!r} is paired twice")
            pairing[x] = y
    return SGraph(verts, pairing)


def sgraph_to_doc(S: SGraph) -> dict:
    return {
        "vertices": [{"id": v.id, "kind": v.kind, "halfedges": list(v.halfedges), "corners": list(v.corners)}
                     for _, v in sorted(S.vertices.items())],
        "edges": [list(e) for e in S.edges],
    }


def serialize_sgraph(S: SGraph) -> str:
    return json.dumps(sgraph_to_doc(S), ensure_ascii=False) + "\n"


FIXTURE_NAMES = ("SG-A", "SG-B", "SG-C", "SG-E1", "SG-E2", "SG-M", "SG-O", "quot1", "quot1-cover")
DEFAULT_N = {"SG-A": 3, "SG-B": 2, "SG-C": 3, "SG-E1": 2, "SG-E2": 2, "SG-M": 3, "SG-O": 6,
             "quot1": 4, "quot1-cover": 4}


def fixture_path(name: str) -> str:
    base = os.environ.get("RGBFORGE_FIXTURES")
    if base:
        return os.path.join(base, f"{name}.json")
    return str(resources.files("rgbforge") / "fixtures" / f"{name}.json")


def load_fixture(name: str) -> SGraph:
    with open(fixture_path(name), encoding="utf-8") as fh:
        return parse_sgraph(fh.read())


# ---------------------------------------------------------------------------
# diagnostics and orientations


@dataclass
class Diagnostics:
    compatible: bool
    degrees: Dict[str, Optional[int]]
    messages: List[str] = field(default_factory=list)


def validate(S: SGraph, n: int) -> Diagnostics:
    msgs = []
    if n < 1:
        msgs.append(f"n = {n} < 1")
    for v in S.internal_vertices():
        if n >= 1 and n % v.degree:
            msgs.append(f"internal vertex {v.id!r} has degree {v.degree}, which does not divide n = {n}")
    return Diagnostics(not msgs, S.degrees(), msgs)


def validate_document(text: str, n: int) -> Diagnostics:
    try:
        S = parse_sgraph(text)
    except SGraphError as exc:
        return Diagnostics(False, {}, [str(exc)])
    return validate(S, n)


@dataclass(frozen=True)
class Orientation:
    toward: Mapping[str, int]

    def __getitem__(self, h: str) -> int:
        return self.toward[h]


def check_orientation(S: SGraph, eps: Mapping[str, int]) -> List[str]:
    """List violated parity conditions (empty when ``eps`` is an orientation)."""
    bad = []
    for a, b in S.edges:
        if eps[a] + eps[b] != 1:
            bad.append(f"edge {a}-{b}: eps values {eps[a]}, {eps[b]}")
    for v in S.internal_vertices():
        if v.valency == 1:
            if v.degree % 2:
                bad.append(f"1-valent vertex {v.id} has odd degree {v.degree}")
            continue
        for k, h in enumerate(v.halfedges):
            g = v.halfedges[(k + 1) % v.valency]
            if (eps[h] + eps[g] - v.corners[k]) % 2:
                bad.append(f"corner ({h},{g}) at {v.id}: parity mismatch")
    return bad


def orientability(S: SGraph) -> Optional[Orientation]:
    """Solve the parity system over F_2; ``None`` when infeasible."""
    for v in S.internal_vertices():
        if v.valency == 1 and v.degree % 2:
            return None
    # variable per edge: eps(first halfedge) = x_e, eps(second) = 1 + x_e
    var = {}
    const = {}
    for i, (a, b) in enumerate(S.edges):
        var[a], const[a] = i, 0
        var[b], const[b] = i, 1
    rows: List[Tuple[int, int]] = []
    for v in S.internal_vertices():
        if v.valency == 1:
            continue
        for k, h in enumerate(v.halfedges):
            g = v.halfedges[(k + 1) % v.valency]
            mask = (1 << var[h]) ^ (1 << var[g])
            rhs = (v.corners[k] + const[h] + const[g]) % 2
            rows.append((mask, rhs))
    pivots: Dict[int, Tuple[int, int]] = {}
    for mask, rhs in rows:
        while mask:
            top = mask.bit_length() - 1
            if top not in pivots:
                pivots[top] = (mask, rhs)
                break
            pm, pr = pivots[top]
            mask ^= pm
            rhs ^= pr
        else:
            if rhs:
                return None
    sol = 0
    for top in sorted(pivots):
        mask, rhs = pivots[top]
        rest = mask & ~(1 << top)
        val = rhs ^ (bin(rest & sol).count("1") & 1)
        if val:
            sol |= 1 << top
    eps = {h: ((sol >> var[h]) & 1) ^ const[h] for h in S.vertex_of}
    assert not check_orientation(S, eps)
    return Orientation(eps)


def default_orientation(S: SGraph) -> Orientation:
    """Orientation bits with each edge pointing toward its smaller halfedge
    (valid as edge data, ignoring parity conditions)."""
    eps = {}
    for a, b in S.edges:
        eps[a], eps[b] = 1, 0
    return Orientation(eps)


# ---------------------------------------------------------------------------
# polygon complex (mixed-angulation model) and flips

ARC = "arc"
BEDGE = "B"
INF = "INF"


@dataclass(frozen=True)
class Polygon:
    kind: str
    sides: Tuple[tuple, ...]


@dataclass(frozen=True)
class AngulationComplex:
    polygons: Mapping[str, Polygon]
    gluing: Mapping[str, str]

    def side_count(self, vid: str) -> int:
        return len(self.polygons[vid].sides)


def to_angulation(S: SGraph) -> AngulationComplex:
    polys = {}
    for vid, v in S.vertices.items():
        sides: List[tuple] = []
        if v.internal:
            for k, h in enumerate(v.halfedges):
                sides.append((ARC, h))
                sides.extend([(BEDGE,)] * (v.corners[k] - 1))
        else:
            sides.append((INF,))
            for k, h in enumerate(v.halfedges):
                sides.append((ARC, h))
                if k < v.valency - 1:
                    sides.extend([(BEDGE,)] * (v.corners[k] - 1))
        polys[vid] = Polygon(v.kind, tuple(sides))
    return AngulationComplex(polys, dict(S.pairing))


def _polygon_to_vertex(vid: str, poly: Polygon) -> Vertex:
    sides = list(poly.sides)
    if poly.kind == INTERNAL:
        if any(s[0] == INF for s in sides):
            raise SGraphError(f"internal polygon {vid!r} has an infinite side")
        arcs = [i for i, s in enumerate(sides) if s[0] == ARC]
        if not arcs:
            raise SGraphError(f"polygon {vid!r} has no arc side")
        hs = [sides[i][1] for i in arcs]
        corners = []
        for k, i in enumerate(arcs):
            j = arcs[(k + 1) % len(arcs)]
            gap = (j - i) % len(sides)
            corners.append(gap if len(arcs) > 1 else len(sides))
        return Vertex(vid, INTERNAL, tuple(hs), tuple(corners))
    infs = [i for i, s in enumerate(sides) if s[0] == INF]
    if len(infs) != 1:
        raise SGraphError(f"boundary polygon {vid!r} must have exactly one infinite side")
    i0 = infs[0]
    sides = sides[i0:] + sides[:i0]
    arcs = [i for i, s in enumerate(sides) if s[0] == ARC]
    if not arcs:
        raise SGraphError(f"polygon {vid!r} has no arc side")
    hs = [sides[i][1] for i in arcs]
    corners = [arcs[k + 1] - arcs[k] for k in range(len(arcs) - 1)]
    return Vertex(vid, BOUNDARY, tuple(hs), tuple(corners))


def from_angulation(A: AngulationComplex) -> SGraph:
    verts = [_polygon_to_vertex(vid, p) for vid, p in A.polygons.items()]
    return SGraph(verts, A.gluing)


def _expand_inf(sides: List[tuple]) -> List[tuple]:
    """Make the unrecorded boundary edges next to the infinite side explicit."""
    out = []
    for s in sides:
        if s[0] == INF:
            out.extend([(BEDGE,), s, (BEDGE,)])
        else:
            out.append(s)
    return out


def _normalize(kind: str, sides: List[tuple]) -> List[tuple]:
    if kind == INTERNAL:
        return sides
    i0 = next(i for i, s in enumerate(sides) if s[0] == INF)
    sides = sides[i0 + 1:] + sides[:i0]
    while sides and sides[0][0] == BEDGE:
        sides.pop(0)
    while sides and sides[-1][0] == BEDGE:
        sides.pop()
    return [(INF,)] + sides


def _rotate_to(sides: List[tuple], side: tuple) -> List[tuple]:
    i = sides.index(side)
    return sides[i:] + sides[:i]


FORWARD = "forward"
BACKWARD = "backward"


def flip(S: SGraph, e: int, direction: str) -> SGraph:
    """Rotate the arc dual to edge ``e`` by one polygon corner.

    ``forward`` moves both endpoints clockwise, ``backward`` counterclockwise.
    Vertex and halfedge ids are preserved, so the image of edge ``e`` is the edge
    with the same halfedges (its number can change only through re-sorting, which
    never happens because halfedge ids are unchanged)."""
    if direction not in (FORWARD, BACKWARD):
        raise FlipError(f"unknown direction {direction!r}")
    h, g = S.edge_halfedges(e)
    A = to_angulation(S)
    v, w = S.vertex_of[h], S.vertex_of[g]
    polys = dict(A.polygons)
    fwd = direction == FORWARD
    if v != w:
        P = _rotate_to(_expand_inf(list(polys[v].sides)), (ARC, h))
        Q = _rotate_to(_expand_inf(list(polys[w].sides)), (ARC, g))
        s, t = P[1:], Q[1:]
        if not s and not t:
            raise FlipError(f"edge {e} joins two 1-gons (pattern: 1-gon | 1-gon)")
        if not s or not t:
            # one side is a monogon: its loop arc slides one step along the other polygon
            mono_h, other_h, rest = (h, g, t) if not s else (g, h, s)
            rest = [rest[-1]] + rest[:-1] if fwd else rest[1:] + rest[:1]
            new_mono, new_other = [(ARC, mono_h)], [(ARC, other_h)] + rest
            if not s:
                newP, newQ = new_mono, new_other
            else:
                newP, newQ = new_other, new_mono
        elif fwd:
            newP = [(ARC, h), t[-1]] + s[:-1]
            newQ = [(ARC, g), s[-1]] + t[:-1]
        else:
            newP = [(ARC, h)] + s[1:] + [t[0]]
            newQ = [(ARC, g)] + t[1:] + [s[0]]
        polys[v] = Polygon(polys[v].kind, tuple(_normalize(polys[v].kind, newP)))
        polys[w] = Polygon(polys[w].kind, tuple(_normalize(polys[w].kind, newQ)))
    else:
        P = _rotate_to(_expand_inf(list(polys[v].sides)), (ARC, h))
        j = P.index((ARC, g))
        X, Y = P[1:j], P[j + 1:]
        if not X or not Y:
            raise FlipError(f"edge {e} is a loop with an empty side between its two ends "
                            f"(pattern: arc,arc adjacent in polygon {v!r})")
        if fwd:
            X, Y = [X[-1]] + X[:-1], [Y[-1]] + Y[:-1]
        else:
            X, Y = X[1:] + X[:1], Y[1:] + Y[:1]
        newP = [(ARC, h)] + X + [(ARC, g)] + Y
        polys[v] = Polygon(polys[v].kind, tuple(_normalize(polys[v].kind, newP)))
    out = from_angulation(AngulationComplex(polys, A.gluing))
    if sorted(x.degree for x in out.internal_vertices()) != sorted(x.degree for x in S.internal_vertices()):
        raise FlipError("flip changed the internal degree multiset (contractible arc suspected)")
    return out


# ---------------------------------------------------------------------------
# canonical codes, isomorphism, mirrors, relabelings


def _ordered_from(S: SGraph, v: Vertex, entry: str) -> Tuple[List[str], List[int], int]:
    if v.internal:
        k = S.position[entry]
        hs = list(v.halfedges[k:] + v.halfedges[:k])
        cs = list(v.corners[k:] + v.corners[:k])
        return hs, cs, 0
    return list(v.halfedges), list(v.corners), S.position[entry]


def _encode(S: SGraph, start: str) -> tuple:
    label: Dict[str, int] = {}
    entry: Dict[str, str] = {}
    order: List[str] = []
    v0 = S.vertex_of[start]
    label[v0], entry[v0] = 0, start
    order.append(v0)
    code = []
    i = 0
    while i < len(order):
        vid = order[i]
        v = S.vertices[vid]
        hs, cs, ent = _ordered_from(S, v, entry[vid])
        rec = [0 if v.internal else 1, len(hs), ent] + cs
        for x in hs:
            y = S.pairing[x]
            wid = S.vertex_of[y]
            if wid not in label:
                label[wid] = len(order)
                entry[wid] = y
                order.append(wid)
            w = S.vertices[wid]
            pos = S.position[y]
            if w.internal:
                pos = (pos - S.position[entry[wid]]) % w.valency
            rec += [label[wid], pos]
        code.append(tuple(rec))
        i += 1
    return tuple(code)


def components(S: SGraph) -> List[List[str]]:
    seen = set()
    comps = []
    for vid in sorted(S.vertices):
        if vid in seen:
            continue
        comp, dq = [], deque([vid])
        seen.add(vid)
        while dq:
            x = dq.popleft()
            comp.append(x)
            for h in S.vertices[x].halfedges:
                y = S.vertex_of[S.pairing[h]]
                if y not in seen:
                    seen.add(y)
                    dq.append(y)
        comps.append(comp)
    return comps


def canonical_code(S: SGraph, allow_reflection: bool = False) -> str:
    """Lowercase hex code; equal codes iff orientation-preserving isomorphic
    (or isomorphic up to a global reflection when ``allow_reflection``)."""
    graphs = [S, mirror(S)] if allow_reflection else [S]
    best = None
    for G in graphs:
        comp_codes = []
        for comp in components(G):
            hs = [h for vid in comp for h in G.vertices[vid].halfedges]
            comp_codes.append(min(_encode(G, h) for h in hs))
        code = tuple(sorted(comp_codes))
        if best is None or code < best:
            best = code
    return json.dumps(best, separators=(",", ":")).encode("ascii").hex()


def is_isomorphic(S1: SGraph, S2: SGraph) -> bool:
    return canonical_code(S1) == canonical_code(S2)


def mirror(S: SGraph) -> SGraph:
    verts = []
    for v in S.vertices.values():
        r = v.valency
        if v.internal:
            hs = tuple(v.halfedges[(-k) % r] for k in range(r))
            cs = tuple(v.corners[(-k - 1) % r] for k in range(r))
        else:
            hs = tuple(reversed(v.halfedges))
            cs = tuple(reversed(v.corners))
        verts.append(Vertex(v.id, v.kind, hs, cs))
    return SGraph(verts, S.pairing)


def relabel(S: SGraph, rng: random.Random, rotate: bool = True) -> SGraph:
    """Random renaming of vertex and halfedge ids plus random rotations of the
    cyclic orders at internal vertices."""
    hs = list(S.vertex_of)
    new_h = [f"x{i}" for i in range(len(hs))]
    rng.shuffle(new_h)
    hmap = dict(zip(hs, new_h))
    vids = list(S.vertices)
    new_v = [f"u{i}" for i in range(len(vids))]
    rng.shuffle(new_v)
    vmap = dict(zip(vids, new_v))
    verts = []
    for v in S.vertices.values():
        hl, cl = list(v.halfedges), list(v.corners)
        if v.internal and rotate and v.valency > 1:
            k = rng.randrange(v.valency)
            hl, cl = hl[k:] + hl[:k], cl[k:] + cl[:k]
        verts.append(Vertex(vmap[v.id], v.kind, tuple(hmap[h] for h in hl), tuple(cl)))
    rng.shuffle(verts)
    return SGraph(verts, {hmap[a]: hmap[b] for a, b in S.pairing.items()})


# ---------------------------------------------------------------------------
# ribbon invariants and exchange graphs


def ribbon_invariants(S: SGraph) -> dict:
    succ: Dict[str, str] = {}
    pair = dict(S.pairing)
    for v in S.vertices.values():
        hs = list(v.halfedges)
        if not v.internal:
            virt, leaf = f"@virt:{v.id}", f"@leaf:{v.id}"
            hs.append(virt)
            pair[virt], pair[leaf] = leaf, virt
            succ[leaf] = leaf
        for k, h in enumerate(hs):
            succ[h] = hs[(k + 1) % len(hs)]
    seen = set()
    faces = 0
    for h in succ:
        if h in seen:
            continue
        faces += 1
        x = h
        while x not in seen:
            seen.add(x)
            x = succ[pair[x]]
    V, E = len(S.vertices), len(S.edges)
    chi = V - E
    return {
        "edges": E,
        "degrees": sorted((v.degree for v in S.internal_vertices())) + ["inf"] * len(S.boundary_vertices()),
        "faces": faces,
        "euler_characteristic": chi,
        "genus": (2 - chi - faces) // 2 if len(components(S)) == 1 else None,
    }


@dataclass
class ExchangeGraph:
    nodes: Dict[str, SGraph]
    arcs: List[Tuple[str, int, str, str]]
    dead_ends: List[Tuple[str, int, str, str]]
    root: str


def exchange_graph(S: SGraph, depth: int, n: int) -> ExchangeGraph:
    if depth < 0:
        raise ValueError("depth must be >= 0")
    diag = validate(S, n)
    if not diag.compatible:
        raise SGraphError("; ".join(diag.messages))
    root = canonical_code(S)
    nodes = {root: S}
    arcs, dead = [], []
    frontier = [root]
    for _ in range(depth):
        nxt = []
        for code in frontier:
            G = nodes[code]
            for e in range(1, len(G.edges) + 1):
                for direction in (FORWARD, BACKWARD):
                    try:
                        H = flip(G, e, direction)
                    except (FlipError, SGraphError) as exc:
                        dead.append((code, e, direction, str(exc)))
                        continue
                    if not validate(H, n).compatible:
                        dead.append((code, e, direction, "result not n-compatible"))
                        continue
                    c2 = canonical_code(H)
                    arcs.append((code, e, direction, c2))
                    if c2 not in nodes:
                        nodes[c2] = H
                        nxt.append(c2)
        frontier = nxt
    return ExchangeGraph(nodes, arcs, dead, root)


# ---------------------------------------------------------------------------
# random S-graphs


def _compositions(rng: random.Random, total: int, parts: int) -> List[int]:
    cuts = sorted(rng.sample(range(1, total), parts - 1)) if parts > 1 else []
    pts = [0] + cuts + [total]
    return [pts[i + 1] - pts[i] for i in range(parts)]


def random_sgraph(rng: random.Random, max_edges: int = 6, n: Optional[int] = None,
                  p_boundary: float = 0.35) -> SGraph:
    """A random connected S-graph; when ``n`` is given every internal vertex degree divides n."""
    E = rng.randint(1, max_edges)
    V = rng.randint(1, E + 1)
    ends: List[Tuple[int, int]] = []
    for i in range(1, V):
        ends.append((rng.randrange(i), i))
    while len(ends) < E:
        ends.append((rng.randrange(V), rng.randrange(V)))
    inc: Dict[int, List[str]] = {i: [] for i in range(V)}
    pairing = {}
    width = len(str(2 * E))
    for k, (a, b) in enumerate(ends):
        h1, h2 = f"h{2 * k:0{width}d}", f"h{2 * k + 1:0{width}d}"
        pairing[h1], pairing[h2] = h2, h1
        inc[a].append(h1)
        inc[b].append(h2)
    divisors = [d for d in range(1, (n or 12) + 1) if n is None or n % d == 0]
    verts = []
    for i in range(V):
        hs = inc[i]
        rng.shuffle(hs)
        r = len(hs)
        ms = [d for d in divisors if d >= r]
        if ms and rng.random() >= p_boundary:
            m = rng.choice(ms)
            corners = [m] if r == 1 else _compositions(rng, m, r)
            verts.append(Vertex(f"v{i}", INTERNAL, tuple(hs), tuple(corners)))
        else:
            verts.append(Vertex(f"v{i}", BOUNDARY, tuple(hs), tuple(rng.randint(1, 3) for _ in range(r - 1))))
    return SGraph(verts, pairing)
