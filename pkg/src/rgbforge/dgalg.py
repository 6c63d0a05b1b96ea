"""Exact algebra engine: graded quivers, path expressions, free dg presentations,
rewriting to normal forms, finite-dimensional dg-algebras and exact cohomology.

Words are tuples of arrow ids read as compositions: ``(x1, ..., xk)`` stands for
``x1 x2 ... xk`` where ``xk`` is applied first, so a word is composable when
``source(x_i) == target(x_{i+1})``.  The empty word is the lazy path at the
source vertex of the expression that contains it.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

Word = Tuple[str, ...]
Lin = Dict[Word, Fraction]


class AlgebraError(ValueError):
    """Raised for malformed algebraic input (degree mismatch, bad word, ...)."""


class CapExceeded(RuntimeError):
    """A rewriting or enumeration cap was hit."""


# ---------------------------------------------------------------------------
# scalars


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


@dataclass(frozen=True)
class Field:
    """Coefficient field: rationals when ``p == 0``, otherwise F_p."""

    p: int = 0

    def __post_init__(self):
        if self.p and not is_prime(self.p):
            raise AlgebraError(f"{self.p} is not prime")

    @property
    def characteristic(self) -> int:
        return self.p

    def coerce(self, c) -> int | Fraction:
        c = Fraction(c)
        if not self.p:
            return c
        den = c.denominator % self.p
        if den == 0:
            raise AlgebraError(f"denominator of {c} vanishes in F_{self.p}")
        return (c.numerator * pow(den, -1, self.p)) % self.p

    def __str__(self):
        return "Q" if not self.p else f"F_{self.p}"

    @staticmethod
    def parse(text: str) -> "Field":
        text = text.strip().lower()
        if text in ("q", "qq", "rationals", "0"):
            return QQ
        if text.startswith("fp:"):
            return Field(int(text[3:]))
        raise AlgebraError(f"unknown field selector {text!r}")


QQ = Field(0)


def fmt_coef(c: Fraction) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


# ---------------------------------------------------------------------------
# quivers and path expressions


@dataclass(frozen=True)
class Arrow:
    id: str
    source: str
    target: str
    degree: int


class GradedQuiver:
    def __init__(self, vertices: Iterable[str], arrows: Iterable[Arrow]):
        self.vertices: Tuple[str, ...] = tuple(vertices)
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise AlgebraError("duplicate quiver vertex")
        self.arrows: Dict[str, Arrow] = {}
        for a in arrows:
            if a.id in self.arrows:
                raise AlgebraError(f"duplicate arrow id {a.id}")
            if a.source not in vs or a.target not in vs:
                raise AlgebraError(f"arrow {a.id} has an unknown endpoint")
            self.arrows[a.id] = a

    def arrow(self, aid: str) -> Arrow:
        return self.arrows[aid]

    def word_source(self, w: Word, default: Optional[str] = None) -> str:
        return self.arrows[w[-1]].source if w else default

    def word_target(self, w: Word, default: Optional[str] = None) -> str:
        return self.arrows[w[0]].target if w else default

    def word_degree(self, w: Word) -> int:
        arr = self.arrows
        return sum(arr[x].degree for x in w)

    def is_composable(self, w: Word) -> bool:
        arr = self.arrows
        return all(arr[w[i]].source == arr[w[i + 1]].target for i in range(len(w) - 1))

    def out_arrows(self) -> Dict[str, List[Arrow]]:
        res: Dict[str, List[Arrow]] = {v: [] for v in self.vertices}
        for a in self.arrows.values():
            res[a.source].append(a)
        return res

    def in_arrows(self) -> Dict[str, List[Arrow]]:
        res: Dict[str, List[Arrow]] = {v: [] for v in self.vertices}
        for a in self.arrows.values():
            res[a.target].append(a)
        return res


def lin_add(acc: Lin, w: Word, c) -> None:
    """acc[w] += c, dropping zero entries."""
    if not c:
        return
    v = acc.get(w)
    if v is None:
        acc[w] = Fraction(c)
    else:
        v = v + c
        if v:
            acc[w] = v
        else:
            del acc[w]


def lin_scale(x: Mapping[Word, Fraction], c) -> Lin:
    if not c:
        return {}
    return {w: v * c for w, v in x.items()}


def lin_sum(*xs: Mapping[Word, Fraction]) -> Lin:
    acc: Lin = {}
    for x in xs:
        for w, c in x.items():
            lin_add(acc, w, c)
    return acc


def lin_mul(x: Mapping[Word, Fraction], y: Mapping[Word, Fraction], quiver: Optional[GradedQuiver] = None) -> Lin:
    """Concatenation product ``x * y`` (y applied first).  Non-composable pairs vanish."""
    acc: Lin = {}
    for u, a in x.items():
        for v, b in y.items():
            if quiver is not None and u and v and quiver.arrows[u[-1]].source != quiver.arrows[v[0]].target:
                continue
            lin_add(acc, u + v, a * b)
    return acc


class PathExpr:
    """Immutable linear combination of composable words sharing endpoints and degree."""

    __slots__ = ("terms", "source", "target", "degree")

    def __init__(self, terms: Mapping[Word, Fraction], source: Optional[str] = None,
                 target: Optional[str] = None, degree: Optional[int] = None):
        self.terms: Lin = {tuple(w): Fraction(c) for w, c in terms.items() if c}
        self.source = source
        self.target = target
        self.degree = degree

    @classmethod
    def word(cls, quiver: GradedQuiver, w: Sequence[str], coef=1) -> "PathExpr":
        w = tuple(w)
        if not w:
            raise AlgebraError("use PathExpr.lazy for the empty word")
        if not quiver.is_composable(w):
            raise AlgebraError(f"word {w} is not composable")
        return cls({w: Fraction(coef)}, quiver.word_source(w), quiver.word_target(w), quiver.word_degree(w))

    @classmethod
    def lazy(cls, v: str, coef=1) -> "PathExpr":
        return cls({(): Fraction(coef)}, v, v, 0)

    @classmethod
    def from_lin(cls, quiver: GradedQuiver, x: Mapping[Word, Fraction], vertex: Optional[str] = None) -> "PathExpr":
        x = {w: c for w, c in x.items() if c}
        if not x:
            return cls({})
        src = tgt = deg = None
        for w in x:
            if w and not quiver.is_composable(w):
                raise AlgebraError(f"word {w} is not composable")
            s = quiver.word_source(w, vertex)
            t = quiver.word_target(w, vertex)
            d = quiver.word_degree(w)
            if src is None:
                src, tgt, deg = s, t, d
            elif (s, t, d) != (src, tgt, deg):
                raise AlgebraError("non-homogeneous expression")
        return cls(x, src, tgt, deg)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, PathExpr):
            return self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        return f"PathExpr({format_lin(self.terms)})"


def format_word(w: Word, sep: str = "*") -> str:
    return sep.join(w) if w else "e"


def format_lin(x: Mapping[Word, Fraction], sep: str = "*") -> str:
    if not x:
        return "0"
    parts = []
    for w in sorted(x, key=lambda w: (len(w), w)):
        c = x[w]
        ws = format_word(w, sep)
        if c == 1:
            parts.append(f"+{ws}")
        elif c == -1:
            parts.append(f"-{ws}")
        else:
            s = fmt_coef(c)
            parts.append(f"{'+' if c > 0 else ''}{s}*{ws}")
    out = " ".join(parts)
    return out[1:] if out.startswith("+") else out


# ---------------------------------------------------------------------------
# free dg presentations


class FreeDgPresentation:
    """Graded quiver with a degree +1 differential on arrows, extended by Leibniz."""

    def __init__(self, quiver: GradedQuiver, differential: Mapping[str, Mapping[Word, Fraction]],
                 name: str = "", meta: Optional[dict] = None, check_degrees: bool = True):
        self.quiver = quiver
        self.name = name
        self.meta = dict(meta or {})
        diff: Dict[str, Lin] = {}
        for aid in quiver.arrows:
            x = {tuple(w): Fraction(c) for w, c in differential.get(aid, {}).items() if c}
            diff[aid] = x
        extra = set(differential) - set(quiver.arrows)
        if extra:
            raise AlgebraError(f"differential given on unknown arrows {sorted(extra)}")
        self.differential = diff
        if check_degrees:
            self.check_degrees()

    def check_degrees(self) -> None:
        q = self.quiver
        for aid, x in self.differential.items():
            a = q.arrows[aid]
            for w in x:
                if not w:
                    raise AlgebraError(f"d({aid}) contains a lazy path")
                if not q.is_composable(w):
                    raise AlgebraError(f"d({aid}) contains non-composable word {w}")
                if q.word_source(w) != a.source or q.word_target(w) != a.target:
                    raise AlgebraError(f"d({aid}) has a term {w} with wrong endpoints")
                if q.word_degree(w) != a.degree + 1:
                    raise AlgebraError(f"d({aid}) has a term {w} of degree {q.word_degree(w)}, expected {a.degree + 1}")

    @property
    def arrows(self) -> Dict[str, Arrow]:
        return self.quiver.arrows

    def d(self, aid: str) -> Lin:
        return self.differential[aid]

    def renamed(self, mapping: Mapping[str, str], name: str = "") -> "FreeDgPresentation":
        q = self.quiver
        arrows = [Arrow(mapping.get(a.id, a.id), a.source, a.target, a.degree) for a in q.arrows.values()]
        diff = {mapping.get(a, a): {tuple(mapping.get(x, x) for x in w): c for w, c in d.items()}
                for a, d in self.differential.items()}
        return FreeDgPresentation(GradedQuiver(q.vertices, arrows), diff, name or self.name, self.meta)

    def summary(self) -> str:
        lines = [f"presentation {self.name}: {len(self.quiver.vertices)} vertices, {len(self.arrows)} arrows"]
        for aid in sorted(self.arrows):
            a = self.arrows[aid]
            lines.append(f"  {aid}: {a.source}->{a.target} deg {a.degree}; d = {format_lin(self.differential[aid])}")
        return "\n".join(lines)


def _word_degrees(quiver: GradedQuiver, w: Word) -> List[int]:
    arr = quiver.arrows
    return [arr[x].degree for x in w]


def d_word(P: FreeDgPresentation, w: Word, cap: Optional[int] = None) -> Lin:
    """Leibniz extension on a single word; words longer than ``cap`` are dropped."""
    acc: Lin = {}
    arr = P.quiver.arrows
    sign_deg = 0
    for k, x in enumerate(w):
        dx = P.differential[x]
        if dx:
            sgn = -1 if sign_deg % 2 else 1
            pre, post = w[:k], w[k + 1:]
            base = len(w) - 1
            for u, c in dx.items():
                if cap is not None and base + len(u) > cap:
                    continue
                lin_add(acc, pre + u + post, sgn * c)
        sign_deg += arr[x].degree
    return acc


def d_lin(P: FreeDgPresentation, x: Mapping[Word, Fraction], cap: Optional[int] = None) -> Lin:
    acc: Lin = {}
    for w, c in x.items():
        for u, v in d_word(P, w, cap).items():
            lin_add(acc, u, c * v)
    return acc


def d_extend(P: FreeDgPresentation, x) -> PathExpr:
    """Apply the differential to a homogeneous expression."""
    terms = x.terms if isinstance(x, PathExpr) else x
    src = x.source if isinstance(x, PathExpr) else None
    PathExpr.from_lin(P.quiver, terms, vertex=src)  # homogeneity / composability gate
    return PathExpr.from_lin(P.quiver, d_lin(P, terms))


@dataclass
class Report:
    ok: bool
    failures: List[str] = field(default_factory=list)
    info: Dict[str, object] = field(default_factory=dict)

    def __bool__(self):
        return self.ok


def check_d_squared(P: FreeDgPresentation) -> Report:
    failures = []
    for aid in sorted(P.arrows):
        dd = d_lin(P, P.differential[aid])
        if dd:
            failures.append(f"d^2({aid}) = {format_lin(dd)}")
    return Report(not failures, failures)


def presentation_to_json(P: FreeDgPresentation) -> dict:
    q = P.quiver
    return {
        "name": P.name,
        "quiver": {
            "vertices": list(q.vertices),
            "arrows": [{"id": a.id, "source": a.source, "target": a.target, "degree": a.degree}
                       for a in sorted(q.arrows.values(), key=lambda a: a.id)],
        },
        "differential": {
            aid: [[fmt_coef(c), list(w)] for w, c in sorted(P.differential[aid].items())]
            for aid in sorted(q.arrows)
        },
    }


def presentation_from_json(doc: dict) -> FreeDgPresentation:
    q = doc["quiver"]
    quiver = GradedQuiver([str(v) for v in q["vertices"]],
                          [Arrow(a["id"], str(a["source"]), str(a["target"]), int(a["degree"])) for a in q["arrows"]])
    diff = {aid: {tuple(w): Fraction(c) for c, w in terms} for aid, terms in doc.get("differential", {}).items()}
    return FreeDgPresentation(quiver, diff, doc.get("name", ""))


def dump_presentation(P: FreeDgPresentation) -> str:
    return json.dumps(presentation_to_json(P), indent=1, ensure_ascii=False) + "\n"


def eliminate_pair(P: FreeDgPresentation, x: str, y: str) -> FreeDgPresentation:
    """Cancel an acyclic pair: ``d(x) = lam*y + R`` with ``y`` and ``x`` absent from ``R``
    and ``x`` absent from every other differential.  Returns the presentation on the
    remaining arrows with ``y`` replaced by ``-R/lam`` everywhere.  The quotient by the
    dg ideal generated by ``x`` and ``d(x)`` is free on the rest, and that ideal is
    acyclic, so the result is quasi-isomorphic to ``P``."""
    dx = P.differential[x]
    lam = dx.get((y,))
    if not lam:
        raise AlgebraError(f"d({x}) has no linear term in {y}")
    R = {w: c for w, c in dx.items() if w != (y,)}
    for w in R:
        if x in w or y in w:
            raise AlgebraError(f"d({x}) is not of the form lam*{y} + (terms without {x},{y})")
    for a, da in P.differential.items():
        if a != x and any(x in w for w in da):
            raise AlgebraError(f"{x} occurs in d({a})")
    subst = lin_scale(R, Fraction(-1) / lam)

    def sub(expr: Lin) -> Lin:
        acc: Lin = {}
        for w, c in expr.items():
            partial: Lin = {(): c}
            for letter in w:
                if letter == y:
                    partial = lin_mul(partial, subst)
                else:
                    partial = {u + (letter,): v for u, v in partial.items()}
            for u, v in partial.items():
                lin_add(acc, u, v)
        return acc

    q = P.quiver
    arrows = [a for a in q.arrows.values() if a.id not in (x, y)]
    diff = {a.id: sub(P.differential[a.id]) for a in arrows}
    return FreeDgPresentation(GradedQuiver(q.vertices, arrows), diff, P.name, P.meta)


# ---------------------------------------------------------------------------
# rewriting


class RewriteSystem:
    """Rules ``lhs word -> linear combination``; normal forms by leftmost-innermost rewriting."""

    def __init__(self, quiver: GradedQuiver, rules: Mapping[Word, Mapping[Word, Fraction]]):
        self.quiver = quiver
        self.rules: Dict[Word, Lin] = {}
        for lhs, rhs in rules.items():
            lhs = tuple(lhs)
            if not lhs:
                raise AlgebraError("empty left-hand side")
            self.rules[lhs] = {tuple(w): Fraction(c) for w, c in rhs.items() if c}
        self.lengths = sorted({len(l) for l in self.rules})

    def find_redex(self, w: Word) -> Optional[Tuple[int, int]]:
        """Leftmost-innermost occurrence: smallest end position, then shortest."""
        rules = self.rules
        for end in range(1, len(w) + 1):
            for L in self.lengths:
                if L > end:
                    break
                if w[end - L:end] in rules:
                    return end - L, end
        return None

    def normal_form(self, x: Mapping[Word, Fraction], max_steps: int = 100000, max_len: int = 10 ** 6) -> Lin:
        todo: Lin = dict(x)
        done: Lin = {}
        steps = 0
        while todo:
            w, c = todo.popitem()
            if len(w) > max_len:
                raise CapExceeded(f"word length cap {max_len} exceeded by {w}")
            red = self.find_redex(w)
            if red is None:
                lin_add(done, w, c)
                continue
            steps += 1
            if steps > max_steps:
                raise CapExceeded(f"rewrite step cap {max_steps} exceeded")
            i, j = red
            for u, v in self.rules[w[i:j]].items():
                lin_add(todo, w[:i] + u + w[j:], c * v)
        return done

    def is_normal(self, w: Word) -> bool:
        return self.find_redex(w) is None


def normal_form(system: RewriteSystem, x, caps: Tuple[int, int] = (100000, 10 ** 6)) -> PathExpr:
    terms = x.terms if isinstance(x, PathExpr) else x
    nf = system.normal_form(terms, *caps)
    vertex = x.source if isinstance(x, PathExpr) else None
    return PathExpr.from_lin(system.quiver, nf, vertex=vertex)


# ---------------------------------------------------------------------------
# exact sparse linear algebra


def _int_row(row: Mapping, p: int):
    """Turn a row of Fractions into an integer row (scaled) or an F_p row."""
    if p:
        out = {}
        for k, v in row.items():
            v = Fraction(v)
            den = v.denominator % p
            if den == 0:
                raise AlgebraError(f"denominator {v.denominator} vanishes mod {p}")
            r = (v.numerator * pow(den, -1, p)) % p
            if r:
                out[k] = r
        return out
    den = 1
    for v in row.values():
        d = Fraction(v).denominator
        den = den * d // gcd(den, d)
    out = {}
    for k, v in row.items():
        v = Fraction(v) * den
        if v:
            out[k] = int(v)
    return out


class Eliminator:
    """Incremental row echelon form (pivot on the minimal column key)."""

    def __init__(self, p: int = 0):
        self.p = p
        self.pivots: Dict[object, dict] = {}

    def reduce(self, row: dict) -> dict:
        p = self.p
        pivots = self.pivots
        row = dict(row)
        while row:
            col = min(row)
            piv = pivots.get(col)
            if piv is None:
                return row
            a = row[col]
            if p:
                for k, v in piv.items():
                    nv = (row.get(k, 0) - a * v) % p
                    if nv:
                        row[k] = nv
                    else:
                        row.pop(k, None)
            else:
                b = piv[col]
                g = gcd(a, b)
                fa, fb = b // g, a // g
                new = {}
                for k, v in row.items():
                    new[k] = v * fa
                for k, v in piv.items():
                    nv = new.get(k, 0) - v * fb
                    if nv:
                        new[k] = nv
                    else:
                        new.pop(k, None)
                if new:
                    g2 = 0
                    for v in new.values():
                        g2 = gcd(g2, v)
                        if g2 == 1:
                            break
                    if g2 > 1:
                        new = {k: v // g2 for k, v in new.items()}
                row = new
        return row

    def add(self, row: Mapping, prepared: bool = False) -> bool:
        """Insert a row; returns True when it increases the rank."""
        r = row if prepared else _int_row(row, self.p)
        r = self.reduce(r)
        if not r:
            return False
        col = min(r)
        if self.p:
            inv = pow(r[col], -1, self.p)
            r = {k: (v * inv) % self.p for k, v in r.items()}
        self.pivots[col] = r
        return True

    @property
    def rank(self) -> int:
        return len(self.pivots)


def sparse_rank(rows: Iterable[Mapping], field: Field = QQ) -> int:
    el = Eliminator(field.p)
    for r in rows:
        el.add(r)
    return el.rank


def in_span(rows: Iterable[Mapping], v: Mapping, field: Field = QQ) -> bool:
    el = Eliminator(field.p)
    for r in rows:
        el.add(r)
    return not el.reduce(_int_row(v, field.p))


def dense_nullspace(matrix: Sequence[Sequence[Fraction]], ncols: int) -> List[List[Fraction]]:
    """Basis of the right nullspace of a rational matrix (reduced row echelon)."""
    rows = [[Fraction(x) for x in r] for r in matrix]
    pivcols = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivcols.append(c)
        r += 1
        if r == len(rows):
            break
    free = [c for c in range(ncols) if c not in pivcols]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for i, pc in enumerate(pivcols):
            vec[pc] = -rows[i][fc]
        basis.append(vec)
    return basis


# ---------------------------------------------------------------------------
# finite-dimensional dg-algebras


@dataclass(frozen=True)
class BasisElement:
    label: str
    source: str
    target: str
    degree: int
    family: str = ""
    word: Word = ()


class FinDimDgAlgebra:
    """Finite basis with structure constants.  ``product[(i, j)]`` is ``b_i * b_j``
    (``b_j`` applied first) as a sparse map basis-index -> coefficient."""

    def __init__(self, basis: Sequence[BasisElement], idempotents: Mapping[str, int],
                 product: Mapping[Tuple[int, int], Mapping[int, Fraction]],
                 differential: Mapping[int, Mapping[int, Fraction]], name: str = ""):
        self.basis = list(basis)
        self.idempotents = dict(idempotents)
        self.product = {k: {i: Fraction(c) for i, c in v.items() if c} for k, v in product.items()}
        self.product = {k: v for k, v in self.product.items() if v}
        self.differential = {k: {i: Fraction(c) for i, c in v.items() if c} for k, v in differential.items()}
        self.differential = {k: v for k, v in self.differential.items() if v}
        self.name = name
        self.index = {b.label: i for i, b in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def graded_dims(self) -> Dict[int, int]:
        out: Dict[int, int] = {}
        for b in self.basis:
            out[b.degree] = out.get(b.degree, 0) + 1
        return dict(sorted(out.items()))

    def mul(self, x: Mapping[int, Fraction], y: Mapping[int, Fraction]) -> Dict[int, Fraction]:
        acc: Dict[int, Fraction] = {}
        prod = self.product
        for i, a in x.items():
            for j, b in y.items():
                r = prod.get((i, j))
                if r:
                    for k, c in r.items():
                        v = acc.get(k, 0) + a * b * c
                        if v:
                            acc[k] = v
                        else:
                            acc.pop(k, None)
        return acc

    def d(self, x: Mapping[int, Fraction]) -> Dict[int, Fraction]:
        acc: Dict[int, Fraction] = {}
        for i, a in x.items():
            for k, c in self.differential.get(i, {}).items():
                v = acc.get(k, 0) + a * c
                if v:
                    acc[k] = v
                else:
                    acc.pop(k, None)
        return acc

    def unit(self) -> Dict[int, Fraction]:
        return {i: Fraction(1) for i in self.idempotents.values()}

    def augmentation_ideal(self) -> List[int]:
        ids = set(self.idempotents.values())
        return [i for i in range(self.dim) if i not in ids]


def _fmt_vec(A: FinDimDgAlgebra, x: Mapping[int, Fraction]) -> str:
    return format_lin({(A.basis[i].label,): c for i, c in x.items()}, sep="")


def check_findim_axioms(A: FinDimDgAlgebra) -> Report:
    failures: List[str] = []
    B = A.basis
    n = A.dim
    # homogeneity of structure constants
    for (i, j), r in A.product.items():
        for k in r:
            if (B[k].degree != B[i].degree + B[j].degree or B[k].source != B[j].source
                    or B[k].target != B[i].target or B[i].source != B[j].target):
                failures.append(f"product {B[i].label}*{B[j].label} has an inhomogeneous term {B[k].label}")
    for i, r in A.differential.items():
        for k in r:
            if B[k].degree != B[i].degree + 1 or (B[k].source, B[k].target) != (B[i].source, B[i].target):
                failures.append(f"d({B[i].label}) has an inhomogeneous term {B[k].label}")
    # unit laws
    for v, e in A.idempotents.items():
        if B[e].source != v or B[e].target != v or B[e].degree != 0:
            failures.append(f"idempotent {B[e].label} is not at vertex {v} in degree 0")
    for i in range(n):
        xi = {i: Fraction(1)}
        for side, val in (("left", A.mul(A.unit(), xi)), ("right", A.mul(xi, A.unit()))):
            if val != xi:
                failures.append(f"{side} unit law fails on {B[i].label}")
    # associativity on composable triples
    by_target: Dict[str, List[int]] = {}
    for i, b in enumerate(B):
        by_target.setdefault(b.target, []).append(i)
    for (i, j), ij in A.product.items():
        for k in by_target.get(B[j].source, []):
            left = A.mul(ij, {k: Fraction(1)})
            right = A.mul({i: Fraction(1)}, A.mul({j: Fraction(1)}, {k: Fraction(1)}))
            if left != right:
                failures.append(f"associativity fails on ({B[i].label}, {B[j].label}, {B[k].label})")
    # associativity triples with zero (i,j) product but nonzero i*(j*k)
    for (j, k), jk in A.product.items():
        for i in by_target.get(B[j].target, []):
            if (i, j) in A.product:
                continue
            right = A.mul({i: Fraction(1)}, jk)
            if right:
                failures.append(f"associativity fails on ({B[i].label}, {B[j].label}, {B[k].label})")
    # d^2 = 0
    for i in range(n):
        dd = A.d(A.d({i: Fraction(1)}))
        if dd:
            failures.append(f"d^2({B[i].label}) = {_fmt_vec(A, dd)}")
    # Leibniz on composable pairs
    for i in range(n):
        for j in by_target.get(B[i].source, []):
            xi, xj = {i: Fraction(1)}, {j: Fraction(1)}
            lhs = A.d(A.mul(xi, xj))
            sgn = -1 if B[i].degree % 2 else 1
            rhs = A.mul(A.d(xi), xj)
            for k, c in A.mul(xi, A.d(xj)).items():
                v = rhs.get(k, 0) + sgn * c
                if v:
                    rhs[k] = v
                else:
                    rhs.pop(k, None)
            if lhs != rhs:
                failures.append(f"Leibniz fails on ({B[i].label}, {B[j].label})")
    return Report(not failures, failures, {"dimension": n})


def cohomology_graded_dims(A: FinDimDgAlgebra, field: Field = QQ) -> Dict[int, int]:
    degs = sorted({b.degree for b in A.basis})
    rank_out: Dict[int, int] = {}
    for t in degs:
        rows = [A.differential.get(i, {}) for i, b in enumerate(A.basis) if b.degree == t]
        rank_out[t] = sparse_rank(rows, field)
    dims = A.graded_dims()
    out = {}
    for t in degs:
        h = dims[t] - rank_out[t] - rank_out.get(t - 1, 0)
        if h:
            out[t] = h
    return out


def euler_characteristic(dims: Mapping[int, int]) -> int:
    return sum((-1) ** (t % 2) * v for t, v in dims.items())


# ---------------------------------------------------------------------------
# truncated cohomology of free presentations


@dataclass
class BigradedDims:
    """``entries[(t, cap)] = (dim H^t of the complex of words of length <= cap, stable)``."""

    entries: Dict[Tuple[int, int], Tuple[int, bool]]
    cap: int
    window: Tuple[int, int]

    def at_cap(self) -> Dict[int, Tuple[int, bool]]:
        return {t: v for (t, c), v in sorted(self.entries.items()) if c == self.cap}


def check_weights(P: FreeDgPresentation, weights: Mapping[str, int]) -> None:
    """Verify that ``d`` is homogeneous for an auxiliary integer grading."""
    for aid, dx in P.differential.items():
        for w in dx:
            if sum(weights[x] for x in w) != weights[aid]:
                raise AlgebraError(f"weights are not preserved by d({aid})")


def enumerate_words(P: FreeDgPresentation, cap: int, lo: int, hi: int) -> Dict[int, List[Word]]:
    """Composable words of length <= cap with degree in [lo, hi], grouped by degree.
    The lazy path at ``v`` is encoded as the one-letter word ``('@' + v,)``."""
    q = P.quiver
    degs = [a.degree for a in q.arrows.values()]
    nonpos = all(d <= 0 for d in degs)
    nonneg = all(d >= 0 for d in degs)
    outs = q.out_arrows()
    res: Dict[int, List[Word]] = {}
    for v in q.vertices:
        if lo <= 0 <= hi:
            res.setdefault(0, []).append(("@" + v,))
        stack: List[Tuple[Word, str, int]] = [((), v, 0)]
        while stack:
            w, tgt, deg = stack.pop()
            if len(w) == cap:
                continue
            for a in outs[tgt]:
                nd = deg + a.degree
                if nonpos and nd < lo:
                    continue
                if nonneg and nd > hi:
                    continue
                nw = (a.id,) + w
                if lo <= nd <= hi:
                    res.setdefault(nd, []).append(nw)
                stack.append((nw, a.target, nd))
    return res


def _is_lazy(w: Word) -> bool:
    return len(w) == 1 and w[0].startswith("@")


def _block_key(P: FreeDgPresentation, w: Word, weights) -> tuple:
    q = P.quiver
    if _is_lazy(w):
        v = w[0][1:]
        return (v, v, 0)
    wt = sum(weights[x] for x in w) if weights else 0
    return (q.word_source(w), q.word_target(w), wt)


def truncated_cohomology(P: FreeDgPresentation, cap: int = 8, window: Tuple[int, int] = (-4, 1),
                         field: Field = QQ, weights: Optional[Mapping[str, int]] = None,
                         caps: Optional[Sequence[int]] = None) -> BigradedDims:
    """Truncated cohomology in the degree window, reported for each cap in ``caps``
    (default: cap-1 and cap).

    Without ``weights`` this is the cohomology of the quotient complex of words of
    length <= c.  With ``weights`` (an auxiliary grading preserved by d and negative
    on every arrow) the complex splits into blocks of fixed degree t and weight w
    whose words have length at most t - w; block (t, w) is computed exactly, and the
    value at cap c sums the blocks with t + 1 - w <= c, i.e. those the cap sees whole."""
    lo, hi = window
    if cap < 1 or lo > hi:
        raise AlgebraError("inconsistent window or cap")
    if weights is not None:
        check_weights(P, weights)
        if any(weights[a] >= 0 for a in P.arrows):
            raise AlgebraError("weights must be negative on every arrow")
    caps = sorted(set(caps or [max(cap - 1, 0), cap]))
    if caps[-1] != cap:
        raise AlgebraError("caps must end at cap")
    words = enumerate_words(P, cap, lo - 1, hi + 1)
    blocks: Dict[tuple, Dict[int, List[Word]]] = {}
    for t, ws in words.items():
        for w in ws:
            key = _block_key(P, w, weights)
            if weights is not None and t - 1 - key[2] > cap:
                continue  # only needed by blocks no cap can see
            blocks.setdefault(key, {}).setdefault(t, []).append(w)
    per_cap: Dict[int, Dict[int, int]] = {c: {t: 0 for t in range(lo, hi + 1)} for c in caps}
    for key, bydeg in blocks.items():
        dcache: Dict[Word, Lin] = {}

        def ranks_for(index):
            ranks: Dict[int, int] = {}
            for t in range(lo - 1, hi + 1):
                src = index.get(t, {})
                tgt = index.get(t + 1, {})
                if not src or not tgt:
                    ranks[t] = 0
                    continue
                el = Eliminator(field.p)
                for w in src:
                    if _is_lazy(w):
                        continue
                    dw = dcache.get(w)
                    if dw is None:
                        dw = d_word(P, w, cap)
                        dcache[w] = dw
                    row = {tgt[u]: v for u, v in dw.items() if u in tgt}
                    if row:
                        el.add(row)
                ranks[t] = el.rank
            return ranks

        if weights is not None:
            wt = key[2]
            index = {t: {w: k for k, w in enumerate(ws)} for t, ws in bydeg.items()}
            ranks = ranks_for(index)
            for t in range(lo, hi + 1):
                h = len(index.get(t, {})) - ranks[t] - ranks.get(t - 1, 0)
                for c in caps:
                    if t + 1 - wt <= c:
                        per_cap[c][t] += h
            continue
        for c in caps:
            index = {t: {w: k for k, w in enumerate(x for x in ws if _len(x) <= c)} for t, ws in bydeg.items()}
            ranks = ranks_for(index)
            for t in range(lo, hi + 1):
                per_cap[c][t] += len(index.get(t, {})) - ranks[t] - ranks.get(t - 1, 0)
    entries: Dict[Tuple[int, int], Tuple[int, bool]] = {}
    for i, c in enumerate(caps):
        for t in range(lo, hi + 1):
            stable = i > 0 and per_cap[caps[i - 1]][t] == per_cap[c][t]
            entries[(t, c)] = (per_cap[c][t], stable)
    return BigradedDims(entries, cap, (lo, hi))


def _len(w: Word) -> int:
    return 0 if _is_lazy(w) else len(w)


def class_is_coboundary(P: FreeDgPresentation, x, cap: int, field: Field = QQ,
                        weights: Optional[Mapping[str, int]] = None) -> bool:
    """Whether the closed expression ``x`` is ``d`` of something in the complex of
    words of length <= cap."""
    terms = x.terms if isinstance(x, PathExpr) else dict(x)
    terms = {w: c for w, c in terms.items() if c}
    if not terms:
        return True
    if any(not w for w in terms):
        raise AlgebraError("lazy paths are never coboundaries here; pass arrow words")
    pe = PathExpr.from_lin(P.quiver, terms)
    if d_lin(P, terms, cap):
        raise AlgebraError("expression is not closed within the cap")
    if max(len(w) for w in terms) > cap:
        raise AlgebraError("expression is longer than the cap")
    t = pe.degree
    comps: Dict[tuple, Lin] = {}
    for w, c in terms.items():
        comps.setdefault(_block_key(P, w, weights), {})[w] = c
    search = cap
    if weights is not None:
        # a preimage of weight w in degree t-1 has length at most t-1-w
        search = max([cap] + [t - 1 - key[2] for key in comps])
    pre = enumerate_words(P, search, t - 1, t - 1).get(t - 1, [])
    for key, comp in comps.items():
        rows = []
        for w in pre:
            if _is_lazy(w) or _block_key(P, w, weights) != key:
                continue
            row = d_word(P, w, search)
            if row:
                rows.append(row)
        if not in_span(rows, comp, field):
            return False
    return True
