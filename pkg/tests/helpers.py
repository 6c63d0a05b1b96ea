"""Small independent oracles shared by the tests."""

import random
from fractions import Fraction
from typing import Dict, List

from rgbforge.dgalg import d_word, lin_add


def dense_rank(rows: List[List[Fraction]]) -> int:
    """Plain row reduction over the rationals."""
    M = [list(r) for r in rows if r]
    if not M:
        return 0
    rank, col, ncols = 0, 0, len(M[0])
    while rank < len(M) and col < ncols:
        piv = next((i for i in range(rank, len(M)) if M[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for i in range(len(M)):
            if i != rank and M[i][col] != 0:
                f = M[i][col] / M[rank][col]
                M[i] = [a - f * b for a, b in zip(M[i], M[rank])]
        rank += 1
        col += 1
    return rank


def _random_word(P, rng: random.Random, max_len: int, end=None):
    """Composable word (rightmost letter applied first) ending at ``end`` if given."""
    q = P.quiver
    ids = sorted(q.arrows)
    pool = [a for a in ids if end is None or q.arrows[a].source == end]
    if not pool:
        return None
    w = [rng.choice(pool)]
    for _ in range(rng.randint(0, max_len - 1)):
        nxt = [a for a in ids if q.arrows[a].source == q.arrows[w[0]].target]
        if not nxt:
            break
        w.insert(0, rng.choice(nxt))
    return w


def leibniz_samples(P, rng: random.Random, samples: int) -> List[str]:
    """d(uv) against d(u)v + (-1)^|u| u d(v) on random composable pairs."""
    q = P.quiver
    bad = []
    if not q.arrows:
        return bad
    for _ in range(samples):
        v = _random_word(P, rng, 3)
        u = _random_word(P, rng, 3, end=q.arrows[v[0]].target)
        if u is None:
            continue
        lhs = d_word(P, tuple(u + v))
        rhs: Dict[tuple, Fraction] = {}
        for w, c in d_word(P, tuple(u)).items():
            lin_add(rhs, w + tuple(v), c)
        s = -1 if sum(q.arrows[x].degree for x in u) % 2 else 1
        for w, c in d_word(P, tuple(v)).items():
            lin_add(rhs, tuple(u) + w, s * c)
        if lhs != rhs:
            bad.append(f"{u} * {v}")
    return bad
