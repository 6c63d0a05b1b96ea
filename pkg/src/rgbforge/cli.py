"""Command-line front end.

Exit codes: 0 success, 1 domain refusal, 2 input error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from . import acceptance
from .dgalg import (AlgebraError, CapExceeded, Field, check_d_squared, fmt_coef, presentation_to_json,
                    truncated_cohomology)
from .ginzburg import (MIXED_MODES, GinzburgError, arrow_multiset, build_Gnm, covering_quotient_check,
                       glue_ginzburg, reduce_ginzburg)
from .koszul import closed_form_dual, cobar, compare_presentations
from .rgb import (ConstructionError, Refusal, build_rgb, cy_infeasibility, cy_trace, deformation_check)
from .sgraph import (FIXTURE_NAMES, FlipError, SGraphError, canonical_code, default_orientation,
                     exchange_graph, fixture_path, flip, orientability, parse_sgraph, ribbon_invariants,
                     serialize_sgraph, validate)

OK, REFUSAL, INPUT_ERROR, VERIFY_FAIL = 0, 1, 2, 3


class InputError(Exception):
    pass


class Refused(Exception):
    pass


class VerificationFailed(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    field: Field
    max_len: Optional[int]
    window: Optional[Tuple[int, int]]
    out: Optional[str]
    seed: int
    fmt: str


def _window(text: str) -> Tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected <lo>:<hi>, got {text!r}")
    if lo > hi:
        raise argparse.ArgumentTypeError("empty degree window")
    return lo, hi


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _config(args) -> RunConfig:
    try:
        fld = Field.parse(args.field)
    except (AlgebraError, ValueError) as exc:
        raise InputError(str(exc))
    return RunConfig(fld, args.max_len, args.degree_window, args.out, args.seed, args.format)


def _resolve(path: str) -> str:
    """A file path, or a fixture name with or without ``.json``."""
    if os.path.isfile(path):
        return path
    stem = os.path.basename(path)
    stem = stem[:-5] if stem.endswith(".json") else stem
    candidate = fixture_path(stem)
    if os.path.isfile(candidate):
        return candidate
    raise InputError(f"no such file or fixture: {path!r} (fixtures: {', '.join(FIXTURE_NAMES)})")


def _read_text(path: str) -> str:
    try:
        with open(_resolve(path), encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(str(exc))


def _load_sgraph(path: str):
    try:
        return parse_sgraph(_read_text(path))
    except SGraphError as exc:
        raise InputError(f"{path}: {exc}")


def _load_json(path: str):
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: {exc}")


def _jsonable(x):
    if isinstance(x, Fraction):
        return fmt_coef(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _emit(cfg: RunConfig, doc: dict, table: str) -> None:
    if cfg.fmt == "json":
        text = json.dumps(_jsonable(doc), indent=1, sort_keys=True, ensure_ascii=False) + "\n"
    else:
        text = table.rstrip("\n") + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _require_compatible(S, n: int) -> None:
    diag = validate(S, n)
    if not diag.compatible:
        raise Refused("; ".join(diag.messages))


def _presentation_table(P) -> str:
    return P.summary()


# --- sgraph -----------------------------------------------------------------------------------


def cmd_sgraph_validate(args, cfg):
    text = _read_text(args.sgraph)
    try:
        S = parse_sgraph(text)
    except SGraphError as exc:
        raise InputError(str(exc))
    diag = validate(S, args.n)
    inv = ribbon_invariants(S)
    doc = {"compatible": diag.compatible, "degrees": diag.degrees, "messages": diag.messages,
           "orientable": orientability(S) is not None, "invariants": inv}
    lines = [f"compatible: {'yes' if diag.compatible else 'no'} (n = {args.n})"]
    lines += [f"  vertex {v}: degree {'inf' if d is None else d}" for v, d in diag.degrees.items()]
    lines += [f"  ! {m}" for m in diag.messages]
    lines.append(f"orientable: {'yes' if doc['orientable'] else 'no'}")
    lines += [f"{k}: {v}" for k, v in sorted(inv.items())]
    _emit(cfg, doc, "\n".join(lines))
    return OK if diag.compatible else REFUSAL


def cmd_sgraph_flip(args, cfg):
    S = _load_sgraph(args.sgraph)
    try:
        F = flip(S, args.edge, args.dir)
    except (FlipError, SGraphError) as exc:
        raise Refused(f"flip not performed: {exc}")
    a, b = S.edge_halfedges(args.edge)
    if any(S.vertex(h).valency == 1 and S.vertex(h).internal for h in (a, b)):
        sys.stderr.write("note: flips at arcs of 1-valent internal vertices are experimental\n")
    text = serialize_sgraph(F)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return OK


def cmd_sgraph_exchange(args, cfg):
    S = _load_sgraph(args.sgraph)
    _require_compatible(S, args.n)
    G = exchange_graph(S, args.depth, args.n)
    codes = sorted(G.nodes)
    doc = {"root": G.root, "nodes": codes,
           "arcs": [list(a) for a in sorted(G.arcs)],
           "dead_ends": [list(a) for a in sorted(G.dead_ends)]}
    lines = [f"nodes: {len(codes)}  arcs: {len(G.arcs)}  dead ends: {len(G.dead_ends)}"]
    index = {c: k for k, c in enumerate(codes)}
    lines += [f"  node {index[c]}{' (root)' if c == G.root else ''}: {c[:16]}..." for c in codes]
    lines += [f"  {index[s]} --{e}/{d}--> {index[t]}" for s, e, d, t in sorted(G.arcs)]
    _emit(cfg, doc, "\n".join(lines))
    return OK


def cmd_sgraph_canon(args, cfg):
    S = _load_sgraph(args.sgraph)
    code = canonical_code(S)
    _emit(cfg, {"canonical_code": code}, code)
    return OK


# --- rgb ----------------------------------------------------------------------------------------


def cmd_rgb_build(args, cfg):
    S = _load_sgraph(args.sgraph)
    _require_compatible(S, args.n)
    A = build_rgb(S, args.n, cfg.max_len)
    alg = A.algebra
    doc = {"n": args.n, "graded_dims": alg.graded_dims(),
           "basis": [{"label": b.label, "degree": b.degree, "source": b.source, "target": b.target,
                      "family": b.family, "word": list(b.word)} for b in alg.basis],
           "generators": presentation_to_json(A.presentation)}
    table = A.table() + "\ndims: " + ", ".join(f"{d}:{k}" for d, k in alg.graded_dims().items())
    _emit(cfg, doc, table)
    return OK


def cmd_rgb_cy(args, cfg):
    S = _load_sgraph(args.sgraph)
    _require_compatible(S, args.n)
    A = build_rgb(S, args.n, cfg.max_len)
    tr = cy_trace(S, args.n, A, cfg.field)
    if isinstance(tr, Refusal):
        doc = {"trace": None, "refusal": tr.reason}
        lines = [f"refused: {tr.reason}"]
        if not S.boundary_vertices():
            rep = cy_infeasibility(A, args.n)
            doc["infeasibility"] = {"no_cy_structure": rep.no_cy_structure,
                                    "forced_zero": rep.forced_zero,
                                    "degenerate_idempotents": rep.degenerate_idempotents,
                                    "symmetric_functionals": rep.symmetric_functionals}
            lines.append(f"no CY structure: {'proved' if rep.no_cy_structure else 'not proved'}")
            lines += [f"  trace forced to vanish on {k}: {v}" for k, v in sorted(rep.forced_zero.items())]
            lines += [f"  pairing degenerate at {e}" for e in rep.degenerate_idempotents]
        _emit(cfg, doc, "\n".join(lines))
        return REFUSAL
    doc = {"trace": tr.values, "gram_rank": tr.gram_rank, "dim": A.algebra.dim, "symmetric": tr.symmetric}
    lines = [f"trace on degree {args.n}:"] + [f"  tr({k}) = {fmt_coef(v)}" for k, v in sorted(tr.values.items())]
    lines.append(f"Gram rank {tr.gram_rank} of {A.algebra.dim}; graded symmetric")
    _emit(cfg, doc, "\n".join(lines))
    return OK


def cmd_rgb_deform(args, cfg):
    S = _load_sgraph(args.sgraph)
    _require_compatible(S, args.n)
    eps = orientability(S) or default_orientation(S)
    rep = deformation_check(S, args.n, W=args.winding, eps=eps, field=cfg.field)
    doc = {"ok": rep.ok, "ideal_acyclic": rep.ideal_acyclic, "quotient_isomorphic": rep.quotient_isomorphic,
           "cohomology_match": rep.cohomology_match, "certified_through": rep.certified_through,
           "dims_truncated": rep.dims_truncated, "dims_rgb": rep.dims_rgb, "details": rep.details}
    lines = [f"deformation check: {'pass' if rep.ok else 'FAIL'}",
             f"  ideal acyclic through degree {rep.certified_through}: {rep.ideal_acyclic}",
             f"  quotient isomorphic to A(S,{args.n}): {rep.quotient_isomorphic}",
             f"  cohomology dims match: {rep.cohomology_match}"]
    lines += [f"  {d}" for d in rep.details]
    _emit(cfg, doc, "\n".join(lines))
    return OK if rep.ok else VERIFY_FAIL


# --- koszul -------------------------------------------------------------------------------------


def _dual(S, n: int, method: str):
    if method == "cobar":
        return cobar(build_rgb(S, n).algebra, name=f"cobar dual (n={n})")
    return closed_form_dual(S, n).presentation


def cmd_koszul_build(args, cfg):
    S = _load_sgraph(args.sgraph)
    _require_compatible(S, args.n)
    P = _dual(S, args.n, args.method)
    if not check_d_squared(P).ok:
        raise VerificationFailed("d^2 != 0 on the dual presentation")
    _emit(cfg, presentation_to_json(P), _presentation_table(P))
    return OK


def cmd_koszul_compare(args, cfg):
    S = _load_sgraph(args.sgraph)
    _require_compatible(S, args.n)
    P1 = _dual(S, args.n, "cobar")
    if args.against == "reduced":
        if args.n < 2:
            raise Refused("glued presentations need n >= 2")
        P2 = reduce_ginzburg(glue_ginzburg(S, args.n, cfg.field), args.mixed)
    else:
        P2 = _dual(S, args.n, "closed-form")
    rep = compare_presentations(P1, P2)
    doc = {"isomorphic": rep.isomorphic, "vertex_map": rep.vertex_map,
           "matching": {k: [v, c] for k, (v, c) in sorted(rep.matching.items())},
           "unmatched": [list(rep.unmatched[0]), list(rep.unmatched[1])], "mismatches": rep.mismatches,
           "nodes": rep.nodes}
    lines = [f"cobar vs {args.against}: {'isomorphic' if rep.isomorphic else 'NOT isomorphic'}"]
    lines += [f"  {k} -> {fmt_coef(c)} {v}" for k, (v, c) in sorted(rep.matching.items())]
    lines += [f"  ! {m}" for m in rep.mismatches]
    _emit(cfg, doc, "\n".join(lines))
    return OK if rep.isomorphic else VERIFY_FAIL


# --- ginzburg ------------------------------------------------------------------------------------


def cmd_ginzburg_build(args, cfg):
    S = _load_sgraph(args.sgraph)
    _require_compatible(S, args.n)
    if args.n < 2:
        raise Refused("glued presentations need n >= 2")
    G = glue_ginzburg(S, args.n, cfg.field)
    P = reduce_ginzburg(G, args.mixed) if args.reduced else G.presentation
    if not check_d_squared(P).ok:
        raise VerificationFailed("d^2 != 0 on the glued presentation")
    doc = presentation_to_json(P)
    doc["arrow_multiset"] = [list(t) for t in arrow_multiset(P)]
    lines = [_presentation_table(P), "arrow multiset (source, target, degree):"]
    lines += [f"  {s} -> {t}  deg {d}" for s, t, d in arrow_multiset(P)]
    _emit(cfg, doc, "\n".join(lines))
    return OK


def cmd_ginzburg_cohomology(args, cfg):
    try:
        G = build_Gnm(args.n, args.m, cfg.field)
    except GinzburgError as exc:
        raise InputError(str(exc))
    window = cfg.window or (3 * (2 - args.n) + 1, 1)
    res = truncated_cohomology(G.presentation, cap=args.cap, window=window, field=cfg.field,
                               weights=G.weights())
    rows = res.at_cap()
    doc = {"n": args.n, "m": args.m, "cap": args.cap, "window": list(window),
           "dims": {t: {"dim": d, "stable": s} for t, (d, s) in rows.items()}}
    lines = [f"G_{{{args.n},{args.m}}} truncated cohomology, cap {args.cap}", "degree | dim | stable"]
    lines += [f"{t:>6} | {d:>3} | {'yes' if s else 'no'}" for t, (d, s) in rows.items()]
    _emit(cfg, doc, "\n".join(lines))
    return OK


def cmd_ginzburg_covering(args, cfg):
    Sc = _load_sgraph(args.cover)
    S = _load_sgraph(args.sgraph)
    action = _load_json(args.action)
    if not isinstance(action, dict) or "projection" not in action:
        raise InputError("action document needs 'generators' and 'projection'")
    rep = covering_quotient_check(Sc, action, S, args.n)
    doc = {"ok": rep.ok, "orbits": rep.orbits, "failures": rep.failures}
    lines = [f"covering quotient check: {'pass' if rep.ok else 'FAIL'} ({rep.orbits} generator orbits)"]
    lines += [f"  ! {f}" for f in rep.failures]
    _emit(cfg, doc, "\n".join(lines))
    return OK if rep.ok else VERIFY_FAIL


# --- selftest ------------------------------------------------------------------------------------


def cmd_selftest(args, cfg):
    only = [int(x) for x in args.only.split(",")] if args.only else []
    results = []
    for r in acceptance.run_all(cfg.seed, only):
        results.append(r)
        sys.stderr.write(r.line() + "\n")
    doc = {"seed": cfg.seed, "criteria": [{"number": r.number, "title": r.title, "ok": r.ok,
                                            "details": r.details} for r in results]}
    lines = [r.line() for r in results]
    lines.append(f"{sum(r.ok for r in results)}/{len(results)} criteria pass")
    _emit(cfg, doc, "\n".join(lines))
    return OK if all(r.ok for r in results) else VERIFY_FAIL


# --- parser --------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", default="q", help="q or fp:<p>")
    common.add_argument("--max-len", type=_positive, default=None, help="word-length cap for basis growth")
    common.add_argument("--degree-window", type=_window, default=None, metavar="LO:HI")
    common.add_argument("--seed", type=int, default=acceptance.DEFAULT_SEED)
    common.add_argument("--out", default=None, help="write the artifact here instead of stdout")
    common.add_argument("--format", choices=("json", "table"), default="table")

    p = argparse.ArgumentParser(prog="rgbforge", description=__doc__.splitlines()[0])
    top = p.add_subparsers(dest="group", required=True)

    def sub(parent, name, fn, **kw):
        q = parent.add_parser(name, parents=[common], **kw)
        q.set_defaults(func=fn)
        return q

    def graph_args(q, need_n=True):
        q.add_argument("--sgraph", required=True, help="S-graph JSON file or fixture name")
        if need_n:
            q.add_argument("--n", type=int, required=True)

    sg = top.add_parser("sgraph").add_subparsers(dest="cmd", required=True)
    graph_args(sub(sg, "validate", cmd_sgraph_validate))
    q = sub(sg, "flip", cmd_sgraph_flip)
    graph_args(q, need_n=False)
    q.add_argument("--edge", type=int, required=True)
    q.add_argument("--dir", choices=("forward", "backward"), required=True)
    q = sub(sg, "exchange", cmd_sgraph_exchange)
    graph_args(q)
    q.add_argument("--depth", type=int, default=1)
    graph_args(sub(sg, "canon", cmd_sgraph_canon), need_n=False)

    rg = top.add_parser("rgb").add_subparsers(dest="cmd", required=True)
    graph_args(sub(rg, "build", cmd_rgb_build))
    graph_args(sub(rg, "cy", cmd_rgb_cy))
    q = sub(rg, "deform-check", cmd_rgb_deform)
    graph_args(q)
    q.add_argument("--winding", type=int, default=2, help="winding cap W (>= 2)")

    ks = top.add_parser("koszul").add_subparsers(dest="cmd", required=True)
    q = sub(ks, "build", cmd_koszul_build)
    graph_args(q)
    q.add_argument("--method", choices=("cobar", "closed-form"), default="closed-form")
    q = sub(ks, "compare", cmd_koszul_compare)
    graph_args(q)
    q.add_argument("--against", choices=("closed-form", "reduced"), default="closed-form")
    q.add_argument("--mixed", choices=MIXED_MODES, default="discard",
                   help="treatment of interior-boundary edges in the reduction")

    gz = top.add_parser("ginzburg").add_subparsers(dest="cmd", required=True)
    q = sub(gz, "build", cmd_ginzburg_build)
    graph_args(q)
    q.add_argument("--reduced", action="store_true")
    q.add_argument("--mixed", choices=MIXED_MODES, default="discard")
    q = sub(gz, "cohomology", cmd_ginzburg_cohomology)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--cap", type=_positive, default=8)
    q = sub(gz, "covering-check", cmd_ginzburg_covering)
    graph_args(q)
    q.add_argument("--cover", required=True)
    q.add_argument("--action", required=True)

    q = sub(top, "selftest", cmd_selftest)
    q.add_argument("--only", default="", help="comma-separated criterion numbers")
    return p


def run(argv: Sequence[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return OK if exc.code == 0 else INPUT_ERROR
    try:
        cfg = _config(args)
        return args.func(args, cfg)
    except InputError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return INPUT_ERROR
    except Refused as exc:
        sys.stderr.write(f"refused: {exc}\n")
        return REFUSAL
    except (VerificationFailed, ConstructionError, AlgebraError, CapExceeded) as exc:
        sys.stderr.write(f"verification failure: {exc}\n")
        return VERIFY_FAIL
    except (SGraphError, GinzburgError, ValueError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return INPUT_ERROR
    except OSError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return INPUT_ERROR


def main(argv: Optional[List[str]] = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
