"""Command-line interface.

Subcommands: ``align`` (TKB alignment), ``entails`` (TCQ entailment),
``kb-align`` (alignment of a single ABox with a Boolean query) and
``dump`` (DOT files of the intermediate automata).

Exit codes: 0 success, 1 no solution or not entailed, 2 usage or parse
error, 3 query outside the supported fragment.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path
from typing import Optional, Sequence

from .align import build_mig, build_rtdfa, shortest_accepted_path, tkb_align, tqe
from .automata.dpa import ltl_to_dpa
from .automata.nba import ltl_to_nba
from .bounded import bounded_entails, CounterModel
from .dl import KnowledgeBase, TOP
from .dot import dpa_to_dot, mig_to_dot, nba_to_dot, rtdfa_to_dot
from .errors import BoundTooLarge, QuerySyntaxError, UnsupportedQueryShape
from .kbalign import CostModel, apply_abox_mod, kb_align
from .oracle import find_tkb_countermodel
from .reasoner import concept_satisfiable
from .solution import (
    alignment_document, entailment_document, kb_alignment_document, render_json, render_text,
)
from .syntax import parse_assertion, parse_problem, parse_query, parse_tcq
from .temporal import prop_abstraction, t_reduct

__all__ = ["main", "load_costs"]

OK, FAIL, USAGE, UNSUPPORTED = 0, 1, 2, 3


class _Usage(Exception):
    pass


def load_costs(text: str) -> CostModel:
    """Cost model from a JSON document."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise _Usage(f"cost file: {e}") from None
    if not isinstance(data, dict):
        raise _Usage("cost file: expected a JSON object")
    known = {"default_insert", "default_remove", "abox_unit", "insert", "remove"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise _Usage(f"cost file: unknown keys {unknown}")

    def table(key: str) -> dict:
        raw = data.get(key, {})
        if not isinstance(raw, dict):
            raise _Usage(f"cost file: {key!r} must be an object")
        return {parse_assertion(k): float(v) for k, v in raw.items()}

    try:
        return CostModel(
            default_insert=float(data.get("default_insert", 1.0)),
            default_remove=float(data.get("default_remove", 1.0)),
            insert=table("insert"),
            remove=table("remove"),
            abox_unit=float(data.get("abox_unit", 1.0)),
        )
    except (TypeError, ValueError) as e:
        raise _Usage(f"cost file: {e}") from None


def _read(path: Optional[str], what: str) -> str:
    if path is None:
        raise _Usage(f"missing --{what}")
    try:
        return Path(path).read_text()
    except OSError as e:
        raise _Usage(f"cannot read {what} file {path!r}: {e.strerror}") from None


def _emit(doc: dict, args) -> None:
    text = render_json(doc) if args.format == "json" else render_text(doc)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _check_props(pa, args) -> None:
    if len(pa.props) > args.max_props:
        raise _Usage(f"the query has {len(pa.props)} distinct CQs; the limit is {args.max_props} "
                     f"(raise it with --max-props)")


def _dump(g, pa, cm, dump_dir: str, path=None, d=None, m=None) -> None:
    out = Path(dump_dir)
    out.mkdir(parents=True, exist_ok=True)
    nba = ltl_to_nba(pa.ltl, pa.props)
    dpa = ltl_to_dpa(pa.ltl, pa.props)
    (out / "nba.dot").write_text(nba_to_dot(nba))
    (out / "dpa.dot").write_text(dpa_to_dot(dpa))
    (out / "t_reduct.dot").write_text(dpa_to_dot(t_reduct(dpa, g.tbox, pa), name="t_reduct"))
    if not concept_satisfiable(TOP, g.tbox):
        return
    d = d or build_rtdfa(g, pa)
    m = m or build_mig(d, g, cm)
    if path is None:
        path = shortest_accepted_path(m, d)
    (out / "rtdfa.dot").write_text(rtdfa_to_dot(d))
    (out / "mig.dot").write_text(mig_to_dot(m, path))


def cmd_align(args) -> int:
    problem = parse_problem(_read(args.kb, "kb"))
    q = parse_tcq(_read(args.query, "query"))
    cm = load_costs(_read(args.costs, "costs")) if args.costs else CostModel()
    g = problem.tkb
    pa = prop_abstraction(q)
    _check_props(pa, args)
    result = tkb_align(g, q, cm)
    diagnostics = {}
    code = OK if result is not None else FAIL
    if args.oracle_check and result is not None:
        cm_trace = find_tkb_countermodel(result.aligned, q)
        diagnostics["oracle_check"] = "countermodel" if cm_trace is not None else "no countermodel"
        if cm_trace is not None:
            print("oracle check failed: the aligned TKB has a countermodel", file=sys.stderr)
            code = FAIL
    _emit(alignment_document(g, pa, result, cm, diagnostics), args)
    if args.dump_dir:
        _dump(g, pa, cm, args.dump_dir)
    return code


def cmd_entails(args) -> int:
    g = parse_problem(_read(args.kb, "kb")).tkb
    q = parse_tcq(_read(args.query, "query"))
    pa = prop_abstraction(q)
    _check_props(pa, args)
    res = tqe(g, pa)
    doc = entailment_document(res.entailed, res.vacuous, pa)
    code = OK if res.entailed else FAIL
    if args.oracle_check:
        trace = find_tkb_countermodel(g, q)
        doc["oracle_check"] = "countermodel" if trace is not None else "no countermodel"
        if trace is not None and res.entailed:
            print("oracle check failed: countermodel for an entailed query", file=sys.stderr)
            code = FAIL
    _emit(doc, args)
    return code


def cmd_kb_align(args) -> int:
    problem = parse_problem(_read(args.kb, "kb"))
    g = problem.tkb
    if len(g.aboxes) > 1:
        raise _Usage("kb-align expects at most one ABox section")
    abox = g.aboxes[0] if g.aboxes else frozenset()
    q = parse_query(_read(args.query, "query"))
    cm = load_costs(_read(args.costs, "costs")) if args.costs else CostModel()
    k = KnowledgeBase(g.tbox, abox)
    result = kb_align(k, q, cm, signature=problem.signature)
    aligned = apply_abox_mod(result[0], abox) if result is not None else None
    doc = kb_alignment_document(result, abox, aligned)
    code = OK if result is not None else FAIL
    if args.oracle_check and result is not None:
        try:
            verdict = bounded_entails(KnowledgeBase(g.tbox, aligned), q, 2)
            doc["oracle_check"] = "countermodel" if isinstance(verdict, CounterModel) else "no countermodel"
            if isinstance(verdict, CounterModel):
                print("oracle check failed: the aligned KB has a countermodel", file=sys.stderr)
                code = FAIL
        except BoundTooLarge:
            doc["oracle_check"] = "skipped"
    _emit(doc, args)
    return code


def cmd_dump(args) -> int:
    if not args.dump_dir:
        raise _Usage("dump needs --dump-dir")
    g = parse_problem(_read(args.kb, "kb")).tkb
    q = parse_tcq(_read(args.query, "query"))
    cm = load_costs(_read(args.costs, "costs")) if args.costs else CostModel()
    pa = prop_abstraction(q)
    _check_props(pa, args)
    _dump(g, pa, cm, args.dump_dir)
    return OK


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tkbalign", description="Temporal knowledge base alignment.")
    sub = ap.add_subparsers(dest="command", required=True)
    handlers = {"align": cmd_align, "entails": cmd_entails, "kb-align": cmd_kb_align, "dump": cmd_dump}
    helps = {
        "align": "cheapest modification of a TKB so that it entails a TCQ",
        "entails": "decide whether a TKB entails a TCQ",
        "kb-align": "cheapest modification of a single ABox so that it entails a Boolean query",
        "dump": "write DOT files of the NBA, DPA, T-reduct, RT-DFA and MIG",
    }
    for name, fn in handlers.items():
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--kb", required=True, help="problem file (tbox / abox@k / signature sections)")
        p.add_argument("--query", required=True, help="query file")
        p.add_argument("--costs", help="JSON cost file")
        p.add_argument("--out", help="write the result here instead of stdout")
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--dump-dir", help="directory for DOT files")
        p.add_argument("--oracle-check", action="store_true", help="re-check the result with bounded model search")
        p.add_argument("--max-props", type=int, default=4, help="refuse queries with more distinct CQs")
        p.set_defaults(handler=fn)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return args.handler(args)
    except (QuerySyntaxError, _Usage) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE
    except UnsupportedQueryShape as e:
        print(f"unsupported query: {e}", file=sys.stderr)
        return UNSUPPORTED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
