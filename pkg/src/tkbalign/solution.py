"""Machine-readable result documents.

Documents are plain dicts rendered as JSON with sorted keys, two-space
indentation and a trailing newline, so equal results give equal bytes.
"""

from __future__ import annotations

import json
from typing import Iterable, Optional

from .align import Add, Alignment, Del, Fix, atom_cost, letter_text
from .dl import Assertion, sorted_abox
from .kbalign import ABoxOperation, CostModel
from .temporal import PropAbstraction, TemporalKB

__all__ = ["alignment_document", "kb_alignment_document", "entailment_document", "render_json", "render_text"]

ALIGNED = "ALIGNED"
ENTAILED = "ENTAILED"
NO_SOLUTION = "NO_SOLUTION"
NOT_ENTAILED = "NOT_ENTAILED"


def _abox(a: Iterable[Assertion]) -> list[str]:
    return [str(x) for x in sorted_abox(a)]


def _ops(mod: Iterable[ABoxOperation]) -> list[str]:
    return [str(op) for op in mod]


def _cost(x: float) -> float:
    return round(float(x), 9)


def _propositions(pa: PropAbstraction) -> dict[str, str]:
    return {p: str(cq) for p, cq in zip(pa.props, pa.queries)}


def alignment_document(g: TemporalKB, pa: PropAbstraction, result: Optional[Alignment],
                       cm: CostModel, diagnostics: Optional[dict] = None) -> dict:
    diag = {"propositions": _propositions(pa)}
    diag.update(diagnostics or {})
    if result is None:
        return {"status": NO_SOLUTION, "atoms": [], "total_cost": None, "aligned_aboxes": None,
                "diagnostics": diag}
    atoms = []
    pos = 0
    out_pos = 0
    for atom, letter in zip(result.modification, result.letters):
        source = g.aboxes[pos] if pos < len(g.aboxes) else None
        entry = {"kind": type(atom).__name__.lower(), "cost": _cost(atom_cost(atom, source, cm)),
                 "letter": letter_text(letter)}
        if isinstance(atom, (Fix, Add)):
            entry["operations"] = _ops(atom.mod)
        else:
            entry["operations"] = []
        entry["input_index"] = pos if not isinstance(atom, Add) else None
        entry["output_index"] = out_pos if not isinstance(atom, Del) else None
        if not isinstance(atom, Add):
            pos += 1
        if not isinstance(atom, Del):
            out_pos += 1
        atoms.append(entry)
    status = ENTAILED if result.cost == 0 else ALIGNED
    return {
        "status": status,
        "atoms": atoms,
        "total_cost": _cost(result.cost),
        "aligned_aboxes": [_abox(a) for a in result.aligned.aboxes],
        "diagnostics": diag,
    }


def kb_alignment_document(result: Optional[tuple], abox: Iterable[Assertion], aligned: Optional[Iterable[Assertion]]) -> dict:
    if result is None:
        return {"status": NO_SOLUTION, "operations": [], "total_cost": None, "aligned_abox": None}
    ops, cost = result
    return {
        "status": ENTAILED if cost == 0 else ALIGNED,
        "operations": _ops(ops),
        "total_cost": _cost(cost),
        "aligned_abox": _abox(aligned),
    }


def entailment_document(entailed: bool, vacuous: bool, pa: Optional[PropAbstraction] = None) -> dict:
    doc = {"status": ENTAILED if entailed else NOT_ENTAILED, "vacuous": vacuous}
    if pa is not None:
        doc["propositions"] = _propositions(pa)
    return doc


def render_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def render_text(doc: dict) -> str:
    lines = [f"status: {doc['status']}"]
    if doc.get("total_cost") is not None:
        lines.append(f"total cost: {doc['total_cost']:g}")
    for k, atom in enumerate(doc.get("atoms", [])):
        ops = "; ".join(atom["operations"])
        lines.append(f"  {k}: {atom['kind']}[{ops}]  cost {atom['cost']:g}  ({atom['letter']})")
    if doc.get("operations"):
        lines.append("operations: " + "; ".join(doc["operations"]))
    if doc.get("aligned_aboxes") is not None:
        for k, abox in enumerate(doc["aligned_aboxes"]):
            lines.append(f"abox@{k}: " + "; ".join(abox))
    if doc.get("aligned_abox") is not None:
        lines.append("abox: " + "; ".join(doc["aligned_abox"]))
    if "vacuous" in doc and doc["vacuous"]:
        lines.append("note: the knowledge base has no model")
    return "\n".join(lines) + "\n"
