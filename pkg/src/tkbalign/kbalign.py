"""ABox edit scripts, their costs, and cost-optimal KB alignment.

:func:`kb_align` looks for the cheapest sequence of assertion insertions
and removals after which a knowledge base is consistent and entails a
Boolean query.  An upper bound comes from a witness ABox built from the
canonical ABox of the (purified) query; cheaper candidates are then
enumerated by increasing number of edits.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Optional, Sequence

from .cq import BoolCQ, ground, purify, query_individuals, depurify_abox
from .dl import (
    TOP, Assertion, ConceptAssertion, GCI, KnowledgeBase, RoleAssertion, Signature,
    assertion_key, individuals_of, signature_of,
)
from .reasoner import (
    canonical_abox, canonical_individuals, concept_satisfiable, entails, kb_consistent,
)

__all__ = [
    "ABoxOperation", "ins", "rem", "CostModel", "apply_abox_mod", "cost_abox_mod",
    "trivial_modification", "initial_witness", "kb_align", "solves", "fresh_names",
]

_EPS = 1e-9


@dataclass(frozen=True)
class ABoxOperation:
    kind: str  # "ins" or "rem"
    assertion: Assertion

    def __post_init__(self):
        if self.kind not in ("ins", "rem"):
            raise ValueError(f"unknown ABox operation {self.kind!r}")

    def __str__(self) -> str:
        return f"{self.kind} {self.assertion}"


def ins(a: Assertion) -> ABoxOperation:
    return ABoxOperation("ins", a)


def rem(a: Assertion) -> ABoxOperation:
    return ABoxOperation("rem", a)


ABoxModification = tuple  # tuple[ABoxOperation, ...]


@dataclass(frozen=True)
class CostModel:
    """Per-assertion costs of insertions and removals.

    ``abox_unit`` is the fixed charge for adding or deleting a whole ABox
    in a temporal modification.
    """

    default_insert: float = 1.0
    default_remove: float = 1.0
    insert: Mapping[Assertion, float] = field(default_factory=dict)
    remove: Mapping[Assertion, float] = field(default_factory=dict)
    abox_unit: float = 1.0

    def __post_init__(self):
        values = [self.default_insert, self.default_remove, self.abox_unit,
                  *self.insert.values(), *self.remove.values()]
        if any(not (v > 0) or math.isinf(v) for v in values):
            raise ValueError("all costs must be positive and finite")

    def __hash__(self):
        return hash((self.default_insert, self.default_remove, self.abox_unit,
                     frozenset(self.insert.items()), frozenset(self.remove.items())))

    def cost(self, op: ABoxOperation) -> float:
        if op.kind == "ins":
            return self.insert.get(op.assertion, self.default_insert)
        return self.remove.get(op.assertion, self.default_remove)

    def min_cost(self) -> float:
        return min([self.default_insert, self.default_remove, *self.insert.values(),
                    *self.remove.values()])

    def mentioned_individuals(self) -> set[str]:
        return {i for a in (*self.insert, *self.remove) for i in a.individuals}


def apply_abox_mod(m: Iterable[ABoxOperation], a: Iterable[Assertion]) -> frozenset[Assertion]:
    """Apply the operations left to right."""
    out = set(a)
    for op in m:
        if op.kind == "ins":
            out.add(op.assertion)
        else:
            out.discard(op.assertion)
    return frozenset(out)


def cost_abox_mod(m: Iterable[ABoxOperation], cm: CostModel) -> float:
    return float(sum(cm.cost(op) for op in m))


def trivial_modification(a: Iterable[Assertion], target: Iterable[Assertion]) -> tuple[ABoxOperation, ...]:
    """Remove everything in ``a``, then insert everything in ``target``."""
    return (tuple(rem(x) for x in sorted(a, key=assertion_key))
            + tuple(ins(x) for x in sorted(target, key=assertion_key)))


def fresh_names(n: int, avoid: Iterable[str], stem: str) -> list[str]:
    taken = set(avoid)
    out = []
    j = 1
    while len(out) < n:
        name = f"{stem}{j}"
        if name not in taken:
            out.append(name)
        j += 1
    return out


def solves(t: frozenset, a: frozenset, q: BoolCQ) -> bool:
    """Whether ``(t, a)`` is consistent and entails ``q``."""
    k = KnowledgeBase(t, a)
    return kb_consistent(k) and entails(k, q)


def _rename(abox: Iterable[Assertion], ren: Mapping[str, str]) -> frozenset[Assertion]:
    out = set()
    for x in abox:
        if isinstance(x, ConceptAssertion):
            out.add(ConceptAssertion(x.concept, ren.get(x.ind, x.ind)))
        else:
            out.add(RoleAssertion(x.role, ren.get(x.source, x.source), ren.get(x.target, x.target)))
    return frozenset(out)


def _minimize(t: frozenset, w: frozenset, q: BoolCQ, keep: set[str]) -> frozenset:
    # dropping assertions never breaks consistency, so only entailment is rechecked
    for ind in sorted(individuals_of(w) - keep):
        cand = frozenset(x for x in w if ind not in x.individuals)
        if entails(KnowledgeBase(t, cand), q):
            w = cand
    for x in sorted(w, key=assertion_key):
        cand = w - {x}
        if entails(KnowledgeBase(t, cand), q):
            w = cand
    return w


@lru_cache(maxsize=4096)
def _witness(t: frozenset, q: BoolCQ, s: Signature, avoid: frozenset, minimize: bool):
    if not concept_satisfiable(TOP, t):
        return None
    p = purify(t, q, s)
    target = canonical_abox(p.tbox, p.signature)
    if not p.individuals:
        if not entails(KnowledgeBase(p.tbox, target), q):
            return None
        w = target
    else:
        inds = canonical_individuals(p.tbox, p.signature)
        options = [[u for u in inds if ConceptAssertion(mk, u) in target] for mk in p.markers]
        found = None
        for tup in itertools.product(*options):
            if len(set(tup)) < len(tup):
                continue
            grounded = ground(p.query, dict(zip(p.variables, tup)))
            if entails(KnowledgeBase(p.tbox, target), grounded):
                found = tup
                break
        if found is None:
            return None
        w = depurify_abox(target, found, p.markers, p.individuals)
    keep = set(query_individuals(q))
    reserved = sorted(i for i in individuals_of(w) if i.startswith("__"))
    ren = dict(zip(reserved, fresh_names(len(reserved), keep | avoid, "w")))
    w = _rename(w, ren)
    if not solves(t, w, q):  # pragma: no cover - guarded by the canonical ABox properties
        raise RuntimeError("witness construction produced a non-solution")
    if minimize:
        w = _minimize(t, w, q, keep)
    return w


def initial_witness(t: Iterable[GCI], q: BoolCQ, s: Signature, *, avoid: Iterable[str] = (),
                    minimize: bool = True) -> Optional[frozenset[Assertion]]:
    """A consistent ABox over ``s`` entailing ``q``, or ``None`` if none exists.

    Non-pure queries are purified first and the witness found for the
    purified query is mapped back.  Individuals invented by the construction
    get fresh names avoiding ``avoid``.  With ``minimize`` the witness is
    shrunk greedily while it still entails ``q``.
    """
    return _witness(frozenset(t), q, s, frozenset(avoid), minimize)


def _insertion_candidates(sig: Signature, inds: Sequence[str], exclude: frozenset) -> list[Assertion]:
    out: list[Assertion] = [ConceptAssertion(c, i) for c in sorted(sig.concepts) for i in inds]
    out += [RoleAssertion(r, i, j) for r in sorted(sig.roles) for i in inds for j in inds]
    return sorted((x for x in out if x not in exclude), key=assertion_key)


def kb_align(k: KnowledgeBase, q: BoolCQ, cm: CostModel = CostModel(), *,
             signature: Optional[Signature] = None,
             avoid: Iterable[str] = ()) -> Optional[tuple[tuple[ABoxOperation, ...], float]]:
    """A cheapest modification making ``k`` consistent and entailing ``q``.

    Returns ``(ops, cost)`` or ``None`` when no consistent ABox over the
    signature entails ``q``.  Insertions range over ``signature`` (default:
    the names of ``k`` and ``q``), the individuals of ``k`` and ``q``, and
    fresh individuals.  Fresh individuals never reuse a name from ``avoid``.
    """
    return _kb_align(frozenset(k.tbox), frozenset(k.abox), q, cm, signature, frozenset(avoid))


@lru_cache(maxsize=8192)
def _kb_align(t: frozenset, a: frozenset, q: BoolCQ, cm: CostModel, signature: Optional[Signature],
              avoid_extra: frozenset):
    if solves(t, a, q):
        return (), 0.0
    sig = signature if signature is not None else (
        signature_of(list(t)) | signature_of(list(a)) | q.signature())
    base_inds = sorted(individuals_of(a) | set(query_individuals(q)))
    w = initial_witness(t, q, signature_of(list(t)) | q.signature(), avoid=individuals_of(a) | avoid_extra)
    if w is None:
        return None
    incumbent = trivial_modification(a, w)
    bound = cost_abox_mod(incumbent, cm)
    best: Optional[tuple] = None  # (cost, removals, insertions)
    removable = sorted(a, key=assertion_key)
    min_cost = cm.min_cost()
    avoid = set(base_inds) | cm.mentioned_individuals() | individuals_of(w) | avoid_extra
    n = 1
    while True:
        limit = best[0] if best is not None else bound
        if n * min_cost > limit + _EPS or (best is None and n * min_cost >= bound - _EPS):
            break
        fresh = fresh_names(n, avoid, "n")
        candidates = _insertion_candidates(sig, base_inds + fresh, a)
        fresh_rank = {f: j for j, f in enumerate(fresh)}
        for r in range(min(n, len(removable)) + 1):
            for removals in itertools.combinations(removable, r):
                rem_cost = sum(cm.cost(rem(x)) for x in removals)
                if rem_cost > limit + _EPS:
                    continue
                for inserts in itertools.combinations(candidates, n - r):
                    if not _canonical_fresh(inserts, fresh_rank):
                        continue
                    c = rem_cost + sum(cm.cost(ins(x)) for x in inserts)
                    limit = best[0] if best is not None else bound
                    if best is None and c >= bound - _EPS:
                        continue
                    if best is not None and c > best[0] + _EPS:
                        continue
                    key = (c, [assertion_key(x) for x in removals], [assertion_key(x) for x in inserts])
                    if best is not None and not _better(key, best[3]):
                        continue
                    if solves(t, (a - frozenset(removals)) | frozenset(inserts), q):
                        best = (c, removals, inserts, key)
        n += 1
    if best is None:
        return incumbent, bound
    ops = tuple(rem(x) for x in best[1]) + tuple(ins(x) for x in best[2])
    return ops, cost_abox_mod(ops, cm)


def _better(key: tuple, other: tuple) -> bool:
    if key[0] < other[0] - _EPS:
        return True
    if key[0] > other[0] + _EPS:
        return False
    return (key[1], key[2]) < (other[1], other[2])


def _canonical_fresh(inserts: Sequence[Assertion], rank: Mapping[str, int]) -> bool:
    """Fresh individuals in use must be the first ones of the pool."""
    used = {rank[i] for x in inserts for i in x.individuals if i in rank}
    return used == set(range(len(used)))
