"""Temporal knowledge bases, temporal conjunctive queries and their abstraction.

A TCQ is an LTL formula (see :mod:`tkbalign.automata.ltl`) whose atoms
are Boolean CQs.  Replacing every atom by a proposition gives the
propositional abstraction; a *type* is a set of propositions, read as
"exactly these queries hold", and :func:`chi` turns a type back into a
Boolean combination of CQs.

FO traces are tested at small scale as lassos of finite interpretations
over one shared domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

from .automata.dpa import DPA, t_reduct_from_letters
from .automata.ltl import LTL, LassoWord, Prop, atoms, map_atoms, positions_truth
from .automata.nba import all_letters
from .cq import CQ, BoolCQ, QLeaf, QNot, eval_cq, qand_all
from .dl import Assertion, FiniteInterpretation, GCI, KnowledgeBase, is_model
from .reasoner import satisfiable_with

__all__ = [
    "TemporalKB", "TCQ", "LassoTrace", "PropAbstraction", "prop_abstraction", "chi",
    "type_of", "all_types", "consistent_types", "t_reduct", "eval_tcq_lasso",
    "is_tkb_model_prefix", "type_lasso", "tcq_queries",
]

TCQ = LTL  # with CQ atoms


class TemporalKB(NamedTuple):
    tbox: frozenset[GCI]
    aboxes: tuple[frozenset[Assertion], ...]

    @classmethod
    def of(cls, tbox: Iterable[GCI], aboxes: Iterable[Iterable[Assertion]]) -> "TemporalKB":
        return cls(frozenset(tbox), tuple(frozenset(a) for a in aboxes))

    @property
    def ell(self) -> int:
        """Index of the last ABox (``-1`` for the empty sequence)."""
        return len(self.aboxes) - 1

    def kb(self, i: int) -> KnowledgeBase:
        return KnowledgeBase(self.tbox, self.aboxes[i])


def tcq_queries(q: TCQ) -> list[CQ]:
    """The CQ atoms of ``q`` in order of first occurrence."""
    return list(atoms(q))


@dataclass(frozen=True)
class PropAbstraction:
    """Propositions ``p0, p1, ...`` standing for the distinct CQs of a TCQ.

    CQs are identified up to renaming of bound variables and reordering of
    atoms.
    """

    props: tuple[str, ...]
    queries: tuple[CQ, ...]
    ltl: LTL

    def query(self, p: str) -> CQ:
        return self.queries[self.props.index(p)]

    def prop(self, cq: CQ) -> str:
        key = cq.canonical()
        for p, other in zip(self.props, self.queries):
            if other.canonical() == key:
                return p
        raise KeyError(f"query {cq} is not abstracted")

    def concretize(self) -> TCQ:
        return map_atoms(self.ltl, lambda p: Prop(self.query(p)))


def prop_abstraction(q: TCQ) -> PropAbstraction:
    reps: dict[CQ, str] = {}
    queries: list[CQ] = []
    for cq in atoms(q):
        key = cq.canonical()
        if key not in reps:
            reps[key] = f"p{len(queries)}"
            queries.append(cq)
    ltl = map_atoms(q, lambda cq: Prop(reps[cq.canonical()]))
    return PropAbstraction(tuple(reps.values()), tuple(queries), ltl)


def chi(f: Iterable[str], all_props: Sequence[str], pa: PropAbstraction) -> BoolCQ:
    """The query holding exactly when the CQs of ``f`` are true and the others false."""
    f = frozenset(f)
    if not f <= set(all_props):
        raise ValueError(f"type {sorted(f)} is not over {list(all_props)}")
    parts: list[BoolCQ] = []
    for p in all_props:
        leaf = QLeaf(pa.query(p))
        parts.append(leaf if p in f else QNot(leaf))
    return qand_all(parts)


def type_of(i: FiniteInterpretation, pa: PropAbstraction) -> frozenset[str]:
    return frozenset(p for p, cq in zip(pa.props, pa.queries) if eval_cq(i, cq))


def all_types(pa: PropAbstraction) -> tuple[frozenset, ...]:
    return all_letters(pa.props)


@lru_cache(maxsize=1024)
def _consistent_types(t: frozenset, pa: PropAbstraction) -> tuple[frozenset, ...]:
    return tuple(ty for ty in all_types(pa) if satisfiable_with(t, chi(ty, pa.props, pa)))


def consistent_types(t: Iterable[GCI], pa: PropAbstraction) -> tuple[frozenset, ...]:
    """Types whose ``chi`` is satisfiable together with ``t``."""
    return _consistent_types(frozenset(t), pa)


def t_reduct(p: DPA, t: Iterable[GCI], pa: PropAbstraction) -> DPA:
    """Send letters of unsatisfiable types to a rejecting sink and shift colors."""
    return t_reduct_from_letters(p, consistent_types(t, pa))


class LassoTrace(NamedTuple):
    """The trace ``prefix . loop . loop . ...`` of finite interpretations."""

    prefix: tuple[FiniteInterpretation, ...]
    loop: tuple[FiniteInterpretation, ...]

    @classmethod
    def of(cls, prefix: Iterable[FiniteInterpretation], loop: Iterable[FiniteInterpretation]) -> "LassoTrace":
        prefix, loop = tuple(prefix), tuple(loop)
        if not loop:
            raise ValueError("the loop of a lasso trace must be nonempty")
        first = (prefix + loop)[0]
        for i in prefix + loop:
            if i.domain != first.domain:
                raise ValueError("all interpretations of a trace share one domain")
            if dict(i.individuals) != dict(first.individuals):
                raise ValueError("all interpretations of a trace map individuals alike")
        return cls(prefix, loop)

    def positions(self) -> tuple[FiniteInterpretation, ...]:
        return self.prefix + self.loop

    def at(self, i: int) -> FiniteInterpretation:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.loop[(i - len(self.prefix)) % len(self.loop)]


def eval_tcq_lasso(tr: LassoTrace, q: TCQ) -> bool:
    """Whether the trace satisfies ``q`` at position 0."""
    qs = tcq_queries(q)
    letters = [frozenset(cq for cq in qs if eval_cq(i, cq)) for i in tr.positions()]
    return positions_truth(q, letters, len(tr.prefix))[0]


def type_lasso(tr: LassoTrace, pa: PropAbstraction) -> LassoWord:
    return LassoWord(tuple(type_of(i, pa) for i in tr.prefix), tuple(type_of(i, pa) for i in tr.loop))


def is_tkb_model_prefix(tr: LassoTrace, g: TemporalKB) -> bool:
    """Every position models the TBox and position ``i`` models ``A_i``."""
    empty = frozenset()
    if not all(is_model(i, KnowledgeBase(g.tbox, empty)) for i in tr.positions()):
        return False
    return all(is_model(tr.at(i), KnowledgeBase(empty, a)) for i, a in enumerate(g.aboxes))
