"""Brute-force enumeration of small finite interpretations.

Used as an independent oracle for the tableau and the query machinery.
Interpretations over a fixed vocabulary and a domain ``{0..n-1}`` are
numbered by a mixed-radix index; a chunk of indices is decoded into numpy
arrays (one bitmask per concept name, one row mask per role and element,
one element per individual) and every check is vectorized over the chunk.
No unique-name assumption is made: individuals range over all elements.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence

import numpy as np

from .cq import CQ, BoolCQ, ConceptAtom, QLeaf, QNot, Var, query_individuals
from .dl import (
    And, Assertion, Bottom, Concept, ConceptAssertion, Exists, FiniteInterpretation, Forall,
    GCI, KnowledgeBase, Name, Not, Or, Signature, Top, signature_of,
)
from .errors import BoundTooLarge

__all__ = ["Entailed", "CounterModel", "bounded_entails", "Batch", "batches", "type_table"]

MAX_DOMAIN = 3
MAX_INTERPRETATIONS = 1 << 24
CHUNK = 1 << 17


class Entailed(NamedTuple):
    bound: int


class CounterModel(NamedTuple):
    interpretation: FiniteInterpretation


@dataclass
class Batch:
    n: int
    start: int
    concepts: dict[str, np.ndarray]
    roles: dict[str, np.ndarray]
    inds: dict[str, np.ndarray]
    size: int

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def concept(self, name: str) -> np.ndarray:
        got = self.concepts.get(name)
        return got if got is not None else np.zeros(self.size, dtype=np.int64)

    def role(self, name: str) -> np.ndarray:
        got = self.roles.get(name)
        return got if got is not None else np.zeros((self.size, self.n), dtype=np.int64)

    def eval_concept(self, c: Concept) -> np.ndarray:
        memo: dict[Concept, np.ndarray] = {}

        def ev(x: Concept) -> np.ndarray:
            got = memo.get(x)
            if got is not None:
                return got
            if isinstance(x, Top):
                out = np.full(self.size, self.full, dtype=np.int64)
            elif isinstance(x, Bottom):
                out = np.zeros(self.size, dtype=np.int64)
            elif isinstance(x, Name):
                out = self.concept(x.name)
            elif isinstance(x, Not):
                out = self.full ^ ev(x.arg)
            elif isinstance(x, And):
                out = ev(x.left) & ev(x.right)
            elif isinstance(x, Or):
                out = ev(x.left) | ev(x.right)
            elif isinstance(x, (Exists, Forall)):
                fill = ev(x.filler)
                if isinstance(x, Forall):
                    fill = self.full ^ fill
                rows = self.role(x.role)
                out = np.zeros(self.size, dtype=np.int64)
                for d in range(self.n):
                    hit = (rows[:, d] & fill) != 0
                    out |= hit.astype(np.int64) << d
                if isinstance(x, Forall):
                    out = self.full ^ out
            else:  # pragma: no cover
                raise TypeError(x)
            memo[x] = out
            return out

        return ev(c)

    def _elem(self, t, binding: dict):
        if isinstance(t, Var):
            return binding[t]
        return self.inds[t]

    def _bit(self, masks: np.ndarray, elem) -> np.ndarray:
        return ((masks >> elem) & 1).astype(bool)

    def satisfies_abox(self, abox: Iterable[Assertion]) -> np.ndarray:
        ok = np.ones(self.size, dtype=bool)
        rows = np.arange(self.size)
        for a in abox:
            if isinstance(a, ConceptAssertion):
                ok &= self._bit(self.concept(a.concept), self.inds[a.ind])
            else:
                src = self.role(a.role)[rows, self.inds[a.source]]
                ok &= self._bit(src, self.inds[a.target])
        return ok

    def satisfies_tbox(self, tbox: Iterable[GCI]) -> np.ndarray:
        ok = np.ones(self.size, dtype=bool)
        for g in tbox:
            ok &= (self.eval_concept(g.lhs) & (self.full ^ self.eval_concept(g.rhs))) == 0
        return ok

    def is_model(self, k: KnowledgeBase) -> np.ndarray:
        return self.satisfies_tbox(k.tbox) & self.satisfies_abox(k.abox)

    def eval_cq(self, cq: CQ) -> np.ndarray:
        variables = cq.variables()
        rows = np.arange(self.size)
        out = np.zeros(self.size, dtype=bool)
        for values in itertools.product(range(self.n), repeat=len(variables)):
            binding = dict(zip(variables, values))
            ok = np.ones(self.size, dtype=bool)
            for a in cq.atoms:
                if isinstance(a, ConceptAtom):
                    ok &= self._bit(self.concept(a.concept), self._elem(a.term, binding))
                else:
                    s = self._elem(a.source, binding)
                    table = self.role(a.role)
                    src = table[:, s] if isinstance(s, int) else table[rows, s]
                    ok &= self._bit(src, self._elem(a.target, binding))
            out |= ok
        return out

    def eval_query(self, q: BoolCQ) -> np.ndarray:
        cache: dict[CQ, np.ndarray] = {}

        def ev(x) -> np.ndarray:
            if isinstance(x, QLeaf):
                if x.cq not in cache:
                    cache[x.cq] = self.eval_cq(x.cq)
                return cache[x.cq]
            if isinstance(x, QNot):
                return ~ev(x.arg)
            return ev(x.left) | ev(x.right)

        return ev(q)

    def decode(self, j: int) -> FiniteInterpretation:
        """The ``j``-th interpretation of this batch."""
        n = self.n
        dom = frozenset(range(n))
        concepts = {a: frozenset(d for d in range(n) if (int(m[j]) >> d) & 1)
                    for a, m in self.concepts.items()}
        roles = {r: frozenset((d, e) for d in range(n) for e in range(n) if (int(m[j, d]) >> e) & 1)
                 for r, m in self.roles.items()}
        inds = {a: int(v[j]) for a, v in self.inds.items()}
        return FiniteInterpretation(dom, concepts, roles, inds)


def count_interpretations(sig: Signature, n_inds: int, n: int) -> int:
    return (1 << (len(sig.concepts) * n)) * (1 << (len(sig.roles) * n * n)) * n ** n_inds


def batches(sig: Signature, individuals: Sequence[str], n: int,
            limit: int = MAX_INTERPRETATIONS) -> Iterator[Batch]:
    """All interpretations of ``sig`` and ``individuals`` over ``n`` elements."""
    if n < 1 or n > MAX_DOMAIN:
        raise BoundTooLarge(f"domain size {n} outside 1..{MAX_DOMAIN}")
    concepts = sorted(sig.concepts)
    roles = sorted(sig.roles)
    individuals = sorted(individuals)
    total = count_interpretations(sig, len(individuals), n)
    if total > limit:
        raise BoundTooLarge(f"{total} interpretations exceed the limit of {limit}")
    base = 1 << n
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(total, start + CHUNK), dtype=np.int64)
        size = len(idx)
        cmap = {}
        for a in concepts:
            cmap[a] = idx % base
            idx = idx // base
        rmap = {}
        for r in roles:
            cols = []
            for _ in range(n):
                cols.append(idx % base)
                idx = idx // base
            rmap[r] = np.stack(cols, axis=1)
        imap = {}
        for a in individuals:
            imap[a] = idx % n
            idx = idx // n
        yield Batch(n, start, cmap, rmap, imap, size)


def bounded_entails(k: KnowledgeBase, q: BoolCQ, n: int) -> Entailed | CounterModel:
    """Search all interpretations with at most ``n`` elements for a countermodel."""
    sig = signature_of(list(k.tbox)) | signature_of(list(k.abox)) | q.signature()
    inds = sorted({i for a in k.abox for i in a.individuals} | set(query_individuals(q)))
    for size in range(1, n + 1):
        for b in batches(sig, inds, size):
            bad = b.is_model(k) & ~b.eval_query(q)
            hits = np.flatnonzero(bad)
            if len(hits):
                return CounterModel(b.decode(int(hits[0])))
    return Entailed(n)


def type_table(sig: Signature, individuals: Sequence[str], n: int, tbox: Iterable[GCI],
               aboxes: Sequence[Iterable[Assertion]], queries: Sequence[BoolCQ]):
    """Types realizable by small models, keyed by the individual mapping.

    Returns ``{ind_map: {abox_slot: {type: interpretation}}}`` where
    ``ind_map`` is a tuple of elements (one per sorted individual), slot
    ``None`` stands for "model of the TBox only" and slot ``i`` for "model
    of the TBox and ``aboxes[i]``"; a type is the frozenset of indices of
    satisfied ``queries``.
    """
    tbox = list(tbox)
    aboxes = [list(a) for a in aboxes]
    individuals = sorted(individuals)
    out: dict[tuple, dict[Optional[int], dict[frozenset, FiniteInterpretation]]] = {}
    for b in batches(sig, individuals, n):
        t_ok = b.satisfies_tbox(tbox)
        if not t_ok.any():
            continue
        code = np.zeros(b.size, dtype=np.int64)
        for j, q in enumerate(queries):
            code |= b.eval_query(q).astype(np.int64) << j
        icode = np.zeros(b.size, dtype=np.int64)
        for a in individuals:
            icode = icode * n + b.inds[a]
        slots: list[tuple[Optional[int], np.ndarray]] = [(None, t_ok)]
        slots += [(i, t_ok & b.satisfies_abox(a)) for i, a in enumerate(aboxes)]
        for slot, mask in slots:
            sel = np.flatnonzero(mask)
            if not len(sel):
                continue
            keys = icode[sel] * (1 << len(queries)) + code[sel]
            _, first = np.unique(keys, return_index=True)
            for j in sel[first]:
                imap = tuple(_digits(int(icode[j]), n, len(individuals)))
                ty = frozenset(p for p in range(len(queries)) if (int(code[j]) >> p) & 1)
                table = out.setdefault(imap, {}).setdefault(slot, {})
                if ty not in table:
                    table[ty] = b.decode(int(j))
    return out


def _digits(v: int, base: int, width: int) -> list[int]:
    out = []
    for _ in range(width):
        out.append(v % base)
        v //= base
    return out[::-1]
