"""Decision procedures for ALC knowledge bases and Boolean CQ combinations.

The core is a tableau over NNF labels with subset blocking; GCIs are
internalized as ``Top subclassof nnf(not C or D)``.  Every label entry
carries the set of branching points it depends on, which lets a clash
skip branches that did not contribute to it (dependency-directed
backjumping).

Query reasoning reduces to satisfiability of conjunctions of CQ literals:
positive CQs are instantiated with fresh individuals, negated ones are
rolled up into concepts (see :func:`tkbalign.cq.decompose`).  Results of
the satisfiability layer are memoized because the alignment engines ask
the same questions many times.
"""

from __future__ import annotations

import itertools
import sys
from functools import lru_cache
from typing import Iterable, Optional

from .cq import (
    CQ, BoolCQ, QLeaf, QNot, decompose, free_vars, instantiate,
)
from .dl import (
    And, Assertion, Bottom, Concept, ConceptAssertion, Exists, Forall, GCI, KnowledgeBase,
    Name, Not, Or, RoleAssertion, Signature, Top, negate, nnf, subconcepts,
)
from .errors import UnsatisfiableTBox, UnsupportedQueryShape

__all__ = [
    "concept_satisfiable", "kb_consistent", "entails", "satisfiable_with",
    "canonical_abox", "closure_types", "internalize", "sat_literals", "bounded_entails",
    "Entailed", "CounterModel",
]

if sys.getrecursionlimit() < 5000:
    sys.setrecursionlimit(5000)

_ANON = "__root"


class _Clash(Exception):
    def __init__(self, deps: frozenset):
        self.deps = deps


class _Graph:
    __slots__ = ("labels", "succ", "parent", "generated", "done", "next_branch")

    def __init__(self):
        self.labels: list[dict[Concept, frozenset]] = []
        self.succ: list[list[tuple[str, int, frozenset]]] = []
        self.parent: list[int] = []
        self.generated: list[bool] = []
        self.done: list[set] = []
        self.next_branch = 0

    def copy(self) -> "_Graph":
        g = _Graph.__new__(_Graph)
        g.labels = [dict(lab) for lab in self.labels]
        g.succ = [list(s) for s in self.succ]
        g.parent = list(self.parent)
        g.generated = list(self.generated)
        g.done = [set(d) for d in self.done]
        g.next_branch = self.next_branch
        return g

    def new_node(self, parent: int, generated: bool) -> int:
        self.labels.append({})
        self.succ.append([])
        self.parent.append(parent)
        self.generated.append(generated)
        self.done.append(set())
        return len(self.labels) - 1


def _complement(c: Concept) -> Optional[Concept]:
    if isinstance(c, Name):
        return Not(c)
    if isinstance(c, Not):
        return c.arg
    return None


def _add(g: _Graph, x: int, c: Concept, deps: frozenset) -> None:
    todo = [(x, c, deps)]
    while todo:
        x, c, d = todo.pop()
        lab = g.labels[x]
        if c in lab:
            continue
        lab[c] = d
        if isinstance(c, Bottom):
            raise _Clash(d)
        if isinstance(c, (Name, Not)):
            comp = _complement(c)
            if comp in lab:
                raise _Clash(d | lab[comp])
        elif isinstance(c, And):
            todo.append((x, c.right, d))
            todo.append((x, c.left, d))
        elif isinstance(c, Forall):
            for (r, y, e) in g.succ[x]:
                if r == c.role:
                    todo.append((y, c.filler, d | e))


def _add_edge(g: _Graph, x: int, role: str, y: int, deps: frozenset) -> None:
    g.succ[x].append((role, y, deps))
    for c, d in list(g.labels[x].items()):
        if isinstance(c, Forall) and c.role == role:
            _add(g, y, c.filler, d | deps)


def _blocked(g: _Graph) -> set[int]:
    out: set[int] = set()
    for y in range(len(g.labels)):
        if not g.generated[y]:
            continue
        p = g.parent[y]
        if p in out:
            out.add(y)
            continue
        keys = g.labels[y].keys()
        while p >= 0 and g.generated[p]:
            if keys <= g.labels[p].keys():
                out.add(y)
                break
            p = g.parent[p]
    return out


def _expand(g: _Graph, universal: tuple[Concept, ...]) -> Optional[frozenset]:
    """Run the tableau to completion; ``None`` means open (satisfiable)."""
    try:
        while True:
            pick = _next_disjunction(g)
            if pick is not None:
                return _branch(g, universal, *pick)
            if not _apply_exists(g, universal):
                return None
    except _Clash as clash:
        return clash.deps


def _next_disjunction(g: _Graph):
    """Find a disjunction to branch on, propagating forced disjuncts first."""
    changed = True
    while changed:
        changed = False
        for x, lab in enumerate(g.labels):
            for c, d in list(lab.items()):
                if not isinstance(c, Or) or c in g.done[x]:
                    continue
                if c.left in lab or c.right in lab:
                    g.done[x].add(c)
                    continue
                comp_l, comp_r = _complement(c.left), _complement(c.right)
                if comp_l is not None and comp_l in lab:
                    g.done[x].add(c)
                    _add(g, x, c.right, d | lab[comp_l])
                    changed = True
                    continue
                if comp_r is not None and comp_r in lab:
                    g.done[x].add(c)
                    _add(g, x, c.left, d | lab[comp_r])
                    changed = True
                    continue
                return x, c, d
    return None


def _branch(g: _Graph, universal, x: int, c: Or, d: frozenset) -> Optional[frozenset]:
    b = g.next_branch
    first = g.copy()
    first.next_branch = b + 1
    first.done[x].add(c)
    try:
        _add(first, x, c.left, d | {b})
        r1 = _expand(first, universal)
    except _Clash as clash:
        r1 = clash.deps
    if r1 is None:
        return None
    if b not in r1:
        return r1
    second = g
    second.next_branch = b + 1
    second.done[x].add(c)
    try:
        _add(second, x, c.right, d | (r1 - {b}))
        return _expand(second, universal)
    except _Clash as clash:
        return clash.deps


def _apply_exists(g: _Graph, universal) -> bool:
    blocked = _blocked(g)
    created = False
    for x in range(len(g.labels)):
        if x in blocked:
            continue
        for c, d in list(g.labels[x].items()):
            if not isinstance(c, Exists) or c in g.done[x]:
                continue
            g.done[x].add(c)
            if any(r == c.role and c.filler in g.labels[y] for (r, y, _) in g.succ[x]):
                continue
            y = g.new_node(x, True)
            for u in universal:
                _add(g, y, u, d)
            _add(g, y, c.filler, d)
            _add_edge(g, x, c.role, y, d)
            created = True
    return created


@lru_cache(maxsize=200_000)
def _satisfiable(universal: frozenset, labels: frozenset, edges: frozenset) -> bool:
    """Open-tableau test for named nodes with initial labels and edges.

    ``universal`` holds NNF concepts that every node must satisfy,
    ``labels`` pairs (individual, NNF concept) and ``edges`` triples
    (role, source, target).
    """
    uni = tuple(sorted(universal))
    names = sorted({a for a, _ in labels} | {a for _, a, _ in edges} | {b for _, _, b in edges})
    if not names:
        names = [_ANON]
    g = _Graph()
    index = {}
    try:
        for a in names:
            index[a] = g.new_node(-1, False)
            for u in uni:
                _add(g, index[a], u, frozenset())
        for a, c in sorted(labels, key=lambda p: (p[0], p[1].key)):
            _add(g, index[a], c, frozenset())
        for r, a, b in sorted(edges):
            _add_edge(g, index[a], r, index[b], frozenset())
    except _Clash:
        return False
    return _expand(g, uni) is None


@lru_cache(maxsize=4096)
def internalize(tbox: frozenset) -> frozenset:
    """NNF concepts that every element must satisfy, one per GCI."""
    out = set()
    for g in tbox:
        c = nnf(Or(Not(g.lhs), g.rhs))
        if not isinstance(c, Top):
            out.add(c)
    return frozenset(out)


def concept_satisfiable(c: Concept, t: Iterable[GCI]) -> bool:
    """Whether ``c`` has a nonempty extension in some model of ``t``."""
    return _satisfiable(internalize(frozenset(t)), frozenset({(_ANON, nnf(c))}), frozenset())


def _abox_parts(abox: Iterable[Assertion]):
    labels = set()
    edges = set()
    for a in abox:
        if isinstance(a, ConceptAssertion):
            labels.add((a.ind, Name(a.concept)))
        else:
            edges.add((a.role, a.source, a.target))
    return labels, edges


def _negation_options(cq: CQ) -> list[tuple]:
    """Ways of falsifying ``cq``: one option per independent component."""
    opts = []
    for comp in decompose(cq):
        if comp.kind == "anchored":
            opts.append(("label", comp.anchor, negate(comp.concept)))
        elif comp.kind == "pure":
            opts.append(("global", negate(comp.concept)))
        else:
            a = comp.atom
            opts.append(("norole", a.role, a.source, a.target))
    return opts


@lru_cache(maxsize=200_000)
def sat_literals(tbox: frozenset, abox: frozenset, literals: frozenset) -> bool:
    """Satisfiability of a KB together with a conjunction of CQ literals.

    ``literals`` is a set of ``(cq, polarity)`` pairs over Boolean CQs.
    """
    universal = set(internalize(tbox))
    labels, edges = _abox_parts(abox)
    counter = itertools.count()
    negatives = []
    for cq, positive in sorted(literals, key=lambda p: (str(p[0]), p[1])):
        if positive:
            extra_l, extra_e = _abox_parts(instantiate(cq, "__v", counter))
            labels |= extra_l
            edges |= extra_e
        else:
            opts = _negation_options(cq)
            if not opts:
                return False
            negatives.append(opts)
    for choice in itertools.product(*negatives):
        lab = set(labels)
        uni = set(universal)
        ok = True
        for opt in choice:
            if opt[0] == "label":
                lab.add((opt[1], opt[2]))
            elif opt[0] == "global":
                uni.add(opt[1])
            elif (opt[1], opt[2], opt[3]) in edges:
                ok = False
                break
        if not ok:
            continue
        uni.discard(Top())
        if _satisfiable(frozenset(uni), frozenset(lab), frozenset(edges)):
            return True
    return False


def _eval3(q: BoolCQ, asg: dict) -> Optional[bool]:
    if isinstance(q, QLeaf):
        return asg.get(q.cq)
    if isinstance(q, QNot):
        v = _eval3(q.arg, asg)
        return None if v is None else not v
    left = _eval3(q.left, asg)
    if left is True:
        return True
    right = _eval3(q.right, asg)
    if right is True:
        return True
    if left is False and right is False:
        return False
    return None


def _leaves(q: BoolCQ) -> list[CQ]:
    from .cq import leaves

    return leaves(q)


def _check_boolean(q: BoolCQ) -> None:
    fv = free_vars(q)
    if fv:
        raise UnsupportedQueryShape(f"query has free variables {[v.name for v in fv]}")


def _sat_bool(tbox: frozenset, abox: frozenset, q: BoolCQ) -> bool:
    ls = _leaves(q)
    asg: dict[CQ, bool] = {}

    def search(i: int) -> bool:
        v = _eval3(q, asg)
        if v is False:
            return False
        if v is True:
            lits = frozenset((cq, val) for cq, val in asg.items())
            return sat_literals(tbox, abox, lits)
        cq = ls[i]
        for val in (True, False):
            asg[cq] = val
            if search(i + 1):
                del asg[cq]
                return True
        del asg[cq]
        return False

    return search(0)


def satisfiable_with(t: Iterable[GCI], q: BoolCQ, abox: Iterable[Assertion] = ()) -> bool:
    """Whether some model of ``t`` (and ``abox``) satisfies ``q``."""
    _check_boolean(q)
    return _sat_bool(frozenset(t), frozenset(abox), q)


def kb_consistent(k: KnowledgeBase) -> bool:
    return sat_literals(frozenset(k.tbox), frozenset(k.abox), frozenset())


def entails(k: KnowledgeBase, q: BoolCQ) -> bool:
    """Whether every model of ``k`` satisfies the Boolean query ``q``."""
    _check_boolean(q)
    return not _sat_bool(frozenset(k.tbox), frozenset(k.abox), QNot(q))


# -- canonical ABox -------------------------------------------------------------


def _closure(universal: frozenset, names: Iterable[str]) -> set[Concept]:
    out: set[Concept] = set()
    todo = list(universal) + [Name(a) for a in names]
    while todo:
        c = todo.pop()
        for sub in subconcepts(c):
            if sub not in out:
                out.add(sub)
                todo.append(negate(sub))
    return out


def _type_value(c: Concept, val: dict) -> bool:
    if isinstance(c, (Name, Exists)):
        return val[c]
    if isinstance(c, Top):
        return True
    if isinstance(c, Bottom):
        return False
    if isinstance(c, Not):
        return not val[c.arg]
    if isinstance(c, And):
        return _type_value(c.left, val) and _type_value(c.right, val)
    if isinstance(c, Or):
        return _type_value(c.left, val) or _type_value(c.right, val)
    if isinstance(c, Forall):
        return not val[Exists(c.role, negate(c.filler))]
    raise TypeError(c)  # pragma: no cover


@lru_cache(maxsize=512)
def closure_types(t: frozenset, concepts: frozenset) -> tuple[frozenset, ...]:
    """All closure types that are satisfiable with respect to ``t``.

    A type fixes the truth of every concept name and existential in the
    NNF closure of the internalized TBox extended with ``concepts``.
    """
    universal = internalize(t)
    closure = _closure(universal, concepts)
    atoms = sorted(c for c in closure if isinstance(c, (Name, Exists)))
    out = []
    for bits in itertools.product((True, False), repeat=len(atoms)):
        val = dict(zip(atoms, bits))
        if not all(_type_value(u, val) for u in universal):
            continue
        lits = frozenset((_ANON, a if b else negate(a)) for a, b in zip(atoms, bits))
        if _satisfiable(universal, lits, frozenset()):
            out.append(frozenset(c for c in closure if _type_value(c, val)))
    return tuple(out)


def canonical_abox(t: Iterable[GCI], s: Signature, prefix: str = "__c") -> frozenset[Assertion]:
    """A consistent Sigma-ABox into which every consistent Sigma-ABox maps.

    One individual per satisfiable closure type; ``A(u)`` for the concept
    names of ``s`` in the type, ``r(u, v)`` for each role of ``s`` whenever
    the type of ``v`` satisfies every ``forall r.D`` of the type of ``u``.
    """
    t = frozenset(t)
    types = closure_types(t, frozenset(s.concepts))
    if not types:
        raise UnsatisfiableTBox("the TBox has no model")
    names = [f"{prefix}{i}" for i in range(len(types))]
    out: set[Assertion] = set()
    for u, tau in zip(names, types):
        for a in s.concepts:
            if Name(a) in tau:
                out.add(ConceptAssertion(a, u))
    for r in sorted(s.roles):
        needs = [[c.filler for c in tau if isinstance(c, Forall) and c.role == r] for tau in types]
        for u, req in zip(names, needs):
            for v, tau2 in zip(names, types):
                if all(d in tau2 for d in req):
                    out.add(RoleAssertion(r, u, v))
    return frozenset(out)


def canonical_individuals(t: Iterable[GCI], s: Signature, prefix: str = "__c") -> list[str]:
    return [f"{prefix}{i}" for i in range(len(closure_types(frozenset(t), frozenset(s.concepts))))]


from .bounded import CounterModel, Entailed, bounded_entails  # noqa: E402
