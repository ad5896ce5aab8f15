"""Conjunctive queries, Boolean combinations of CQs and their semantics.

A :class:`CQ` is ``EX ys . atoms``; variables that are not existentially
bound are free.  A Boolean combination (:data:`BoolCQ`) is built from
:class:`QLeaf`, :class:`QNot` and :class:`QOr`; :func:`qand` desugars
conjunction.  Besides finite-model evaluation this module provides the
rolling-up of tree-shaped queries into ALC concepts and the purification
transformation that trades individual names for marker concepts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence, Union

from .dl import (
    GCI, And, Assertion, BOTTOM, Concept, ConceptAssertion, Exists, FiniteInterpretation,
    KnowledgeBase, Name, RoleAssertion, Signature, TOP,
)
from .errors import NonDistinctWitnesses, NotTreeShaped, UnsupportedQueryShape

__all__ = [
    "Var", "Term", "ConceptAtom", "RoleAtom", "Atom", "CQ", "QLeaf", "QNot", "QOr",
    "BoolCQ", "qand", "qand_all", "qor_all", "QTRUE", "QFALSE", "leaves", "free_vars",
    "query_individuals", "eval_cq", "eval_boolbcq", "eval_bool", "ground",
    "certain_answers", "roll_up", "Component", "decompose", "Purified", "purify",
    "depurify_abox", "is_boolean", "is_pure", "instantiate",
]

RESERVED = "__"


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self) -> str:
        return f"?{self.name}"


Term = Union[Var, str]


def _term_key(t: Term) -> tuple:
    return (0, t.name) if isinstance(t, Var) else (1, t)


def _term_text(t: Term, bound: frozenset) -> str:
    if isinstance(t, Var):
        return t.name if t in bound else f"?{t.name}"
    return t


@dataclass(frozen=True)
class ConceptAtom:
    concept: str
    term: Term

    @property
    def terms(self) -> tuple[Term, ...]:
        return (self.term,)

    def key(self) -> tuple:
        return (0, self.concept, _term_key(self.term))

    def rename(self, m: dict) -> "ConceptAtom":
        return ConceptAtom(self.concept, m.get(self.term, self.term))


@dataclass(frozen=True)
class RoleAtom:
    role: str
    source: Term
    target: Term

    @property
    def terms(self) -> tuple[Term, ...]:
        return (self.source, self.target)

    def key(self) -> tuple:
        return (1, self.role, _term_key(self.source), _term_key(self.target))

    def rename(self, m: dict) -> "RoleAtom":
        return RoleAtom(self.role, m.get(self.source, self.source), m.get(self.target, self.target))


Atom = Union[ConceptAtom, RoleAtom]


@dataclass(frozen=True)
class CQ:
    """``EX exist_vars . atoms``; atoms keep their written order."""

    exist_vars: tuple[Var, ...]
    atoms: tuple[Atom, ...]

    def __post_init__(self):
        used = {t for a in self.atoms for t in a.terms if isinstance(t, Var)}
        for v in self.exist_vars:
            if v not in used:
                raise ValueError(f"bound variable {v.name} does not occur in an atom")

    def variables(self) -> list[Var]:
        seen: dict[Var, None] = {}
        for a in self.atoms:
            for t in a.terms:
                if isinstance(t, Var):
                    seen.setdefault(t)
        return list(seen)

    def free_vars(self) -> list[Var]:
        bound = set(self.exist_vars)
        return [v for v in self.variables() if v not in bound]

    def individuals(self) -> list[str]:
        seen: dict[str, None] = {}
        for a in self.atoms:
            for t in a.terms:
                if not isinstance(t, Var):
                    seen.setdefault(t)
        return list(seen)

    def signature(self) -> Signature:
        return Signature(
            frozenset(a.concept for a in self.atoms if isinstance(a, ConceptAtom)),
            frozenset(a.role for a in self.atoms if isinstance(a, RoleAtom)),
        )

    def canonical(self) -> "CQ":
        """Rename bound variables by first occurrence and sort the atoms."""
        bound = set(self.exist_vars)
        free_names = {v.name for v in self.variables() if v not in bound}
        ren: dict[Var, Var] = {}
        n = 0
        for v in self.variables():
            if v in bound:
                while f"y{n}" in free_names:
                    n += 1
                ren[v] = Var(f"y{n}")
                n += 1
        atoms = sorted({a.rename(ren) for a in self.atoms}, key=lambda a: a.key())
        new_bound = [ren[v] for v in self.variables() if v in bound]
        return CQ(tuple(new_bound), tuple(atoms))

    def __str__(self) -> str:
        bound = frozenset(self.exist_vars)
        body = " & ".join(_atom_text(a, bound) for a in self.atoms) or "true"
        if not self.exist_vars:
            if len(self.atoms) > 1:
                return f"EX . {body}"
            return body
        return f"EX {' '.join(v.name for v in self.exist_vars)} . {body}"


def _atom_text(a: Atom, bound: frozenset) -> str:
    if isinstance(a, ConceptAtom):
        return f"{a.concept}({_term_text(a.term, bound)})"
    return f"{a.role}({_term_text(a.source, bound)},{_term_text(a.target, bound)})"


@dataclass(frozen=True)
class QLeaf:
    cq: CQ

    def __str__(self) -> str:
        return str(self.cq)


@dataclass(frozen=True)
class QNot:
    arg: "BoolCQ"

    def __str__(self) -> str:
        return f"~{_wrap(self.arg)}"


@dataclass(frozen=True)
class QOr:
    left: "BoolCQ"
    right: "BoolCQ"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} | {_wrap(self.right)}"


BoolCQ = Union[QLeaf, QNot, QOr]

QTRUE: BoolCQ = QLeaf(CQ((), ()))
QFALSE: BoolCQ = QNot(QTRUE)


def _wrap(q: BoolCQ) -> str:
    if isinstance(q, QLeaf) and (len(q.cq.atoms) <= 1 and not q.cq.exist_vars):
        return str(q)
    if isinstance(q, QNot):
        return str(q)
    return f"({q})"


def qand(left: BoolCQ, right: BoolCQ) -> BoolCQ:
    return QNot(QOr(_qneg(left), _qneg(right)))


def _qneg(q: BoolCQ) -> BoolCQ:
    return q.arg if isinstance(q, QNot) else QNot(q)


def qand_all(parts: Iterable[BoolCQ]) -> BoolCQ:
    items = list(parts)
    if not items:
        return QTRUE
    out = items[-1]
    for q in reversed(items[:-1]):
        out = qand(q, out)
    return out


def qor_all(parts: Iterable[BoolCQ]) -> BoolCQ:
    items = list(parts)
    if not items:
        return QFALSE
    out = items[-1]
    for q in reversed(items[:-1]):
        out = QOr(q, out)
    return out


def leaves(q: BoolCQ) -> list[CQ]:
    """Distinct CQ leaves in left-to-right order."""
    out: dict[CQ, None] = {}
    stack = [q]
    while stack:
        cur = stack.pop()
        if isinstance(cur, QLeaf):
            out.setdefault(cur.cq)
        elif isinstance(cur, QNot):
            stack.append(cur.arg)
        else:
            stack.extend((cur.right, cur.left))
    return list(out)


def free_vars(q: BoolCQ) -> list[Var]:
    """Free variables ordered by first occurrence."""
    seen: dict[Var, None] = {}
    for cq in leaves(q):
        for v in cq.free_vars():
            seen.setdefault(v)
    return list(seen)


def query_individuals(q: BoolCQ) -> list[str]:
    seen: dict[str, None] = {}
    for cq in leaves(q):
        for a in cq.individuals():
            seen.setdefault(a)
    return list(seen)


def is_boolean(q: BoolCQ) -> bool:
    return not free_vars(q)


def is_pure(q: BoolCQ) -> bool:
    return not query_individuals(q)


def _bool_signature(q: BoolCQ) -> Signature:
    out = Signature()
    for cq in leaves(q):
        out = out | cq.signature()
    return out


for _cls in (QLeaf, QNot, QOr):
    _cls.signature = _bool_signature  # type: ignore[attr-defined]


def eval_bool(q: BoolCQ, truth) -> bool:
    """Evaluate the Boolean structure given a truth function on leaves."""
    if isinstance(q, QLeaf):
        return truth(q.cq)
    if isinstance(q, QNot):
        return not eval_bool(q.arg, truth)
    return eval_bool(q.left, truth) or eval_bool(q.right, truth)


def map_leaves(q: BoolCQ, f) -> BoolCQ:
    if isinstance(q, QLeaf):
        return f(q.cq)
    if isinstance(q, QNot):
        return QNot(map_leaves(q.arg, f))
    return QOr(map_leaves(q.left, f), map_leaves(q.right, f))


# -- finite-model evaluation ------------------------------------------------


def _matches(i: FiniteInterpretation, atoms: Sequence[Atom], h: dict) -> Iterator[dict]:
    if not atoms:
        yield h
        return
    # pick the atom with the fewest unbound terms first
    best = min(range(len(atoms)), key=lambda j: sum(isinstance(t, Var) and t not in h for t in atoms[j].terms))
    atom = atoms[best]
    rest = atoms[:best] + atoms[best + 1:]

    def val(t: Term):
        if isinstance(t, Var):
            return h.get(t, _UNSET)
        return i.ind(t)

    if isinstance(atom, ConceptAtom):
        ext = i.concept_ext(atom.concept)
        v = val(atom.term)
        if v is not _UNSET:
            if v in ext:
                yield from _matches(i, rest, h)
            return
        for d in sorted(ext & i.domain, key=repr):
            yield from _matches(i, rest, {**h, atom.term: d})
        return
    s, t = val(atom.source), val(atom.target)
    for (d, e) in sorted(i.role_ext(atom.role), key=repr):
        if s is not _UNSET and d != s:
            continue
        if t is not _UNSET and e != t:
            continue
        nh = dict(h)
        if s is _UNSET:
            nh[atom.source] = d
        if t is _UNSET:
            if atom.target in nh and nh[atom.target] != e:
                continue
            nh[atom.target] = e
        yield from _matches(i, rest, nh)


_UNSET = object()


def eval_cq(i: FiniteInterpretation, cq: CQ, assignment: Optional[dict] = None) -> bool:
    """Whether some match of ``cq`` exists extending ``assignment``."""
    h = dict(assignment or {})
    missing = [v for v in cq.free_vars() if v not in h]
    if missing:
        raise ValueError(f"free variables without a value: {missing}")
    return next(_matches(i, cq.atoms, h), None) is not None


def eval_boolbcq(i: FiniteInterpretation, q: BoolCQ, assignment: Optional[dict] = None) -> bool:
    """Truth of a Boolean combination of CQs in a finite interpretation."""
    return eval_bool(q, lambda cq: eval_cq(i, cq, assignment))


# -- grounding and certain answers -------------------------------------------


def ground(q: BoolCQ, binding: dict[Var, str]) -> BoolCQ:
    """Replace free variables by individual names."""

    def sub(cq: CQ) -> BoolCQ:
        m = {v: binding[v] for v in cq.free_vars() if v in binding}
        if not m:
            return QLeaf(cq)
        return QLeaf(CQ(cq.exist_vars, tuple(a.rename(m) for a in cq.atoms)))

    return map_leaves(q, sub)


def certain_answers(k: KnowledgeBase, q: BoolCQ) -> set[tuple[str, ...]]:
    """All tuples over Ind(k) and Ind(q) that are certain answers of ``q``."""
    from .reasoner import entails

    fv = free_vars(q)
    if not fv:
        return {()} if entails(k, q) else set()
    inds = sorted({i for a in k.abox for i in a.individuals} | set(query_individuals(q)))
    out = set()
    for tup in itertools.product(inds, repeat=len(fv)):
        if entails(k, ground(q, dict(zip(fv, tup)))):
            out.add(tup)
    return out


def instantiate(cq: CQ, prefix: str, counter: Iterator[int]) -> list[Assertion]:
    """Assertions obtained by mapping every variable to a fresh individual."""
    ren = {v: f"{prefix}{next(counter)}" for v in cq.variables()}
    out: list[Assertion] = []
    for a in cq.atoms:
        if isinstance(a, ConceptAtom):
            out.append(ConceptAssertion(a.concept, ren.get(a.term, a.term)))
        else:
            out.append(RoleAssertion(a.role, ren.get(a.source, a.source), ren.get(a.target, a.target)))
    return out


# -- rolling up ---------------------------------------------------------------


class Component(NamedTuple):
    """One independent conjunct of a Boolean CQ.

    ``kind`` is ``"anchored"`` (concept at an individual), ``"pure"``
    (concept with a nonempty extension) or ``"role"`` (a ground role atom).
    """

    kind: str
    concept: Optional[Concept] = None
    anchor: Optional[str] = None
    atom: Optional[RoleAtom] = None


def _and_all(parts: list[Concept]) -> Concept:
    parts = sorted(set(parts))
    if not parts:
        return TOP
    out = parts[-1]
    for c in reversed(parts[:-1]):
        out = And(c, out)
    return out


def decompose(cq: CQ) -> list[Component]:
    """Split a Boolean CQ into rolled-up components.

    Raises :class:`NotTreeShaped` when a part of the query cannot be
    expressed as an ALC concept: cycles (including self-loops and parallel
    edges), edges pointing into a tree's root, or a tree touching more than
    one individual.
    """
    if cq.free_vars():
        raise UnsupportedQueryShape(f"query has free variables: {cq}")
    variables = cq.variables()
    parent = {v: v for v in variables}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a in cq.atoms:
        if isinstance(a, RoleAtom) and isinstance(a.source, Var) and isinstance(a.target, Var):
            parent[find(a.source)] = find(a.target)

    groups: dict[Var, list[Var]] = {}
    for v in variables:
        groups.setdefault(find(v), []).append(v)

    labels: dict[Term, list[str]] = {}
    out_edges: dict[Term, list[tuple[str, Var]]] = {}
    in_deg: dict[Var, int] = {v: 0 for v in variables}
    anchored_parts: dict[str, list[Concept]] = {}
    components: list[Component] = []
    for a in cq.atoms:
        if isinstance(a, ConceptAtom):
            labels.setdefault(a.term, []).append(a.concept)
            if not isinstance(a.term, Var):
                anchored_parts.setdefault(a.term, [])
            continue
        s, t = a.source, a.target
        if not isinstance(s, Var) and not isinstance(t, Var):
            components.append(Component("role", atom=a))
            continue
        if not isinstance(t, Var):
            raise NotTreeShaped(f"edge {a.role}({s.name},{t}) points into an individual: {cq}")
        if s == t:
            raise NotTreeShaped(f"self-loop on {t.name}: {cq}")
        out_edges.setdefault(s, []).append((a.role, t))
        in_deg[t] += 1

    def roll(v: Var, seen: set) -> Concept:
        if v in seen:
            raise NotTreeShaped(f"cycle through {v.name}: {cq}")
        seen.add(v)
        parts: list[Concept] = [Name(c) for c in labels.get(v, [])]
        parts += [Exists(r, roll(w, seen)) for (r, w) in out_edges.get(v, [])]
        return _and_all(parts)

    for root_rep, members in sorted(groups.items(), key=lambda kv: kv[1][0].name):
        n_edges = sum(in_deg[v] for v in members)
        roots = [v for v in members if in_deg[v] == 0]
        anchors = [(ind, r, v) for ind, es in out_edges.items() if not isinstance(ind, Var)
                   for (r, v) in es if v in set(members)]
        if any(in_deg[v] > 1 for v in members):
            raise NotTreeShaped(f"variable with two incoming edges: {cq}")
        if len(anchors) > 1:
            raise NotTreeShaped(f"tree touches individuals more than once: {cq}")
        if anchors:
            # the anchor edge counts as the root's incoming edge
            inner = n_edges - 1
            if inner != len(members) - 1:
                raise NotTreeShaped(f"cyclic component: {cq}")
            ind, r, v = anchors[0]
            seen: set = set()
            concept = roll(v, seen)
            if len(seen) != len(members):
                raise NotTreeShaped(f"cyclic component: {cq}")
            anchored_parts.setdefault(ind, []).append(Exists(r, concept))
        else:
            if len(roots) != 1 or n_edges != len(members) - 1:
                raise NotTreeShaped(f"cyclic component: {cq}")
            seen = set()
            concept = roll(roots[0], seen)
            if len(seen) != len(members):
                raise NotTreeShaped(f"cyclic component: {cq}")
            components.append(Component("pure", concept=concept))
    for ind in sorted(anchored_parts):
        parts = [Name(c) for c in labels.get(ind, [])] + anchored_parts[ind]
        components.append(Component("anchored", concept=_and_all(parts), anchor=ind))
    return components


def roll_up(q: CQ) -> tuple[Concept, Optional[str]]:
    """Translate a tree-shaped Boolean CQ into ``(concept, anchor)``.

    For a pure tree ``I |= q`` iff the concept's extension is nonempty; for
    an individual-rooted tree ``I |= q`` iff the anchor belongs to it.
    """
    comps = decompose(q)
    if len(comps) != 1 or comps[0].kind == "role":
        raise NotTreeShaped(f"not a single tree: {q}")
    return comps[0].concept, comps[0].anchor


# -- purification ---------------------------------------------------------------


class Purified(NamedTuple):
    tbox: frozenset
    query: BoolCQ
    signature: Signature
    individuals: tuple[str, ...]
    markers: tuple[str, ...]
    variables: tuple[Var, ...]


def _marker_names(m: int, taken: set[str]) -> list[str]:
    out = []
    n = 1
    while len(out) < m:
        name = f"__p{n}"
        if name not in taken:
            out.append(name)
        n += 1
    return out


def purify(t: frozenset, q: BoolCQ, s: Signature) -> Purified:
    """Replace the individuals of ``q`` by free variables and marker concepts.

    Individuals are processed in sorted order; the ``i``-th one gets the
    marker ``__p<i>`` and the free variable ``__x_<name>``.  A pure query
    comes back unchanged.
    """
    inds = tuple(sorted(query_individuals(q)))
    if not inds:
        return Purified(t, q, s, (), (), ())
    from .dl import signature_of

    taken = set(signature_of(list(t)).concepts) | set(s.concepts) | set(_bool_signature(q).concepts)
    markers = tuple(_marker_names(len(inds), taken))
    xs = tuple(Var(f"__x_{a}") for a in inds)
    ren = dict(zip(inds, xs))

    def sub(cq: CQ) -> BoolCQ:
        return QLeaf(CQ(cq.exist_vars, tuple(a.rename(ren) for a in cq.atoms)))

    phi_x = map_leaves(q, sub)
    phi_d = QLeaf(CQ((), tuple(ConceptAtom(m, x) for m, x in zip(markers, xs))))
    disjoint = {GCI(And(Name(markers[i]), Name(markers[j])), BOTTOM)
                for i in range(len(markers)) for j in range(i + 1, len(markers))}
    sig = Signature(s.concepts | frozenset(markers), s.roles)
    return Purified(frozenset(t) | disjoint, qand(phi_x, phi_d), sig, inds, markers, xs)


def depurify_abox(a_p: Iterable[Assertion], t: Sequence[str], markers: Sequence[str],
                  individuals: Sequence[str]) -> frozenset[Assertion]:
    """Turn a witness for the purified query back into one for the original.

    ``t`` is a certain answer of the purified query whose last ``m``
    components (``m = len(markers)``) witness the marker variables.  Marker
    assertions are dropped and those witnesses are renamed to the original
    individuals.
    """
    m = len(markers)
    if len(individuals) != m:
        raise ValueError("markers and individuals must align")
    a_p = frozenset(a_p)
    if m == 0:
        return a_p
    suffix = list(t[len(t) - m:])
    if len(set(suffix)) != m:
        raise NonDistinctWitnesses(f"marker witnesses are not distinct: {suffix}")
    ren = dict(zip(suffix, individuals))
    present = {i for a in a_p for i in a.individuals}
    clash = (present - set(suffix)) & set(individuals)
    if clash:
        raise ValueError(f"witness ABox already uses query individuals {sorted(clash)}")
    mk = set(markers)
    out = set()
    for a in a_p:
        if isinstance(a, ConceptAssertion):
            if a.concept in mk:
                continue
            out.add(ConceptAssertion(a.concept, ren.get(a.ind, a.ind)))
        else:
            out.add(RoleAssertion(a.role, ren.get(a.source, a.source), ren.get(a.target, a.target)))
    return frozenset(out)
