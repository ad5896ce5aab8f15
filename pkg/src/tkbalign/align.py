"""Cost-optimal alignment of temporal knowledge bases with a TCQ.

A TKB modification is a sequence of atoms ``fix[mu]`` (edit the next ABox
with ``mu``), ``add[mu]`` (insert ``mu`` applied to the empty ABox) and
``del`` (drop the next ABox).  Solutions are found in three steps:

* the repair-template DFA reads abstract letters ``del``, ``(fix, U)`` and
  ``(add, U)`` where ``U`` is a set of types; its states pair the set of
  parity-automaton states reachable so far with the index of the next
  input ABox, and a state is final once every input ABox is consumed and
  no reached state can still be extended into a counterexample,
* the minimal-instantiation graph labels each transition with a cheapest
  concrete atom (an atemporal alignment problem, see :func:`kb_align`),
* Dijkstra finds a cheapest accepted path, whose labels form the answer.

A letter ``(fix, U)`` is instantiated by an ABox whose realized types all
lie in ``U``.  Since the reached state set only grows with ``U`` this
loses no solutions, and it is exactly what entailment of
``OR_{t in U} chi(t) AND AND_{t not in U} not chi(t)`` expresses.
"""

from __future__ import annotations

import heapq
import itertools
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Optional, Sequence, Union

from .automata.dpa import DPA, dpa_accepting_set, ltl_to_dpa
from .cq import BoolCQ, QNot, qand, qand_all, qor_all
from .dl import TOP, Assertion, GCI, KnowledgeBase, Signature, individuals_of, signature_of
from .errors import InconsistentIntermediate, InconsistentKB
from .kbalign import ABoxOperation, CostModel, apply_abox_mod, cost_abox_mod, initial_witness, kb_align, rem
from .reasoner import concept_satisfiable, kb_consistent, satisfiable_with
from .temporal import (
    TCQ, PropAbstraction, TemporalKB, chi, consistent_types, prop_abstraction, t_reduct,
)

__all__ = [
    "Fix", "Add", "Del", "TKBAtom", "apply_tkb_mod", "cost_tkb_mod", "pad", "atom_cost",
    "realized_types", "type_set_query", "realizable_letter", "RTDFA", "build_rtdfa",
    "abstraction_of", "MinInstGraph", "Edge", "build_mig", "Path", "shortest_accepted_path",
    "Alignment", "tkb_align", "check_tqe", "TQEResult", "tqe", "letter_text",
]

_EPS = 1e-9


@dataclass(frozen=True)
class Fix:
    mod: tuple[ABoxOperation, ...] = ()

    def __str__(self) -> str:
        return f"fix[{_mod_text(self.mod)}]"


@dataclass(frozen=True)
class Add:
    mod: tuple[ABoxOperation, ...] = ()

    def __str__(self) -> str:
        return f"add[{_mod_text(self.mod)}]"


@dataclass(frozen=True)
class Del:
    def __str__(self) -> str:
        return "del"


TKBAtom = Union[Fix, Add, Del]


def _mod_text(mod: Sequence[ABoxOperation]) -> str:
    return "; ".join(str(op) for op in mod)


# -- the edit calculus on ABox sequences ---------------------------------------


def apply_tkb_mod(h: Iterable[TKBAtom], lam: Sequence[Iterable[Assertion]]) -> tuple[frozenset, ...]:
    """The ABox sequence obtained by applying ``h`` to ``lam``.

    ``fix`` and ``del`` consume the next input ABox and do nothing once the
    input is exhausted; ``add`` emits a new ABox; unconsumed ABoxes are kept.
    """
    rest = [frozenset(a) for a in lam]
    out: list[frozenset] = []
    pos = 0
    for atom in h:
        if isinstance(atom, Fix):
            if pos < len(rest):
                out.append(apply_abox_mod(atom.mod, rest[pos]))
                pos += 1
        elif isinstance(atom, Add):
            out.append(apply_abox_mod(atom.mod, frozenset()))
        elif pos < len(rest):
            pos += 1
    return tuple(out) + tuple(rest[pos:])


def atom_cost(atom: TKBAtom, source: Optional[Iterable[Assertion]], cm: CostModel) -> float:
    """Cost of one atom; ``source`` is the ABox it consumes (``None`` if none is left)."""
    if isinstance(atom, Add):
        return cm.abox_unit + cost_abox_mod(atom.mod, cm)
    if source is None:
        return 0.0
    if isinstance(atom, Fix):
        return cost_abox_mod(atom.mod, cm)
    return sum(cm.cost(rem(x)) for x in source) + cm.abox_unit


def cost_tkb_mod(h: Iterable[TKBAtom], lam: Sequence[Iterable[Assertion]], cm: CostModel = CostModel()) -> float:
    total = 0.0
    pos = 0
    for atom in h:
        source = lam[pos] if pos < len(lam) else None
        total += atom_cost(atom, source, cm)
        if not isinstance(atom, Add) and source is not None:
            pos += 1
    return float(total)


def pad(h: Iterable[TKBAtom], n_aboxes: int) -> tuple[TKBAtom, ...]:
    """Append ``fix[]`` until fixes and deletions cover ``n_aboxes`` ABoxes."""
    h = tuple(h)
    consuming = sum(1 for x in h if not isinstance(x, Add))
    return h + (Fix(),) * max(0, n_aboxes - consuming)


# -- types and letters ----------------------------------------------------------


def realized_types(t: Iterable[GCI], a: Iterable[Assertion], pa: PropAbstraction) -> frozenset[frozenset]:
    """Types realized by some model of ``(t, a)``."""
    t, a = frozenset(t), frozenset(a)
    if not kb_consistent(KnowledgeBase(t, a)):
        raise InconsistentKB("the knowledge base has no model")
    return frozenset(ty for ty in consistent_types(t, pa) if satisfiable_with(t, chi(ty, pa.props, pa), abox=a))


def type_set_query(ups: Iterable[frozenset], pa: PropAbstraction, universe: Iterable[frozenset]) -> BoolCQ:
    """``OR_{t in ups} chi(t) AND AND_{t in universe - ups} not chi(t)``."""
    ups = frozenset(ups)
    inside = [chi(ty, pa.props, pa) for ty in universe if ty in ups]
    outside = [QNot(chi(ty, pa.props, pa)) for ty in universe if ty not in ups]
    return qand(qor_all(inside), qand_all(outside))


def realizable_letter(t: Iterable[GCI], s: Signature, ups: Iterable[frozenset], pa: PropAbstraction) -> bool:
    """Whether some ABox over ``s`` is consistent with ``t`` and entails the type-set query."""
    ups = frozenset(ups)
    if not ups:
        return False
    t = frozenset(t)
    q = type_set_query(ups, pa, consistent_types(t, pa))
    return initial_witness(t, q, s) is not None


def _ups_key(ups: frozenset) -> tuple:
    return (len(ups), sorted(tuple(sorted(ty)) for ty in ups))


def letter_text(letter: tuple) -> str:
    if letter[0] == "del":
        return "del"
    body = ", ".join("{" + ",".join(sorted(ty)) + "}" for ty in sorted(letter[1], key=lambda x: (len(x), sorted(x))))
    return f"{letter[0]}[{body}]"


# -- repair-template DFA ---------------------------------------------------------


@dataclass
class RTDFA:
    """Reachable part of the repair-template DFA.

    States are ``(Z, i)`` pairs numbered in breadth-first order; letters are
    ``("del",)``, ``("fix", U)`` and ``("add", U)``.  Missing transitions
    lead to an implicit rejecting sink.
    """

    gamma_tkb: TemporalKB
    abstraction: PropAbstraction
    reduct: DPA
    accepting: frozenset[int]
    letters: tuple[tuple, ...]
    states: list[tuple[frozenset, int]]
    transitions: dict[int, list[tuple[tuple, int]]]
    final: frozenset[int]

    @property
    def ell(self) -> int:
        return self.gamma_tkb.ell

    def index(self, state: tuple[frozenset, int]) -> int:
        return self.states.index(state)

    def step(self, s: int, letter: tuple) -> Optional[int]:
        for a, t in self.transitions.get(s, ()):
            if a == letter:
                return t
        return None


def _advance(p: DPA, z: frozenset, ups: frozenset) -> frozenset:
    return frozenset(p.step(q, ty) for q in z for ty in ups)


def _letters(t: frozenset, pa: PropAbstraction, s: Signature) -> list[frozenset]:
    """Realizable type sets; supersets of realizable sets are realizable."""
    types = consistent_types(t, pa)
    out: list[frozenset] = []
    for k in range(1, len(types) + 1):
        for combo in itertools.combinations(types, k):
            ups = frozenset(combo)
            if any(r <= ups for r in out) or realizable_letter(t, s, ups, pa):
                out.append(ups)
    return sorted(out, key=_ups_key)


def build_rtdfa(g: TemporalKB, q: Union[TCQ, PropAbstraction]) -> RTDFA:
    pa = q if isinstance(q, PropAbstraction) else prop_abstraction(q)
    t = frozenset(g.tbox)
    reduct = t_reduct(ltl_to_dpa(pa.ltl, pa.props), t, pa)
    acc = dpa_accepting_set(reduct)
    sig = signature_of(list(t)) | _query_signature(pa)
    ups_list = _letters(t, pa, sig) if concept_satisfiable(TOP, t) else []
    letters: list[tuple] = [("del",)] + [("fix", u) for u in ups_list] + [("add", u) for u in ups_list]
    end = g.ell + 1
    start = (frozenset({reduct.initial}), 0)
    states = [start]
    index = {start: 0}
    transitions: dict[int, list[tuple[tuple, int]]] = {}
    j = 0
    while j < len(states):
        z, i = states[j]
        out = []
        for letter in letters:
            if letter[0] == "del":
                if i >= end:
                    continue
                target = (z, i + 1)
            elif letter[0] == "fix":
                if i >= end:
                    continue
                target = (_advance(reduct, z, letter[1]), i + 1)
            else:
                target = (_advance(reduct, z, letter[1]), i)
            if target not in index:
                index[target] = len(states)
                states.append(target)
            out.append((letter, index[target]))
        transitions[j] = out
        j += 1
    final = frozenset(k for k, (z, i) in enumerate(states) if i == end and not (z & acc))
    return RTDFA(g, pa, reduct, acc, tuple(letters), states, transitions, final)


def _query_signature(pa: PropAbstraction) -> Signature:
    out = Signature()
    for cq in pa.queries:
        out = out | cq.signature()
    return out


def abstraction_of(h: Iterable[TKBAtom], g: TemporalKB, pa: PropAbstraction) -> tuple[tuple, ...]:
    """The letter sequence describing ``h`` applied to ``g``.

    Each produced ABox is described by its exact set of realized types.
    ``fix`` and ``del`` atoms past the last input ABox change nothing and
    produce no letter.
    """
    h = pad(h, len(g.aboxes))
    word: list[tuple] = []
    pos = 0
    for atom in h:
        if isinstance(atom, Del):
            if pos < len(g.aboxes):
                word.append(("del",))
                pos += 1
            continue
        if isinstance(atom, Fix):
            if pos >= len(g.aboxes):
                continue
            abox = apply_abox_mod(atom.mod, g.aboxes[pos])
            pos += 1
        else:
            abox = apply_abox_mod(atom.mod, frozenset())
        try:
            ups = realized_types(g.tbox, abox, pa)
        except InconsistentKB:
            raise InconsistentIntermediate(f"{atom} yields an ABox inconsistent with the TBox") from None
        word.append((atom.__class__.__name__.lower(), ups))
    return tuple(word)


def _run_word(d_reduct: DPA, acc: frozenset, word: Sequence[tuple], n_aboxes: int) -> bool:
    z = frozenset({d_reduct.initial})
    i = 0
    for letter in word:
        if letter[0] == "del":
            i = min(i + 1, n_aboxes)
        elif letter[0] == "fix":
            z = _advance(d_reduct, z, letter[1])
            i = min(i + 1, n_aboxes)
        else:
            z = _advance(d_reduct, z, letter[1])
    return i == n_aboxes and not (z & acc)


# -- minimal-instantiation graph ----------------------------------------------------


class Edge(NamedTuple):
    source: int
    target: int
    letter: tuple
    atom: TKBAtom
    weight: float


@dataclass
class MinInstGraph:
    """Transitions of an RT-DFA labelled with cheapest concrete atoms.

    Edges are computed on demand; labels depend only on the letter and the
    index of the consumed ABox, so they are shared between states.
    """

    dfa: RTDFA
    cm: CostModel
    _labels: dict = field(default_factory=dict, repr=False)
    _edges: dict = field(default_factory=dict, repr=False)

    @cached_property
    def _avoid(self) -> frozenset:
        g = self.dfa.gamma_tkb
        inds = set(individuals_of(a for abox in g.aboxes for a in abox))
        for cq in self.dfa.abstraction.queries:
            inds |= set(cq.individuals())
        return frozenset(inds)

    def _label(self, letter: tuple, i: int) -> Optional[tuple[TKBAtom, float]]:
        key = (letter, i if letter[0] != "add" else None)
        if key in self._labels:
            return self._labels[key]
        g = self.dfa.gamma_tkb
        if letter[0] == "del":
            atom = Del()
            result = (atom, atom_cost(atom, g.aboxes[i], self.cm))
        else:
            source = g.aboxes[i] if letter[0] == "fix" else frozenset()
            pa = self.dfa.abstraction
            q = type_set_query(letter[1], pa, consistent_types(g.tbox, pa))
            found = kb_align(KnowledgeBase(g.tbox, source), q, self.cm, avoid=self._avoid)
            if found is None:
                result = None
            else:
                mod, _ = found
                atom = Fix(mod) if letter[0] == "fix" else Add(mod)
                result = (atom, atom_cost(atom, source, self.cm))
        self._labels[key] = result
        return result

    def edges(self, s: int) -> list[Edge]:
        if s not in self._edges:
            out = []
            _, i = self.dfa.states[s]
            for letter, t in self.dfa.transitions.get(s, ()):
                lab = self._label(letter, i)
                if lab is not None:
                    out.append(Edge(s, t, letter, lab[0], lab[1]))
            self._edges[s] = out
        return self._edges[s]

    def all_edges(self) -> list[Edge]:
        return [e for s in range(len(self.dfa.states)) for e in self.edges(s)]


def build_mig(d: RTDFA, g: Optional[TemporalKB] = None, cm: CostModel = CostModel()) -> MinInstGraph:
    if g is not None and g != d.gamma_tkb:
        raise ValueError("the RT-DFA was built for a different TKB")
    return MinInstGraph(d, cm)


class Path(NamedTuple):
    nodes: tuple[int, ...]
    edges: tuple[Edge, ...]
    cost: float


def shortest_accepted_path(m: MinInstGraph, d: Optional[RTDFA] = None) -> Optional[Path]:
    """A cheapest path from the initial state to a final state, or ``None``.

    Ties are broken by path length, then by the sequence of visited state
    numbers.
    """
    d = d if d is not None else m.dfa
    counter = itertools.count()
    heap = [((0.0, 0, (0,)), next(counter), ())]
    settled: set[int] = set()
    while heap:
        (cost, length, nodes), _, edges = heapq.heappop(heap)
        s = nodes[-1]
        if s in settled:
            continue
        settled.add(s)
        if s in d.final:
            return Path(nodes, edges, cost)
        for e in m.edges(s):
            if e.target in settled:
                continue
            key = (round(cost + e.weight, 9), length + 1, nodes + (e.target,))
            heapq.heappush(heap, (key, next(counter), edges + (e,)))
    return None


# -- entailment and alignment ------------------------------------------------------


class TQEResult(NamedTuple):
    entailed: bool
    vacuous: bool  # true when some ABox (or the TBox) has no model


def tqe(g: TemporalKB, q: Union[TCQ, PropAbstraction]) -> TQEResult:
    pa = q if isinstance(q, PropAbstraction) else prop_abstraction(q)
    t = frozenset(g.tbox)
    if not all(kb_consistent(KnowledgeBase(t, a)) for a in g.aboxes) or not concept_satisfiable(TOP, t):
        return TQEResult(True, True)
    reduct = t_reduct(ltl_to_dpa(pa.ltl, pa.props), t, pa)
    word = abstraction_of((), g, pa)
    return TQEResult(_run_word(reduct, dpa_accepting_set(reduct), word, len(g.aboxes)), False)


def check_tqe(g: TemporalKB, q: Union[TCQ, PropAbstraction]) -> bool:
    """Whether every model of ``g`` satisfies ``q``.

    A TKB with an inconsistent ABox entails everything; this case is
    reported with a warning.
    """
    res = tqe(g, q)
    if res.vacuous:
        warnings.warn("the temporal knowledge base has no model; entailment holds vacuously", stacklevel=2)
    return res.entailed


class Alignment(NamedTuple):
    modification: tuple[TKBAtom, ...]
    cost: float
    aligned: TemporalKB
    letters: tuple[tuple, ...]


def tkb_align(g: TemporalKB, q: TCQ, cm: CostModel = CostModel()) -> Optional[Alignment]:
    """A cheapest modification after which ``g`` is consistent and entails ``q``.

    Returns ``None`` when no such modification exists.
    """
    g = TemporalKB.of(g.tbox, g.aboxes)
    pa = prop_abstraction(q)
    if not concept_satisfiable(TOP, g.tbox):
        return None
    d = build_rtdfa(g, pa)
    m = build_mig(d, g, cm)
    path = shortest_accepted_path(m, d)
    if path is None:
        return None
    h = tuple(e.atom for e in path.edges)
    aligned = TemporalKB(g.tbox, apply_tkb_mod(h, g.aboxes))
    cost = cost_tkb_mod(h, g.aboxes, cm)
    if abs(cost - path.cost) > 1e-6:  # pragma: no cover - edge weights are atom costs
        raise RuntimeError(f"path weight {path.cost} differs from modification cost {cost}")
    check = tqe(aligned, pa)
    if check.vacuous or not check.entailed:  # pragma: no cover - guaranteed by construction
        raise RuntimeError("the computed modification does not entail the query")
    return Alignment(h, cost, aligned, tuple(e.letter for e in path.edges))
