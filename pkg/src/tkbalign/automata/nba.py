"""LTL to Büchi automata.

The translation is the usual on-the-fly tableau: an automaton state is a
set of NNF obligations, and expanding it yields transitions labelled with
the literals that must hold now, the obligations for the next step and the
until-formulas that were postponed.  This gives a generalized Büchi
automaton with one acceptance set per until-subformula (on transitions);
a counter then turns it into an ordinary state-based Büchi automaton.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Optional

import networkx as nx

from .ltl import LTL, LNot, LOr, LTrue, Next, Prop, Until, atoms

__all__ = ["NBA", "ltl_to_nba", "to_nnf", "all_letters", "nba_accepts_lasso"]


def all_letters(props: Iterable) -> tuple[frozenset, ...]:
    """Every subset of ``props`` in canonical order (by size, then sorted)."""
    ps = sorted(props, key=str)
    out = [frozenset(c) for k in range(len(ps) + 1) for c in itertools.combinations(ps, k)]
    return tuple(out)


@dataclass(frozen=True)
class NBA:
    props: tuple
    alphabet: tuple[frozenset, ...]
    states: tuple[int, ...]
    initial: frozenset[int]
    transitions: dict = field(hash=False, compare=False)  # (state, letter) -> frozenset[int]
    accepting: frozenset[int] = frozenset()
    names: tuple[str, ...] = ()

    def successors(self, q: int, letter: frozenset) -> frozenset[int]:
        return self.transitions.get((q, letter), frozenset())

    @cached_property
    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.states)
        for (q, _), targets in self.transitions.items():
            for t in targets:
                g.add_edge(q, t)
        return g


# NNF formulas are nested tuples: ('t',) ('f',) ('p', a) ('np', a)
# ('and', l, r) ('or', l, r) ('X', f) ('U', l, r) ('R', l, r)


def to_nnf(f: LTL, neg: bool = False) -> tuple:
    if isinstance(f, Prop):
        return ("np", f.atom) if neg else ("p", f.atom)
    if isinstance(f, LTrue):
        return ("f",) if neg else ("t",)
    if isinstance(f, LNot):
        return to_nnf(f.arg, not neg)
    if isinstance(f, LOr):
        left, right = to_nnf(f.left, neg), to_nnf(f.right, neg)
        return ("and", left, right) if neg else ("or", left, right)
    if isinstance(f, Next):
        return ("X", to_nnf(f.arg, neg))
    if isinstance(f, Until):
        left, right = to_nnf(f.left, neg), to_nnf(f.right, neg)
        return ("R", left, right) if neg else ("U", left, right)
    raise TypeError(f)  # pragma: no cover


def _untils(f: tuple, out: list) -> None:
    if f[0] == "U" and f not in out:
        out.append(f)
    for sub in f[1:]:
        if isinstance(sub, tuple):
            _untils(sub, out)


def _expand(state: frozenset) -> list[tuple[frozenset, frozenset, frozenset, frozenset]]:
    """All (positive, negative, next, postponed) expansions of ``state``."""
    results = []

    def rec(todo: tuple, done: frozenset, pos, neg, nxt, post):
        while todo:
            f, todo = todo[0], todo[1:]
            if f in done:
                continue
            done = done | {f}
            kind = f[0]
            if kind == "t":
                continue
            if kind == "f":
                return
            if kind == "p":
                if f[1] in neg:
                    return
                pos = pos | {f[1]}
            elif kind == "np":
                if f[1] in pos:
                    return
                neg = neg | {f[1]}
            elif kind == "and":
                todo = (f[1], f[2]) + todo
            elif kind == "X":
                nxt = nxt | {f[1]}
            elif kind == "or":
                rec((f[1],) + todo, done, pos, neg, nxt, post)
                rec((f[2],) + todo, done, pos, neg, nxt, post)
                return
            elif kind == "U":
                rec((f[2],) + todo, done, pos, neg, nxt, post)
                rec((f[1],) + todo, done, pos, neg, nxt | {f}, post | {f})
                return
            elif kind == "R":
                rec((f[1], f[2]) + todo, done, pos, neg, nxt, post)
                rec((f[2],) + todo, done, pos, neg, nxt | {f}, post)
                return
        results.append((pos, neg, frozenset(nxt), post))

    empty = frozenset()
    rec(tuple(sorted(state, key=repr)), empty, empty, empty, empty, empty)
    return results


def _prune(edges: list[tuple]) -> list[tuple]:
    """Drop transitions dominated by a more permissive one."""
    uniq = sorted(set(edges), key=repr)
    keep = []
    for e in uniq:
        pos, neg, nxt, acc = e
        dominated = any(
            o != e and o[0] <= pos and o[1] <= neg and o[2] <= nxt and o[3] >= acc
            for o in uniq
        )
        if not dominated:
            keep.append(e)
    return keep


def ltl_to_nba(f: LTL, props: Optional[Iterable[Hashable]] = None) -> NBA:
    """A state-based Büchi automaton for ``f`` over the alphabet ``2^props``."""
    props = tuple(sorted(props if props is not None else atoms(f), key=str))
    alphabet = all_letters(props)
    root = to_nnf(f)
    untils: list = []
    _untils(root, untils)
    k = len(untils)

    # generalized automaton on obligation sets
    start = frozenset({root})
    gedges: dict[frozenset, list[tuple]] = {}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        if s in gedges:
            continue
        out = []
        for pos, neg, nxt, post in _expand(s):
            acc = frozenset(j for j, u in enumerate(untils) if u not in post)
            out.append((pos, neg, nxt, acc))
        gedges[s] = _prune(out)
        for e in gedges[s]:
            if e[2] not in gedges:
                queue.append(e[2])

    # counter degeneralization: level k is accepting, k == 0 means all states
    index: dict[tuple, int] = {}
    names: list[str] = []
    trans: dict[tuple[int, frozenset], set[int]] = {}
    init = (start, 0)
    queue = deque([init])
    index[init] = 0
    names.append(_describe(start, 0))
    while queue:
        node = queue.popleft()
        s, level = node
        q = index[node]
        base = 0 if level == k else level
        for pos, neg, nxt, acc in gedges[s]:
            j = base
            while j < k and j in acc:
                j += 1
            target = (nxt, j)
            if target not in index:
                index[target] = len(names)
                names.append(_describe(nxt, j))
                queue.append(target)
            for letter in alphabet:
                if pos <= letter and not (neg & letter):
                    trans.setdefault((q, letter), set()).add(index[target])
    accepting = {index[n] for n in index if n[1] == k}
    nba = NBA(props, alphabet, tuple(range(len(names))), frozenset({0}),
              {key: frozenset(v) for key, v in trans.items()}, frozenset(accepting), tuple(names))
    return _trim(nba)


def _describe(s: frozenset, level: int) -> str:
    body = ", ".join(sorted(_show(x) for x in s)) or "true"
    return f"{{{body}}}/{level}"


def _show(f: tuple) -> str:
    kind = f[0]
    if kind == "t":
        return "true"
    if kind == "f":
        return "false"
    if kind == "p":
        return str(f[1])
    if kind == "np":
        return f"~{f[1]}"
    if kind == "X":
        return f"X {_show(f[1])}"
    op = {"and": "&", "or": "|", "U": "U", "R": "R"}[kind]
    return f"({_show(f[1])} {op} {_show(f[2])})"


def _trim(nba: NBA) -> NBA:
    """Remove states from which no accepting cycle is reachable."""
    g = nba.graph
    good: set[int] = set()
    for comp in nx.strongly_connected_components(g):
        if comp & nba.accepting:
            if len(comp) > 1 or any(g.has_edge(q, q) for q in comp):
                good |= comp
    live: set[int] = set(good)
    for q in good:
        live |= nx.ancestors(g, q)
    if live == set(nba.states):
        return nba
    order = [q for q in nba.states if q in live]
    ren = {q: i for i, q in enumerate(order)}
    trans = {}
    for (q, letter), targets in nba.transitions.items():
        if q in ren:
            kept = frozenset(ren[t] for t in targets if t in ren)
            if kept:
                trans[(ren[q], letter)] = kept
    return NBA(nba.props, nba.alphabet, tuple(range(len(order))),
               frozenset(ren[q] for q in nba.initial if q in ren), trans,
               frozenset(ren[q] for q in nba.accepting if q in ren),
               tuple(nba.names[q] for q in order))


def nba_accepts_lasso(nba: NBA, prefix, loop) -> bool:
    """Lasso membership by searching the product with the lasso positions."""
    letters = [frozenset(x) for x in prefix] + [frozenset(x) for x in loop]
    n, p = len(letters), len(prefix)

    def nxt(i: int) -> int:
        return i + 1 if i + 1 < n else p

    g = nx.DiGraph()
    start = [(q, 0) for q in nba.initial]
    seen = set(start)
    queue = deque(start)
    while queue:
        q, i = queue.popleft()
        for t in nba.successors(q, letters[i]):
            node = (t, nxt(i))
            g.add_edge((q, i), node)
            if node not in seen:
                seen.add(node)
                queue.append(node)
    for comp in nx.strongly_connected_components(g):
        nodes = list(comp)
        cyclic = len(nodes) > 1 or g.has_edge(nodes[0], nodes[0])
        if cyclic and any(q in nba.accepting for q, i in nodes):
            return True
    return False
