"""Deterministic parity automata.

:func:`nba_to_dpa` is Safra's construction in Piterman's compact form.  A
macrostate is a tree of nodes, each labelled with a set of Büchi states
and named by its age (smaller name = older).  Reading a letter:

1. every node spawns a youngest child holding its accepting states,
2. all labels move along the transition relation,
3. a state stays only in the oldest branch that holds it,
4. empty nodes disappear,
5. a node whose children cover its label absorbs them and is marked,
6. names are compacted, keeping the age order.

With ``e`` the smallest marked name and ``f`` the smallest removed name
the step gets color ``2e`` if ``e < f``, ``2f - 1`` if a node was removed,
and the neutral odd color ``2n + 1`` otherwise (``n`` = number of Büchi
states).  A run is accepting iff the least color seen infinitely often is
even.  Colors are moved onto states by remembering the last step's color,
and the result is minimized by partition refinement.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Optional, Sequence

import networkx as nx

from ..errors import UnknownLetter
from .ltl import LTL, LassoWord, atoms
from .nba import NBA, ltl_to_nba

__all__ = [
    "DPA", "nba_to_dpa", "ltl_to_dpa", "dpa_accepts_lasso", "dpa_accepting_set",
    "minimize", "t_reduct_from_letters",
]


@dataclass(frozen=True)
class DPA:
    """Complete deterministic parity automaton with state colors.

    ``delta[q][j]`` is the successor of ``q`` on ``alphabet[j]``.
    """

    props: tuple
    alphabet: tuple[frozenset, ...]
    delta: tuple[tuple[int, ...], ...]
    initial: int
    colors: tuple[int, ...]
    names: tuple[str, ...] = ()

    @cached_property
    def _index(self) -> dict[frozenset, int]:
        return {a: j for j, a in enumerate(self.alphabet)}

    @property
    def states(self) -> range:
        return range(len(self.delta))

    def letter_index(self, letter: Iterable) -> int:
        key = frozenset(letter)
        try:
            return self._index[key]
        except KeyError:
            raise UnknownLetter(f"letter {sorted(map(str, key))} is not in the alphabet") from None

    def step(self, q: int, letter: Iterable) -> int:
        return self.delta[q][self.letter_index(letter)]

    def run(self, letters: Sequence[Iterable], q: Optional[int] = None) -> int:
        q = self.initial if q is None else q
        for a in letters:
            q = self.step(q, a)
        return q

    @cached_property
    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.states)
        for q, row in enumerate(self.delta):
            for t in row:
                g.add_edge(q, t)
        return g


# a Safra tree is a tuple of (parent, label) pairs; node names are positions + 1,
# the root has parent 0


def _safra_step(tree: tuple, letter: frozenset, nba: NBA, accepting: frozenset, neutral: int):
    if not tree:
        return tree, neutral
    k = len(tree)
    parent = {i + 1: p for i, (p, _) in enumerate(tree)}
    label = {i + 1: set(lab) for i, (_, lab) in enumerate(tree)}
    nxt = k + 1
    for v in range(1, k + 1):
        acc = label[v] & accepting
        if acc:
            parent[nxt] = v
            label[nxt] = set(acc)
            nxt += 1
    for v in label:
        image: set[int] = set()
        for q in label[v]:
            image |= nba.successors(q, letter)
        label[v] = image
    children: dict[int, list[int]] = {v: [] for v in label}
    for v in sorted(label):
        if parent[v]:
            children[parent[v]].append(v)

    def horizontal(v: int, forbidden: set) -> None:
        label[v] -= forbidden
        claimed: set[int] = set()
        for c in children[v]:
            horizontal(c, forbidden | claimed)
            claimed |= label[c]

    horizontal(1, set())
    alive = {v for v in label if label[v]}
    # a node is dead if it or an ancestor became empty
    for v in sorted(label):
        if parent[v] and parent[v] not in alive:
            alive.discard(v)
    marked: set[int] = set()
    for v in sorted(label):
        if v not in alive:
            continue
        kids = [c for c in children[v] if c in alive]
        if kids:
            union: set[int] = set()
            for c in kids:
                union |= label[c]
            if union == label[v]:
                marked.add(v)
                stack = list(kids)
                while stack:
                    c = stack.pop()
                    alive.discard(c)
                    stack.extend(children[c])
    removed = [v for v in range(1, k + 1) if v not in alive]
    f = min(removed) if removed else None
    e = min(marked) if marked else None
    if e is not None and (f is None or e < f):
        color = 2 * e
    elif f is not None:
        color = 2 * f - 1
    else:
        color = neutral
    order = sorted(alive)
    ren = {v: i + 1 for i, v in enumerate(order)}
    new_tree = tuple((ren.get(parent[v], 0), frozenset(label[v])) for v in order)
    return new_tree, color


def nba_to_dpa(nba: NBA) -> DPA:
    """Determinize a Büchi automaton into a minimized parity automaton."""
    accepting = frozenset(nba.accepting)
    neutral = 2 * max(1, len(nba.states)) + 1
    alphabet = nba.alphabet
    root = ((0, frozenset(nba.initial)),) if nba.initial else ()
    start = (root, neutral)
    index = {start: 0}
    order = [start]
    delta: list[list[int]] = []
    step_cache: dict[tuple, tuple] = {}
    i = 0
    while i < len(order):
        tree, _ = order[i]
        row = []
        for letter in alphabet:
            key = (tree, letter)
            if key not in step_cache:
                step_cache[key] = _safra_step(tree, letter, nba, accepting, neutral)
            target = step_cache[key]
            if target not in index:
                index[target] = len(order)
                order.append(target)
            row.append(index[target])
        delta.append(row)
        i += 1
    colors = [c for _, c in order]
    names = [_tree_text(t) for t, _ in order]
    return minimize(DPA(nba.props, alphabet, tuple(map(tuple, delta)), 0, tuple(colors), tuple(names)))


def _tree_text(tree: tuple) -> str:
    if not tree:
        return "empty"
    return " ".join(f"{i + 1}<{p}:{sorted(lab)}" for i, (p, lab) in enumerate(tree))


def minimize(p: DPA) -> DPA:
    """Merge states with equal color and equivalent successors (Moore)."""
    reach = [p.initial]
    seen = {p.initial}
    for q in reach:
        for t in p.delta[q]:
            if t not in seen:
                seen.add(t)
                reach.append(t)
    block = {q: p.colors[q] for q in reach}
    n_blocks = len(set(block.values()))
    while True:
        sig = {q: (block[q],) + tuple(block[t] for t in p.delta[q]) for q in reach}
        ids: dict[tuple, int] = {}
        new_block = {q: ids.setdefault(sig[q], len(ids)) for q in reach}
        if len(ids) == n_blocks:
            block = new_block
            break
        block, n_blocks = new_block, len(ids)
    # renumber blocks in breadth-first order from the initial state
    rep: dict[int, int] = {}
    order: list[int] = []
    queue = deque([p.initial])
    rep[block[p.initial]] = 0
    order.append(p.initial)
    while queue:
        q = queue.popleft()
        for t in p.delta[q]:
            if block[t] not in rep:
                rep[block[t]] = len(order)
                order.append(t)
                queue.append(t)
    delta = tuple(tuple(rep[block[t]] for t in p.delta[q]) for q in order)
    colors = tuple(p.colors[q] for q in order)
    names = tuple(p.names[q] for q in order) if p.names else ()
    return DPA(p.props, p.alphabet, delta, 0, colors, names)


@lru_cache(maxsize=1024)
def ltl_to_dpa(f: LTL, props: Optional[tuple] = None) -> DPA:
    """A DPA for ``f`` over the alphabet of all subsets of its atoms."""
    return nba_to_dpa(ltl_to_nba(f, props if props is not None else tuple(atoms(f))))


def dpa_accepts_lasso(p: DPA, w: LassoWord) -> bool:
    """Run the prefix, then loop until the loop-entry state repeats."""
    q = p.run(w.prefix)
    entries: dict[int, int] = {}
    visited: list[list[int]] = []
    while q not in entries:
        entries[q] = len(visited)
        states = [q]
        for a in w.loop:
            q = p.step(q, a)
            states.append(q)
        visited.append(states)
    cycle = [s for block in visited[entries[q]:] for s in block]
    return min(p.colors[s] for s in cycle) % 2 == 0


def dpa_accepting_set(p: DPA) -> frozenset[int]:
    """States from which some run has an even least recurring color."""
    g = p.graph
    good: set[int] = set()
    for c in sorted({col for col in p.colors if col % 2 == 0}):
        sub = g.subgraph([q for q in p.states if p.colors[q] >= c])
        for comp in nx.strongly_connected_components(sub):
            if not any(p.colors[q] == c for q in comp):
                continue
            nodes = list(comp)
            if len(nodes) > 1 or sub.has_edge(nodes[0], nodes[0]):
                good |= comp
    out = set(good)
    for q in good:
        out |= nx.ancestors(g, q)
    return frozenset(out)


def t_reduct_from_letters(p: DPA, consistent: Iterable[frozenset]) -> DPA:
    """Route letters outside ``consistent`` to a color-1 sink; shift colors by one."""
    ok = {frozenset(x) for x in consistent}
    sink = len(p.delta)
    delta = []
    for row in p.delta:
        delta.append(tuple(t if p.alphabet[j] in ok else sink for j, t in enumerate(row)))
    delta.append(tuple(sink for _ in p.alphabet))
    colors = tuple(c + 1 for c in p.colors) + (1,)
    names = (tuple(p.names) + ("q*",)) if p.names else ()
    return DPA(p.props, p.alphabet, tuple(delta), p.initial, colors, names)
