"""Graphviz DOT export for the automata and graphs of the alignment pipeline."""

from __future__ import annotations

from typing import Iterable, Optional

from .automata.dpa import DPA, dpa_accepting_set
from .automata.nba import NBA

__all__ = ["nba_to_dot", "dpa_to_dot", "rtdfa_to_dot", "mig_to_dot"]


def _q(text: str) -> str:
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _letter(letter: Iterable) -> str:
    return "{" + ",".join(sorted(map(str, letter))) + "}"


def _group(edges: dict) -> list[str]:
    lines = []
    for (s, t), labels in sorted(edges.items()):
        lines.append(f"  {s} -> {t} [label={_q(' '.join(labels))}];")
    return lines


def nba_to_dot(nba: NBA, name: str = "nba") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  init [shape=point];']
    for q in nba.states:
        shape = "doublecircle" if q in nba.accepting else "circle"
        tooltip = nba.names[q] if nba.names else str(q)
        lines.append(f"  {q} [shape={shape}, tooltip={_q(tooltip)}];")
    for q in sorted(nba.initial):
        lines.append(f"  init -> {q};")
    edges: dict[tuple[int, int], list[str]] = {}
    for letter in nba.alphabet:
        for q in nba.states:
            for t in sorted(nba.successors(q, letter)):
                edges.setdefault((q, t), []).append(_letter(letter))
    lines += _group(edges)
    lines.append("}")
    return "\n".join(lines) + "\n"


def dpa_to_dot(p: DPA, name: str = "dpa", accepting: Optional[frozenset] = None) -> str:
    """States show their color; states of the accepting set are double circles."""
    acc = dpa_accepting_set(p) if accepting is None else accepting
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  init [shape=point];']
    for q in p.states:
        shape = "doublecircle" if q in acc else "circle"
        lines.append(f"  {q} [shape={shape}, label={_q(f'{q} / c{p.colors[q]}')}];")
    lines.append(f"  init -> {p.initial};")
    edges: dict[tuple[int, int], list[str]] = {}
    for q, row in enumerate(p.delta):
        for j, t in enumerate(row):
            edges.setdefault((q, t), []).append(_letter(p.alphabet[j]))
    lines += _group(edges)
    lines.append("}")
    return "\n".join(lines) + "\n"


def _state_label(state) -> str:
    z, i = state
    return "{" + ",".join(map(str, sorted(z))) + f"}}, {i}"


def rtdfa_to_dot(d, name: str = "rtdfa") -> str:
    from .align import letter_text

    lines = [f"digraph {name} {{", "  rankdir=LR;", '  init [shape=point];']
    for k, state in enumerate(d.states):
        shape = "doublecircle" if k in d.final else "circle"
        lines.append(f"  {k} [shape={shape}, label={_q(_state_label(state))}];")
    lines.append("  init -> 0;")
    for s in sorted(d.transitions):
        for letter, t in d.transitions[s]:
            lines.append(f"  {s} -> {t} [label={_q(letter_text(letter))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def mig_to_dot(m, path=None, name: str = "mig") -> str:
    """Edges show their atom and weight; the edges of ``path`` are drawn bold red."""
    d = m.dfa
    on_path = {(e.source, e.target, e.letter) for e in path.edges} if path is not None else set()
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  init [shape=point];']
    for k, state in enumerate(d.states):
        shape = "doublecircle" if k in d.final else "circle"
        lines.append(f"  {k} [shape={shape}, label={_q(_state_label(state))}];")
    lines.append("  init -> 0;")
    for e in m.all_edges():
        style = ", color=red, penwidth=2" if (e.source, e.target, e.letter) in on_path else ""
        lines.append(f"  {e.source} -> {e.target} [label={_q(f'{e.atom} / {e.weight:g}')}{style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
