"""LTL formulas over arbitrary hashable atoms, and lasso-word semantics.

The core connectives are ``Prop``, ``LTrue``, ``LNot``, ``LOr``, ``Next``
and ``Until``; conjunction, ``F``, ``G`` and implication are sugar built by
the helper functions below.  The same classes represent temporal
conjunctive queries, where an atom is a CQ instead of a proposition name.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, NamedTuple, Sequence, Union

__all__ = [
    "Prop", "LTrue", "LNot", "LOr", "Next", "Until", "LTL", "TRUE", "FALSE",
    "land", "lor", "implies", "eventually", "always", "atoms", "size", "map_atoms",
    "LassoWord", "eval_ltl_lasso", "positions_truth",
]


@dataclass(frozen=True)
class Prop:
    atom: Hashable

    def __str__(self) -> str:
        return str(self.atom)


@dataclass(frozen=True)
class LTrue:
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class LNot:
    arg: "LTL"

    def __str__(self) -> str:
        return f"~{_wrap(self.arg)}"


@dataclass(frozen=True)
class LOr:
    left: "LTL"
    right: "LTL"

    def __str__(self) -> str:
        return f"({self.left} | {self.right})"


@dataclass(frozen=True)
class Next:
    arg: "LTL"

    def __str__(self) -> str:
        return f"X {_wrap(self.arg)}"


@dataclass(frozen=True)
class Until:
    left: "LTL"
    right: "LTL"

    def __str__(self) -> str:
        return f"({self.left} U {self.right})"


LTL = Union[Prop, LTrue, LNot, LOr, Next, Until]

TRUE: LTL = LTrue()
FALSE: LTL = LNot(TRUE)


def _wrap(f: LTL) -> str:
    text = str(f)
    if isinstance(f, (Prop, LTrue, LNot, Next)) or text.startswith("("):
        return text
    return f"({text})"


def _neg(f: LTL) -> LTL:
    return f.arg if isinstance(f, LNot) else LNot(f)


def land(left: LTL, right: LTL) -> LTL:
    return LNot(LOr(_neg(left), _neg(right)))


def lor(left: LTL, right: LTL) -> LTL:
    return LOr(left, right)


def implies(left: LTL, right: LTL) -> LTL:
    return LOr(_neg(left), right)


def eventually(f: LTL) -> LTL:
    return Until(TRUE, f)


def always(f: LTL) -> LTL:
    return LNot(eventually(_neg(f)))


def _children(f: LTL) -> tuple:
    if isinstance(f, (LNot, Next)):
        return (f.arg,)
    if isinstance(f, (LOr, Until)):
        return (f.left, f.right)
    return ()


def atoms(f: LTL) -> list:
    """Atoms in order of first occurrence (left to right)."""
    out: dict = {}
    stack = [f]
    while stack:
        cur = stack.pop()
        if isinstance(cur, Prop):
            out.setdefault(cur.atom)
        stack.extend(reversed(_children(cur)))
    return list(out)


def size(f: LTL) -> int:
    return 1 + sum(size(c) for c in _children(f))


def map_atoms(f: LTL, fn: Callable[[Hashable], LTL]) -> LTL:
    if isinstance(f, Prop):
        return fn(f.atom)
    if isinstance(f, LTrue):
        return f
    if isinstance(f, LNot):
        return LNot(map_atoms(f.arg, fn))
    if isinstance(f, Next):
        return Next(map_atoms(f.arg, fn))
    if isinstance(f, LOr):
        return LOr(map_atoms(f.left, fn), map_atoms(f.right, fn))
    return Until(map_atoms(f.left, fn), map_atoms(f.right, fn))


class LassoWord(NamedTuple):
    """The infinite word ``prefix . loop . loop . ...``."""

    prefix: tuple
    loop: tuple

    @classmethod
    def of(cls, prefix: Iterable[Iterable], loop: Iterable[Iterable]) -> "LassoWord":
        loop_t = tuple(frozenset(x) for x in loop)
        if not loop_t:
            raise ValueError("the loop of a lasso must be nonempty")
        return cls(tuple(frozenset(x) for x in prefix), loop_t)

    def letter(self, i: int) -> frozenset:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.loop[(i - len(self.prefix)) % len(self.loop)]


def positions_truth(f: LTL, letters: Sequence[frozenset], loop_start: int) -> list[bool]:
    """Truth of ``f`` at each position of a lasso given as a flat letter list.

    Position ``len(letters) - 1`` is followed by ``loop_start``.
    """
    n = len(letters)
    succ = [i + 1 for i in range(n)]
    succ[-1] = loop_start
    memo: dict[LTL, list[bool]] = {}

    def ev(g: LTL) -> list[bool]:
        got = memo.get(g)
        if got is not None:
            return got
        if isinstance(g, Prop):
            out = [g.atom in letters[i] for i in range(n)]
        elif isinstance(g, LTrue):
            out = [True] * n
        elif isinstance(g, LNot):
            out = [not v for v in ev(g.arg)]
        elif isinstance(g, LOr):
            a, b = ev(g.left), ev(g.right)
            out = [x or y for x, y in zip(a, b)]
        elif isinstance(g, Next):
            a = ev(g.arg)
            out = [a[succ[i]] for i in range(n)]
        else:
            a, b = ev(g.left), ev(g.right)
            out = [False] * n
            changed = True
            while changed:  # least fixpoint of  u = b or (a and X u)
                changed = False
                for i in range(n - 1, -1, -1):
                    v = b[i] or (a[i] and out[succ[i]])
                    if v != out[i]:
                        out[i] = v
                        changed = True
        memo[g] = out
        return out

    return ev(f)


def eval_ltl_lasso(w: LassoWord, f: LTL) -> bool:
    """Whether the lasso word satisfies ``f`` at position 0."""
    letters = list(w.prefix) + list(w.loop)
    return positions_truth(f, letters, len(w.prefix))[0]
