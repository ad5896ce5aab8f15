"""ALC concepts, axioms, assertions and finite interpretations.

Concept terms are hash-consed: building the same term twice returns the
same object, so equality and hashing are identity based and cheap.  The
surface constructors :func:`conj`, :func:`forall` and :data:`BOTTOM`
desugar into the primitive constructors (``Top``, ``Name``, ``Not``,
``Or``, ``Exists``).  :func:`nnf` produces negation normal form, which
needs the dual constructors ``And``, ``Forall`` and ``Bottom``; those
only appear in NNF output and in the reasoner's internal labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Union

__all__ = [
    "Concept", "Top", "Bottom", "Name", "Not", "And", "Or", "Exists", "Forall",
    "TOP", "BOTTOM", "conj", "disj", "forall", "conj_all", "disj_all",
    "GCI", "ConceptAssertion", "RoleAssertion", "Assertion", "KnowledgeBase",
    "Signature", "FiniteInterpretation", "nnf", "negate", "signature_of",
    "eval_concept", "is_model", "individuals_of", "assertion_key", "sorted_abox",
    "subconcepts",
]

_TABLE: dict[tuple, "Concept"] = {}


class Concept:
    """Base class of interned concept terms."""

    __slots__ = ("_text", "_args")

    def _init(self, args: tuple) -> None:
        self._args = args
        self._text = self._render()

    def __repr__(self) -> str:
        return self._text

    __str__ = __repr__

    def __reduce__(self):
        return (type(self), self._args)

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    def __lt__(self, other: "Concept") -> bool:
        return self._text < other._text

    @property
    def key(self) -> str:
        return self._text

    def _render(self) -> str:  # pragma: no cover - overridden
        raise NotImplementedError


def _interned(cls, *args):
    k = (cls, *args)
    obj = _TABLE.get(k)
    if obj is None:
        obj = object.__new__(cls)
        obj._init(args)
        _TABLE[k] = obj
    return obj


class Top(Concept):
    __slots__ = ()

    def __new__(cls):
        return _interned(cls)

    def _render(self):
        return "Top"


class Bottom(Concept):
    __slots__ = ()

    def __new__(cls):
        return _interned(cls)

    def _render(self):
        return "Bot"


class Name(Concept):
    __slots__ = ()

    def __new__(cls, name: str):
        return _interned(cls, name)

    @property
    def name(self) -> str:
        return self._args[0]

    def _render(self):
        return self._args[0]


class Not(Concept):
    __slots__ = ()

    def __new__(cls, arg: Concept):
        return _interned(cls, arg)

    @property
    def arg(self) -> Concept:
        return self._args[0]

    def _render(self):
        inner = self._args[0]
        if isinstance(inner, (Name, Top, Bottom, Not)):
            return f"not {inner}"
        return f"not ({inner})"


class _Binary(Concept):
    __slots__ = ()
    _op = ""

    def __new__(cls, left: Concept, right: Concept):
        return _interned(cls, left, right)

    @property
    def left(self) -> Concept:
        return self._args[0]

    @property
    def right(self) -> Concept:
        return self._args[1]

    def _render(self):
        return f"({self._args[0]} {self._op} {self._args[1]})"


class And(_Binary):
    __slots__ = ()
    _op = "and"


class Or(_Binary):
    __slots__ = ()
    _op = "or"


class _Quantified(Concept):
    __slots__ = ()
    _kw = ""

    def __new__(cls, role: str, filler: Concept):
        return _interned(cls, role, filler)

    @property
    def role(self) -> str:
        return self._args[0]

    @property
    def filler(self) -> Concept:
        return self._args[1]

    def _render(self):
        filler = self._args[1]
        text = str(filler)
        if isinstance(filler, Not) and not text.startswith("not ("):
            text = f"({text})"
        return f"{self._kw} {self._args[0]}.{text}"


class Exists(_Quantified):
    __slots__ = ()
    _kw = "exists"


class Forall(_Quantified):
    __slots__ = ()
    _kw = "forall"


TOP = Top()
BOTTOM = Not(TOP)


def conj(left: Concept, right: Concept) -> Concept:
    """``left and right`` in primitive form."""
    return Not(Or(_neg(left), _neg(right)))


def disj(left: Concept, right: Concept) -> Concept:
    return Or(left, right)


def forall(role: str, filler: Concept) -> Concept:
    """``forall role.filler`` in primitive form."""
    return Not(Exists(role, _neg(filler)))


def _neg(c: Concept) -> Concept:
    return c.arg if isinstance(c, Not) else Not(c)


def conj_all(parts: Iterable[Concept]) -> Concept:
    items = list(parts)
    if not items:
        return TOP
    out = items[-1]
    for c in reversed(items[:-1]):
        out = conj(c, out)
    return out


def disj_all(parts: Iterable[Concept]) -> Concept:
    items = list(parts)
    if not items:
        return BOTTOM
    out = items[-1]
    for c in reversed(items[:-1]):
        out = Or(c, out)
    return out


_NNF_CACHE: dict[tuple[Concept, bool], Concept] = {}


def nnf(c: Concept) -> Concept:
    """Negation normal form: ``Not`` is applied to concept names only."""
    return _nnf(c, False)


def negate(c: Concept) -> Concept:
    """NNF of the complement of ``c``."""
    return _nnf(c, True)


def _nnf(c: Concept, neg: bool) -> Concept:
    k = (c, neg)
    hit = _NNF_CACHE.get(k)
    if hit is not None:
        return hit
    if isinstance(c, Top):
        out = Bottom() if neg else c
    elif isinstance(c, Bottom):
        out = TOP if neg else c
    elif isinstance(c, Name):
        out = Not(c) if neg else c
    elif isinstance(c, Not):
        out = _nnf(c.arg, not neg)
    elif isinstance(c, (And, Or)):
        left, right = _nnf(c.left, neg), _nnf(c.right, neg)
        is_and = isinstance(c, And) != neg
        out = And(left, right) if is_and else Or(left, right)
    elif isinstance(c, (Exists, Forall)):
        filler = _nnf(c.filler, neg)
        is_exists = isinstance(c, Exists) != neg
        out = Exists(c.role, filler) if is_exists else Forall(c.role, filler)
    else:  # pragma: no cover
        raise TypeError(f"not a concept: {c!r}")
    _NNF_CACHE[k] = out
    return out


def subconcepts(c: Concept) -> Iterable[Concept]:
    """Pre-order walk over all subterms of ``c``, including ``c``."""
    stack = [c]
    while stack:
        cur = stack.pop()
        yield cur
        if isinstance(cur, Not):
            stack.append(cur.arg)
        elif isinstance(cur, (And, Or)):
            stack.extend((cur.right, cur.left))
        elif isinstance(cur, (Exists, Forall)):
            stack.append(cur.filler)


@dataclass(frozen=True)
class GCI:
    lhs: Concept
    rhs: Concept

    def __str__(self) -> str:
        return f"{self.lhs} subclassof {self.rhs}"


@dataclass(frozen=True, order=True)
class ConceptAssertion:
    concept: str
    ind: str

    def __str__(self) -> str:
        return f"{self.concept}({self.ind})"

    @property
    def individuals(self) -> tuple[str, ...]:
        return (self.ind,)


@dataclass(frozen=True, order=True)
class RoleAssertion:
    role: str
    source: str
    target: str

    def __str__(self) -> str:
        return f"{self.role}({self.source},{self.target})"

    @property
    def individuals(self) -> tuple[str, ...]:
        return (self.source, self.target)


Assertion = Union[ConceptAssertion, RoleAssertion]


def assertion_key(a: Assertion) -> tuple:
    """Total order on assertions: concept assertions first, then roles."""
    if isinstance(a, ConceptAssertion):
        return (0, a.concept, a.ind, "")
    return (1, a.role, a.source, a.target)


def sorted_abox(abox: Iterable[Assertion]) -> list[Assertion]:
    return sorted(abox, key=assertion_key)


def individuals_of(abox: Iterable[Assertion]) -> frozenset[str]:
    return frozenset(i for a in abox for i in a.individuals)


class KnowledgeBase(NamedTuple):
    tbox: frozenset[GCI]
    abox: frozenset[Assertion]


@dataclass(frozen=True)
class Signature:
    concepts: frozenset[str] = frozenset()
    roles: frozenset[str] = frozenset()

    def __or__(self, other: "Signature") -> "Signature":
        return Signature(self.concepts | other.concepts, self.roles | other.roles)

    def __le__(self, other: "Signature") -> bool:
        return self.concepts <= other.concepts and self.roles <= other.roles

    def __len__(self) -> int:
        return len(self.concepts) + len(self.roles)

    @classmethod
    def of(cls, concepts: Iterable[str] = (), roles: Iterable[str] = ()) -> "Signature":
        return cls(frozenset(concepts), frozenset(roles))


def _concept_sig(c: Concept, concepts: set, roles: set) -> None:
    for sub in subconcepts(c):
        if isinstance(sub, Name):
            concepts.add(sub.name)
        elif isinstance(sub, (Exists, Forall)):
            roles.add(sub.role)


def signature_of(x) -> Signature:
    """Concept and role names occurring in ``x``.

    Accepts concepts, GCIs, assertions, collections of those, knowledge
    bases and anything with a ``signature()`` method (queries).
    """
    concepts: set[str] = set()
    roles: set[str] = set()

    def visit(obj) -> None:
        if isinstance(obj, Concept):
            _concept_sig(obj, concepts, roles)
        elif isinstance(obj, GCI):
            _concept_sig(obj.lhs, concepts, roles)
            _concept_sig(obj.rhs, concepts, roles)
        elif isinstance(obj, ConceptAssertion):
            concepts.add(obj.concept)
        elif isinstance(obj, RoleAssertion):
            roles.add(obj.role)
        elif isinstance(obj, Signature):
            concepts.update(obj.concepts)
            roles.update(obj.roles)
        elif hasattr(obj, "signature"):
            visit(obj.signature())
        elif isinstance(obj, (tuple, list, set, frozenset)):
            for item in obj:
                visit(item)
        else:
            raise TypeError(f"cannot take the signature of {type(obj).__name__}")

    visit(x)
    return Signature(frozenset(concepts), frozenset(roles))


@dataclass(frozen=True)
class FiniteInterpretation:
    """A finite interpretation; unmentioned names have empty extensions."""

    domain: frozenset
    concepts: Mapping[str, frozenset] = field(default_factory=dict)
    roles: Mapping[str, frozenset] = field(default_factory=dict)
    individuals: Mapping[str, object] = field(default_factory=dict)

    def concept_ext(self, name: str) -> frozenset:
        return self.concepts.get(name, frozenset())

    def role_ext(self, name: str) -> frozenset:
        return self.roles.get(name, frozenset())

    def ind(self, name: str):
        try:
            return self.individuals[name]
        except KeyError:
            raise KeyError(f"individual {name!r} is not interpreted") from None

    def successors(self, role: str, d) -> set:
        return {e for (x, e) in self.role_ext(role) if x == d}


def eval_concept(i: FiniteInterpretation, c: Concept) -> frozenset:
    """The extension of ``c`` in ``i``."""
    memo: dict[Concept, frozenset] = {}

    def ev(x: Concept) -> frozenset:
        got = memo.get(x)
        if got is not None:
            return got
        if isinstance(x, Top):
            out = i.domain
        elif isinstance(x, Bottom):
            out = frozenset()
        elif isinstance(x, Name):
            out = i.concept_ext(x.name) & i.domain
        elif isinstance(x, Not):
            out = i.domain - ev(x.arg)
        elif isinstance(x, And):
            out = ev(x.left) & ev(x.right)
        elif isinstance(x, Or):
            out = ev(x.left) | ev(x.right)
        elif isinstance(x, Exists):
            fill = ev(x.filler)
            out = frozenset(d for (d, e) in i.role_ext(x.role) if e in fill)
        elif isinstance(x, Forall):
            fill = ev(x.filler)
            bad = {d for (d, e) in i.role_ext(x.role) if e not in fill}
            out = i.domain - bad
        else:  # pragma: no cover
            raise TypeError(f"not a concept: {x!r}")
        memo[x] = out
        return out

    return ev(c)


def is_model(i: FiniteInterpretation, k: KnowledgeBase) -> bool:
    """Whether ``i`` satisfies every GCI and assertion of ``k``."""
    for g in k.tbox:
        if not eval_concept(i, g.lhs) <= eval_concept(i, g.rhs):
            return False
    for a in k.abox:
        if isinstance(a, ConceptAssertion):
            if i.ind(a.ind) not in i.concept_ext(a.concept):
                return False
        elif (i.ind(a.source), i.ind(a.target)) not in i.role_ext(a.role):
            return False
    return True
