"""Hypothesis strategies shared by the property tests."""

from hypothesis import strategies as st

from tkbalign.dl import (
    BOTTOM, TOP, ConceptAssertion, Exists, FiniteInterpretation, GCI, Name, RoleAssertion, conj, disj, forall,
)
from tkbalign.dl import Not

NAMES = ("A", "B")
ROLES = ("r",)
INDS = ("a", "b")

concepts = st.recursive(
    st.sampled_from([Name("A"), Name("B"), TOP, BOTTOM]),
    lambda sub: st.one_of(
        sub.map(Not),
        st.tuples(sub, sub).map(lambda p: conj(*p)),
        st.tuples(sub, sub).map(lambda p: disj(*p)),
        sub.map(lambda c: Exists("r", c)),
        sub.map(lambda c: forall("r", c)),
    ),
    max_leaves=4,
)

gcis = st.tuples(concepts, concepts).map(lambda p: GCI(*p))
tboxes = st.frozensets(gcis, max_size=2)

assertions = st.one_of(
    st.builds(ConceptAssertion, st.sampled_from(NAMES), st.sampled_from(INDS)),
    st.builds(RoleAssertion, st.sampled_from(ROLES), st.sampled_from(INDS), st.sampled_from(INDS)),
)
aboxes = st.frozensets(assertions, max_size=3)


@st.composite
def interpretations(draw, max_size: int = 2):
    n = draw(st.integers(1, max_size))
    dom = list(range(n))
    subset = st.frozensets(st.sampled_from(dom))
    pairs = st.frozensets(st.tuples(st.sampled_from(dom), st.sampled_from(dom)))
    return FiniteInterpretation(
        domain=frozenset(dom),
        concepts={a: draw(subset) for a in NAMES},
        roles={r: draw(pairs) for r in ROLES},
        individuals={i: draw(st.sampled_from(dom)) for i in INDS},
    )
