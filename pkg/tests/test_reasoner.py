import pytest
from hypothesis import given, settings, strategies as st

from corpus import sig, tbox
from oracles import SMALL_MODELS, naive_eval_bool
from strategies import aboxes, concepts, tboxes
from tkbalign.bounded import CounterModel, Entailed, bounded_entails
from tkbalign.cq import QNot, qand
from tkbalign.dl import (
    ConceptAssertion, KnowledgeBase, Name, RoleAssertion, eval_concept, is_model,
)
from tkbalign.errors import UnsatisfiableTBox
from tkbalign.reasoner import (
    canonical_abox, canonical_individuals, concept_satisfiable, entails, kb_consistent, satisfiable_with,
)
from tkbalign.syntax import parse_concept, parse_kb, parse_query

A = Name("A")


def kb(text: str) -> KnowledgeBase:
    g = parse_kb(text)
    return KnowledgeBase(g.tbox, g.aboxes[0] if g.aboxes else frozenset())


def test_concept_satisfiable_examples():
    assert not concept_satisfiable(A, tbox("A subclassof Bot"))
    assert concept_satisfiable(A, tbox())
    assert concept_satisfiable(parse_concept("A and exists r.B"), tbox("B subclassof not A"))
    assert not concept_satisfiable(parse_concept("exists r.A and forall r.not A"), tbox())


def test_kb_consistent_examples():
    assert not kb_consistent(kb("tbox: A subclassof Bot\nabox@0: A(a)"))
    assert kb_consistent(kb("abox@0: A(a); r(a,b)"))
    assert kb_consistent(kb("tbox: A subclassof exists r.B; B subclassof not A\nabox@0: A(a)"))
    assert not kb_consistent(kb("tbox: A subclassof forall r.Bot\nabox@0: A(a); r(a,b)"))


def test_entails_examples():
    assert entails(kb("tbox: A subclassof B\nabox@0: A(a)"), parse_query("EX y . B(y)"))
    assert not entails(kb("abox@0: A(a)"), parse_query("~B(a)"))
    assert entails(kb("tbox: A subclassof Bot\nabox@0: A(a)"), parse_query("B(b)"))
    assert entails(kb("tbox: A subclassof exists r.B\nabox@0: A(a)"), parse_query("EX y . r(a,y) & B(y)"))


def test_satisfiable_with_examples():
    p0 = parse_query("A(a)")
    assert satisfiable_with(tbox(), p0)
    assert not satisfiable_with(tbox("A subclassof Bot"), parse_query("EX y . A(y)"))
    e = parse_query("EX y . A(y)")
    assert not satisfiable_with(tbox(), qand(e, QNot(e)))
    assert not satisfiable_with(tbox(), qand(p0, QNot(e)))


def test_canonical_abox_examples():
    t, s = tbox(), sig("A")
    assert len(canonical_individuals(t, s)) == 2
    canon = canonical_abox(t, s)
    assert len(canon) == 1 and all(isinstance(x, ConceptAssertion) and x.concept == "A" for x in canon)

    t = tbox("A subclassof Bot")
    assert canonical_abox(t, s) == frozenset()
    assert len(canonical_individuals(t, s)) == 1

    canon = canonical_abox(tbox(), sig("", "r"))
    (edge,) = canon
    assert isinstance(edge, RoleAssertion) and edge.source == edge.target


def test_canonical_abox_unsatisfiable_tbox():
    with pytest.raises(UnsatisfiableTBox):
        canonical_abox(tbox("Top subclassof Bot"), sig("A"))


def test_bounded_entails_examples():
    assert bounded_entails(kb("abox@0: A(a)"), parse_query("A(a)"), 2) == Entailed(2)
    res = bounded_entails(KnowledgeBase(frozenset(), frozenset()), parse_query("A(a)"), 1)
    assert isinstance(res, CounterModel) and not res.interpretation.concept_ext("A")
    assert bounded_entails(kb("tbox: A subclassof B\nabox@0: A(a)"), parse_query("B(a)"), 2) == Entailed(2)


@settings(max_examples=40)
@given(concepts, tboxes)
def test_concept_satisfiability_against_small_models(c, t):
    k = KnowledgeBase(t, frozenset())
    if any(eval_concept(i, c) and is_model(i, k) for i in SMALL_MODELS):
        assert concept_satisfiable(c, t)


@settings(max_examples=40)
@given(tboxes, aboxes)
def test_kb_consistency_against_small_models(t, a):
    k = KnowledgeBase(t, a)
    if any(is_model(i, k) for i in SMALL_MODELS):
        assert kb_consistent(k)


QUERIES = [parse_query(x) for x in (
    "A(a)", "EX y . A(y)", "EX y . r(a,y) & B(y)", "~B(a)", "A(a) | B(b)", "EX y z . r(y,z) & A(z)",
)]


@settings(max_examples=40)
@given(tboxes, aboxes, st.sampled_from(QUERIES))
def test_entailment_has_no_small_countermodel(t, a, q):
    k = KnowledgeBase(t, a)
    if entails(k, q):
        assert not any(is_model(i, k) and not naive_eval_bool(i, q) for i in SMALL_MODELS)
