import random

import pytest
from hypothesis import given, strategies as st

from corpus import CQ_POOL, random_tcq
from oracles import SMALL_MODELS, naive_eval_bool
from strategies import aboxes, concepts, tboxes
from tkbalign.automata.ltl import LNot, Next, Prop, TRUE, Until, always, eventually
from tkbalign.dl import GCI, ConceptAssertion, Exists, Name, RoleAssertion, Signature, nnf
from tkbalign.errors import QuerySyntaxError
from tkbalign.syntax import (
    parse_assertion, parse_concept, parse_gci, parse_kb, parse_problem, parse_query, parse_tcq, print_concept,
    print_kb, print_query, print_tcq,
)
from tkbalign.temporal import TemporalKB


def test_concept_precedence():
    assert parse_concept("not A and B") == parse_concept("(not A) and B")
    assert parse_concept("A or B and A") == parse_concept("A or (B and A)")
    assert parse_concept("exists r.A") == Exists("r", Name("A"))


def test_gci_and_assertions():
    assert parse_gci("A subclassof B") == GCI(Name("A"), Name("B"))
    assert parse_assertion("A(a)") == ConceptAssertion("A", "a")
    assert parse_assertion("r(a, b)") == RoleAssertion("r", "a", "b")


def test_problem_file():
    g = parse_kb("tbox: A subclassof B\nabox@0: A(a)")
    assert g.tbox == {GCI(Name("A"), Name("B"))}
    assert g.aboxes == (frozenset({ConceptAssertion("A", "a")}),)


def test_problem_file_sections_and_comments():
    text = "# header\ntbox:\n  A subclassof exists r.B\nabox@0: A(a); r(a,b)\nabox@1:\nsignature:\n  concepts: A B\n  roles: r\n"
    p = parse_problem(text)
    assert len(p.tkb.aboxes) == 2 and p.tkb.aboxes[1] == frozenset()
    assert len(p.tkb.aboxes[0]) == 2
    assert p.signature == Signature(frozenset({"A", "B"}), frozenset({"r"}))


def test_empty_file_is_the_empty_tkb():
    assert parse_kb("") == TemporalKB(frozenset(), ())
    assert parse_problem("").signature is None


def test_abox_indices_must_be_contiguous():
    with pytest.raises(QuerySyntaxError, match="abox@0"):
        parse_kb("abox@1: A(a)")
    with pytest.raises(QuerySyntaxError, match="duplicate"):
        parse_kb("abox@0:\nabox@0:")


def test_error_positions():
    with pytest.raises(QuerySyntaxError) as e:
        parse_kb("tbox:\n  A subclassof\n")
    assert e.value.line == 2
    with pytest.raises(QuerySyntaxError) as e:
        parse_kb("A(a)")
    assert (e.value.line, e.value.col) == (1, 1)
    with pytest.raises(QuerySyntaxError) as e:
        parse_query("A(a) & & B(b)")
    assert (e.value.line, e.value.col) == (1, 8)


def test_reserved_names_rejected():
    with pytest.raises(QuerySyntaxError):
        parse_concept("__p0")


def test_query_examples():
    q = parse_query("EX y . r(a,y) & A(y)")
    assert print_query(q) == "EX y . r(a,y) & A(y)"
    left, right = parse_query("~(A(a) | B(a)) & true"), parse_query("~A(a) & ~B(a)")
    assert all(naive_eval_bool(i, left) == naive_eval_bool(i, right) for i in SMALL_MODELS)
    assert print_query(parse_query("true")) == "true"


def test_tcq_desugaring():
    a = parse_tcq("[A(a)]")
    assert isinstance(a, Prop)
    assert parse_tcq("X [A(a)]") == Next(a)
    assert parse_tcq("[A(a)] U [B(b)]") == Until(a, parse_tcq("[B(b)]"))
    assert parse_tcq("F [A(a)]") == eventually(a) == Until(TRUE, a)
    assert parse_tcq("G [A(a)]") == always(a)
    assert parse_tcq("~[A(a)]") == LNot(a)


def test_until_is_right_associative():
    assert parse_tcq("[A(a)] U [B(b)] U [A(b)]") == parse_tcq("[A(a)] U ([B(b)] U [A(b)])")


def test_multi_atom_ground_cq_prints_parseably():
    q = parse_query("A(a) & B(b)")
    assert parse_query(print_query(q)) == q


@given(concepts)
def test_concept_round_trip(c):
    assert nnf(parse_concept(print_concept(c))) == nnf(c)


@given(tboxes, st.lists(aboxes, max_size=3))
def test_kb_round_trip(t, boxes):
    g = TemporalKB(t, tuple(boxes))
    back = parse_kb(print_kb(g))
    assert back.aboxes == g.aboxes
    assert {(nnf(x.lhs), nnf(x.rhs)) for x in back.tbox} == {(nnf(x.lhs), nnf(x.rhs)) for x in g.tbox}


def test_signature_round_trip():
    s = Signature(frozenset({"A"}), frozenset({"r"}))
    g = parse_kb("abox@0: A(a)")
    assert parse_problem(print_kb(g, s)).signature == s


@given(st.sampled_from(CQ_POOL))
def test_query_round_trip(text):
    q = parse_query(text)
    assert parse_query(print_query(q)) == q


@given(st.integers(0, 10**6))
def test_tcq_round_trip(seed):
    f = random_tcq(random.Random(seed))
    assert parse_tcq(print_tcq(f)) == f
