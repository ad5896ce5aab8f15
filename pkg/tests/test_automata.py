import random

from hypothesis import given, settings, strategies as st

from corpus import random_lasso_letters, random_ltl
from oracles import accepting_states_oracle, ltl_lasso_oracle
from tkbalign.automata.dpa import DPA, dpa_accepting_set, dpa_accepts_lasso, ltl_to_dpa, t_reduct_from_letters
from tkbalign.automata.ltl import (
    FALSE, TRUE, LassoWord, LNot, Next, Prop, Until, always, eval_ltl_lasso, eventually, land, lor,
)
from tkbalign.automata.nba import all_letters, ltl_to_nba, nba_accepts_lasso

p, q = Prop("p"), Prop("q")
P, Q, E = frozenset({"p"}), frozenset({"q"}), frozenset()


def w(prefix, loop):
    return LassoWord.of(prefix, loop)


def test_eval_ltl_examples():
    assert eval_ltl_lasso(w([], [P]), p)
    assert not eval_ltl_lasso(w([E], [P]), p)
    assert eval_ltl_lasso(w([E], [P]), Next(p))
    assert eval_ltl_lasso(w([], [P, Q]), Until(p, q))
    assert eval_ltl_lasso(w([P, P], [Q]), Until(p, q))
    assert not eval_ltl_lasso(w([], [P]), Until(p, q))


def test_sugar():
    assert eval_ltl_lasso(w([E, E], [P]), eventually(p))
    assert not eval_ltl_lasso(w([], [P, E]), always(p))
    assert eval_ltl_lasso(w([], [P]), land(p, lor(q, TRUE)))
    assert not eval_ltl_lasso(w([], [P]), FALSE)


def test_dpa_membership_examples():
    one = DPA(("p",), all_letters(("p",)), ((0, 0),), 0, (0,))
    assert dpa_accepts_lasso(one, w([], [P]))
    odd = DPA(("p",), all_letters(("p",)), ((0, 0),), 0, (1,))
    assert not dpa_accepts_lasso(odd, w([E], [P]))
    alphabet = all_letters(("p",))
    flip = tuple(tuple(1 - s if letter == P else s for letter in alphabet) for s in (0, 1))
    two = DPA(("p",), alphabet, flip, 0, (0, 1))
    assert not dpa_accepts_lasso(two, w([P], [E]))
    assert dpa_accepts_lasso(two, w([P, P], [E]))


def test_accepting_set_examples():
    alphabet = all_letters(("p",))
    even = DPA(("p",), alphabet, ((1, 0), (0, 1)), 0, (0, 2))
    assert dpa_accepting_set(even) == {0, 1}
    odd = DPA(("p",), alphabet, ((1, 0), (0, 1)), 0, (1, 3))
    assert dpa_accepting_set(odd) == frozenset()
    chain = DPA(("p",), alphabet, ((1, 1), (1, 1)), 0, (1, 0))
    assert dpa_accepting_set(chain) == {0, 1}
    # a color-0 state on no cycle does not count
    transient = DPA(("p",), alphabet, ((1, 1), (1, 1)), 0, (0, 1))
    assert dpa_accepting_set(transient) == frozenset()


def test_empty_and_universal_languages():
    rng = random.Random(0)
    empty = ltl_to_dpa(land(p, LNot(p)), ("p",))
    full = ltl_to_dpa(lor(p, LNot(p)), ("p",))
    for _ in range(100):
        word = w(*random_lasso_letters(rng, ("p",)))
        assert not dpa_accepts_lasso(empty, word)
        assert dpa_accepts_lasso(full, word)


def test_t_reduct_routes_inconsistent_letters_to_sink():
    d = ltl_to_dpa(p, ("p",))
    r = t_reduct_from_letters(d, all_letters(("p",)))
    sink = len(d.delta)
    assert all(sink not in row for row in r.delta[:sink])
    assert r.colors[:sink] == tuple(c + 1 for c in d.colors) and r.colors[sink] == 1
    r = t_reduct_from_letters(d, [E])
    assert all(r.step(s, P) == sink for s in r.states)
    assert all(r.step(sink, a) == sink for a in r.alphabet)
    assert not dpa_accepts_lasso(r, w([P], [E]))


def test_p_against_many_lassos():
    rng = random.Random(7)
    d = ltl_to_dpa(p, ("p",))
    for _ in range(500):
        word = w(*random_lasso_letters(rng, ("p",)))
        assert dpa_accepts_lasso(d, word) == eval_ltl_lasso(word, p)


formulas = st.builds(lambda seed, n: random_ltl(random.Random(seed), ("p", "q"), n),
                     st.integers(0, 10**6), st.integers(1, 6))
lassos = st.builds(lambda seed: random_lasso_letters(random.Random(seed)), st.integers(0, 10**6))


@given(formulas, st.lists(lassos, min_size=1, max_size=10))
def test_evaluator_matches_fixpoint_oracle(f, words):
    for prefix, loop in words:
        assert eval_ltl_lasso(w(prefix, loop), f) == ltl_lasso_oracle(f, prefix, loop)


@settings(max_examples=40)
@given(formulas, st.lists(lassos, min_size=1, max_size=10))
def test_nba_and_dpa_match_the_oracle(f, words):
    nba = ltl_to_nba(f, ("p", "q"))
    dpa = ltl_to_dpa(f, ("p", "q"))
    for prefix, loop in words:
        expected = ltl_lasso_oracle(f, prefix, loop)
        assert nba_accepts_lasso(nba, prefix, loop) == expected
        assert dpa_accepts_lasso(dpa, w(prefix, loop)) == expected


@settings(max_examples=40)
@given(formulas)
def test_accepting_set_matches_cycle_oracle(f):
    d = ltl_to_dpa(f, ("p", "q"))
    assert set(dpa_accepting_set(d)) == accepting_states_oracle(d)
    r = t_reduct_from_letters(d, all_letters(("p", "q"))[:2])
    assert set(dpa_accepting_set(r)) == accepting_states_oracle(r)
