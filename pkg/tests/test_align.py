import random
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from corpus import TKB_CASES, TKB_EXTRA, tbox, tkb_candidates
from oracles import all_assertions, tkb_align_brute, tkb_solution_ok
from tkbalign.align import (
    Add, Del, Fix, abstraction_of, apply_tkb_mod, build_mig, build_rtdfa, check_tqe, cost_tkb_mod, letter_text,
    pad, realizable_letter, realized_types, shortest_accepted_path, tkb_align, tqe,
)
from tkbalign.dl import ConceptAssertion, signature_of
from tkbalign.errors import InconsistentIntermediate, InconsistentKB
from tkbalign.kbalign import CostModel, ins, rem
from tkbalign.syntax import parse_kb, parse_tcq
from tkbalign.temporal import TemporalKB, prop_abstraction

Aa, Bb = ConceptAssertion("A", "a"), ConceptAssertion("B", "b")
E = frozenset()
P0 = frozenset({"p0"})


def pa_of(text):
    return prop_abstraction(parse_tcq(text))


def test_mod_examples():
    a0, a1 = frozenset({Aa}), frozenset({Bb})
    assert apply_tkb_mod([Del()], [a0, a1]) == (a1,)
    assert apply_tkb_mod([Fix((ins(Aa),))], [E]) == (a0,)
    assert apply_tkb_mod([Fix(), Add((ins(Aa),))], [a1]) == (a1, a0)
    assert apply_tkb_mod([], [a0, a1]) == (a0, a1)


def test_fix_and_del_past_the_end_change_nothing():
    assert apply_tkb_mod([Fix((ins(Aa),)), Del()], []) == ()
    assert cost_tkb_mod([Fix((ins(Aa),)), Del()], []) == 0


def test_cost_examples():
    assert cost_tkb_mod([], [frozenset({Aa})]) == 0
    assert cost_tkb_mod([Del()], [frozenset({Aa, Bb})]) == 3
    assert cost_tkb_mod([Add((ins(Aa),))], [E]) == 2
    assert cost_tkb_mod([Add()], [], CostModel(abox_unit=4.0)) == 4


def test_atom_text():
    assert str(Fix((ins(Aa), rem(Bb)))) == "fix[ins A(a); rem B(b)]"
    assert str(Add()) == "add[]"
    assert str(Del()) == "del"
    assert letter_text(("add", frozenset({E, P0}))) == "add[{}, {p0}]"


def test_pad():
    assert pad([Add()], 2) == (Add(), Fix(), Fix())
    assert pad([Del(), Fix()], 2) == (Del(), Fix())


def test_realized_types_examples():
    pa = pa_of("[A(a)]")
    assert realized_types(tbox(), {Aa}, pa) == {P0}
    assert realized_types(tbox(), set(), pa) == {E, P0}
    assert realized_types(tbox("Top subclassof A"), set(), pa_of("[EX y . A(y)]")) == {P0}
    with pytest.raises(InconsistentKB):
        realized_types(tbox("A subclassof Bot"), {Aa}, pa)


def test_realizable_letter_examples():
    pa = pa_of("[A(a)]")
    s = signature_of([Aa])
    assert realizable_letter(tbox(), s, {P0}, pa)
    assert not realizable_letter(tbox(), s, set(), pa)
    assert not realizable_letter(tbox("A subclassof Bot"), s, {P0}, pa)


def test_abstraction_examples():
    pa = pa_of("[A(a)]")
    g = parse_kb("abox@0: A(a)")
    assert abstraction_of([Del()], g, pa) == (("del",),)
    assert abstraction_of([Fix((ins(Aa),))], parse_kb("abox@0:"), pa) == (("fix", frozenset({P0})),)
    assert abstraction_of([Add()], parse_kb(""), pa) == (("add", frozenset({E, P0})),)
    with pytest.raises(InconsistentIntermediate):
        abstraction_of([Fix((ins(Aa),))], parse_kb("tbox: A subclassof Bot\nabox@0:"), pa)


def _edge(m, d, letter, state=0):
    return next(e for e in m.edges(state) if e.letter == letter)


def test_mig_edge_examples():
    g, q = parse_kb("abox@0: A(a)"), parse_tcq("[A(a)]")
    d = build_rtdfa(g, q)
    m = build_mig(d, g)
    assert _edge(m, d, ("del",)).weight == 2

    g = parse_kb("abox@0:")
    d = build_rtdfa(g, q)
    m = build_mig(d, g)
    e = _edge(m, d, ("fix", frozenset({P0})))
    assert (e.atom, e.weight) == (Fix((ins(Aa),)), 1)
    e = _edge(m, d, ("add", frozenset({E, P0})))
    assert (e.atom, e.weight) == (Add(), 1)


def test_mig_rejects_foreign_tkb():
    d = build_rtdfa(parse_kb("abox@0:"), parse_tcq("[A(a)]"))
    with pytest.raises(ValueError):
        build_mig(d, parse_kb("abox@0: A(a)"))


def test_shortest_path_zero_hop():
    g = parse_kb("tbox: A subclassof Bot")
    d = build_rtdfa(g, parse_tcq("~[A(a)]"))
    path = shortest_accepted_path(build_mig(d, g), d)
    assert path.edges == () and path.cost == 0


def test_shortest_path_unreachable():
    g = parse_kb("abox@0: A(a)\nabox@1:")
    d = build_rtdfa(g, parse_tcq("G [A(a)]"))
    assert shortest_accepted_path(build_mig(d, g), d) is None


def test_shortest_path_prefers_cheaper_route():
    # repairing in place costs 2; deleting and re-adding costs 4
    g = parse_kb("tbox: B subclassof not A\nabox@0: B(a)")
    res = tkb_align(g, parse_tcq("[A(a)]"))
    assert res.cost == 2 and len(res.modification) == 1 and isinstance(res.modification[0], Fix)


def test_tkb_align_examples():
    res = tkb_align(parse_kb("abox@0:"), parse_tcq("[A(a)]"))
    assert (res.modification, res.cost) == ((Fix((ins(Aa),)),), 1)
    res = tkb_align(parse_kb("abox@0: A(a)"), parse_tcq("[EX y . A(y)]"))
    assert (res.modification, res.cost) == ((Fix(),), 0)


def test_next_instance_optimum():
    g, q = parse_kb("abox@0: A(a)"), parse_tcq("X [A(a)]")
    res = tkb_align(g, q)
    assert res.cost == 1 and res.modification == (Add(), Fix())
    assert res.aligned.aboxes == (E, frozenset({Aa}))
    assert tkb_align_brute(g, q, all_assertions(signature_of([Aa]), ["a", "f1"]), 2) == 1
    # fixing first and adding afterwards also works, at cost 2
    longer = (Fix(), Add((ins(Aa),)))
    assert tkb_solution_ok(g, longer, q) and cost_tkb_mod(longer, g.aboxes) == 2


def test_unsatisfiable_tbox_has_no_alignment():
    assert tkb_align(parse_kb("tbox: Top subclassof Bot\nabox@0:"), parse_tcq("[A(a)]")) is None


def test_check_tqe_examples():
    assert check_tqe(parse_kb("abox@0: A(a)"), parse_tcq("[A(a)]"))
    assert not check_tqe(parse_kb("abox@0: A(a)"), parse_tcq("X [A(a)]"))
    assert not check_tqe(parse_kb("abox@0:"), parse_tcq("~[A(a)]"))


def test_inconsistent_tkb_entails_vacuously():
    g = parse_kb("tbox: A subclassof Bot\nabox@0: A(a)")
    with pytest.warns(UserWarning, match="no model"):
        assert check_tqe(g, parse_tcq("[B(b)]"))
    assert tqe(g, parse_tcq("[B(b)]")).vacuous


def test_alignment_respects_the_cost_model():
    g, q = parse_kb("abox@0: A(a)"), parse_tcq("X [A(a)]")
    res = tkb_align(g, q, CostModel(abox_unit=5.0))
    assert res.cost == cost_tkb_mod(res.modification, g.aboxes, CostModel(abox_unit=5.0))
    assert res.cost == 5


def _random_eta(rng, cands, n_aboxes):
    atoms = []
    for _ in range(rng.randint(0, n_aboxes + 1)):
        picked = rng.sample(cands, rng.randint(0, min(2, len(cands))))
        mu = tuple(ins(x) if rng.random() < 0.7 else rem(x) for x in picked)
        atoms.append(rng.choice([Fix(mu), Add(mu), Del()]))
    return tuple(atoms)


CASES = [c.parsed() for c in TKB_CASES + TKB_EXTRA]


@settings(max_examples=150)
@given(st.sampled_from(range(len(CASES))), st.integers(0, 10**6))
def test_template_run_decides_entailment_of_the_modified_tkb(k, seed):
    g, q = CASES[k]
    rng = random.Random(seed)
    h = _random_eta(rng, tkb_candidates(g, q), len(g.aboxes))
    pa = prop_abstraction(q)
    try:
        word = abstraction_of(h, g, pa)
    except InconsistentIntermediate:
        return
    d = build_rtdfa(g, pa)
    s = 0
    for letter in word:
        s = d.step(s, letter)
        assert s is not None
    modified = TemporalKB(g.tbox, apply_tkb_mod(h, g.aboxes))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        entailed = check_tqe(modified, q)
    assert (s in d.final) == entailed
    if entailed:
        best = tkb_align(g, q)
        assert best is not None and best.cost <= cost_tkb_mod(h, g.aboxes) + 1e-9
