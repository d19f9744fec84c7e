import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acast_mc.engine import (
    ACHIEVED,
    ALIVE,
    EngineError,
    Evaluator,
    NotAFormulaError,
    WitnessStrategy,
    evaluate,
    replay,
)
from acast_mc.formula import Atom
from acast_mc.oracle import gen_random_acast
from acast_mc.semantics import BudgetExceeded, expand

from conftest import core, load, tiny_source


def _game(arena, text, s0):
    ev = Evaluator(arena)
    f = core(text)
    result = ev.game_result(f, ev.initial_knowledge(f, s0))
    return result.game, result


def _root_triples(game):
    return {(game.arena.index[r], st) for _, r, st, _ in game.nodes[0][0]}


# -- initial macro-state -------------------------------------------------------------


def test_root_holds_both_confusable_starts(tiny):
    game, _ = _game(tiny, "<<a,b>> F y", tiny.initial[1])
    assert _root_triples(game) == {(0, ALIVE), (1, ALIVE)}


def test_trivial_goal_achieved_at_root(tiny):
    game, result = _game(tiny, "<<a,b>> (true U true)", tiny.initial[1])
    assert {st for _, st in _root_triples(game)} == {ACHIEVED}
    assert result.win and len(game.nodes) == 1


def test_observant_coalition_has_singleton_root(tiny):
    game, _ = _game(tiny, "<<e>> F y", tiny.initial[1])
    assert _root_triples(game) == {(1, ALIVE)}


# -- moves and successors -----------------------------------------------------------


def test_confused_member_gets_one_decision(tiny):
    game, _ = _game(tiny, "<<a,b>> F y", tiny.initial[1])
    # a and b confuse both anchors, so each has a single decision slot
    assert [m for m, _ in game.slots(0)] == [0, 1]
    null_a = len(tiny.model.commands[tiny.model.agent_id("a")])
    assert game.options(0)[0] == [null_a]


def test_adversary_branching_splits_by_broadcast(tiny):
    game, _ = _game(tiny, "<<a,b>> F y", tiny.initial[1])
    ((move, children),) = game.moves[0]
    assert len(children) == 2
    outcomes = [{tiny.index[r] for _, r, _, _ in game.nodes[c][0]} for c in children]
    assert sorted(map(sorted, outcomes)) == [[0], [2]]
    assert sum(len(game.nodes[c][0]) for c in children) == 4


def test_singleton_outcomes_for_deterministic_adversary(tiny_prime):
    game, _ = _game(tiny_prime, "<<a,b>> F y", tiny_prime.initial[1])
    for edges in game.moves:
        for _, children in edges or ():
            assert len(children) == 1


# -- solving ---------------------------------------------------------------------------


def test_tiny_eventually_y_fails(tiny):
    v = evaluate(tiny, core("<<a,b>> F y"), ("a", "b"))
    assert v.per_initial == [(tiny.initial[0], False), (tiny.initial[1], False)]
    assert not v.overall and not v.witnesses


def test_tiny_prime_eventually_y_holds(tiny_prime):
    assert evaluate(tiny_prime, core("<<a,b>> F y"), ("a", "b")).overall


def test_release_of_top_wins_vacuously(tiny):
    v = evaluate(tiny, core("<<a,b>> (false R true)"), ("a", "b"))
    assert v.overall
    for w in v.witnesses.values():
        assert replay(tiny, w, 10)["holds"]


def test_goal_true_initially(tiny):
    v = evaluate(tiny, core("<<a,b>> F !y"), ("a", "b"))
    assert v.overall
    for w in v.witnesses.values():
        out = replay(tiny, w, 0)
        # only the two root triples are visited
        assert out["holds"] and out["visited"] == len(w.game.nodes[w.root][0]) == 2


def test_environment_controls_x(tiny):
    assert not evaluate(tiny, core("<<a,b>> X x"), ("a", "b")).overall
    assert evaluate(tiny, core("<<e>> X x"), ("e",)).overall
    assert evaluate(tiny, core("<<e>> F y")).overall


def test_nested_formula(tiny_prime):
    f = core("<<a,b>> X <<a,b>> F y")
    assert evaluate(tiny_prime, f, ("a", "b")).overall


def test_atom_formula_is_labelling(tiny):
    v = evaluate(tiny, Atom("x"))
    assert v.per_initial == [(tiny.initial[0], False), (tiny.initial[1], True)]


def test_outer_coalition_must_cover_formula(tiny):
    with pytest.raises(NotAFormulaError):
        evaluate(tiny, core("<<e>> F y"), ("a", "b"))


def test_non_cast_arena_is_refused():
    src = tiny_source().replace("vis(x, b) := true", "vis(x, b) := false")
    arena = expand(load(src))
    with pytest.raises(EngineError):
        evaluate(arena, core("<<a,b>> F y"))


def test_node_budget_aborts_without_verdict(tiny):
    with pytest.raises(BudgetExceeded):
        evaluate(tiny, core("<<a,b>> F y"), node_budget=2)


# -- witnesses -------------------------------------------------------------------------


def test_witness_json_round_trip(tiny_prime):
    v = evaluate(tiny_prime, core("<<a,b>> F y"), ("a", "b"))
    for s0, w in v.witnesses.items():
        data = json.loads(w.dumps())
        assert data == w.to_json()
        out = replay(tiny_prime, w, 6)
        assert out == {**out, "holds": True, "violations": [], "unresolved": 0}


def test_replay_bound_too_short_is_unresolved(tiny_prime):
    v = evaluate(tiny_prime, core("<<a,b>> F y"), ("a", "b"))
    w = v.witnesses[tiny_prime.initial[0]]
    assert not replay(tiny_prime, w, 0)["holds"]


# -- audits on random arenas -----------------------------------------------------------

FORMULAS = ["<<B>> X p0", "<<B>> (p0 U p1)", "<<B>> (p0 R p1)", "<<B>> F <<B>> X p1", "!<<B>> G p0"]


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10**6), st.sampled_from(FORMULAS))
def test_games_are_determined_and_absorbing(seed, text):
    rm = gen_random_acast(seed)
    arena = expand(rm.model)
    f = core(text.replace("B", ",".join(rm.coalition)))
    ev = Evaluator(arena, audit=True)
    evaluate(arena, f, rm.coalition, evaluator=ev)
    for result in ev.results.values():
        result.game.check_determinacy()
        result.game.check_absorption()
        assert set(result.game.win_region) <= set(range(len(result.game.nodes)))


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_negated_next_matches_dual(seed):
    rm = gen_random_acast(seed)
    arena = expand(rm.model)
    B = ",".join(rm.coalition)
    left = evaluate(arena, core(f"!<<{B}>> X p0"), rm.coalition)
    right = evaluate(arena, core(f"[[{B}]] X !p0"), rm.coalition)
    assert left.per_initial == right.per_initial


def test_witness_strategy_names_commands(tiny_prime):
    v = evaluate(tiny_prime, core("<<a,b>> F y"), ("a", "b"))
    w = next(iter(v.witnesses.values()))
    assert isinstance(w, WitnessStrategy)
    names = {e["command"] for per in w.to_json()["moves"].values() for es in per.values() for e in es}
    assert names <= {"ga1", "null"}
