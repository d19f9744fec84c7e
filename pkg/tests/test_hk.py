import pytest

from acast_mc.hk import TF_FORMULA, HkParams, attacker_values, gen_hk, prover_values, response_table
from acast_mc.semantics import expand
from acast_mc.specdsl import KEEP, parse_spec
from acast_mc.specdsl.elaborate import evaluate

from conftest import load

SMALL = HkParams(2, 1, 2, 2, 1)


@pytest.mark.parametrize("bad", [dict(n=0), dict(d=3), dict(c=0), dict(e1=0), dict(e2=0), dict(d=0)])
def test_invalid_params(bad):
    base = dict(n=2, d=1, c=1, e1=1, e2=1)
    with pytest.raises(ValueError):
        HkParams(**{**base, **bad})


def test_generation_is_deterministic():
    assert gen_hk(SMALL) == gen_hk(HkParams(2, 1, 2, 2, 1))
    assert response_table(HkParams(3, 1, 3, 4, 1, seed=1)) != response_table(HkParams(3, 1, 3, 4, 1, seed=2))


def test_response_ranges_are_disjoint():
    p = HkParams(3, 2, 2, 3, 2)
    own = set(attacker_values(p))
    for j in range(1, p.n + 1):
        assert not own & set(prover_values(p, j))
    for (j, _), v in response_table(p).items():
        assert v in prover_values(p, j)


def test_verifier_commands_pad_every_variable():
    model = load(gen_hk(SMALL))
    V, P, At = (model.agent_id(n) for n in ("V", "P", "At"))
    owned = set(model.owned_vars(V))
    for cmd in model.commands[V]:
        padded = {(vi, ai) for vi, ai, val in cmd.vis_assigns if val == KEEP}
        assert padded == {(vi, ai) for vi in owned for ai in (P, At)}, cmd.name


def test_colluding_execution_is_fixed():
    arena = expand(load(gen_hk(SMALL)))
    for s in arena.initial:
        names = set(arena.describe(s))
        assert {"P_far_1", "P_collude_1"} <= names
        assert "P_collude_2" not in names


def test_tf_formula_and_defines():
    assert TF_FORMULA == "<<P,At>> F (auth_via_help -> [[At]] G noAuth_after_help)"
    spec = parse_spec(gen_hk(SMALL))
    assert {name for name, _ in spec.defines} == {"auth_via_help", "noAuth_after_help"}


def test_single_execution_has_trivial_after_help():
    model = load(gen_hk(HkParams(1, 1, 1, 1, 1)))
    arena = expand(model)
    prop = model.proposition("noAuth_after_help")
    assert all(evaluate(prop, s) for s in arena.states)


def test_attack_path_exists_and_far_sessions_never_pass():
    model = load(gen_hk(SMALL))
    arena = expand(model)
    ok1 = model.proposition("ok_1")
    assert any(evaluate(ok1, s) for s in arena.states)
    for s in arena.states:
        names = set(arena.describe(s))
        assert not {"ok_2", "P_far_2"} <= names
    # an honest close prover can still be accepted in the other execution
    assert any({"ok_2"} <= set(arena.describe(s)) and "P_far_2" not in arena.describe(s) for s in arena.states)
