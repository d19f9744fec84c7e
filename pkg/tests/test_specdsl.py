import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acast_mc.hk import HkParams, gen_hk
from acast_mc.oracle import gen_random_acast
from acast_mc.semantics import expand
from acast_mc.specdsl import SpecError, desugar, expand_templates, format_spec, parse_spec, validate_spec
from acast_mc.specdsl.elaborate import Lit, evaluate

from conftest import load, tiny_source

ENUM_SRC = """
model colours
agent a {
  vars { x : {v1, v2, v3} init v1; }
  commands {
    command to2 : x = v1 ~> x := v2;
    command to3 : x = v2 ~> x := v3;
  }
}
"""


def test_minimal_source():
    spec = parse_spec("model m agent a { vars { y: bool init false } }")
    assert spec.name == "m"
    assert [a.name for a in spec.agents] == ["a"]
    assert [v.name for v in spec.agents[0].vars] == ["y"]


def test_assigning_foreign_variable_is_not_owner():
    src = """
    model m
    agent a { vars { y : bool init false; } }
    agent b { commands { command steal : true ~> y := true; } }
    """
    with pytest.raises(SpecError, match="not owner"):
        load(src)
    model = desugar(parse_spec(src, check=False))
    assert [v.kind for v in validate_spec(model)] == ["not owner"]


def test_syntax_error_carries_position():
    with pytest.raises(SpecError) as info:
        parse_spec("model m\nagent a { vars { y : bool init false; } commands { command c : y ~> ; }")
    assert info.value.line == 2


def test_undeclared_variable_in_guard():
    with pytest.raises(SpecError):
        load("model m agent a { vars { y : bool; } commands { command c : z ~> y := true; } }")


def test_hk_smallest_instance_parses():
    spec = parse_spec(gen_hk(HkParams(1, 1, 1, 1, 1)))
    assert [a.name for a in spec.agents] == ["P", "At", "V"]


# -- templates ----------------------------------------------------------------


def test_binder_over_two_values():
    src = """
    model m
    agent a {
      vars { x : {v1, v2} init v1; }
      commands { command set forall v in {v1, v2} : true ~> x := v; }
    }
    """
    spec = expand_templates(parse_spec(src))
    assert [c.name for c in spec.agents[0].commands] == ["set_v1", "set_v2"]


def test_no_binders_is_identity():
    spec = parse_spec(tiny_source())
    assert expand_templates(spec) == spec


def test_hk_collusive_copy_over_three_responses():
    spec = expand_templates(parse_spec(gen_hk(HkParams(1, 1, 1, 3, 1))))
    names = [c.name for a in spec.agents for c in a.commands if c.name.startswith("g2_")]
    assert names == ["g2_c1_p1_1", "g2_c1_p1_2", "g2_c1_p1_3"]


def test_empty_binder_set_is_rejected():
    src = "model m agent a { vars { y : bool; } commands { command c forall v in {} : true ~> y := true; } }"
    with pytest.raises(SpecError):
        expand_templates(parse_spec(src))


# -- atom encoding --------------------------------------------------------------


def test_encoding_sizes():
    model = load(ENUM_SRC + "agent b { vars { y : bool init false; } }")
    sizes = {v.name: len(v.atoms) for v in model.vars}
    assert sizes == {"x": 3, "y": 1}


def test_equality_guard_is_single_literal():
    model = load(ENUM_SRC)
    x = model.vars[0]
    assert model.value_lit(0, "v1") == Lit(x.atoms[0])


def test_enum_assignment_keeps_one_hot():
    model = load(ENUM_SRC)
    arena = expand(model)
    x = model.vars[0]
    seen = set()
    for s in arena.states:
        hot = [v for v, bit in zip(x.values, x.atoms) if s >> bit & 1]
        assert len(hot) == 1
        seen.add(hot[0])
    assert seen == {"v1", "v2", "v3"}
    cmd = model.commands[0][0]
    assert cmd.set_mask == 1 << x.atoms[1]
    assert cmd.clear_mask == (1 << x.atoms[0]) | (1 << x.atoms[2])


def test_define_expands_inside_guard():
    src = """
    model m
    agent a {
      vars { y : bool init false; z : bool init false; }
      commands { command c : ready ~> z := true; }
    }
    define ready := !y;
    """
    model = load(src)
    cmd = model.commands[0][0]
    y = model.vars[0].atoms[0]
    assert evaluate(cmd.guard, 0) and not evaluate(cmd.guard, 1 << y)
    assert 0 in cmd.guard_vars


# -- well-formedness ------------------------------------------------------------


def test_tiny_is_well_formed(tiny_model):
    assert validate_spec(tiny_model) == []


def test_self_visibility_revocation():
    src = "model m agent a { vars { y : bool; } commands { command c : true ~> vis(y, a) := false; } }"
    (v,) = validate_spec(load(src))
    assert (v.kind, v.agent, v.command) == ("self-visibility revocation", "a", "c")


def test_exclusive_control():
    src = "model m agent a { vars { x : bool; } } agent b { vars { x : bool; } }"
    kinds = [v.kind for v in validate_spec(load(src))]
    assert kinds == ["exclusive control"]


def test_duplicate_assignment():
    src = "model m agent a { vars { y : bool; } commands { command c : true ~> y := true, y := false; } }"
    assert [v.kind for v in validate_spec(load(src))] == ["duplicate assignment"]


def test_foreign_visibility_test():
    src = """
    model m
    agent a { vars { y : bool; } commands { command c : vis(y, b) ~> y := true; } }
    agent b { }
    """
    assert [v.kind for v in validate_spec(load(src))] == ["foreign visibility test"]


# -- pretty printing ------------------------------------------------------------


@pytest.mark.parametrize("params", [HkParams(1, 1, 1, 1, 1), HkParams(2, 1, 2, 2, 1), HkParams(3, 2, 2, 1, 2, seed=5)])
def test_hk_source_is_print_parse_fixpoint(params):
    spec = parse_spec(gen_hk(params))
    assert parse_spec(format_spec(spec)) == spec
    assert format_spec(parse_spec(format_spec(spec))) == format_spec(spec)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_random_source_round_trips(seed):
    spec = parse_spec(gen_random_acast(seed).source)
    assert parse_spec(format_spec(spec)) == spec


def test_every_state_of_enum_model_is_valued():
    model = load(ENUM_SRC)
    for s in expand(model).states:
        assert model.valuation(s)["x"] in {"v1", "v2", "v3"}


def test_binder_product_cardinality():
    src = """
    model m
    agent a {
      vars { x : {u, v} init u; y : {p, q, r} init p; }
      commands { command c forall i in {u, v} forall j in dom(y) : true ~> x := i, y := j; }
    }
    """
    names = [c.name for c in expand_templates(parse_spec(src)).agents[0].commands]
    assert names == [f"c_{i}_{j}" for i, j in itertools.product("uv", "pqr")]


def test_expand_templates_is_idempotent():
    spec = parse_spec(gen_hk(HkParams(2, 1, 2, 2, 1)))
    once = expand_templates(spec)
    assert expand_templates(once) == once


def test_duplicate_agent():
    with pytest.raises(SpecError, match="duplicate"):
        parse_spec("model m agent a { } agent a { }")


def test_comparison_outside_domain():
    with pytest.raises(SpecError):
        load(ENUM_SRC.replace("x = v1 ~>", "x = v9 ~>"))
