from hypothesis import given, settings
from hypothesis import strategies as st

from acast_mc.knowledge import agent_related, c_partition, d_related, e_related, history_related
from acast_mc.oracle import gen_random_acast
from acast_mc.semantics import expand

AB = ("a", "b")


def test_diagonal_pairs_related_via_a(tiny):
    s2, s1 = tiny.initial
    assert e_related(tiny, (s1, s1), (s2, s2), AB)


def test_reflexive(tiny):
    for s in tiny.states:
        assert e_related(tiny, s, s, AB) and d_related(tiny, s, s, AB)


def test_commonly_visible_difference_separates(tiny):
    def find(*names):
        return next(s for s in tiny.states if set(tiny.describe(s)) >= set(names) and "y" not in tiny.describe(s))

    lit = find("x", "vis(x,a)", "vis(x,b)")
    dark = find()
    assert "vis(x,a)" not in tiny.describe(dark)
    # both members see x set in one state and see nothing of x in the other
    assert not e_related(tiny, lit, dark, AB)


def test_c_partition_of_diagonal(tiny):
    s2, s1 = tiny.initial
    assert c_partition(tiny, [(s1, s1), (s2, s2)], AB) == [[(s1, s1), (s2, s2)]]


def test_c_partition_singleton(tiny):
    s = tiny.states[3]
    assert c_partition(tiny, [s], AB) == [[s]]


def test_c_partition_without_edges(tiny):
    # e sees x, so e alone separates the two initial states
    s2, s1 = tiny.initial
    assert c_partition(tiny, [s1, s2], ("e",)) == [[s1], [s2]]


def test_distributed_on_tiny(tiny):
    s2, s1 = tiny.initial
    assert d_related(tiny, s1, s2, AB)
    assert not d_related(tiny, s1, s2, ("a", "e"))


def test_history_relation(tiny):
    s2, s1 = tiny.initial
    t = tiny.succ[s1][0]
    rel = lambda u, v: agent_related(tiny, u, v, tiny.model.agent_id("a"))
    assert history_related((s1, t), (s1, t), rel)
    assert not history_related((s1,), (s1, t), rel)
    assert history_related((s1, t), (s2, t), rel)
    assert agent_related(tiny, (s1, t), (s2, t), 0)


@settings(max_examples=80, deadline=None)
@given(st.integers(min_value=0, max_value=10**6), st.data())
def test_distributed_implies_group(seed, data):
    rm = gen_random_acast(seed)
    arena = expand(rm.model)
    u = data.draw(st.sampled_from(arena.states))
    v = data.draw(st.sampled_from(arena.states))
    if d_related(arena, u, v, rm.coalition):
        assert e_related(arena, u, v, rm.coalition)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_c_partition_is_closure_of_group_relation(seed):
    rm = gen_random_acast(seed)
    arena = expand(rm.model)
    classes = c_partition(arena, arena.states, rm.coalition)
    assert sorted(s for c in classes for s in c) == sorted(arena.states)
    where = {s: i for i, c in enumerate(classes) for s in c}
    for u in arena.states:
        for v in arena.states:
            if e_related(arena, u, v, rm.coalition):
                assert where[u] == where[v]
    # each class is connected under the group relation
    for c in classes:
        reach, todo = {c[0]}, [c[0]]
        while todo:
            u = todo.pop()
            for v in c:
                if v not in reach and e_related(arena, u, v, rm.coalition):
                    reach.add(v)
                    todo.append(v)
        assert reach == set(c)
