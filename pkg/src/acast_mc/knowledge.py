"""Group, common and distributed knowledge relations over states, pairs and histories.

Elements are either single states (ints) or tuples of states compared
componentwise, so ``(q, r)`` pairs and whole histories share the same code.
"""

from __future__ import annotations

from typing import Callable, Iterable


def _as_tuple(u) -> tuple:
    return u if isinstance(u, tuple) else (u,)


def agent_related(arena, u, v, a: int) -> bool:
    u, v = _as_tuple(u), _as_tuple(v)
    if len(u) != len(v):
        return False
    return all(arena.obs_key(x, a) == arena.obs_key(y, a) for x, y in zip(u, v))


def _ids(arena, A) -> list:
    return [arena.model.agent_id(a) if isinstance(a, str) else a for a in A]


def e_related(arena, u, v, A) -> bool:
    """Some member cannot tell u from v."""
    return any(agent_related(arena, u, v, a) for a in _ids(arena, A))


def d_related(arena, u, v, A) -> bool:
    """No member can tell u from v."""
    return all(agent_related(arena, u, v, a) for a in _ids(arena, A))


def obs_signature(arena, u, a: int) -> tuple:
    return tuple(arena.obs_key(x, a) for x in _as_tuple(u))


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def c_partition(arena, U: Iterable, A) -> list:
    """Common-knowledge classes of U: components of the group-knowledge graph on U.

    Each agent's relation is an equivalence, so bucketing by observation and
    joining every bucket gives the components in linear time.
    """
    items = list(dict.fromkeys(U))
    uf = _UnionFind(len(items))
    for a in _ids(arena, A):
        first = {}
        for i, u in enumerate(items):
            j = first.setdefault(obs_signature(arena, u, a), i)
            if j != i:
                uf.union(i, j)
    classes = {}
    for i, u in enumerate(items):
        classes.setdefault(uf.find(i), []).append(u)
    return [classes[k] for k in sorted(classes)]


def history_related(h1, h2, rel: Callable) -> bool:
    """Statewise extension of a state relation to equal-length histories."""
    if len(h1) != len(h2) or not h1:
        return False
    return all(rel(x, y) for x, y in zip(h1, h2))
