"""Brute-force reference evaluator, random coalition-cast models and the shared-knowledge probe.

The evaluator follows the satisfaction relation literally on finite
unrollings: a coalition formula at history h quantifies over uniform
strategies (functions of each member's observation sequence), over every
same-length history some member confuses with h, and over every path
consistent with the strategy. It only accepts arenas where every run is
absorbed within the horizon, so the unrolling is exact.
"""

from __future__ import annotations

import itertools
import random
import sys
from dataclasses import dataclass
from typing import Optional

from .formula import And, Atom, CoalU, CoalX, Not
from .specdsl import desugar, parse_spec
from .specdsl.elaborate import compile_expr


class OracleError(RuntimeError):
    pass


def absorption_depth(arena) -> Optional[int]:
    """Longest number of steps before a run from S0 is absorbed; None if some run never is."""
    depth = {}
    on_stack = set()
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

    def visit(s):
        if s in depth:
            return depth[s]
        succ = arena.succ[s]
        if succ == (s,):
            depth[s] = 0
            return 0
        if s in on_stack or s in succ:
            raise _Cycle
        on_stack.add(s)
        d = 1 + max(visit(t) for t in succ)
        on_stack.discard(s)
        depth[s] = d
        return d

    try:
        return max(visit(s) for s in arena.initial)
    except _Cycle:
        return None


class _Cycle(Exception):
    pass


def check_absorbing(arena, horizon: int) -> None:
    d = absorption_depth(arena)
    if d is None or d > horizon:
        raise OracleError(f"non-absorbing at horizon {horizon}")


class Oracle:
    def __init__(self, arena, horizon: int, budget: int = 5_000_000):
        check_absorbing(arena, horizon)
        self.arena = arena
        self.H = horizon
        self.budget = budget
        self.work = 0
        self._props = {}
        self._memo = {}
        sys.setrecursionlimit(max(sys.getrecursionlimit(), 100000))

    def _prop(self, name):
        fn = self._props.get(name)
        if fn is None:
            fn = self._props[name] = compile_expr(self.arena.model.proposition(name))
        return fn

    def holds(self, f, h: tuple) -> bool:
        if isinstance(f, Atom):
            return self._prop(f.name)(h[-1])
        if isinstance(f, Not):
            return not self.holds(f.arg, h)
        if isinstance(f, And):
            return self.holds(f.left, h) and self.holds(f.right, h)
        key = (f, h)
        out = self._memo.get(key)
        if out is None:
            out = self._memo[key] = self._coalition(f, h)
        return out

    # -- coalition operator ------------------------------------------------------
    def _obs(self, h, b):
        return tuple(self.arena.obs_key(s, b) for s in h)

    def confusable(self, h: tuple, members) -> list:
        """All histories from S0 of the same length that some member confuses with h."""
        arena = self.arena
        out = []

        def grow(prefix, alive):
            i = len(prefix)
            if i == len(h):
                out.append(prefix)
                return
            cands = arena.initial if i == 0 else arena.succ[prefix[-1]]
            for s in cands:
                still = tuple(b for b in alive if arena.obs_key(s, b) == arena.obs_key(h[i], b))
                if still:
                    grow(prefix + (s,), still)

        grow((), tuple(members))
        return out

    def _status(self, phi, h, n, prev):
        """Goal bookkeeping of history h; ``prev`` is the status of its parent (None at start)."""
        if isinstance(phi, CoalX):
            if len(h) == n:
                return "ALIVE"
            return "ACHIEVED" if self.holds(phi.arg, h) else "FAILED"
        if prev in ("ACHIEVED", "FAILED", "RELEASED", "VIOLATED"):
            return prev
        if isinstance(phi, CoalU):
            if self.holds(phi.right, h):
                return "ACHIEVED"
            return "ALIVE" if self.holds(phi.left, h) else "FAILED"
        if not self.holds(phi.right, h):
            return "VIOLATED"
        return "RELEASED" if self.holds(phi.left, h) else "ONGOING"

    def _coalition(self, phi, h) -> bool:
        arena = self.arena
        members = sorted(arena.model.agent_id(a) for a in phi.coalition)
        n = len(h)
        limit = max(n, self.H + 1) + 1
        starts = self.confusable(h, members)
        pending = None
        for g in starts:
            pending = ((g, self._status(phi, g, n, None)), pending)
        assign = {}

        def search(pending) -> bool:
            self.work += 1
            if self.work > self.budget:
                raise OracleError("oracle budget exceeded")
            while pending is not None:
                (g, st), rest = pending
                if st in ("ACHIEVED", "RELEASED"):
                    pending = rest
                    continue
                if st in ("FAILED", "VIOLATED"):
                    return False
                if len(g) >= limit:
                    if st == "ALIVE":
                        return False
                    pending = rest
                    continue
                break
            if pending is None:
                return True
            (g, st), rest = pending
            r = g[-1]
            keys = {b: (b, self._obs(g, b)) for b in members}
            free = [b for b in members if keys[b] not in assign]
            for choice in itertools.product(*(arena.enabled(r, b) for b in free)):
                for b, c in zip(free, choice):
                    assign[keys[b]] = c
                fixed = {b: assign[keys[b]] for b in members}
                nxt = rest
                for s2 in arena.successors(r, fixed):
                    g2 = g + (s2,)
                    nxt = ((g2, self._status(phi, g2, n, st)), nxt)
                if search(nxt):
                    for b in free:
                        del assign[keys[b]]
                    return True
                for b in free:
                    del assign[keys[b]]
            return False

        return search(pending)


def oracle_eval(arena, f, s0: int, horizon: int, budget: int = 5_000_000) -> bool:
    """Truth of core formula ``f`` at the one-state history ``(s0,)``."""
    return Oracle(arena, horizon, budget).holds(f, (s0,))


# -- random coalition-cast models --------------------------------------------------


@dataclass
class RandomModel:
    source: str
    model: object
    coalition: tuple
    horizon: int


def _random_source(rng: random.Random, n_atoms: int, n_agents: int, seed: int) -> tuple:
    agents = [f"a{i}" for i in range(n_agents)]
    k = rng.randint(1, n_agents - 1)
    insiders = agents[:k]
    owners = [rng.choice(agents) for _ in range(n_atoms)]
    if all(o in insiders for o in owners):
        owners[rng.randrange(n_atoms)] = rng.choice(agents[k:])
    var = [f"p{i}" for i in range(n_atoms)]
    lines = [f"model random_{seed}", ""]
    for a in agents:
        own = [v for v, o in zip(var, owners) if o == a]
        others = [b for b in agents if b != a]
        lines.append(f"agent {a} {{")
        lines.append("  vars {")
        for v in own:
            init = "false" if rng.random() < 0.6 else "any"
            # non-owner members share one initial view, so idling keeps it uniform
            shared = rng.random() < 0.5
            seen = [b for b in others if (shared if b in insiders else rng.random() < 0.5)]
            vis = f" visible {{{', '.join(seen)}}}" if seen else ""
            lines.append(f"    {v} : bool init {init}{vis};")
        lines.append("  }")
        lines.append("  commands {")
        for ci in range(rng.randint(1, 3) if own else 0):
            target = rng.choice(own)
            guard = [f"!{target}"]
            if rng.random() < 0.6:
                other = rng.choice(var)
                if other != target:
                    guard.append(other if rng.random() < 0.5 else f"!{other}")
            assigns = [f"{target} := true"]
            extra = [v for v in own if v != target and rng.random() < 0.3]
            assigns += [f"{v} := true" for v in extra]
            for u in own:
                if a in insiders:
                    t = rng.choice(["true", "false"])
                    assigns += [f"vis({u}, {b}) := {t}" for b in insiders if b != a]
                    assigns += [f"vis({u}, {b}) := {rng.choice(['true', 'false'])}"
                                for b in agents[k:] if b != a and rng.random() < 0.5]
                else:
                    t = rng.choice(["true", "false"])
                    assigns += [f"vis({u}, {b}) := {t}" for b in insiders]
                    assigns += [f"vis({u}, {b}) := {rng.choice(['true', 'false'])}"
                                for b in agents[k:] if b != a and rng.random() < 0.5]
            lines.append(f"    command c{ci} : {' & '.join(guard)} ~> {', '.join(assigns)};")
        lines.append("  }")
        lines.append("}")
        lines.append("")
    return "\n".join(lines), tuple(insiders)


def gen_random_acast(seed: int, n_atoms: Optional[int] = None, n_agents: Optional[int] = None,
                     max_states: int = 60) -> RandomModel:
    """Deterministic random model that is B-cast for every nonempty B inside its coalition.

    Every command switches one of its owner's false variables to true, so all
    runs are absorbed within ``n_atoms`` steps.
    """
    from .semantics import BudgetExceeded, expand

    rng = random.Random(seed)
    for _ in range(1000):
        na = n_atoms or rng.randint(2, 5)
        ng = n_agents or rng.randint(2, 4)
        if not (1 <= na <= 5 and 2 <= ng <= 4):
            raise ValueError("need 1..5 atoms and 2..4 agents")
        source, coalition = _random_source(rng, na, ng, seed)
        model = desugar(parse_spec(source))
        try:
            expand(model, state_budget=max_states)
        except BudgetExceeded:
            continue
        return RandomModel(source, model, coalition, na)
    raise RuntimeError("could not generate a small enough model")


# -- knowledge sharing probe --------------------------------------------------------


def lemma1_probe(arena, A, seed: int, depth: int) -> Optional[dict]:
    """Look for histories that break the shared-knowledge consequence of coalition casting.

    A uniform joint strategy is drawn at random (one command per member and
    observation sequence). All histories of length <= ``depth`` consistent with
    it are grouped by length and common-knowledge class; two histories with the
    same first state in one class must be indistinguishable for every member
    and receive the same command from every member.
    """
    rng = random.Random(seed)
    members = sorted(arena.model.agent_id(a) if isinstance(a, str) else a for a in A)
    choice = {}

    def act(h, b):
        key = (b, tuple(arena.obs_key(s, b) for s in h))
        c = choice.get(key)
        if c is None:
            c = choice[key] = rng.choice(arena.enabled(h[-1], b))
        return c

    layer = [(q,) for q in arena.initial]
    for length in range(1, depth + 1):
        cex = _check_layer(arena, layer, members, act)
        if cex is not None:
            cex["length"] = length
            return cex
        if length == depth:
            break
        nxt = []
        for h in layer:
            fixed = {b: act(h, b) for b in members}
            nxt.extend(h + (s,) for s in arena.successors(h[-1], fixed))
        layer = sorted(set(nxt))
    return None


def _check_layer(arena, layer, members, act):
    from .knowledge import c_partition

    for cls in c_partition(arena, layer, members):
        by_start = {}
        for h in cls:
            by_start.setdefault(h[0], []).append(h)
        for group in by_start.values():
            h1 = group[0]
            for h2 in group[1:]:
                for b in members:
                    o1 = [arena.obs_key(s, b) for s in h1]
                    o2 = [arena.obs_key(s, b) for s in h2]
                    if o1 != o2:
                        return {"kind": "not distributed-knowledge related", "agent": arena.agents[b],
                                "h1": [arena.index[s] for s in h1], "h2": [arena.index[s] for s in h2]}
                    if act(h1, b) != act(h2, b):
                        return {"kind": "different prescribed actions", "agent": arena.agents[b],
                                "h1": [arena.index[s] for s in h1], "h2": [arena.index[s] for s in h2]}
    return None
