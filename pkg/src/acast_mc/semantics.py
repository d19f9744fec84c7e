"""Explicit game structure of an atom-level model.

States are Python ints: bit ``i < n_atoms`` is propositional atom ``i`` and
the visibility atom ``vis(v, a)`` lives at ``model.vis_bit(v, a)``.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

from .specdsl.elaborate import AtomModel, GroundCommand
from .specdsl.syntax import SpecError


class BudgetExceeded(RuntimeError):
    """A configured state or node budget was exhausted; no partial result is returned."""


class ProtocolError(ValueError):
    pass


DEFAULT_STATE_BUDGET = 1_000_000


@dataclass(frozen=True)
class Observation:
    agent: int
    visible: frozenset  # variable indices
    values: tuple  # (var index, value) for visible variables


class Arena:
    """Reachable part of the game structure induced by an AtomModel."""

    def __init__(self, model: AtomModel):
        self.model = model
        self.agents = model.agents
        n = model.n_agents
        self._vis_masks = [0] * n
        self._vis_bits = [[] for _ in range(n)]  # (var index, vis bit) per agent
        for a in range(n):
            for v in model.vars:
                bit = model.vis_bit(v.index, a)
                self._vis_masks[a] |= 1 << bit
                self._vis_bits[a].append((v.index, bit))
        self._value_mask_cache = [dict() for _ in range(n)]
        self._guard_req = []
        for a in range(n):
            reqs = []
            for cmd in model.commands[a]:
                req = 0
                for vi in cmd.guard_vars:
                    req |= 1 << model.vis_bit(vi, a)
                reqs.append(req)
            self._guard_req.append(tuple(reqs))
        self._effects = {}
        self._succ_cache = {}
        self.initial: list = []
        self.states: list = []
        self.index: dict = {}
        self.succ: dict = {}
        self.transitions = 0

    # observations -----------------------------------------------------
    def _value_mask(self, a: int, pattern: int) -> int:
        cache = self._value_mask_cache[a]
        mask = cache.get(pattern)
        if mask is None:
            mask = 0
            for vi, bit in self._vis_bits[a]:
                if pattern >> bit & 1:
                    mask |= self.model.var_mask(vi)
            cache[pattern] = mask
        return mask

    def obs_key(self, s: int, a: int) -> tuple:
        """Hashable observation of agent ``a``: its vis atoms plus visible values."""
        pattern = s & self._vis_masks[a]
        return (pattern, s & self._value_mask(a, pattern))

    def observation(self, s: int, a) -> Observation:
        a = self._agent(a)
        visible = frozenset(vi for vi, bit in self._vis_bits[a] if s >> bit & 1)
        values = tuple((vi, self.model.value_of(s, vi)) for vi in sorted(visible))
        return Observation(a, visible, values)

    def indist(self, s: int, t: int, a: int) -> bool:
        return self.obs_key(s, a) == self.obs_key(t, a)

    def _agent(self, a) -> int:
        if isinstance(a, str):
            return self.model.agent_id(a)
        if not 0 <= a < self.model.n_agents:
            raise SpecError(f"unknown agent index {a}")
        return a

    # protocol ------------------------------------------------------------
    def enabled(self, s: int, a: int) -> tuple:
        """Indices into ``model.all_commands(a)``; the null command only as fallback."""
        cmds = self.model.commands[a]
        reqs = self._guard_req[a]
        out = tuple(i for i, c in enumerate(cmds) if (s & reqs[i]) == reqs[i] and c.test(s))
        return out if out else (len(cmds),)

    def protocol(self, s: int, a) -> list:
        a = self._agent(a)
        return [self.model.all_commands(a)[i] for i in self.enabled(s, a)]

    def command(self, a: int, i: int) -> GroundCommand:
        return self.model.all_commands(a)[i]

    def effects(self, s: int, a: int) -> tuple:
        """Distinct (set, clear) effects of the enabled commands, first command index kept."""
        key = (s, a)
        eff = self._effects.get(key)
        if eff is None:
            seen = {}
            for i in self.enabled(s, a):
                c = self.command(a, i)
                seen.setdefault((c.set_mask, c.clear_mask), i)
            eff = tuple((sm, cm, i) for (sm, cm), i in seen.items())
            self._effects[key] = eff
        return eff

    # transitions ---------------------------------------------------------
    def step(self, s: int, joint) -> int:
        """Apply one command per agent (names or GroundCommands, in agent order)."""
        if len(joint) != self.model.n_agents:
            raise ProtocolError("joint action must give one command per agent")
        set_mask = clear_mask = 0
        for a, c in enumerate(joint):
            enabled = self.protocol(s, a)
            if isinstance(c, str):
                match = [e for e in enabled if e.name == c]
                if not match:
                    raise ProtocolError(f"command {c!r} not enabled for agent {self.agents[a]}")
                c = match[0]
            elif c not in enabled:
                raise ProtocolError(f"command {c.name!r} not enabled for agent {self.agents[a]}")
            set_mask |= c.set_mask
            clear_mask |= c.clear_mask
        return (s & ~clear_mask) | set_mask

    def successors(self, s: int, fixed: dict = None) -> tuple:
        """Successor states when agents in ``fixed`` (agent -> command index) are pinned."""
        fixed = fixed or {}
        key = (s, tuple(sorted(fixed.items())))
        out = self._succ_cache.get(key)
        if out is not None:
            return out
        base_set = base_clear = 0
        choices = []
        for a in range(self.model.n_agents):
            if a in fixed:
                c = self.command(a, fixed[a])
                base_set |= c.set_mask
                base_clear |= c.clear_mask
            else:
                choices.append([(sm, cm) for sm, cm, _ in self.effects(s, a)])
        result = set()
        for combo in itertools.product(*choices):
            sm, cm = base_set, base_clear
            for x, y in combo:
                sm |= x
                cm |= y
            result.add((s & ~cm) | sm)
        out = tuple(sorted(result))
        if len(self._succ_cache) < 2_000_000:
            self._succ_cache[key] = out
        return out

    def joint_actions(self, s: int):
        """All enabled joint actions as tuples of command indices."""
        return itertools.product(*(self.enabled(s, a) for a in range(self.model.n_agents)))

    # rendering -------------------------------------------------------------
    def describe(self, s: int) -> list:
        return self.model.describe(s)

    def label(self, s: int) -> str:
        return "{" + ",".join(self.describe(s)) + "}"

    def holds(self, expr, s: int) -> bool:
        from .specdsl.elaborate import evaluate

        return evaluate(expr, s)

    def dump(self) -> str:
        """Line-oriented text export: states first, then every transition."""
        lines = [f"# model {self.model.name}: {len(self.states)} states, {self.transitions} transitions"]
        for s in self.states:
            mark = "init " if s in self._initial_set else "state"
            lines.append(f"{mark} {self.index[s]} {self.label(s)}")
        for s in self.states:
            for joint in self.joint_actions(s):
                t = (s & ~self._joint_clear(s, joint)) | self._joint_set(s, joint)
                names = ",".join(
                    f"{self.agents[a]}:{self.command(a, i).name}" for a, i in enumerate(joint)
                )
                lines.append(f"{self.index[s]} --{names}--> {self.index[t]}")
        return "\n".join(lines) + "\n"

    def _joint_set(self, s, joint):
        m = 0
        for a, i in enumerate(joint):
            m |= self.command(a, i).set_mask
        return m

    def _joint_clear(self, s, joint):
        m = 0
        for a, i in enumerate(joint):
            m |= self.command(a, i).clear_mask
        return m


def initial_states(model: AtomModel) -> list:
    """Product of per-variable init choices, with declared and forced self-visibility."""
    base_vis = 0
    for v in model.vars:
        for a in v.visible_init:
            base_vis |= 1 << model.vis_bit(v.index, a)
    options = []
    for v in model.vars:
        if not v.init:
            raise SpecError(f"contradictory init constraints for {v.name}")
        bits = []
        for val in v.init:
            if v.is_bool:
                bits.append((1 << v.atoms[0]) if val == "true" else 0)
            else:
                bits.append(1 << v.atoms[v.values.index(val)])
        options.append(bits)
    out = []
    for combo in itertools.product(*options):
        s = base_vis
        for b in combo:
            s |= b
        out.append(s)
    return sorted(set(out))


def expand(model: AtomModel, state_budget: int = DEFAULT_STATE_BUDGET) -> Arena:
    """Breadth-first closure of the initial states under all enabled joint actions."""
    arena = Arena(model)
    init = initial_states(model)
    arena.initial = init
    arena._initial_set = frozenset(init)
    queue = deque()
    for s in init:
        arena.index[s] = len(arena.states)
        arena.states.append(s)
        queue.append(s)
    if len(arena.states) > state_budget:
        raise BudgetExceeded(f"state budget {state_budget} exceeded by initial states")
    while queue:
        s = queue.popleft()
        succ = arena.successors(s)
        arena.succ[s] = succ
        arena.transitions += len(succ)
        for t in succ:
            if t not in arena.index:
                if len(arena.states) >= state_budget:
                    raise BudgetExceeded(f"state budget {state_budget} exceeded during expansion")
                arena.index[t] = len(arena.states)
                arena.states.append(t)
                queue.append(t)
    arena._succ_cache.clear()
    return arena


# -- arena invariants --------------------------------------------------------


def check_invariants(arena: Arena) -> list:
    """Report breaches of self-visibility, one-hot encoding and protocol consistency."""
    model = arena.model
    problems = []
    for s in arena.states:
        for v in model.vars:
            if not s >> model.vis_bit(v.index, v.owner) & 1:
                problems.append(f"state {arena.index[s]}: owner cannot see {v.name}")
            if not v.is_bool and bin(s & model.var_mask(v.index)).count("1") != 1:
                problems.append(f"state {arena.index[s]}: one-hot broken for {v.name}")
    for a in range(model.n_agents):
        seen = {}
        for s in arena.states:
            key = arena.obs_key(s, a)
            en = tuple(arena.command(a, i).name for i in arena.enabled(s, a))
            prev = seen.setdefault(key, en)
            if prev != en:
                problems.append(
                    f"agent {model.agents[a]}: indistinguishable states with different protocols at state {arena.index[s]}"
                )
    return problems


def is_absorbing(arena: Arena, s: int) -> bool:
    return arena.successors(s) == (s,)
