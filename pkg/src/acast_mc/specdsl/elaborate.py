"""Template expansion and desugaring of a ModelSpec into an atom-level model."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from . import syntax as S
from .syntax import SpecError

# -- atom-level boolean expressions ----------------------------------------


@dataclass(frozen=True)
class Lit:
    """True iff bit ``bit`` is set in the state."""

    bit: int


@dataclass(frozen=True)
class AConst:
    value: bool


@dataclass(frozen=True)
class ANot:
    arg: object


@dataclass(frozen=True)
class AAnd:
    args: tuple


@dataclass(frozen=True)
class AOr:
    args: tuple


TRUE = AConst(True)
FALSE = AConst(False)


def a_not(e):
    if isinstance(e, AConst):
        return AConst(not e.value)
    if isinstance(e, ANot):
        return e.arg
    return ANot(e)


def a_and(*args):
    flat = []
    for a in args:
        if a == FALSE:
            return FALSE
        if a == TRUE:
            continue
        flat.extend(a.args if isinstance(a, AAnd) else (a,))
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else AAnd(tuple(flat))


def a_or(*args):
    flat = []
    for a in args:
        if a == TRUE:
            return TRUE
        if a == FALSE:
            continue
        flat.extend(a.args if isinstance(a, AOr) else (a,))
    if not flat:
        return FALSE
    return flat[0] if len(flat) == 1 else AOr(tuple(flat))


def evaluate(e, state: int) -> bool:
    if isinstance(e, Lit):
        return bool(state >> e.bit & 1)
    if isinstance(e, AConst):
        return e.value
    if isinstance(e, ANot):
        return not evaluate(e.arg, state)
    if isinstance(e, AAnd):
        return all(evaluate(a, state) for a in e.args)
    return any(evaluate(a, state) for a in e.args)


def _source(e) -> str:
    if isinstance(e, Lit):
        return f"(s >> {e.bit} & 1)"
    if isinstance(e, AConst):
        return "True" if e.value else "False"
    if isinstance(e, ANot):
        return f"(not {_source(e.arg)})"
    op = " and " if isinstance(e, AAnd) else " or "
    return "(" + op.join(_source(a) for a in e.args) + ")"


def compile_expr(e):
    """Compile an atom-level expression into a predicate on integer states."""
    return eval("lambda s: bool(" + _source(e) + ")")  # noqa: S307 - generated from our own AST


def literal_bits(e) -> set:
    if isinstance(e, Lit):
        return {e.bit}
    if isinstance(e, AConst):
        return set()
    if isinstance(e, ANot):
        return literal_bits(e.arg)
    out = set()
    for a in e.args:
        out |= literal_bits(a)
    return out


# -- template expansion ----------------------------------------------------


def _subst_expr(e, env):
    if isinstance(e, S.Name):
        return S.Name(env.get(e.name, e.name))
    if isinstance(e, S.Cmp):
        return S.Cmp(env.get(e.var, e.var), env.get(e.rhs, e.rhs), e.negated)
    if isinstance(e, S.VisTest):
        return S.VisTest(env.get(e.var, e.var), env.get(e.agent, e.agent))
    if isinstance(e, S.Not):
        return S.Not(_subst_expr(e.arg, env))
    if isinstance(e, (S.And, S.Or, S.Implies)):
        return type(e)(_subst_expr(e.left, env), _subst_expr(e.right, env))
    return e


def _subst_assign(a, env):
    if isinstance(a, S.VisAssign):
        return S.VisAssign(env.get(a.var, a.var), env.get(a.agent, a.agent), a.value)
    return S.Assign(env.get(a.var, a.var), env.get(a.value, a.value))


def expand_templates(spec: S.ModelSpec) -> S.ModelSpec:
    """Ground every command template: one command per binder valuation."""
    table = spec.var_table()
    agents = []
    for agent in spec.agents:
        commands = []
        for cmd in agent.commands:
            if not cmd.binders:
                commands.append(cmd)
                continue
            symbols, sets = [], []
            for sym, bset in cmd.binders:
                if bset.dom_of is not None:
                    if bset.dom_of not in table:
                        raise SpecError(f"undeclared variable {bset.dom_of!r}", cmd.line)
                    values = table[bset.dom_of].values
                else:
                    values = bset.values
                if not values:
                    raise SpecError(f"empty binder set for {sym!r} in command {cmd.name!r}", cmd.line)
                symbols.append(sym)
                sets.append(values)
            for combo in itertools.product(*sets):
                env = dict(zip(symbols, combo))
                commands.append(
                    S.CommandTemplate(
                        "_".join((cmd.name,) + combo),
                        (),
                        _subst_expr(cmd.guard, env),
                        tuple(_subst_assign(a, env) for a in cmd.assignments),
                        cmd.line,
                    )
                )
        agents.append(S.AgentDecl(agent.name, agent.vars, tuple(commands), agent.line))
    return S.ModelSpec(spec.name, tuple(agents), spec.defines)


# -- atom model ------------------------------------------------------------


@dataclass(frozen=True)
class VarInfo:
    index: int
    name: str
    owner: int
    values: tuple
    is_bool: bool
    atoms: tuple  # bit per value (for bool: the single atom bit)
    init: tuple  # allowed initial values
    visible_init: frozenset  # agent indices seeing the variable initially


@dataclass(frozen=True)
class GroundCommand:
    name: str
    agent: int
    guard: object
    guard_vars: frozenset  # variables whose propositional atoms occur in the guard
    guard_vis: tuple  # (var, agent) pairs tested in the guard
    set_mask: int
    clear_mask: int
    assigns: tuple  # ((var index, value), ...)
    vis_assigns: tuple  # ((var index, agent index, True | False | KEEP), ...)
    duplicates: tuple = ()  # variables or vis atoms assigned more than once
    foreign: tuple = ()  # variables assigned though not owned by the agent
    line: Optional[int] = None
    is_null: bool = False

    def __post_init__(self):
        object.__setattr__(self, "test", compile_expr(self.guard))


@dataclass
class AtomModel:
    name: str
    agents: tuple
    vars: tuple
    atom_names: tuple
    commands: tuple  # per agent: tuple of GroundCommand (declared only)
    nulls: tuple  # per agent: the implicit null command
    defines: dict
    declarations: tuple = ()  # ((var name, agent index), ...) every declaration seen
    agent_index: dict = field(default_factory=dict)
    var_index: dict = field(default_factory=dict)

    def __post_init__(self):
        self.agent_index = {a: i for i, a in enumerate(self.agents)}
        self.var_index = {v.name: v.index for v in self.vars}
        self.n_atoms = len(self.atom_names)
        self.n_agents = len(self.agents)
        self._masks = [sum(1 << b for b in v.atoms) for v in self.vars]
        self._owned = [tuple(v.index for v in self.vars if v.owner == a) for a in range(self.n_agents)]

    # bits ---------------------------------------------------------------
    def vis_bit(self, var: int, agent: int) -> int:
        return self.n_atoms + var * self.n_agents + agent

    def var_mask(self, var: int) -> int:
        return self._masks[var]

    def owned_vars(self, agent: int) -> tuple:
        return self._owned[agent]

    def value_lit(self, var: int, value: str):
        v = self.vars[var]
        if v.is_bool:
            lit = Lit(v.atoms[0])
            if value == "true":
                return lit
            if value == "false":
                return ANot(lit)
            raise SpecError(f"type mismatch: {value!r} is not a value of {v.name}")
        if value not in v.values:
            raise SpecError(f"type mismatch: {value!r} is not a value of {v.name}")
        return Lit(v.atoms[v.values.index(value)])

    def value_of(self, state: int, var: int) -> str:
        v = self.vars[var]
        if v.is_bool:
            return "true" if state >> v.atoms[0] & 1 else "false"
        for val, bit in zip(v.values, v.atoms):
            if state >> bit & 1:
                return val
        return "?"

    # propositions ---------------------------------------------------------
    def proposition(self, name: str):
        """Atom-level expression for a formula atom (define, bool var or ``x=v``)."""
        if name == "true":
            return TRUE
        if name == "false":
            return FALSE
        if name in self.defines:
            return self.defines[name]
        if "=" in name:
            var, _, value = name.partition("=")
            if var not in self.var_index:
                raise SpecError(f"unknown proposition {name!r}")
            return self.value_lit(self.var_index[var], value)
        if name in self.var_index:
            v = self.vars[self.var_index[name]]
            if not v.is_bool:
                raise SpecError(f"enum variable {name!r} used as a proposition")
            return Lit(v.atoms[0])
        raise SpecError(f"unknown proposition {name!r}")

    def agent_id(self, name: str) -> int:
        try:
            return self.agent_index[name]
        except KeyError:
            raise SpecError(f"unknown agent {name!r}") from None

    def all_commands(self, agent: int) -> tuple:
        return self.commands[agent] + (self.nulls[agent],)

    # rendering -------------------------------------------------------------
    def describe(self, state: int) -> list:
        """Sorted list of true atom names (propositional, then visibility)."""
        props = [self.atom_names[i] for i in range(self.n_atoms) if state >> i & 1]
        vis = []
        for v in self.vars:
            for a, agent in enumerate(self.agents):
                if state >> self.vis_bit(v.index, a) & 1:
                    vis.append(f"vis({v.name},{agent})")
        return sorted(props) + sorted(vis)

    def valuation(self, state: int) -> dict:
        return {v.name: self.value_of(state, v.index) for v in self.vars}


class _Resolver:
    def __init__(self, model_vars, var_index, agent_index, defines_src):
        self.vars = model_vars
        self.var_index = var_index
        self.agent_index = agent_index
        self.defines_src = dict(defines_src)
        self.defines = {}
        self._active = set()
        self.n_atoms = sum(len(v.atoms) for v in model_vars)
        self.n_agents = len(agent_index)

    def lit(self, var: str, value: str):
        v = self.vars[self.var_index[var]]
        if v.is_bool:
            if value not in ("true", "false"):
                raise SpecError(f"type mismatch: {value!r} is not a value of {var}")
            lit = Lit(v.atoms[0])
            return lit if value == "true" else ANot(lit)
        if value not in v.values:
            raise SpecError(f"type mismatch: {value!r} is not a value of {var}")
        return Lit(v.atoms[v.values.index(value)])

    def define(self, name):
        if name in self.defines:
            return self.defines[name]
        if name in self._active:
            raise SpecError(f"cyclic definition of {name!r}")
        self._active.add(name)
        e = self.expr(self.defines_src[name])
        self._active.discard(name)
        self.defines[name] = e
        return e

    def expr(self, e, vars_out: Optional[set] = None, vis_out: Optional[list] = None):
        if isinstance(e, S.Const):
            return AConst(e.value)
        if isinstance(e, S.Name):
            if e.name in self.var_index:
                v = self.vars[self.var_index[e.name]]
                if not v.is_bool:
                    raise SpecError(f"type mismatch: enum variable {e.name!r} used as a boolean")
                if vars_out is not None:
                    vars_out.add(v.index)
                return Lit(v.atoms[0])
            if e.name in self.defines_src:
                return self.define(e.name)
            raise SpecError(f"undeclared variable {e.name!r}")
        if isinstance(e, S.Cmp):
            if e.var not in self.var_index:
                raise SpecError(f"undeclared variable {e.var!r}")
            if vars_out is not None:
                vars_out.add(self.var_index[e.var])
            left = self.vars[self.var_index[e.var]]
            if e.rhs in self.var_index and e.rhs not in left.values:
                right = self.vars[self.var_index[e.rhs]]
                if vars_out is not None:
                    vars_out.add(right.index)
                common = [x for x in left.values if x in right.values]
                res = a_or(*(a_and(self.lit(left.name, x), self.lit(right.name, x)) for x in common))
            else:
                res = self.lit(e.var, e.rhs)
            return a_not(res) if e.negated else res
        if isinstance(e, S.VisTest):
            if e.var not in self.var_index:
                raise SpecError(f"undeclared variable {e.var!r}")
            if e.agent not in self.agent_index:
                raise SpecError(f"unknown agent {e.agent!r}")
            vi, ai = self.var_index[e.var], self.agent_index[e.agent]
            if vis_out is not None:
                vis_out.append((vi, ai))
            return Lit(self.n_atoms + vi * self.n_agents + ai)
        if isinstance(e, S.Not):
            return a_not(self.expr(e.arg, vars_out, vis_out))
        left = self.expr(e.left, vars_out, vis_out)
        right = self.expr(e.right, vars_out, vis_out)
        if isinstance(e, S.And):
            return a_and(left, right)
        if isinstance(e, S.Or):
            return a_or(left, right)
        return a_or(a_not(left), right)


def desugar(spec: S.ModelSpec) -> AtomModel:
    """Lower a (template-free) ModelSpec to the atom level with one-hot enums."""
    if any(c.binders for a in spec.agents for c in a.commands):
        spec = expand_templates(spec)
    agent_names = tuple(a.name for a in spec.agents)
    agent_index = {a: i for i, a in enumerate(agent_names)}

    declarations = []
    infos = []
    atom_names = []
    var_index = {}
    for ai, agent in enumerate(spec.agents):
        for decl in agent.vars:
            declarations.append((decl.name, ai))
            if decl.name in var_index:
                continue
            if decl.is_bool:
                bits = (len(atom_names),)
                atom_names.append(decl.name)
            else:
                bits = tuple(range(len(atom_names), len(atom_names) + len(decl.domain)))
                atom_names.extend(f"{decl.name}={val}" for val in decl.domain)
            init = decl.values if decl.init is None else decl.init
            visible = frozenset(agent_index[w] for w in decl.visible_to if w in agent_index) | {ai}
            var_index[decl.name] = len(infos)
            infos.append(VarInfo(len(infos), decl.name, ai, decl.values, decl.is_bool, bits, tuple(init), visible))

    res = _Resolver(infos, var_index, agent_index, spec.defines)
    n_atoms = len(atom_names)
    n_agents = len(agent_names)

    atom_owner = {bit: v.index for v in infos for bit in v.atoms}

    def vis_bit(vi, ai):
        return n_atoms + vi * n_agents + ai

    commands = []
    nulls = []
    for ai, agent in enumerate(spec.agents):
        ground = []
        for cmd in agent.commands:
            gvars, gvis = set(), []
            guard = res.expr(cmd.guard, gvars, gvis)
            for bit in literal_bits(guard):
                if bit < n_atoms:
                    gvars.add(atom_owner[bit])
                elif (pair := divmod(bit - n_atoms, n_agents)) not in gvis:
                    gvis.append(pair)
            set_mask = clear_mask = 0
            assigns, vis_assigns, seen, dups, foreign = [], [], set(), [], []
            for a in cmd.assignments:
                if a.var not in var_index:
                    raise SpecError(f"undeclared variable {a.var!r}", cmd.line)
                vi = var_index[a.var]
                v = infos[vi]
                if v.owner != ai:
                    foreign.append(a.var)
                if isinstance(a, S.VisAssign):
                    if a.agent not in agent_index:
                        raise SpecError(f"unknown agent {a.agent!r}", cmd.line)
                    target = agent_index[a.agent]
                    key = ("vis", vi, target)
                    vis_assigns.append((vi, target, a.value))
                    if a.value is True:
                        set_mask |= 1 << vis_bit(vi, target)
                        clear_mask &= ~(1 << vis_bit(vi, target))
                    elif a.value is False:
                        clear_mask |= 1 << vis_bit(vi, target)
                        set_mask &= ~(1 << vis_bit(vi, target))
                else:
                    key = ("val", vi)
                    assigns.append((vi, a.value))
                    if v.is_bool:
                        if a.value not in ("true", "false"):
                            raise SpecError(f"type mismatch: {a.value!r} is not a value of {v.name}", cmd.line)
                        bit = 1 << v.atoms[0]
                        if a.value == "true":
                            set_mask |= bit
                            clear_mask &= ~bit
                        else:
                            clear_mask |= bit
                            set_mask &= ~bit
                    else:
                        if a.value not in v.values:
                            raise SpecError(f"type mismatch: {a.value!r} is not a value of {v.name}", cmd.line)
                        for val, b in zip(v.values, v.atoms):
                            if val == a.value:
                                set_mask |= 1 << b
                                clear_mask &= ~(1 << b)
                            else:
                                clear_mask |= 1 << b
                                set_mask &= ~(1 << b)
                if key in seen:
                    dups.append(key)
                seen.add(key)
            ground.append(
                GroundCommand(
                    cmd.name, ai, guard, frozenset(gvars), tuple(gvis), set_mask, clear_mask,
                    tuple(assigns), tuple(vis_assigns), tuple(dups), tuple(foreign), cmd.line,
                )
            )
        commands.append(tuple(ground))
        nulls.append(GroundCommand("null", ai, TRUE, frozenset(), (), 0, 0, (), (), is_null=True))

    defines = {name: res.define(name) for name, _ in spec.defines}
    return AtomModel(
        spec.name, agent_names, tuple(infos), tuple(atom_names), tuple(commands), tuple(nulls),
        defines, tuple(declarations),
    )


# -- well-formedness -------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str
    agent: str
    command: Optional[str]
    detail: str

    def as_dict(self) -> dict:
        return {"kind": self.kind, "agent": self.agent, "command": self.command, "detail": self.detail}


def validate_spec(model: AtomModel) -> list:
    """Report every violated well-formedness invariant; empty list iff well-formed."""
    report = []
    owners = {}
    for var, ai in model.declarations:
        owners.setdefault(var, []).append(ai)
    for var, who in owners.items():
        if len(who) > 1:
            names = ", ".join(model.agents[a] for a in who)
            report.append(Violation("exclusive control", model.agents[who[1]], None,
                                    f"variable {var} declared by {names}"))
    for ai, cmds in enumerate(model.commands):
        agent = model.agents[ai]
        for cmd in cmds:
            for var in cmd.foreign:
                report.append(Violation("not owner", agent, cmd.name, f"assigns {var} owned by another agent"))
            for vi, target, _ in cmd.vis_assigns:
                if target == ai or target == model.vars[vi].owner:
                    report.append(Violation(
                        "self-visibility revocation", agent, cmd.name,
                        f"assigns vis({model.vars[vi].name}, {model.agents[target]})",
                    ))
            for key in cmd.duplicates:
                what = (f"vis({model.vars[key[1]].name}, {model.agents[key[2]]})" if key[0] == "vis"
                        else model.vars[key[1]].name)
                report.append(Violation("duplicate assignment", agent, cmd.name, f"{what} assigned twice"))
            for vi, target in cmd.guard_vis:
                if target != ai:
                    report.append(Violation(
                        "foreign visibility test", agent, cmd.name,
                        f"guard tests vis({model.vars[vi].name}, {model.agents[target]})",
                    ))
    return report
