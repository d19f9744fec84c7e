"""Abstract syntax of the guarded-command specification language."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..errors import SpecError  # noqa: F401  (re-exported)


# -- boolean expressions over variables ------------------------------------


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Name:
    """A bare identifier: boolean variable, defined proposition or binder symbol."""

    name: str


@dataclass(frozen=True)
class Cmp:
    """``var = rhs`` (or ``!=`` when ``negated``); rhs is a value or a variable."""

    var: str
    rhs: str
    negated: bool = False


@dataclass(frozen=True)
class VisTest:
    var: str
    agent: str


@dataclass(frozen=True)
class Not:
    arg: "Expr"


@dataclass(frozen=True)
class And:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Or:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Implies:
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Name, Cmp, VisTest, Not, And, Or, Implies]


# -- declarations ----------------------------------------------------------

# A value assigned to a visibility atom: True, False or KEEP (re-assert the
# current value, used to pad outsider commands).
KEEP = "keep"


@dataclass(frozen=True)
class Assign:
    var: str
    value: str


@dataclass(frozen=True)
class VisAssign:
    var: str
    agent: str
    value: Union[bool, str]


@dataclass(frozen=True)
class CommandTemplate:
    name: str
    binders: tuple = ()  # ((symbol, BinderSet), ...)
    guard: Expr = Const(True)
    assignments: tuple = ()
    line: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True)
class BinderSet:
    """Either an explicit value list or ``dom(var)``."""

    values: tuple = ()
    dom_of: Optional[str] = None


@dataclass(frozen=True)
class VarDecl:
    name: str
    owner: str
    domain: Optional[tuple]  # None for bool
    init: Optional[tuple] = None  # None means unconstrained
    visible_to: tuple = ()
    line: Optional[int] = field(default=None, compare=False)

    @property
    def is_bool(self) -> bool:
        return self.domain is None

    @property
    def values(self) -> tuple:
        return ("false", "true") if self.domain is None else self.domain


@dataclass(frozen=True)
class AgentDecl:
    name: str
    vars: tuple = ()
    commands: tuple = ()
    line: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True)
class ModelSpec:
    name: str
    agents: tuple = ()
    defines: tuple = ()  # ((name, Expr), ...)

    def agent(self, name: str) -> AgentDecl:
        for a in self.agents:
            if a.name == name:
                return a
        raise KeyError(name)

    def var_table(self) -> dict:
        """Map variable name to its first declaration."""
        table = {}
        for a in self.agents:
            for v in a.vars:
                table.setdefault(v.name, v)
        return table


# -- pretty printing -------------------------------------------------------

_PREC = {Implies: 1, Or: 2, And: 3}


def format_expr(e: Expr, parent: int = 0) -> str:
    if isinstance(e, Const):
        return "true" if e.value else "false"
    if isinstance(e, Name):
        return e.name
    if isinstance(e, Cmp):
        return f"{e.var} {'!=' if e.negated else '='} {e.rhs}"
    if isinstance(e, VisTest):
        return f"vis({e.var}, {e.agent})"
    if isinstance(e, Not):
        return "!" + format_expr(e.arg, 4)
    prec = _PREC[type(e)]
    op = {Implies: "->", Or: "|", And: "&"}[type(e)]
    if isinstance(e, Implies):
        # right associative
        text = f"{format_expr(e.left, prec + 1)} {op} {format_expr(e.right, prec)}"
    else:
        text = f"{format_expr(e.left, prec)} {op} {format_expr(e.right, prec + 1)}"
    return f"({text})" if prec < parent else text


def _format_value_set(values) -> str:
    return "{" + ", ".join(values) + "}"


def _format_assign(a) -> str:
    if isinstance(a, VisAssign):
        v = a.value if isinstance(a.value, str) else ("true" if a.value else "false")
        return f"vis({a.var}, {a.agent}) := {v}"
    return f"{a.var} := {a.value}"


def format_spec(spec: ModelSpec) -> str:
    """Render a ModelSpec in normalized surface syntax."""
    out = [f"model {spec.name}", ""]
    for agent in spec.agents:
        out.append(f"agent {agent.name} {{")
        out.append("  vars {")
        for v in agent.vars:
            typ = "bool" if v.is_bool else _format_value_set(v.domain)
            parts = [f"    {v.name} : {typ}"]
            if v.init is not None:
                init = v.init[0] if len(v.init) == 1 else _format_value_set(v.init)
                parts.append(f"init {init}")
            if v.visible_to:
                parts.append(f"visible {_format_value_set(v.visible_to)}")
            out.append(" ".join(parts) + ";")
        out.append("  }")
        out.append("  commands {")
        for c in agent.commands:
            head = f"    command {c.name}"
            for sym, bset in c.binders:
                src = f"dom({bset.dom_of})" if bset.dom_of else _format_value_set(bset.values)
                head += f" forall {sym} in {src}"
            body = ", ".join(_format_assign(a) for a in c.assignments)
            out.append(f"{head} : {format_expr(c.guard)} ~> {body};".replace(" ~> ;", " ~>;"))
        out.append("  }")
        out.append("}")
        out.append("")
    for name, expr in spec.defines:
        out.append(f"define {name} := {format_expr(expr)};")
    return "\n".join(out).rstrip() + "\n"
