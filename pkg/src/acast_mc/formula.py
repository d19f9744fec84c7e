"""ATL formulas: parsing, normalization to the core grammar, coalition checks."""

from __future__ import annotations

from dataclasses import dataclass

from .lexer import TokenStream
from .specdsl.syntax import SpecError


class FormulaError(SpecError):
    pass


# -- core constructors -----------------------------------------------------


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class CoalX:
    coalition: tuple
    arg: object


@dataclass(frozen=True)
class CoalU:
    coalition: tuple
    left: object
    right: object


@dataclass(frozen=True)
class CoalR:
    coalition: tuple
    left: object
    right: object


# -- surface-only sugar ----------------------------------------------------


@dataclass(frozen=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True)
class Implies:
    left: object
    right: object


@dataclass(frozen=True)
class CoalF:
    coalition: tuple
    arg: object


@dataclass(frozen=True)
class CoalG:
    coalition: tuple
    arg: object


@dataclass(frozen=True)
class Dual:
    """``[[B]]`` applied to the coalition node ``inner`` (which carries B)."""

    inner: object


TOP = Atom("true")
BOTTOM = Not(TOP)
COALITION_NODES = (CoalX, CoalU, CoalR)
_TEMPORAL = {"X", "F", "G", "U", "R"}


def coalition(*agents) -> tuple:
    return tuple(sorted(set(agents)))


# -- parsing ---------------------------------------------------------------


def parse_formula(text: str):
    """Parse the ASCII formula syntax into a surface AST."""
    try:
        ts = TokenStream(text)
        f = _expr(ts)
        if ts.peek.kind != "eof":
            ts.error(f"unexpected {ts.peek.text!r} after formula")
    except FormulaError:
        raise
    except SpecError as exc:
        raise FormulaError(exc.message, exc.line, exc.col) from None
    return f


def _expr(ts):
    left = _or(ts)
    if ts.accept("->"):
        return Implies(left, _expr(ts))
    return left


def _or(ts):
    left = _and(ts)
    while ts.accept("|"):
        left = Or(left, _and(ts))
    return left


def _and(ts):
    left = _unary(ts)
    while ts.accept("&"):
        left = And(left, _unary(ts))
    return left


def _agents(ts, close: str) -> tuple:
    names = [ts.ident("agent")]
    while ts.accept(","):
        names.append(ts.ident("agent"))
    ts.expect(close)
    return coalition(*names)


def _unary(ts):
    if ts.accept("!"):
        return Not(_unary(ts))
    if ts.at("<<") or ts.at("[["):
        dual = ts.next().text == "[["
        agents = _agents(ts, "]]" if dual else ">>")
        node = _path(ts, agents)
        return Dual(node) if dual else node
    return _primary(ts)


def _path(ts, agents):
    if ts.accept("X"):
        return CoalX(agents, _unary(ts))
    if ts.accept("F"):
        return CoalF(agents, _unary(ts))
    if ts.accept("G"):
        return CoalG(agents, _unary(ts))
    if ts.at("("):
        mark = ts.pos
        ts.next()
        try:
            left = _expr(ts)
            if ts.at("U") or ts.at("R"):
                op = ts.next().text
                right = _expr(ts)
                ts.expect(")")
                return (CoalU if op == "U" else CoalR)(agents, left, right)
        except SpecError:
            pass
        ts.pos = mark
    left = _unary(ts)
    if ts.at("U") or ts.at("R"):
        op = ts.next().text
        right = _unary(ts)
        return (CoalU if op == "U" else CoalR)(agents, left, right)
    ts.error("expected X, F, G or an until/release operand after a coalition")


def _primary(ts):
    if ts.accept("("):
        f = _expr(ts)
        ts.expect(")")
        return f
    if ts.accept("true"):
        return TOP
    if ts.accept("false"):
        return BOTTOM
    tok = ts.peek
    name = ts.ident("atom")
    if name in _TEMPORAL:
        ts.error(f"temporal operator {name} needs a coalition", tok)
    if ts.accept("="):
        return Atom(f"{name}={ts.ident('value')}")
    return Atom(name)


# -- normalization ---------------------------------------------------------


def neg(f):
    return f.arg if isinstance(f, Not) else Not(f)


def desugar_formula(f):
    """Rewrite a surface formula into the six core constructors."""
    if isinstance(f, Atom):
        return f
    if isinstance(f, Not):
        return neg(desugar_formula(f.arg))
    if isinstance(f, And):
        return And(desugar_formula(f.left), desugar_formula(f.right))
    if isinstance(f, Or):
        return neg(And(neg(desugar_formula(f.left)), neg(desugar_formula(f.right))))
    if isinstance(f, Implies):
        return neg(And(desugar_formula(f.left), neg(desugar_formula(f.right))))
    if isinstance(f, CoalX):
        return CoalX(f.coalition, desugar_formula(f.arg))
    if isinstance(f, CoalU):
        return CoalU(f.coalition, desugar_formula(f.left), desugar_formula(f.right))
    if isinstance(f, CoalR):
        return CoalR(f.coalition, desugar_formula(f.left), desugar_formula(f.right))
    if isinstance(f, CoalF):
        return CoalU(f.coalition, TOP, desugar_formula(f.arg))
    if isinstance(f, CoalG):
        return CoalR(f.coalition, BOTTOM, desugar_formula(f.arg))
    if isinstance(f, Dual):
        inner = desugar_formula(f.inner)
        b = inner.coalition
        if isinstance(inner, CoalX):
            return Not(CoalX(b, neg(inner.arg)))
        if isinstance(inner, CoalU):
            return Not(CoalR(b, neg(inner.left), neg(inner.right)))
        return Not(CoalU(b, neg(inner.left), neg(inner.right)))
    raise TypeError(f"not a formula: {f!r}")


def is_core(f) -> bool:
    if isinstance(f, Atom):
        return True
    if isinstance(f, Not):
        return is_core(f.arg)
    if isinstance(f, CoalX):
        return is_core(f.arg)
    if isinstance(f, (And, CoalU, CoalR)):
        return is_core(f.left) and is_core(f.right)
    return False


def children(f) -> tuple:
    if isinstance(f, Atom):
        return ()
    if isinstance(f, (Not, CoalX, CoalF, CoalG)):
        return (f.arg,)
    if isinstance(f, Dual):
        return (f.inner,)
    return (f.left, f.right)


def coalitions(f) -> set:
    out = set()
    if hasattr(f, "coalition"):
        out.add(f.coalition)
    for c in children(f):
        out |= coalitions(c)
    return out


def atoms(f) -> set:
    if isinstance(f, Atom):
        return {f.name}
    out = set()
    for c in children(f):
        out |= atoms(c)
    return out


def is_A_formula(f, A) -> tuple:
    """(holds, offending coalitions): every coalition must be a subset of A."""
    allowed = set(A)
    offenders = sorted(b for b in coalitions(f) if not set(b) <= allowed)
    return (not offenders, offenders)


def subformula_order(f) -> list:
    """Coalition subformulas, each listed before any formula containing it."""
    out = []

    def visit(g):
        for c in children(g):
            visit(c)
        if isinstance(g, COALITION_NODES) and g not in out:
            out.append(g)

    visit(f)
    return out


def maximal_coalition_subformulas(f) -> tuple:
    """Coalition subformulas of ``f`` not nested inside another one (``f`` included if it is one)."""
    out = []

    def visit(g):
        if isinstance(g, COALITION_NODES):
            if g not in out:
                out.append(g)
            return
        for c in children(g):
            visit(c)

    visit(f)
    return tuple(out)


def check_agents(f, agents) -> None:
    known = set(agents)
    for b in coalitions(f):
        missing = [a for a in b if a not in known]
        if missing:
            raise FormulaError(f"unknown agent {missing[0]!r} in coalition {{{', '.join(b)}}}")


# -- printing --------------------------------------------------------------


def _coal(b, dual=False) -> str:
    return ("[[" if dual else "<<") + ",".join(b) + ("]]" if dual else ">>")


def _atom_text(name: str) -> str:
    if name == "true":
        return "true"
    var, eq, val = name.partition("=")
    return f"{var} = {val}" if eq else name


def format_formula(f) -> str:
    """Render a (surface or core) formula in fully parenthesized parseable syntax."""
    if isinstance(f, Atom):
        return _atom_text(f.name)
    if isinstance(f, Not):
        if f == BOTTOM:
            return "false"
        return "!" + _wrap(f.arg)
    if isinstance(f, And):
        return f"{_wrap(f.left)} & {_wrap(f.right)}"
    if isinstance(f, Or):
        return f"{_wrap(f.left)} | {_wrap(f.right)}"
    if isinstance(f, Implies):
        return f"{_wrap(f.left)} -> {_wrap(f.right)}"
    if isinstance(f, Dual):
        body = format_formula(f.inner)
        return "[[" + ",".join(f.inner.coalition) + "]]" + body[body.index(">>") + 2:]
    b = _coal(f.coalition)
    if isinstance(f, CoalX):
        return f"{b} X {_wrap(f.arg)}"
    if isinstance(f, CoalF):
        return f"{b} F {_wrap(f.arg)}"
    if isinstance(f, CoalG):
        return f"{b} G {_wrap(f.arg)}"
    op = "U" if isinstance(f, CoalU) else "R"
    return f"{b} ({format_formula(f.left)} {op} {format_formula(f.right)})"


def _wrap(f) -> str:
    text = format_formula(f)
    simple = isinstance(f, Atom) or f == BOTTOM or (isinstance(f, Not) and isinstance(f.arg, Atom))
    return text if simple else f"({text})"
