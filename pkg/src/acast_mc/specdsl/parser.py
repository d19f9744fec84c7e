"""Recursive-descent parser for model specifications.

Grammar (informal)::

    spec     := 'model' NAME (agent | define)*
    agent    := 'agent' NAME '{' 'vars' '{' var* '}' 'commands' '{' command* '}' '}'
    var      := NAME ':' ('bool' | set) ['init' (value | set | 'any')] ['visible' set] ';'
    command  := 'command' NAME ('forall' NAME 'in' (set | 'dom' '(' NAME ')'))*
                ':' expr '~>' [assign (',' assign)*] ';'
    assign   := NAME ':=' value | 'vis' '(' NAME ',' NAME ')' ':=' ('true'|'false'|'keep')
    define   := 'define' NAME ':=' expr ';'
    expr     := or ('->' expr)?
"""

from __future__ import annotations

from ..lexer import TokenStream
from .syntax import (
    KEEP,
    AgentDecl,
    And,
    Assign,
    BinderSet,
    Cmp,
    CommandTemplate,
    Const,
    Implies,
    ModelSpec,
    Name,
    Not,
    Or,
    SpecError,
    VarDecl,
    VisAssign,
    VisTest,
)

KEYWORDS = {
    "model", "agent", "vars", "commands", "command", "forall", "in", "init",
    "visible", "define", "bool", "true", "false", "keep", "vis", "dom", "any",
}


def parse_expr_stream(ts: TokenStream):
    left = _parse_or(ts)
    if ts.accept("->"):
        return Implies(left, parse_expr_stream(ts))
    return left


def _parse_or(ts):
    left = _parse_and(ts)
    while ts.accept("|"):
        left = Or(left, _parse_and(ts))
    return left


def _parse_and(ts):
    left = _parse_unary(ts)
    while ts.accept("&"):
        left = And(left, _parse_unary(ts))
    return left


def _parse_unary(ts):
    if ts.accept("!"):
        return Not(_parse_unary(ts))
    if ts.accept("("):
        e = parse_expr_stream(ts)
        ts.expect(")")
        return e
    if ts.accept("true"):
        return Const(True)
    if ts.accept("false"):
        return Const(False)
    if ts.at("vis") and ts.lookahead().text == "(":
        ts.next()
        ts.expect("(")
        var = ts.ident("variable")
        ts.expect(",")
        agent = ts.ident("agent")
        ts.expect(")")
        return VisTest(var, agent)
    name = ts.ident("expression")
    if ts.at("=") or ts.at("!="):
        negated = ts.next().text == "!="
        rhs = _value(ts)
        return Cmp(name, rhs, negated)
    return Name(name)


def _value(ts) -> str:
    tok = ts.peek
    if tok.kind != "ident":
        ts.error(f"expected value, found {tok.text or 'end of input'!r}")
    ts.next()
    return tok.text


def _value_set(ts) -> tuple:
    ts.expect("{")
    values = []
    if not ts.at("}"):
        values.append(_value(ts))
        while ts.accept(","):
            values.append(_value(ts))
    ts.expect("}")
    return tuple(values)


def _parse_var(ts, owner: str) -> VarDecl:
    line = ts.peek.line
    name = ts.ident("variable name")
    if name in KEYWORDS:
        ts.error(f"reserved word {name!r} used as variable name")
    ts.expect(":")
    if ts.accept("bool"):
        domain = None
    else:
        domain = _value_set(ts)
        if not domain:
            ts.error(f"empty domain for {name}")
        if len(set(domain)) != len(domain):
            ts.error(f"duplicate value in domain of {name}")
    init = None
    visible = ()
    while not (ts.at(";") or ts.at("}")):
        if ts.accept("init"):
            if ts.accept("any"):
                init = None
            elif ts.at("{"):
                init = _value_set(ts)
            else:
                init = (_value(ts),)
        elif ts.accept("visible"):
            visible = _value_set(ts)
        else:
            ts.error(f"unexpected {ts.peek.text!r} in declaration of {name}")
    if not ts.at("}"):  # the last declaration of a block may drop its terminator
        ts.expect(";")
    return VarDecl(name, owner, domain, init, visible, line)


def _parse_assign(ts):
    if ts.at("vis") and ts.lookahead().text == "(":
        ts.next()
        ts.expect("(")
        var = ts.ident("variable")
        ts.expect(",")
        agent = ts.ident("agent")
        ts.expect(")")
        ts.expect(":=")
        tok = ts.next()
        if tok.text == "true":
            value = True
        elif tok.text == "false":
            value = False
        elif tok.text == KEEP:
            value = KEEP
        else:
            ts.error("visibility can only be assigned true, false or keep", tok)
        return VisAssign(var, agent, value)
    var = ts.ident("variable")
    ts.expect(":=")
    return Assign(var, _value(ts))


def _parse_command(ts) -> CommandTemplate:
    line = ts.peek.line
    ts.expect("command")
    name = ts.ident("command name")
    binders = []
    while ts.accept("forall"):
        sym = ts.ident("binder symbol")
        ts.expect("in")
        if ts.accept("dom"):
            ts.expect("(")
            bset = BinderSet(dom_of=ts.ident("variable"))
            ts.expect(")")
        else:
            bset = BinderSet(values=_value_set(ts))
        binders.append((sym, bset))
    ts.expect(":")
    guard = parse_expr_stream(ts)
    ts.expect("~>")
    assignments = []
    if not ts.at(";"):
        assignments.append(_parse_assign(ts))
        while ts.accept(","):
            assignments.append(_parse_assign(ts))
    ts.expect(";")
    return CommandTemplate(name, tuple(binders), guard, tuple(assignments), line)


def _parse_agent(ts) -> AgentDecl:
    line = ts.peek.line
    ts.expect("agent")
    name = ts.ident("agent name")
    ts.expect("{")
    variables, commands = [], []
    while not ts.accept("}"):
        if ts.accept("vars"):
            ts.expect("{")
            while not ts.accept("}"):
                variables.append(_parse_var(ts, name))
        elif ts.accept("commands"):
            ts.expect("{")
            while not ts.accept("}"):
                commands.append(_parse_command(ts))
        else:
            ts.error(f"expected 'vars' or 'commands', found {ts.peek.text or 'end of input'!r}")
    return AgentDecl(name, tuple(variables), tuple(commands), line)


def parse_spec(text: str, check: bool = True) -> ModelSpec:
    """Parse a specification source into a ModelSpec.

    With ``check`` (the default) names, ownership and comparison types are
    resolved and a SpecError is raised on the first problem.
    """
    ts = TokenStream(text)
    ts.expect("model")
    name = ts.ident("model name")
    agents, defines = [], []
    seen_agents = {}
    while ts.peek.kind != "eof":
        if ts.at("agent"):
            tok = ts.lookahead()
            agent = _parse_agent(ts)
            if agent.name in seen_agents:
                raise SpecError(f"duplicate agent {agent.name!r}", tok.line, tok.col)
            seen_agents[agent.name] = agent
            agents.append(agent)
        elif ts.accept("define"):
            dname = ts.ident("proposition name")
            ts.expect(":=")
            defines.append((dname, parse_expr_stream(ts)))
            ts.expect(";")
        else:
            ts.error(f"expected 'agent' or 'define', found {ts.peek.text!r}")
    spec = ModelSpec(name, tuple(agents), tuple(defines))
    if check:
        check_names(spec)
    return spec


def check_names(spec: ModelSpec) -> None:
    """Resolve identifiers; raise SpecError on undeclared names, type errors and foreign writes."""
    table = spec.var_table()
    agents = {a.name for a in spec.agents}
    define_names = {n for n, _ in spec.defines}

    for agent in spec.agents:
        for v in agent.vars:
            if v.init is not None:
                for val in v.init:
                    if val not in v.values:
                        raise SpecError(f"init value {val!r} not in domain of {v.name}", v.line)
            for who in v.visible_to:
                if who not in agents:
                    raise SpecError(f"unknown agent {who!r} in visibility of {v.name}", v.line)
        for cmd in agent.commands:
            symbols = {}
            for sym, bset in cmd.binders:
                if bset.dom_of is not None and bset.dom_of not in table:
                    raise SpecError(f"undeclared variable {bset.dom_of!r}", cmd.line)
                symbols[sym] = bset
            _check_expr(cmd.guard, table, agents, define_names, symbols, cmd.line)
            for a in cmd.assignments:
                var = a.var
                if var in symbols:
                    continue
                if var not in table:
                    raise SpecError(f"undeclared variable {var!r}", cmd.line)
                if not any(v.name == var for v in agent.vars):
                    raise SpecError(
                        f"command {cmd.name!r}: agent {agent.name!r} is not owner of {var!r}", cmd.line
                    )
                if isinstance(a, VisAssign):
                    if a.agent not in agents and a.agent not in symbols:
                        raise SpecError(f"unknown agent {a.agent!r}", cmd.line)
                elif a.value not in table[var].values and a.value not in symbols:
                    raise SpecError(f"type mismatch: {a.value!r} is not a value of {var}", cmd.line)
    for name, expr in spec.defines:
        _check_expr(expr, table, agents, define_names, {}, None)


def _check_expr(e, table, agents, defines, symbols, line):
    if isinstance(e, Const):
        return
    if isinstance(e, Name):
        if e.name in symbols or e.name in defines:
            return
        v = table.get(e.name)
        if v is None:
            raise SpecError(f"undeclared variable {e.name!r}", line)
        if not v.is_bool:
            raise SpecError(f"type mismatch: enum variable {e.name!r} used as a boolean", line)
        return
    if isinstance(e, Cmp):
        if e.var in symbols:
            return
        v = table.get(e.var)
        if v is None:
            raise SpecError(f"undeclared variable {e.var!r}", line)
        rhs = e.rhs
        if rhs in symbols or rhs in v.values:
            return
        other = table.get(rhs)
        if other is None:
            raise SpecError(f"type mismatch: {rhs!r} is not a value of {e.var}", line)
        if not set(other.values) & set(v.values):
            raise SpecError(f"type mismatch: {e.var} and {rhs} share no values", line)
        return
    if isinstance(e, VisTest):
        if e.var not in table and e.var not in symbols:
            raise SpecError(f"undeclared variable {e.var!r}", line)
        if e.agent not in agents and e.agent not in symbols:
            raise SpecError(f"unknown agent {e.agent!r}", line)
        return
    if isinstance(e, Not):
        _check_expr(e.arg, table, agents, defines, symbols, line)
        return
    _check_expr(e.left, table, agents, defines, symbols, line)
    _check_expr(e.right, table, agents, defines, symbols, line)
