"""Structural coalition-broadcast checks and the runtime broadcast invariant."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .formula import coalitions
from .specdsl.elaborate import AtomModel
from .specdsl.syntax import KEEP

CMP = "Cmp"
DAGGER = "dagger"


class AcastError(ValueError):
    pass


class AcastWarning(UserWarning):
    pass


@dataclass(frozen=True)
class AcastViolation:
    condition: str  # CMP or DAGGER
    outsider: str
    variable: str
    command: str
    members: tuple  # coalition members missing or mismatched
    detail: str = ""

    def as_dict(self) -> dict:
        return {
            "condition": self.condition,
            "outsider": self.outsider,
            "variable": self.variable,
            "command": self.command,
            "members": list(self.members),
            "detail": self.detail,
        }


@dataclass
class AcastReport:
    coalition: tuple
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {"coalition": list(self.coalition), "violations": [v.as_dict() for v in self.violations]}


def _members(model: AtomModel, A) -> list:
    return [model.agent_id(a) if isinstance(a, str) else a for a in A]


def _assigned_vis(cmd) -> dict:
    """(var, agent) -> assigned value for one command; the implicit null keeps everything."""
    return {(vi, ai): val for vi, ai, val in cmd.vis_assigns}


def _symmetric_init(model: AtomModel, vi: int, members: list) -> bool:
    seen = {a in model.vars[vi].visible_init for a in members}
    return len(seen) <= 1


def _outsider_commands(model: AtomModel, c: int):
    yield from model.commands[c]
    yield model.nulls[c]


def _vis_value(cmd, assigned, vi, a):
    if cmd.is_null:
        return KEEP
    return assigned.get((vi, a))


def check_cmp(model: AtomModel, A) -> list:
    """Every outsider command must assign the visibility of each own variable for each member."""
    members = _members(model, A)
    out = []
    for c in range(model.n_agents):
        if c in members:
            continue
        for cmd in _outsider_commands(model, c):
            assigned = _assigned_vis(cmd)
            for vi in model.owned_vars(c):
                missing = tuple(
                    model.agents[a] for a in members if _vis_value(cmd, assigned, vi, a) is None
                )
                name = model.vars[vi].name
                if missing:
                    out.append(AcastViolation(CMP, model.agents[c], name, cmd.name, missing,
                                              "no visibility assignment"))
                    continue
                keeps = tuple(model.agents[a] for a in members if _vis_value(cmd, assigned, vi, a) == KEEP)
                if keeps and not _symmetric_init(model, vi, members):
                    out.append(AcastViolation(CMP, model.agents[c], name, cmd.name, keeps,
                                              "keep-padding over asymmetric initial visibility"))
    return out


def check_dagger(model: AtomModel, A) -> list:
    """Visibility values assigned by an outsider command must agree across the coalition."""
    members = _members(model, A)
    out = []
    for c in range(model.n_agents):
        if c in members:
            continue
        for cmd in _outsider_commands(model, c):
            assigned = _assigned_vis(cmd)
            for vi in model.owned_vars(c):
                values = {a: _vis_value(cmd, assigned, vi, a) for a in members}
                present = {v for v in values.values() if v is not None}
                if len(present) > 1:
                    out.append(AcastViolation(
                        DAGGER, model.agents[c], model.vars[vi].name, cmd.name,
                        tuple(model.agents[a] for a in members),
                        "values " + ", ".join(f"{model.agents[a]}={values[a]}" for a in members),
                    ))
    return out


def check_coalition(model: AtomModel, A) -> AcastReport:
    names = tuple(model.agents[a] if isinstance(a, int) else a for a in A)
    return AcastReport(names, check_cmp(model, names) + check_dagger(model, names))


def check_acast(model: AtomModel, formula, A, strict: bool = False) -> list:
    """Reports for A and (strict mode) for every coalition occurring in the formula.

    In permissive mode only A is checked; sub-coalitions failing their own check
    produce an AcastWarning.
    """
    reports = [check_coalition(model, A)]
    subs = sorted(b for b in (coalitions(formula) if formula is not None else set()) if set(b) != set(A))
    for b in subs:
        rep = check_coalition(model, b)
        if strict:
            reports.append(rep)
        elif not rep.ok:
            warnings.warn(
                f"model is not {{{','.join(b)}}}-cast ({len(rep.violations)} violations); "
                "continuing because only the outer coalition is required",
                AcastWarning,
                stacklevel=2,
            )
    return reports


def broadcast_violations(arena, A, limit: int = 20) -> list:
    """Non-initial reachable states where an outsider variable is seen by some members only."""
    model = arena.model
    members = _members(model, A)
    if len(members) < 2:
        return []
    groups = []
    for c in range(model.n_agents):
        if c in members:
            continue
        for vi in model.owned_vars(c):
            bits = [model.vis_bit(vi, a) for a in members]
            groups.append((vi, sum(1 << b for b in bits)))
    initial = set(arena.initial)
    non_initial = {t for s in arena.states for t in arena.succ.get(s, ())}
    out = []
    for s in arena.states:
        if s in initial and s not in non_initial:
            continue
        for vi, mask in groups:
            m = s & mask
            if m and m != mask:
                out.append((arena.index[s], model.vars[vi].name))
                if len(out) >= limit:
                    return out
    return out
