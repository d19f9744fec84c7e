"""Generator for the Hancke-Kuhn distance-bounding corpus with a colluding far-away prover.

Execution ``d`` is the one where the prover is far away and leaks its
response table to the attacker; in the other executions the prover's
position is nondeterministic and it answers honestly when close. The
verifier re-asserts every visibility atom of its variables for the prover and
the attacker on each update, which keeps the model coalition-cast for
{P, At}.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

TF_FORMULA = "<<P,At>> F (auth_via_help -> [[At]] G noAuth_after_help)"


@dataclass(frozen=True)
class HkParams:
    n: int = 1  # executions
    d: int = 1  # colluding execution
    c: int = 1  # number of challenges
    e1: int = 1  # prover responses per execution
    e2: int = 1  # attacker responses
    seed: int = 0  # drives the response tables

    def __post_init__(self):
        for name in ("n", "d", "c", "e1", "e2"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.d > self.n:
            raise ValueError("d must not exceed n")


def _set(values) -> str:
    return "{" + ", ".join(values) + "}"


def response_table(p: HkParams) -> dict:
    """(execution, challenge) -> prover response, drawn deterministically from the seed."""
    rng = random.Random(p.seed)
    return {(j, ch): rng.choice(prover_values(p, j))
            for j in range(1, p.n + 1) for ch in challenges(p)}


def challenges(p: HkParams) -> list:
    return [f"c{i}" for i in range(1, p.c + 1)]


def prover_values(p: HkParams, j: int) -> list:
    return [f"p{j}_{i}" for i in range(1, p.e1 + 1)]


def attacker_values(p: HkParams) -> list:
    return [f"a{i}" for i in range(1, p.e2 + 1)]


def gen_hk(p: HkParams) -> str:
    """Specification source for the HK corpus instance ``p``."""
    chs = challenges(p)
    own = attacker_values(p)
    val = response_table(p)
    d = p.d
    execs = range(1, p.n + 1)
    out = [f"# HK distance bounding, {p.n} executions, prover colludes in execution {d}",
           f"model hk_n{p.n}_d{d}_c{p.c}_e{p.e1}_{p.e2}", ""]

    # prover
    out += ["agent P {", "  vars {"]
    for j in execs:
        far = "true" if j == d else "any"
        out.append(f"    P_far_{j} : bool init {far};")
        out.append(f"    P_collude_{j} : bool init {'true' if j == d else 'false'};")
    for j in execs:
        for ch in chs:
            vis = " visible {At}" if j == d else ""
            out.append(f"    P_r_{j}_{ch} : {_set(prover_values(p, j))} init {val[(j, ch)]}{vis};")
    out += ["  }", "  commands {"]
    for k in execs:
        if k == d:
            continue
        for ch in chs:
            out.append(f"    command g1_{k}_{ch} : !P_far_{k} & V_c_{k} = {ch} ~> "
                       f"vis(P_r_{k}_{ch}, At) := true, vis(P_r_{k}_{ch}, V) := true;")
    out += ["  }", "}", ""]

    # attacker
    out += ["agent At {", "  vars {"]
    for j in execs:
        dom = ["null"] + own + prover_values(p, j)
        for ch in chs:
            out.append(f"    At_r_{j}_{ch} : {_set(dom)} init null;")
    out += ["  }", "  commands {"]
    for ch in chs:
        out.append(f"    command g2_{ch} forall w in dom(P_r_{d}_{ch}) : P_r_{d}_{ch} = w ~> At_r_{d}_{ch} := w;")
    for k in execs:
        if k == d:
            continue
        for ch in chs:
            out.append(f"    command g3_{k}_{ch} forall w in {_set(own)} : true ~> At_r_{k}_{ch} := w;")
            for src in chs:
                out.append(f"    command g3_{k}_{ch}_from_{src} forall w in dom(P_r_{k}_{src}) : "
                           f"P_r_{k}_{src} = w ~> At_r_{k}_{ch} := w;")
    for j in execs:
        for ch in chs:
            out.append(f"    command g4_{j}_{ch} : V_c_{j} = {ch} & At_r_{j}_{ch} != null ~> "
                       f"vis(At_r_{j}_{ch}, V) := true;")
    out += ["  }", "}", ""]

    # verifier
    v_vars = []
    out += ["agent V {", "  vars {"]
    for j in execs:
        dom = prover_values(p, j) + own + ["null"]
        out.append(f"    V_c_{j} : {_set(chs)} init any visible {{P, At}};")
        v_vars.append(f"V_c_{j}")
        for ch in chs:
            out.append(f"    V_r_{j}_{ch} : {_set(dom)} init {val[(j, ch)]};")
            out.append(f"    V_rec_{j}_{ch} : {_set(dom)} init null;")
            v_vars += [f"V_r_{j}_{ch}", f"V_rec_{j}_{ch}"]
        out.append(f"    finished_{j} : bool init false;")
        out.append(f"    ok_{j} : bool init false;")
        v_vars += [f"finished_{j}", f"ok_{j}"]
    out += ["  }", "  commands {"]
    pad = ", ".join(f"vis({u}, {e}) := keep" for u in v_vars for e in ("P", "At"))
    for j in execs:
        for ch in chs:
            out.append(f"    command g5_{j}_{ch} forall w in {_set(own + prover_values(p, j))} : "
                       f"At_r_{j}_{ch} = w & !finished_{j} ~> V_rec_{j}_{ch} := w, {pad};")
            out.append(f"    command g6_{j}_{ch} forall w in dom(P_r_{j}_{ch}) : "
                       f"P_r_{j}_{ch} = w & !finished_{j} ~> V_rec_{j}_{ch} := w, {pad};")
            out.append(f"    command g7_{j}_{ch} : V_c_{j} = {ch} & V_rec_{j}_{ch} = V_r_{j}_{ch} & !finished_{j} ~> "
                       f"finished_{j} := true, ok_{j} := true, {pad};")
            out.append(f"    command g8_{j}_{ch} : V_c_{j} = {ch} & V_rec_{j}_{ch} != null & "
                       f"V_rec_{j}_{ch} != V_r_{j}_{ch} & !finished_{j} ~> "
                       f"finished_{j} := true, ok_{j} := false, {pad};")
    out += ["  }", "}", ""]

    helped = f"(P_far_{d} & P_collude_{d})"
    out.append(f"define auth_via_help := {helped} -> ok_{d};")
    later = [f"({helped} -> (P_far_{j} -> !ok_{j}))" for j in execs if j > d]
    out.append(f"define noAuth_after_help := {' & '.join(later) if later else 'true'};")
    return "\n".join(out) + "\n"
