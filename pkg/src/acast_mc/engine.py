"""Macro-state game construction and solving for coalition formulas.

A coalition formula <<C>>psi is decided at a history h from a *knowledge
structure* K = kappa_C(h): a finite quotient of all histories some member of
C cannot tell apart from h. Each token of K stands for such histories and
records their last state, the knowledge structures its own nested coalition
subformulas need, and one block label per member (tokens sharing a label are
histories that member confuses). Extending K by the actual next state keeps
exactly the continuations still confused with the actual history.

The game tracks triples (anchor token, current state, status, nested
structures). A macro-state also carries, per member, the partition of its
anchors into histories that member confuses; for coalition-cast arenas
same-anchor triples in one class are confused by every member, which is
checked at run time instead of assumed.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Optional

from .formula import (
    And,
    Atom,
    CoalU,
    CoalX,
    COALITION_NODES,
    Not,
    format_formula,
    is_A_formula,
    maximal_coalition_subformulas,
)
from .semantics import Arena, BudgetExceeded
from .specdsl.elaborate import compile_expr

DEFAULT_NODE_BUDGET = 10_000_000

ALIVE, ACHIEVED, FAILED = "ALIVE", "ACHIEVED", "FAILED"
ONGOING, RELEASED, VIOLATED = "ONGOING", "RELEASED", "VIOLATED"
ABSORBING = frozenset({ACHIEVED, FAILED, RELEASED, VIOLATED})


class EngineError(RuntimeError):
    """Internal consistency failure; no verdict is produced."""


class NotAFormulaError(ValueError):
    pass


@dataclass(frozen=True)
class Knowledge:
    """Canonical knowledge structure for one coalition formula."""

    formula: object
    last: tuple  # last state per token
    nested: tuple  # per token: tuple of knowledge ids for the formula's nested coalition subformulas
    blocks: tuple  # per member: tuple of block labels per token
    actual: int


def _relabel(labels) -> tuple:
    seen = {}
    return tuple(seen.setdefault(x, len(seen)) for x in labels)


def _members(arena: Arena, phi) -> tuple:
    return tuple(sorted(arena.model.agent_id(a) for a in phi.coalition))


def _operands(phi) -> tuple:
    return (phi.arg,) if isinstance(phi, CoalX) else (phi.left, phi.right)


class Evaluator:
    """Evaluates core formulas on an expanded arena; results are memoized."""

    def __init__(self, arena: Arena, node_budget: int = DEFAULT_NODE_BUDGET, audit: bool = True):
        self.arena = arena
        self.node_budget = node_budget
        self.audit = audit
        self.stats = Counter()
        self._props = {}
        self._children = {}
        self._ks_index = {}
        self._ks = []
        self._extend_cache = {}
        self._solve_cache = {}
        self.results = {}  # (formula, knowledge id) -> GameResult

    # labels ---------------------------------------------------------------
    def prop(self, name: str):
        fn = self._props.get(name)
        if fn is None:
            fn = compile_expr(self.arena.model.proposition(name))
            self._props[name] = fn
        return fn

    def children(self, phi) -> tuple:
        out = self._children.get(phi)
        if out is None:
            seen = []
            for op in _operands(phi):
                for g in maximal_coalition_subformulas(op):
                    if g not in seen:
                        seen.append(g)
            out = tuple(seen)
            self._children[phi] = out
        return out

    def label(self, f, state: int, kappa: dict) -> bool:
        """Truth of ``f`` at a history ending in ``state`` whose coalition subformulas map to knowledge ids."""
        if isinstance(f, Atom):
            return self.prop(f.name)(state)
        if isinstance(f, Not):
            return not self.label(f.arg, state, kappa)
        if isinstance(f, And):
            return self.label(f.left, state, kappa) and self.label(f.right, state, kappa)
        return self.solve(f, kappa[f])

    # knowledge structures ---------------------------------------------------
    def knowledge(self, kid: int) -> Knowledge:
        return self._ks[kid]

    def initial_knowledge(self, phi, s0: int) -> int:
        arena = self.arena
        members = _members(arena, phi)
        obs0 = [arena.obs_key(s0, c) for c in members]
        tokens = [q for q in arena.initial
                  if any(arena.obs_key(q, c) == o for c, o in zip(members, obs0))]
        kids = self.children(phi)
        nested = [tuple(self.initial_knowledge(g, q) for g in kids) for q in tokens]
        blocks = [[arena.obs_key(q, c) for q in tokens] for c in members]
        return self._intern(phi, tokens, nested, blocks, tokens.index(s0))

    def extend(self, kid: int, s: int) -> int:
        key = (kid, s)
        out = self._extend_cache.get(key)
        if out is not None:
            return out
        arena = self.arena
        K = self._ks[kid]
        members = _members(arena, K.formula)
        act = K.actual
        obs_s = [arena.obs_key(s, c) for c in members]
        last, nested, blocks, actual = [], [], [[] for _ in members], None
        for i, q in enumerate(K.last):
            linked = [K.blocks[m][i] == K.blocks[m][act] for m in range(len(members))]
            if not any(linked):
                continue
            for t in arena.succ[q]:
                obs_t = [arena.obs_key(t, c) for c in members]
                if not any(linked[m] and obs_t[m] == obs_s[m] for m in range(len(members))):
                    continue
                if i == act and t == s:
                    actual = len(last)
                last.append(t)
                nested.append(tuple(self.extend(k, t) for k in K.nested[i]))
                for m in range(len(members)):
                    blocks[m].append((K.blocks[m][i], obs_t[m]))
        if actual is None:
            raise EngineError("actual successor is not a successor of the actual history")
        out = self._intern(K.formula, last, nested, blocks, actual)
        self._extend_cache[key] = out
        return out

    def _intern(self, phi, last, nested, blocks, actual) -> int:
        # merge tokens with equal last state, nested structures and all block labels
        groups = {}
        order = []
        for i in range(len(last)):
            key = (last[i], nested[i], tuple(b[i] for b in blocks))
            if key not in groups:
                groups[key] = len(order)
                order.append(i)
            if i == actual:
                actual_group = groups[key]
        reps = order
        last = [last[i] for i in reps]
        nested = [nested[i] for i in reps]
        blocks = [[b[i] for i in reps] for b in blocks]
        actual = actual_group
        # colour refinement for a canonical-ish order; ties keep construction order
        n = len(last)
        colour = [(last[i], nested[i], i == actual) for i in range(n)]
        ranks = _rank(colour)
        while True:
            members_of = []
            for b in blocks:
                cls = {}
                for i, lab in enumerate(b):
                    cls.setdefault(lab, []).append(ranks[i])
                members_of.append({lab: tuple(sorted(v)) for lab, v in cls.items()})
            sig = [(ranks[i],) + tuple(m[b[i]] for m, b in zip(members_of, blocks)) for i in range(n)]
            new = _rank(sig)
            if len(set(new)) == len(set(ranks)):
                break
            ranks = new
        perm = sorted(range(n), key=lambda i: (ranks[i], i))
        where = {old: pos for pos, old in enumerate(perm)}
        K = Knowledge(
            phi,
            tuple(last[i] for i in perm),
            tuple(nested[i] for i in perm),
            tuple(_relabel(b[i] for i in perm) for b in blocks),
            where[actual],
        )
        kid = self._ks_index.get(K)
        if kid is None:
            kid = len(self._ks)
            self._ks.append(K)
            self._ks_index[K] = kid
            self.stats["knowledge_structures"] += 1
        return kid

    # solving ----------------------------------------------------------------
    def solve(self, phi, kid: int) -> bool:
        key = (phi, kid)
        hit = self._solve_cache.get(key)
        if hit is not None:
            return hit
        result = MacroGame(self, phi, kid).solve()
        self.results[key] = result
        self._solve_cache[key] = result.win
        return result.win

    def game_result(self, phi, kid: int) -> "GameResult":
        self.solve(phi, kid)
        return self.results[(phi, kid)]

    def top_context(self, f, s0: int) -> dict:
        return {g: self.initial_knowledge(g, s0) for g in maximal_coalition_subformulas(f)}

    def holds_initially(self, f, s0: int) -> bool:
        return self.label(f, s0, self.top_context(f, s0))


def _rank(items) -> list:
    table = {v: i for i, v in enumerate(sorted(set(items)))}
    return [table[v] for v in items]


# -- the game ------------------------------------------------------------------


@dataclass
class GameResult:
    win: bool
    game: "MacroGame"
    strategy: dict  # node id -> move index
    iterations: int = 0


class MacroGame:
    """Two-player game over macro-states for one coalition formula and start structure."""

    def __init__(self, ev: Evaluator, phi, kid: int):
        self.ev = ev
        self.arena = ev.arena
        self.phi = phi
        self.kid = kid
        self.kind = "X" if isinstance(phi, CoalX) else ("U" if isinstance(phi, CoalU) else "R")
        self.members = _members(self.arena, phi)
        self.kids = ev.children(phi)
        self.nodes = []  # node id -> (triples tuple, parts tuple)
        self.index = {}
        self.moves = []  # node id -> list of (move, children tuple)
        self.terminal = []  # node id -> None | "goal" | "dead" | "bad" | "safe"

    # statuses -------------------------------------------------------------
    def _ctx(self, kappa) -> dict:
        return dict(zip(self.kids, kappa))

    def _holds(self, f, r, kappa) -> bool:
        return self.ev.label(f, r, self._ctx(kappa))

    def initial_status(self, r, kappa) -> str:
        if self.kind == "X":
            return ALIVE
        if self.kind == "U":
            if self._holds(self.phi.right, r, kappa):
                return ACHIEVED
            return ALIVE if self._holds(self.phi.left, r, kappa) else FAILED
        if not self._holds(self.phi.right, r, kappa):
            return VIOLATED
        return RELEASED if self._holds(self.phi.left, r, kappa) else ONGOING

    def update(self, st, r, kappa) -> str:
        if st in ABSORBING:
            return st
        if self.kind == "X":
            return ACHIEVED if self._holds(self.phi.arg, r, kappa) else FAILED
        return self.initial_status(r, kappa)

    # construction ---------------------------------------------------------
    def root(self) -> int:
        K = self.ev.knowledge(self.kid)
        triples = []
        for i, q in enumerate(K.last):
            kappa = K.nested[i]
            triples.append((i, q, self.initial_status(q, kappa), kappa))
        parts = tuple(_partition_from_labels(range(len(K.last)), labs) for labs in K.blocks)
        return self._node(triples, parts)

    def _node(self, triples, parts) -> int:
        key = (frozenset(triples), parts)
        nid = self.index.get(key)
        if nid is None:
            nid = len(self.nodes)
            if self.ev.stats["game_nodes"] >= self.ev.node_budget:
                raise BudgetExceeded(f"node budget {self.ev.node_budget} exceeded")
            self.ev.stats["game_nodes"] += 1
            self.index[key] = nid
            self.nodes.append((tuple(sorted(triples, key=_triple_order)), parts))
            self.moves.append(None)
            self.terminal.append(self._classify(triples))
        return nid

    def _classify(self, triples) -> Optional[str]:
        sts = {t[2] for t in triples}
        if self.kind in ("U", "X"):
            if sts == {ACHIEVED}:
                return "goal"
            if FAILED in sts:
                return "dead"
        else:
            if VIOLATED in sts:
                return "bad"
            if sts == {RELEASED}:
                return "safe"
        return None

    def slots(self, nid) -> list:
        """(member position, anchor block) decision points of a node."""
        _, parts = self.nodes[nid]
        return [(m, blk) for m in range(len(self.members)) for blk in parts[m]]

    def options(self, nid) -> list:
        """Per slot: enabled commands deduplicated by effect, sorted by command name."""
        triples, parts = self.nodes[nid]
        by_anchor = {}
        for t in triples:
            by_anchor.setdefault(t[0], t)
        out = []
        for m, blk in self.slots(nid):
            agent = self.members[m]
            r = by_anchor[blk[0]][1]
            cmds = sorted(
                (self.arena.command(agent, i).name, i, self.arena.command(agent, i))
                for i in self.arena.enabled(r, agent)
            )
            seen = set()
            opts = []
            for name, i, c in cmds:
                eff = (c.set_mask, c.clear_mask)
                if eff not in seen:
                    seen.add(eff)
                    opts.append(i)
            out.append(opts)
        return out

    def expand_node(self, nid) -> list:
        triples, parts = self.nodes[nid]
        slots = self.slots(nid)
        slot_of = {}
        for k, (m, blk) in enumerate(slots):
            for x in blk:
                slot_of[(m, x)] = k
        anchor_block = [{x: blk for blk in parts[m] for x in blk} for m in range(len(self.members))]
        edges = []
        for move in itertools.product(*self.options(nid)):
            w = self._outcomes(triples, move, slot_of)
            children = tuple(sorted({self._node(cls, cparts)
                                     for cls, cparts in self._split(w, anchor_block)}))
            edges.append((move, children))
        self.moves[nid] = edges
        return edges

    def _outcomes(self, triples, move, slot_of) -> set:
        ev = self.ev
        w = set()
        for x, r, st, kappa in triples:
            fixed = {self.members[m]: move[slot_of[(m, x)]] for m in range(len(self.members))}
            for s2 in self.arena.successors(r, fixed):
                kappa2 = tuple(ev.extend(k, s2) for k in kappa)
                w.add((x, s2, self.update(st, s2, kappa2), kappa2))
        return w

    def _split(self, w, anchor_block):
        """Common-knowledge classes of the outcome set, with per-member anchor partitions."""
        arena = self.arena
        items = sorted(w, key=_triple_order)
        parent = list(range(len(items)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for m, agent in enumerate(self.members):
            first = {}
            for i, (x, r, _, _) in enumerate(items):
                key = (anchor_block[m][x], arena.obs_key(r, agent))
                j = first.setdefault(key, i)
                if j != i:
                    a, b = find(i), find(j)
                    if a != b:
                        parent[max(a, b)] = min(a, b)
        classes = {}
        for i, t in enumerate(items):
            classes.setdefault(find(i), []).append(t)
        for cls in classes.values():
            rep = {}
            for t in cls:
                r0 = rep.setdefault(t[0], t[1])
                if r0 != t[1] and any(arena.obs_key(r0, a) != arena.obs_key(t[1], a) for a in self.members):
                    raise EngineError(
                        "histories with a common start in one common-knowledge class are not "
                        "indistinguishable for every coalition member; the arena is not "
                        f"{{{','.join(self.phi.coalition)}}}-cast"
                    )
            cparts = []
            for m, agent in enumerate(self.members):
                labels = {x: (anchor_block[m][x], arena.obs_key(r, agent)) for x, r in rep.items()}
                cparts.append(_partition_from_labels(sorted(rep), [labels[x] for x in sorted(rep)]))
            yield cls, tuple(cparts)

    def build(self) -> None:
        queue = deque([self.root()])
        seen = {queue[0]}
        if self.kind == "X":
            # one protagonist move; successors are judged immediately
            self.expand_node(queue[0])
            return
        while queue:
            nid = queue.popleft()
            if self.terminal[nid] is not None:
                continue
            for _, children in self.expand_node(nid):
                for c in children:
                    if c not in seen:
                        seen.add(c)
                        queue.append(c)

    # solving ----------------------------------------------------------------
    def solve(self) -> GameResult:
        self.build()
        self.ev.stats["games"] += 1
        if self.kind == "R":
            win, strategy, iters = self._solve_safety()
        else:
            win, strategy, iters = self._solve_reach()
        self.ev.stats["solver_iterations"] += iters
        self.win_region = win
        if self.ev.audit:
            self.check_determinacy()
            self.check_absorption()
        return GameResult(0 in win, self, strategy, iters)

    def _preds(self):
        preds = {}
        for n, edges in enumerate(self.moves):
            for mi, (_, children) in enumerate(edges or ()):
                for c in children:
                    preds.setdefault(c, []).append((n, mi))
        return preds

    def _solve_reach(self):
        preds = self._preds()
        count = {}
        for n, edges in enumerate(self.moves):
            for mi, (_, children) in enumerate(edges or ()):
                count[(n, mi)] = len(children)
        goal = [n for n, t in enumerate(self.terminal) if t == "goal"]
        win, strategy = set(goal), {}
        frontier, iters = goal, 0
        while frontier:
            iters += 1
            zeroed = {}
            for w in frontier:
                for n, mi in preds.get(w, ()):
                    count[(n, mi)] -= 1
                    if count[(n, mi)] == 0 and n not in win:
                        zeroed[n] = min(zeroed.get(n, mi), mi)
            for n, mi in zeroed.items():
                win.add(n)
                strategy[n] = mi
            frontier = sorted(zeroed)
        return win, strategy, iters

    def _solve_safety(self):
        preds = self._preds()
        live = {n: len(edges) for n, edges in enumerate(self.moves) if edges}
        dead_move = set()
        bad = [n for n, t in enumerate(self.terminal) if t == "bad"]
        attr = set(bad)
        frontier, iters = bad, 0
        while frontier:
            iters += 1
            nxt = []
            for w in frontier:
                for n, mi in preds.get(w, ()):
                    if (n, mi) in dead_move:
                        continue
                    dead_move.add((n, mi))
                    live[n] -= 1
                    if live[n] == 0 and n not in attr:
                        attr.add(n)
                        nxt.append(n)
            frontier = nxt
        win = set(range(len(self.nodes))) - attr
        strategy = {}
        for n in win:
            for mi, _ in enumerate(self.moves[n] or ()):
                if (n, mi) not in dead_move:
                    strategy[n] = mi
                    break
        return win, strategy, iters

    # audits -------------------------------------------------------------------
    def reachable_nodes(self) -> set:
        seen, stack = {0}, [0]
        while stack:
            n = stack.pop()
            for _, children in self.moves[n] or ():
                for c in children:
                    if c not in seen:
                        seen.add(c)
                        stack.append(c)
        return seen

    def antagonist_region(self) -> set:
        """Independently computed region where the antagonist wins."""
        nodes = set(range(len(self.nodes)))
        if self.kind == "R":
            # protagonist safety region as a greatest fixpoint, then complement
            keep = {n for n in nodes if self.terminal[n] != "bad"}
            changed = True
            while changed:
                changed = False
                for n in list(keep):
                    if self.terminal[n] == "safe":
                        continue
                    edges = self.moves[n] or ()
                    if not any(all(c in keep for c in ch) for _, ch in edges):
                        keep.discard(n)
                        changed = True
            return nodes - keep
        trap = {n for n in nodes if self.terminal[n] != "goal"}
        changed = True
        while changed:
            changed = False
            for n in list(trap):
                edges = self.moves[n]
                if edges is None:
                    continue  # dead or unexpanded leaf: goal unreachable
                if any(all(c not in trap for c in ch) for _, ch in edges):
                    trap.discard(n)
                    changed = True
        return trap

    def check_determinacy(self) -> None:
        ant = self.antagonist_region()
        pro = self.win_region
        nodes = set(range(len(self.nodes)))
        if pro & ant or (pro | ant) != nodes:
            raise EngineError("winning regions do not partition the game nodes")

    def check_absorption(self) -> None:
        succ = self.arena.succ
        for n, edges in enumerate(self.moves):
            if not edges:
                continue
            parent = self.nodes[n][0]
            for _, children in edges:
                for c in children:
                    for x, r2, st2, _ in self.nodes[c][0]:
                        ok = any(
                            x == x0 and r2 in succ[r0] and (st0 not in ABSORBING or st0 == st2)
                            for x0, r0, st0, _ in parent
                        )
                        if not ok:
                            raise EngineError(f"status absorption broken on edge {n} -> {c}")

    # rendering ----------------------------------------------------------------
    def node_label(self, nid) -> str:
        triples, _ = self.nodes[nid]
        return ";".join(f"{x}:{self.arena.index.get(r, r)}:{st}:{','.join(map(str, k))}"
                        for x, r, st, k in triples)

    def move_json(self, nid, mi) -> dict:
        move, _ = self.moves[nid][mi]
        out = {}
        for (m, blk), i in zip(self.slots(nid), move):
            agent = self.members[m]
            out.setdefault(self.arena.agents[agent], []).append(
                {"anchors": list(blk), "command": self.arena.command(agent, i).name}
            )
        return out


def _triple_order(t):
    return (t[0], t[1], t[2], t[3])


def _partition_from_labels(items, labels) -> tuple:
    blocks = {}
    for x, lab in zip(items, labels):
        blocks.setdefault(lab, []).append(x)
    return tuple(sorted(tuple(sorted(b)) for b in blocks.values()))


# -- witnesses --------------------------------------------------------------------


@dataclass
class WitnessStrategy:
    """Protagonist moves on every winning node reachable under the strategy."""

    game: MacroGame
    moves: dict  # node id -> move index
    root: int = 0

    @classmethod
    def from_result(cls, result: GameResult) -> "WitnessStrategy":
        game = result.game
        keep, stack = {}, [0]
        while stack:
            n = stack.pop()
            if n in keep or n not in result.strategy:
                continue
            keep[n] = result.strategy[n]
            stack.extend(game.moves[n][keep[n]][1])
        return cls(game, keep)

    def to_json(self) -> dict:
        g = self.game
        anchors = g.ev.knowledge(g.kid).last
        return {
            "formula": format_formula(g.phi),
            "coalition": list(g.phi.coalition),
            "anchors": [g.arena.describe(q) for q in anchors],
            "root": g.node_label(self.root),
            "moves": {g.node_label(n): g.move_json(n, mi) for n, mi in sorted(self.moves.items())},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def replay(arena: Arena, witness: WitnessStrategy, bound: int) -> dict:
    """Simulate the witness against every adversary behaviour up to ``bound`` steps.

    Coalition actions are read from the JSON form of the witness; successor
    states are recomputed from the commands, not taken from the game graph.
    """
    game = witness.game
    table = witness.to_json()["moves"]
    kind = game.kind
    names = {a: {c.name: i for i, c in enumerate(arena.model.all_commands(a))} for a in game.members}
    frontier = {(witness.root, t) for t in game.nodes[witness.root][0]}
    violations, visited, unresolved = [], 0, 0
    for depth in range(bound + 1):
        nxt = set()
        for nid, t in frontier:
            visited += 1
            x, r, st, kappa = t
            if kind in ("U", "X") and st == ACHIEVED or kind == "R" and st == RELEASED:
                continue
            if st in (FAILED, VIOLATED):
                violations.append({"depth": depth, "state": arena.describe(r), "status": st})
                continue
            if depth == bound:
                if kind != "R":
                    unresolved += 1
                continue
            label = game.node_label(nid)
            if label not in table:
                raise EngineError(f"untracked macro-state at depth {depth}")
            chosen = {}
            for agent_name, entries in table[label].items():
                agent = arena.model.agent_id(agent_name)
                for e in entries:
                    if x in e["anchors"]:
                        chosen[agent] = names[agent][e["command"]]
            mi = witness.moves[nid]
            children = game.moves[nid][mi][1]
            combos = itertools.product(*[(chosen[a],) if a in chosen else arena.enabled(r, a)
                                         for a in range(arena.model.n_agents)])
            for joint in combos:
                sm = cm = 0
                for a, i in enumerate(joint):
                    c = arena.command(a, i)
                    sm |= c.set_mask
                    cm |= c.clear_mask
                s2 = (r & ~cm) | sm
                kappa2 = tuple(game.ev.extend(k, s2) for k in kappa)
                t2 = (x, s2, game.update(st, s2, kappa2), kappa2)
                target = [c for c in children if t2 in set(game.nodes[c][0])]
                if not target:
                    raise EngineError("replayed outcome is not tracked by any successor macro-state")
                nxt.add((target[0], t2))
        frontier = nxt
        if not frontier:
            break
    holds = not violations and unresolved == 0
    return {"holds": holds, "visited": visited, "violations": violations[:10], "unresolved": unresolved,
            "bound": bound}


# -- top level ----------------------------------------------------------------------


@dataclass
class Verdict:
    formula: str
    per_initial: list  # (state, holds)
    overall: bool
    stats: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)  # initial state -> WitnessStrategy


def evaluate(arena: Arena, f, A=None, strict: bool = False, node_budget: int = DEFAULT_NODE_BUDGET,
             evaluator: Evaluator = None) -> Verdict:
    """Decide a core formula at every initial state; the overall verdict is their conjunction."""
    from .acast import AcastError, check_acast

    if A is not None:
        ok, offenders = is_A_formula(f, A)
        if not ok:
            raise NotAFormulaError(
                "coalitions outside {" + ",".join(A) + "}: " + ", ".join("{" + ",".join(b) + "}" for b in offenders)
            )
        reports = check_acast(arena.model, f, A, strict=strict)
        if strict and not all(r.ok for r in reports):
            bad = [r for r in reports if not r.ok][0]
            raise AcastError(f"model is not {{{','.join(bad.coalition)}}}-cast ({len(bad.violations)} violations)")
    ev = evaluator or Evaluator(arena, node_budget=node_budget)
    per = []
    witnesses = {}
    for s0 in arena.initial:
        holds = ev.holds_initially(f, s0)
        per.append((s0, holds))
        if isinstance(f, COALITION_NODES):
            res = ev.game_result(f, ev.initial_knowledge(f, s0))
            if res.win:
                witnesses[s0] = WitnessStrategy.from_result(res)
    stats = dict(ev.stats)
    stats["states"] = len(arena.states)
    return Verdict(format_formula(f), per, all(h for _, h in per), stats, witnesses)
