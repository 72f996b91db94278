"""Structural analysis: transition classes, simple cycles, dependence relations."""

from __future__ import annotations

from collections import deque
from itertools import combinations

from .core import (
    NetDef, RpnError, State, con, effects_of, fire_forward, forward_check, guard_of,
)
from .reversing import CO, MARKING, STRUCTURAL, DependenceRelation

TRANSFERRING = "transferring"
BOND_CREATING = "bond-creating"


class NotTransAcyclic(RpnError):
    def __init__(self, witness):
        super().__init__("net is not trans-acyclic; transport-only cycle "
                         + " ".join(witness))
        self.witness = witness


def classify_transitions(net: NetDef) -> dict:
    """Transferring iff the positive parts of the incoming and outgoing label
    unions coincide; bond-creating otherwise."""
    return {t: TRANSFERRING if guard_of(net, t) == effects_of(net, t) else BOND_CREATING
            for t in net.transition_order}


def _successors(net: NetDef) -> dict:
    succ: dict = {x: [] for x in net.places | net.transitions}
    for (src, dst) in sorted(net.arcs):
        succ[src].append(dst)
    return succ


def find_cycles(net: NetDef) -> list[tuple]:
    """All simple cycles, each as (p0, t0, p1, ..., p0) rotated to its least place."""
    succ = _successors(net)
    out = []
    for start in sorted(net.places):
        path = [start]
        on_path = {start}

        def dfs(node):
            for nxt in succ[node]:
                if nxt == start:
                    out.append(tuple(path) + (start,))
                elif nxt not in on_path and not (nxt in net.places and nxt < start):
                    path.append(nxt)
                    on_path.add(nxt)
                    dfs(nxt)
                    path.pop()
                    on_path.discard(nxt)

        dfs(start)
    return out


def cycle_transitions(cycle) -> list:
    return [x for x in cycle[1::2]]


def is_trans_acyclic(net: NetDef) -> tuple[bool, tuple | None]:
    classes = classify_transitions(net)
    for cyc in find_cycles(net):
        if all(classes[t] == TRANSFERRING for t in cycle_transitions(cyc)):
            return False, cyc
    return True, None


def require_trans_acyclic(net: NetDef):
    ok, witness = is_trans_acyclic(net)
    if not ok:
        raise NotTransAcyclic(witness)


def structural_dependence(net: NetDef) -> DependenceRelation:
    ts = net.transition_order
    pairs = set()
    for i, t1 in enumerate(ts):
        for t2 in ts[i:]:
            if set(net.postset(t1)) & set(net.preset(t2)) \
                    or set(net.preset(t1)) & set(net.postset(t2)):
                pairs.add((t1, t2))
    return DependenceRelation(STRUCTURAL, frozenset(pairs))


def forward_reachable(net: NetDef, max_states: int | None = None) -> list[State]:
    init = net.initial_state()
    seen = {init}
    order = [init]
    queue = deque([init])
    while queue:
        s = queue.popleft()
        for t in net.transition_order:
            if forward_check(net, s, t) is None:
                nxt = fire_forward(net, s, t)
                if nxt not in seen:
                    seen.add(nxt)
                    order.append(nxt)
                    queue.append(nxt)
                    if max_states is not None and len(seen) > max_states:
                        raise RpnError(f"more than {max_states} forward-reachable states")
    return order


def marking_oriented_dependence(net: NetDef) -> DependenceRelation:
    """Pairs co-manipulating a component in some forward-reachable state."""
    require_trans_acyclic(net)
    effects = {t: effects_of(net, t) for t in net.transitions}
    pairs = set()
    for s in forward_reachable(net):
        fired = [t for t in net.transition_order if s.history[t]]
        comps = []
        for p, c in s.marking.items():
            for a in c:
                if isinstance(a, str):
                    comps.append(con(a, c))
        for t1, t2 in combinations(fired, 2):
            if (t1, t2) in pairs:
                continue
            shared = effects[t1] & effects[t2]
            if shared and any(comp & shared for comp in comps):
                pairs.add((t1, t2))
    return DependenceRelation(MARKING, frozenset(pairs))


def co_backward_conflict(net: NetDef) -> DependenceRelation:
    cycles = find_cycles(net)
    on_cycle = {x for cyc in cycles for x in cyc}
    ts = net.transition_order
    pairs = {(t, t) for t in ts}
    for t1, t2 in combinations(ts, 2):
        shared = set(net.postset(t1)) & set(net.postset(t2))
        if any(p in on_cycle for p in shared) and (t1 not in on_cycle or t2 not in on_cycle):
            pairs.add((t1, t2))
    rel = DependenceRelation(CO, frozenset(pairs))
    independent = {t for t in ts if any(not rel.dependent(t, u) for u in ts)}
    return DependenceRelation(CO, rel.pairs, frozenset(independent))


def dependence(net: NetDef, kind: str) -> DependenceRelation:
    if kind == STRUCTURAL:
        return structural_dependence(net)
    if kind == MARKING:
        return marking_oriented_dependence(net)
    if kind == CO:
        return co_backward_conflict(net)
    raise ValueError(f"unknown dependence kind {kind!r}")
