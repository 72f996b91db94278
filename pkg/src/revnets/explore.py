"""State-space exploration and theorem checks for RPNs and their CPN translations."""

from __future__ import annotations

import os
import random
from collections import deque
from dataclasses import dataclass, field

from .core import NetDef, RpnError, State
from .cpn import (
    CpnError, CpnNet, binding_digest, cpn_fire, enabled_bindings, marking_key,
)
from .reversing import (
    BACKTRACKING, CAUSAL, DependenceRelation, Move, enabled_moves, fire_move, reverse_check,
)
from .translate import TranslationLayout, check_correspondence

DEFAULT_MAX_STATES = 200_000


class StateCapExceeded(RpnError):
    def __init__(self, cap, explored, frontier):
        super().__init__(f"state cap {cap} exceeded: {explored} states explored, "
                         f"{frontier} still on the frontier")
        self.cap, self.explored, self.frontier = cap, explored, frontier


def max_states_from_env(default=DEFAULT_MAX_STATES) -> int:
    raw = os.environ.get("REVNETS_MAX_STATES")
    return int(raw) if raw else default


@dataclass
class Lts:
    """Reachable states in BFS order; edges are (src, label, dst) by state number."""

    states: list
    keys: dict  # state -> number
    edges: list
    initial: int = 0

    def __len__(self):
        return len(self.states)

    def successors(self, i) -> list:
        return [(lab, d) for s, lab, d in self.edges if s == i]

    def edge_count(self, reverse=None) -> int:
        if reverse is None:
            return len(self.edges)
        return sum(1 for _, lab, _ in self.edges if isinstance(lab, Move) and lab.reverse == reverse)

    def to_dot(self, name="lts", digest=None) -> str:
        digest = digest or (lambda s: getattr(s, "digest", str(s)))
        lines = [f"digraph {name} {{", "  rankdir=LR;"]
        for i, s in enumerate(self.states):
            shape = "doublecircle" if i == self.initial else "circle"
            lines.append(f'  s{i} [label="{digest(s)}", shape={shape}];')
        for s, lab, d in self.edges:
            style = ", style=dashed" if isinstance(lab, Move) and lab.reverse else ""
            lines.append(f'  s{s} -> s{d} [label="{_label(lab)}"{style}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _label(lab) -> str:
    if isinstance(lab, tuple):
        return f"{lab[0]}@{lab[1]}"
    return str(lab)


def _bfs(initial, successors, key, max_states) -> Lts:
    keys = {key(initial): 0}
    states, edges = [initial], []
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for lab, nxt in successors(states[i]):
            k = key(nxt)
            if k not in keys:
                if max_states is not None and len(states) >= max_states:
                    raise StateCapExceeded(max_states, len(states), len(queue) + 1)
                keys[k] = len(states)
                states.append(nxt)
                queue.append(keys[k])
            edges.append((i, lab, keys[k]))
    return Lts(states, keys, edges)


def explore_rpn(net: NetDef, semantics=BACKTRACKING, dep: DependenceRelation | None = None,
                max_states: int | None = None) -> Lts:
    def succ(s):
        return [(m, fire_move(net, s, m, semantics, dep))
                for m in enabled_moves(net, s, semantics, dep)]
    return _bfs(net.initial_state(), succ, lambda s: s, max_states)


def explore_cpn(cpn: CpnNet, max_states: int | None = None) -> Lts:
    def succ(m):
        out = []
        for t in cpn.transitions:
            for b in enabled_bindings(cpn, m, t):
                out.append(((t, binding_digest(b)), cpn_fire(cpn, m, t, b)))
        return out
    return _bfs(cpn.initial_marking(), succ, marking_key, max_states)


# -- lockstep -----------------------------------------------------------------

@dataclass
class ExecutionTrace:
    moves: list
    digests: list  # digest of the state after each move, starting with the initial one

    def __str__(self):
        return " ".join(str(m) for m in self.moves)

    @classmethod
    def replay(cls, net, moves, semantics=BACKTRACKING, dep=None) -> "ExecutionTrace":
        s = net.initial_state()
        digests = [s.digest]
        for m in moves:
            s = fire_move(net, s, m, semantics, dep)
            digests.append(s.digest)
        return cls(list(moves), digests)


@dataclass
class LockstepResult:
    ok: bool
    rpn_states: int
    cpn_states: int
    divergence: str | None = None
    trace: list = field(default_factory=list)

    def __str__(self):
        if self.ok:
            return f"lockstep: pass ({self.rpn_states} corresponding states)"
        where = " ".join(str(m) for m in self.trace) or "<initial>"
        return f"lockstep: DIVERGENCE after [{where}]: {self.divergence}"


def _path(parent, i):
    out = []
    while parent[i] is not None:
        i, m = parent[i]
        out.append(m)
    return out[::-1]


def check_lockstep(net: NetDef, cpn: CpnNet, layout: TranslationLayout, semantics=BACKTRACKING,
                   dep: DependenceRelation | None = None,
                   max_states: int | None = None) -> LockstepResult:
    """Synchronised BFS of the RPN and its translation through the correspondence map."""
    init = net.initial_state()
    pairs = [(init, cpn.initial_marking())]
    seen = {init: 0}
    parent = [None]
    queue = deque([0])

    def fail(i, msg, extra=None):
        trace = _path(parent, i) + ([extra] if extra else [])
        return LockstepResult(False, len(pairs), len(pairs), msg, trace)

    rep = check_correspondence(net, layout, *pairs[0])
    if not rep.verdict:
        return fail(0, str(rep))
    while queue:
        i = queue.popleft()
        s, m = pairs[i]
        moves = enabled_moves(net, s, semantics, dep)
        cpn_moves = {}
        try:
            for t in cpn.transitions:
                bs = enabled_bindings(cpn, m, t)
                if len(bs) > 1:
                    return fail(i, f"{t} has {len(bs)} enabled bindings")
                if bs:
                    t0, rev = layout.move_of(t)
                    cpn_moves[Move(t0, rev)] = (t, bs[0])
        except (CpnError, KeyError) as e:
            return fail(i, f"CPN evaluation failed: {e}")
        if set(moves) != set(cpn_moves):
            only_rpn = sorted(map(str, set(moves) - set(cpn_moves)))
            only_cpn = sorted(map(str, set(cpn_moves) - set(moves)))
            return fail(i, f"enabled moves differ: RPN only {only_rpn}, CPN only {only_cpn}")
        for mv in moves:
            s2 = fire_move(net, s, mv, semantics, dep)
            t, b = cpn_moves[mv]
            try:
                m2 = cpn_fire(cpn, m, t, b)
            except CpnError as e:
                return fail(i, f"firing {t} failed: {e}", mv)
            if s2 in seen:
                s_known, m_known = pairs[seen[s2]]
                if marking_key(m_known) != marking_key(m2):
                    return fail(i, "RPN state reached with two different CPN markings", mv)
                continue
            rep = check_correspondence(net, layout, s2, m2)
            if not rep.verdict:
                return fail(i, str(rep), mv)
            if max_states is not None and len(pairs) >= max_states:
                raise StateCapExceeded(max_states, len(pairs), len(queue) + 1)
            seen[s2] = len(pairs)
            pairs.append((s2, m2))
            parent.append((i, mv))
            queue.append(seen[s2])
    return LockstepResult(True, len(pairs), len({marking_key(m) for _, m in pairs}))


# -- round trips --------------------------------------------------------------

@dataclass
class RoundtripResult:
    ok: bool
    checked: int
    counterexample: list | None = None
    seed: int | None = None

    def __str__(self):
        if self.ok:
            return f"roundtrip: pass ({self.checked} balanced sequences)"
        seq = " ".join(map(str, self.counterexample))
        return f"roundtrip: FAIL on [{seq}] (seed {self.seed})"


def _balanced(moves) -> bool:
    count = {}
    for m in moves:
        count[m.transition] = count.get(m.transition, 0) + (-1 if m.reverse else 1)
    return all(v == 0 for v in count.values())


def balanced_sequences(net, max_len, semantics=BACKTRACKING, dep=None):
    """Every executable balanced move sequence of length at most ``max_len``.

    Yields (moves, final_state); the empty sequence is included.
    """
    init = net.initial_state()
    stack = [(init, [], {})]
    while stack:
        s, seq, count = stack.pop()
        if all(v == 0 for v in count.values()):
            yield seq, s
        if len(seq) == max_len:
            continue
        remaining = max_len - len(seq)
        pending = sum(count.values())
        for m in reversed(enabled_moves(net, s, semantics, dep)):
            d = -1 if m.reverse else 1
            new_count = dict(count)
            new_count[m.transition] = new_count.get(m.transition, 0) + d
            # balance is still reachable only if the open forward moves fit
            if pending + d > remaining - 1:
                continue
            stack.append((fire_move(net, s, m, semantics, dep), seq + [m], new_count))


def check_reversal_roundtrips(net: NetDef, semantics=BACKTRACKING,
                              dep: DependenceRelation | None = None, trials=0, max_len=8,
                              seed=0, exhaustive=True) -> RoundtripResult:
    """Balanced sequences must lead back to the initial state."""
    init = net.initial_state()
    checked = 0
    if exhaustive:
        for seq, s in balanced_sequences(net, max_len, semantics, dep):
            checked += 1
            if s != init:
                return RoundtripResult(False, checked, seq, None)
    rng = random.Random(seed)
    for _ in range(trials):
        s, seq = init, []
        forward = rng.randint(0, max_len // 2)
        for _ in range(forward):
            fwd = [m for m in enabled_moves(net, s, semantics, dep) if not m.reverse]
            if not fwd:
                break
            m = rng.choice(fwd)
            seq.append(m)
            s = fire_move(net, s, m, semantics, dep)
        # unwind by reverse moves chosen at random among those that are enabled
        while not _balanced(seq):
            open_ts = {}
            for m in seq:
                open_ts[m.transition] = open_ts.get(m.transition, 0) + (-1 if m.reverse else 1)
            rev = [m for m in enabled_moves(net, s, semantics, dep)
                   if m.reverse and open_ts.get(m.transition, 0) > 0]
            if not rev:
                break
            m = rng.choice(rev)
            seq.append(m)
            s = fire_move(net, s, m, semantics, dep)
        if not _balanced(seq):
            continue
        checked += 1
        if s != init:
            return RoundtripResult(False, checked, seq, seed)
    return RoundtripResult(True, checked, None, seed)


# -- stuck states -------------------------------------------------------------

def reverse_edges(lts: Lts) -> dict:
    """dst -> list of src over reverse-move edges."""
    back = {}
    for s, lab, d in lts.edges:
        if isinstance(lab, Move) and lab.reverse:
            back.setdefault(d, []).append(s)
    return back


def find_stuck_states(net: NetDef, dep: DependenceRelation | None, semantics=None,
                      max_states: int | None = None) -> list[tuple[ExecutionTrace, State]]:
    """Reachable states with an executed history but no reverse-only path home.

    Returned in BFS order with a shortest witnessing trace for each.
    """
    semantics = semantics or (CAUSAL if dep is not None else BACKTRACKING)
    lts = explore_rpn(net, semantics, dep, max_states)
    back = reverse_edges(lts)
    home = {lts.initial}
    queue = deque([lts.initial])
    while queue:
        d = queue.popleft()
        for s in back.get(d, ()):
            if s not in home:
                home.add(s)
                queue.append(s)
    parent = {lts.initial: None}
    for s, lab, d in lts.edges:
        if d not in parent:
            parent[d] = (s, lab)
    out = []
    for i, st in enumerate(lts.states):
        if i in home or st.max_index() == 0:
            continue
        moves, j = [], i
        while parent[j] is not None:
            j, lab = parent[j]
            moves.append(lab)
        out.append((ExecutionTrace.replay(net, moves[::-1], semantics, dep), st))
    return out


def is_stuck(net: NetDef, state: State, dep, semantics=None) -> bool:
    """No sequence of reverse moves from ``state`` reaches the initial state."""
    semantics = semantics or (CAUSAL if dep is not None else BACKTRACKING)
    init = net.initial_state()
    seen = {state}
    queue = deque([state])
    while queue:
        s = queue.popleft()
        if s == init:
            return False
        for t in net.transition_order:
            if reverse_check(net, s, t, semantics, dep) is None:
                nxt = fire_move(net, s, Move(t, True), semantics, dep)
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    return True

