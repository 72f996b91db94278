"""Backtracking and causal reversing, with the dependence relation passed in."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .core import (
    NetDef, NotEnabled, RpnError, SequenceError, State, con, effect_of, fire_forward,
    fmt_items, forward_check,
)

BACKTRACKING = "backtracking"
CAUSAL = "causal"
SEMANTICS = (BACKTRACKING, CAUSAL)

STRUCTURAL = "structural"
MARKING = "marking-oriented"
CO = "co-backward-conflict"
DEPENDENCE_KINDS = (STRUCTURAL, MARKING, CO)


def _pair(a, b):
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class DependenceRelation:
    """Symmetric relation on transitions, stored as normalised pairs.

    ``independent`` is only meaningful for the co-backward-conflict kind: the
    transitions having at least one co-independent partner.
    """

    kind: str
    pairs: frozenset
    independent: frozenset = frozenset()

    def __post_init__(self):
        if self.kind not in DEPENDENCE_KINDS:
            raise ValueError(f"unknown dependence kind {self.kind!r}")
        object.__setattr__(self, "pairs", frozenset(_pair(a, b) for a, b in self.pairs))
        object.__setattr__(self, "independent", frozenset(self.independent))

    def dependent(self, t1, t2) -> bool:
        return _pair(t1, t2) in self.pairs

    def partners(self, t) -> list:
        out = set()
        for a, b in self.pairs:
            if a == t:
                out.add(b)
            if b == t:
                out.add(a)
        return sorted(out)

    def listing(self, reflexive=False) -> list[tuple]:
        return sorted(p for p in self.pairs if reflexive or p[0] != p[1])


@dataclass(frozen=True)
class Move:
    transition: str
    reverse: bool = False

    def __str__(self):
        return ("~" if self.reverse else "") + self.transition

    @classmethod
    def parse(cls, s: str) -> "Move":
        s = s.strip()
        if s.startswith("~"):
            return cls(s[1:].strip(), True)
        return cls(s, False)


def parse_moves(text: str | Iterable[str]) -> list[Move]:
    if isinstance(text, str):
        text = [x for x in text.replace(" ", ",").split(",") if x.strip()]
    return [m if isinstance(m, Move) else Move.parse(m) for m in text]


def bt_enabled(net: NetDef, state: State, t) -> bool:
    net.postset(t)
    hist = state.history[t]
    return bool(hist) and max(hist) >= state.max_index()


def reverse_tokens_present(net: NetDef, state: State, t) -> bool:
    """Everything ``t`` put on its output arc is still in the output place."""
    for q in net.postset(t):
        if not net.label(t, q).positive <= state.marking[q]:
            return False
    return True


def co_check(net: NetDef, state: State, t, dep: DependenceRelation) -> str | None:
    net.postset(t)
    hist = state.history[t]
    if not hist:
        return "H(t) is empty"
    top = max(hist)
    for u in dep.partners(t):
        if u != t and state.history[u] and max(state.history[u]) > top:
            return f"dependent transition {u} executed later and is not reversed"
    if not reverse_tokens_present(net, state, t):
        q = net.postset(t)[0]
        missing = net.label(t, q).positive - state.marking[q]
        return f"{fmt_items(missing)} no longer in {q}"
    return None


def co_enabled(net: NetDef, state: State, t, dep: DependenceRelation) -> bool:
    """Causal reverse enabledness.

    Besides the history condition the tokens ``t`` produced must still sit in its
    output place; without that the undo would have nothing to take back.
    """
    return co_check(net, state, t, dep) is None


def _undo_marking(net: NetDef, state: State, t) -> dict:
    M = state.marking
    eff = effect_of(net, t)
    pre, post = net.preset(t), net.postset(t)
    new = dict(M)
    for q in post:
        taken = set()
        for a in net.label(t, q).bases:
            taken |= con(a, M[q])
        new[q] = new[q] - taken
    for p in pre:
        back = set()
        for q in post:
            rest = M[q] - eff
            for a in net.label(p, t).bases & net.label(t, q).bases:
                back |= con(a, rest)
        new[p] = new[p] | back
    return new


def fire_backtrack(net: NetDef, state: State, t) -> State:
    if not bt_enabled(net, state, t):
        raise NotEnabled(t, "not bt-enabled: t does not hold the largest history index")
    hist = dict(state.history)
    hist[t] = hist[t] - {max(hist[t])}
    return State(_undo_marking(net, state, t), hist)


def fire_causal_reverse(net: NetDef, state: State, t, dep: DependenceRelation) -> State:
    failed = co_check(net, state, t, dep)
    if failed:
        raise NotEnabled(t, f"not co-enabled: {failed}")
    k = max(state.history[t])
    hist = {}
    for u, ks in state.history.items():
        if u == t:
            ks = ks - {k}
        hist[u] = frozenset(x - 1 if x > k else x for x in ks)
    return State(_undo_marking(net, state, t), hist)


def reverse_check(net, state, t, semantics, dep=None) -> str | None:
    if semantics == BACKTRACKING:
        if not bt_enabled(net, state, t):
            return "not bt-enabled: t does not hold the largest history index"
        if not reverse_tokens_present(net, state, t):
            return "tokens produced by t are no longer in its output place"
        return None
    if semantics == CAUSAL:
        if dep is None:
            raise RpnError("causal reversing needs a dependence relation")
        failed = co_check(net, state, t, dep)
        return None if failed is None else f"not co-enabled: {failed}"
    raise ValueError(f"unknown semantics {semantics!r}")


def move_enabled(net, state, move: Move, semantics, dep=None) -> bool:
    if move.reverse:
        return reverse_check(net, state, move.transition, semantics, dep) is None
    return forward_check(net, state, move.transition) is None


def fire_move(net: NetDef, state: State, move: Move, semantics=BACKTRACKING, dep=None) -> State:
    if not move.reverse:
        return fire_forward(net, state, move.transition)
    failed = reverse_check(net, state, move.transition, semantics, dep)
    if failed:
        raise NotEnabled(move.transition, failed)
    if semantics == BACKTRACKING:
        return fire_backtrack(net, state, move.transition)
    return fire_causal_reverse(net, state, move.transition, dep)


def enabled_moves(net: NetDef, state: State, semantics=BACKTRACKING, dep=None) -> list[Move]:
    """Forward moves first, then reverse moves, each in transition order."""
    ts = net.transition_order
    out = [Move(t) for t in ts if forward_check(net, state, t) is None]
    out += [Move(t, True) for t in ts if reverse_check(net, state, t, semantics, dep) is None]
    return out


def fire_moves(net, state, moves, semantics=BACKTRACKING, dep=None) -> list[State]:
    """All intermediate states, starting with ``state``."""
    out = [state]
    for i, m in enumerate(parse_moves(moves)):
        try:
            out.append(fire_move(net, out[-1], m, semantics, dep))
        except NotEnabled as e:
            raise SequenceError(i, str(m), e) from e
    return out
