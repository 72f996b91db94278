"""Reversing Petri net data model and forward execution."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

Bond = tuple  # (a, b) with a < b
Item = object  # base id (str) or Bond


class RpnError(Exception):
    pass


class NetError(RpnError):
    """Structurally invalid net definition."""


class UnknownTransition(RpnError, KeyError):
    def __str__(self):
        return f"unknown transition {self.args[0]!r}"


class NotEnabled(RpnError):
    """A move was attempted in a state where it is not enabled."""

    def __init__(self, transition, reason, clause=None):
        super().__init__(f"{transition}: {reason}")
        self.transition = transition
        self.reason = reason
        self.clause = clause


class SequenceError(RpnError):
    def __init__(self, position, transition, cause):
        super().__init__(f"move {position} ({transition}) is not enabled: {cause.reason}")
        self.position = position
        self.transition = transition
        self.cause = cause


def bond(a: str, b: str) -> Bond:
    if a == b:
        raise NetError(f"bond endpoints must differ: {a}-{b}")
    return (a, b) if a < b else (b, a)


def is_bond(x) -> bool:
    return isinstance(x, tuple)


def item_key(x):
    return (1, x) if isinstance(x, tuple) else (0, (x,))


def sorted_items(items: Iterable) -> list:
    return sorted(items, key=item_key)


def fmt_item(x) -> str:
    return f"{x[0]}-{x[1]}" if isinstance(x, tuple) else x


def fmt_items(items: Iterable) -> str:
    return "{" + ", ".join(fmt_item(x) for x in sorted_items(items)) + "}"


def parse_item(s: str):
    if "-" in s:
        a, b = s.split("-", 1)
        return bond(a.strip(), b.strip())
    return s.strip()


def bases_in(items: Iterable) -> set:
    return {x for x in items if not isinstance(x, tuple)}


def bonds_in(items: Iterable) -> set:
    return {x for x in items if isinstance(x, tuple)}


def con(a: str, c: Iterable) -> frozenset:
    """Connected component of base ``a`` inside the token/bond set ``c``.

    Empty when ``a`` is not in ``c``. Otherwise ``a`` together with every base
    reachable over bonds of ``c`` and those bonds.
    """
    c = c if isinstance(c, (set, frozenset)) else set(c)
    if a not in c:
        return frozenset()
    adj: dict[str, list] = {}
    for x in c:
        if isinstance(x, tuple) and x[0] in c and x[1] in c:
            adj.setdefault(x[0], []).append(x)
            adj.setdefault(x[1], []).append(x)
    seen = {a}
    out = {a}
    stack = [a]
    while stack:
        u = stack.pop()
        for b in adj.get(u, ()):
            out.add(b)
            v = b[1] if b[0] == u else b[0]
            if v not in seen:
                seen.add(v)
                out.add(v)
                stack.append(v)
    return frozenset(out)


def components(c: Iterable) -> list[frozenset]:
    """Partition of a bond-closed set into connected components."""
    c = frozenset(c)
    rest = set(bases_in(c))
    out = []
    for a in sorted(rest):
        if a in rest:
            comp = con(a, c)
            rest -= comp
            out.append(comp)
    return out


@dataclass(frozen=True)
class ArcLabel:
    bases: frozenset = frozenset()
    neg_bases: frozenset = frozenset()
    bonds: frozenset = frozenset()
    neg_bonds: frozenset = frozenset()

    def __post_init__(self):
        for name in ("bases", "neg_bases", "bonds", "neg_bonds"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        if self.bases & self.neg_bases or self.bonds & self.neg_bonds:
            raise NetError("arc label holds an element and its negation")

    @classmethod
    def of(cls, *items: str) -> "ArcLabel":
        """Build from strings: ``"a"``, ``"a-b"``, ``"!a"``, ``"!a-b"``."""
        kw = {"bases": set(), "neg_bases": set(), "bonds": set(), "neg_bonds": set()}
        for s in items:
            neg = s.startswith("!")
            x = parse_item(s[1:] if neg else s)
            kind = "bonds" if is_bond(x) else "bases"
            kw[("neg_" if neg else "") + kind].add(x)
        return cls(**kw)

    @property
    def positive(self) -> frozenset:
        return self.bases | self.bonds

    def __bool__(self):
        return bool(self.bases or self.neg_bases or self.bonds or self.neg_bonds)

    def __str__(self):
        parts = [fmt_item(x) for x in sorted_items(self.positive)]
        parts += ["!" + fmt_item(x) for x in sorted_items(self.neg_bases | self.neg_bonds)]
        return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True, eq=False)
class NetDef:
    """A reversing Petri net (P, T, F, A, B) with its initial marking."""

    places: frozenset
    transitions: frozenset
    bases: frozenset
    bonds: frozenset
    arcs: Mapping  # (src, dst) -> ArcLabel
    initial_marking: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "places", frozenset(self.places))
        object.__setattr__(self, "transitions", frozenset(self.transitions))
        object.__setattr__(self, "bases", frozenset(self.bases))
        object.__setattr__(self, "bonds", frozenset(bond(*b) for b in self.bonds))
        arcs = {k: v for k, v in dict(self.arcs).items() if v}
        object.__setattr__(self, "arcs", arcs)
        marking = {p: frozenset() for p in self.places}
        for p, c in dict(self.initial_marking).items():
            marking[p] = frozenset(c)
        object.__setattr__(self, "initial_marking", marking)
        self._check()

    def _check(self):
        P, T, A = self.places, self.transitions, self.bases
        if P & T or P & A or T & A:
            raise NetError("place, transition and base ids must be disjoint")
        for a, b in self.bonds:
            if a not in A or b not in A:
                raise NetError(f"bond {a}-{b} mentions an undeclared base")
        for (src, dst), lab in self.arcs.items():
            if not ((src in P and dst in T) or (src in T and dst in P)):
                raise NetError(f"arc {src}->{dst} must join a place and a transition")
            if not (lab.bases | lab.neg_bases) <= A:
                raise NetError(f"arc {src}->{dst} mentions an undeclared base")
            if not (lab.bonds | lab.neg_bonds) <= self.bonds:
                raise NetError(f"arc {src}->{dst} mentions an undeclared bond")
        for p, c in self.initial_marking.items():
            if p not in P:
                raise NetError(f"marking of unknown place {p}")
            if not bases_in(c) <= A or not bonds_in(c) <= self.bonds:
                raise NetError(f"marking of {p} mentions undeclared bases or bonds")

    def __eq__(self, other):
        if not isinstance(other, NetDef):
            return NotImplemented
        return self.canonical == other.canonical

    def __hash__(self):
        return hash(self.canonical)

    @cached_property
    def canonical(self) -> str:
        arcs = ";".join(f"{s}>{d}:{lab}" for (s, d), lab in sorted(self.arcs.items()))
        mk = ";".join(f"{p}:{fmt_items(c)}" for p, c in sorted(self.initial_marking.items()))
        return "|".join([
            ",".join(sorted(self.places)), ",".join(sorted(self.transitions)),
            ",".join(sorted(self.bases)), ",".join(fmt_item(b) for b in sorted(self.bonds)),
            arcs, mk,
        ])

    @cached_property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical.encode()).hexdigest()[:16]

    @cached_property
    def transition_order(self) -> tuple:
        return tuple(sorted(self.transitions))

    @cached_property
    def _pre(self) -> dict:
        pre = {t: [] for t in self.transitions}
        post = {t: [] for t in self.transitions}
        for (src, dst) in self.arcs:
            if src in self.transitions:
                post[src].append(dst)
            else:
                pre[dst].append(src)
        return {t: (tuple(sorted(pre[t])), tuple(sorted(post[t]))) for t in self.transitions}

    def _known(self, t):
        if t not in self.transitions:
            raise UnknownTransition(t)

    def preset(self, t) -> tuple:
        self._known(t)
        return self._pre[t][0]

    def postset(self, t) -> tuple:
        self._known(t)
        return self._pre[t][1]

    def label(self, src, dst) -> ArcLabel:
        return self.arcs.get((src, dst), ArcLabel())

    def initial_state(self) -> "State":
        return State(dict(self.initial_marking), {t: frozenset() for t in self.transitions})


def guard_of(net: NetDef, t) -> frozenset:
    """Bases and bonds required on the incoming arcs of ``t``.

    Negative elements are left out; no caller needs them.
    """
    out = set()
    for p in net.preset(t):
        out |= net.label(p, t).positive
    return frozenset(out)


def effects_of(net: NetDef, t) -> frozenset:
    out = set()
    for p in net.postset(t):
        out |= net.label(t, p).positive
    return frozenset(out)


def effect_of(net: NetDef, t) -> frozenset:
    return effects_of(net, t) - guard_of(net, t)


@dataclass(frozen=True)
class Violation:
    clause: int
    transition: str
    message: str

    def __str__(self):
        return f"clause {self.clause} violated by {self.transition}: {self.message}"


def validate_well_formed(net: NetDef) -> list[Violation]:
    out = []
    for t in net.transition_order:
        guard, effects = guard_of(net, t), effects_of(net, t)
        gb, eb = bases_in(guard), bases_in(effects)
        if gb != eb:
            out.append(Violation(1, t, f"bases on input arcs {fmt_items(gb)} differ from "
                                       f"bases on output arcs {fmt_items(eb)}"))
        for b in sorted(bonds_in(guard) - effects):
            out.append(Violation(2, t, f"bond {fmt_item(b)} is required but not produced"))
        pre, post = net.preset(t), net.postset(t)
        if not pre:
            out.append(Violation(3, t, "transition has no input place"))
        if len(post) != 1:
            out.append(Violation(3, t, f"transition has {len(post)} output places, expected 1"))
        for p in pre:
            lab = net.label(p, t)
            for q in post:
                for b in sorted(net.label(t, q).bonds):
                    if b[0] in lab.bases and b[1] in lab.bases and b not in lab.bonds \
                            and b not in lab.neg_bonds:
                        out.append(Violation(4, t, f"bond {fmt_item(b)} produced in {q} from "
                                                   f"bases of {p} without {fmt_item(b)} or "
                                                   f"!{fmt_item(b)} on {p}->{t}"))
    return out


def validate_marking(net: NetDef, marking: Mapping | None = None) -> list[str]:
    """Bond closure and one-occurrence-per-base checks on a marking."""
    marking = net.initial_marking if marking is None else marking
    out = []
    seen: dict[str, list] = {a: [] for a in net.bases}
    for p in sorted(marking):
        c = marking[p]
        for a, b in sorted(bonds_in(c)):
            if a not in c or b not in c:
                out.append(f"marking of {p} holds bond {a}-{b} without both endpoints")
        for a in bases_in(c):
            seen[a].append(p)
    for a in sorted(seen):
        if len(seen[a]) != 1:
            where = ", ".join(seen[a]) or "no place"
            out.append(f"base {a} occurs in {where}; expected exactly one place")
    return out


@dataclass(frozen=True)
class State:
    """A marking (place -> set of bases and bonds) with a history
    (transition -> set of at most two occurrence indices)."""

    marking: Mapping
    history: Mapping

    @cached_property
    def key(self) -> tuple:
        m = tuple((p, tuple(sorted_items(c))) for p, c in sorted(self.marking.items()))
        h = tuple((t, tuple(sorted(ks))) for t, ks in sorted(self.history.items()))
        return (m, h)

    def __hash__(self):
        return hash(self.key)

    @cached_property
    def digest(self) -> str:
        return hashlib.sha1(repr(self.key).encode()).hexdigest()[:12]

    def indices(self) -> list[int]:
        return sorted(k for ks in self.history.values() for k in ks)

    def max_index(self) -> int:
        return max(self.indices(), default=0)

    def __str__(self):
        lines = [f"{p}: {fmt_items(c)}" for p, c in sorted(self.marking.items())]
        h = ", ".join(f"{t}:{{{','.join(map(str, sorted(ks)))}}}"
                      for t, ks in sorted(self.history.items()))
        lines.append(f"H: {h}")
        return "\n".join(lines)


def forward_check(net: NetDef, state: State, t) -> tuple[int, str] | None:
    """First failed enabledness clause as (clause, reason), or None."""
    pre, post = net.preset(t), net.postset(t)
    M = state.marking
    for p in pre:
        lab = net.label(p, t)
        missing = lab.positive - M[p]
        if missing:
            return 1, f"{fmt_items(missing)} missing from {p}"
    for p in pre:
        lab = net.label(p, t)
        present = (lab.neg_bases | lab.neg_bonds) & M[p]
        if present:
            return 2, f"{fmt_items(present)} must be absent from {p}"
    for q in post:
        for b in sorted(net.label(t, q).bonds):
            for p in pre:
                if b in M[p] and b not in net.label(p, t).bonds:
                    return 3, f"existing bond {fmt_item(b)} in {p} is not on the arc {p}->{t}"
    return None


def forward_enabled(net: NetDef, state: State, t) -> bool:
    return forward_check(net, state, t) is None


def fire_forward(net: NetDef, state: State, t) -> State:
    failed = forward_check(net, state, t)
    if failed:
        raise NotEnabled(t, failed[1], clause=failed[0])
    M = state.marking
    pre, post = net.preset(t), net.postset(t)
    new = dict(M)
    for p in pre:
        taken = set()
        for a in net.label(p, t).bases:
            taken |= con(a, M[p])
        new[p] = new[p] - taken
    for q in post:
        out = net.label(t, q)
        moved = set(out.positive)
        for a in out.bases:
            for p in pre:
                moved |= con(a, M[p])
        new[q] = new[q] | moved
    k = state.max_index() + 1
    hist = dict(state.history)
    hist[t] = hist[t] | {k}
    return State(new, hist)


def fire_sequence(net: NetDef, state: State, seq: Iterable) -> State:
    for i, t in enumerate(seq):
        try:
            state = fire_forward(net, state, t)
        except NotEnabled as e:
            raise SequenceError(i, t, e) from e
    return state
