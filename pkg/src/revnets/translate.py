"""Compile a reversing Petri net into a bounded coloured Petri net.

Each RPN place becomes a place holding exactly one molecule token, its whole
content. Each transition t_i gets a history place h_i holding one list of
triples (n, j, i), and each unordered pair gets a counter place h_ij holding
#H(t_i) + #H(t_j). Reverse transitions tr_i undo t_i under the guard built from
those history places.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .analysis import co_backward_conflict, require_trans_acyclic, structural_dependence
from .core import NetDef, RpnError, State, effect_of, validate_well_formed
from .cpn import (
    HIST_LIST, MOLECULE, AddInt, And, BreakComponent, ColourSet, Component, Const, Contains,
    CpnNet, DropLatest, LatestK, Member, Molecule, MolDiff, MolUnion, NonEmpty, Not,
    Renumber, SetWith, Size, Term, Triple, Var, canon,
)
from .reversing import BACKTRACKING, CAUSAL, CO, DependenceRelation


class TranslationError(RpnError):
    pass


class NotCorresponding(RpnError):
    """A CPN marking that no RPN state corresponds to."""


@dataclass
class TranslationLayout:
    semantics: str
    dep_kind: str | None
    index: dict  # transition -> 1-based position
    thp: dict  # transition -> history place
    chp: dict  # (ti, tj) with ti < tj -> counter place
    shp: frozenset  # pairs structurally dependent
    bhp: frozenset  # pairs co-dependent
    reverses: dict = field(default_factory=dict)  # transition -> reverse transition
    partners: dict = field(default_factory=dict)  # transition -> checked partners

    @property
    def transitions(self) -> list:
        return sorted(self.index, key=self.index.get)

    def pair_place(self, a, b) -> str:
        return self.chp[(a, b) if a < b else (b, a)]

    def history_places(self) -> set:
        return set(self.thp.values()) | set(self.chp.values())

    def move_of(self, cpn_transition):
        """(transition, reverse?) for a CPN transition name."""
        for t, tr in self.reverses.items():
            if tr == cpn_transition:
                return t, True
        if cpn_transition in self.index:
            return cpn_transition, False
        raise KeyError(cpn_transition)


def _mol(items) -> Molecule:
    return Molecule.of(items)


def _mvar(p) -> str:
    return f"m_{p}"


def _hl(t) -> str:
    return f"hl_{t}"


def _hc(a, b) -> str:
    a, b = (a, b) if a < b else (b, a)
    return f"hc_{a}_{b}"


def _taken(net, x, t) -> Term:
    return MolUnion(tuple(Component(Var(_mvar(x)), a) for a in sorted(net.label(x, t).bases)))


def _items_sorted(items):
    return sorted(items, key=canon)


def _check_names(net: NetDef, names):
    clash = (net.places | net.transitions) & set(names)
    if clash:
        raise TranslationError(f"generated names collide with net ids: {sorted(clash)}")


def translate_forward(net: NetDef, semantics=BACKTRACKING,
                      dep: DependenceRelation | None = None) -> tuple[CpnNet, TranslationLayout]:
    bad = validate_well_formed(net)
    if bad:
        raise TranslationError("net is not well-formed: " + "; ".join(v.message for v in bad))
    require_trans_acyclic(net)
    ts = net.transition_order
    n = len(ts)
    index = {t: i + 1 for i, t in enumerate(ts)}
    thp = {t: f"h_{t}" for t in ts}
    chp = {(a, b): f"h_{a}_{b}" for a, b in combinations(ts, 2)}
    _check_names(net, list(thp.values()) + list(chp.values()))
    counter = ColourSet("BoundInt", 2 * n)
    shp = frozenset(structural_dependence(net).listing())
    bhp = frozenset(co_backward_conflict(net).listing())
    layout = TranslationLayout(semantics, dep.kind if dep else None, index, thp, chp, shp, bhp)

    places = {p: MOLECULE for p in sorted(net.places)}
    places.update({h: HIST_LIST for h in thp.values()})
    places.update({h: counter for h in chp.values()})
    variables = {_mvar(p): MOLECULE for p in net.places}
    variables.update({_hl(t): HIST_LIST for t in ts})
    variables.update({_hc(a, b): counter for a, b in chp})
    init = {p: Const(frozenset({_mol(net.initial_marking[p])})) for p in net.places}
    init.update({h: Const(frozenset({frozenset()})) for h in thp.values()})
    init.update({h: Const(frozenset({0})) for h in chp.values()})

    arcs, guards = {}, {}
    for t in ts:
        pre, post = net.preset(t), net.postset(t)
        conds = []
        for p in pre:
            lab = net.label(p, t)
            m = Var(_mvar(p))
            conds += [Contains(m, x) for x in _items_sorted(lab.positive)]
            conds += [Not(Contains(m, x)) for x in _items_sorted(lab.neg_bases | lab.neg_bonds)]
        for q in post:
            for b in sorted(net.label(t, q).bonds):
                for p in pre:
                    if b not in net.label(p, t).bonds:
                        conds.append(Not(Contains(Var(_mvar(p)), b)))
        guards[t] = And(tuple(conds))

        for x in sorted(set(pre) | set(post)):
            m = Var(_mvar(x))
            arcs[(x, t)] = m
            out = MolDiff(m, _taken(net, x, t)) if x in pre else m
            if x in post:
                lab = net.label(t, x)
                moved = [Const(_mol(lab.positive))]
                moved += [Component(Var(_mvar(p)), a) for a in sorted(lab.bases) for p in pre]
                out = MolUnion((out, *moved))
            arcs[(t, x)] = out

        h = thp[t]
        arcs[(h, t)] = Var(_hl(t))
        i = index[t]
        if n == 1:
            fresh = (Triple(AddInt(Size(Var(_hl(t))), 1), i, i),)
        else:
            fresh = tuple(Triple(AddInt(Var(_hc(t, u)), 1), index[u], i) for u in ts if u != t)
        arcs[(t, h)] = SetWith(Var(_hl(t)), fresh)
        for u in ts:
            if u != t:
                hp = layout.pair_place(t, u)
                arcs[(hp, t)] = Var(_hc(t, u))
                arcs[(t, hp)] = AddInt(Var(_hc(t, u)), 1)

    cpn = CpnNet(places, list(ts), arcs, guards, init, variables)
    return cpn, layout


def guard_partners(net: NetDef, layout: TranslationLayout, semantics,
                   dep: DependenceRelation | None) -> dict:
    """For each transition, the partners whose counter place its reverse checks."""
    ts = net.transition_order
    out = {}
    for t in ts:
        others = [u for u in ts if u != t]
        if semantics == BACKTRACKING:
            out[t] = others
        elif semantics != CAUSAL:
            raise ValueError(f"unknown semantics {semantics!r}")
        elif dep is None:
            raise TranslationError("causal reversing needs a dependence relation")
        elif dep.kind == CO:
            if t in dep.independent:
                out[t] = [u for u in others if dep.dependent(t, u)]
            else:
                out[t] = [u for u in others
                          if not ((min(t, u), max(t, u)) in layout.shp and u in dep.independent)]
        else:
            out[t] = [u for u in others if dep.dependent(t, u)]
    return out


def add_reverses(net: NetDef, cpn: CpnNet, layout: TranslationLayout, semantics=BACKTRACKING,
                 dep: DependenceRelation | None = None) -> CpnNet:
    ts = net.transition_order
    reverses = {t: f"tr_{t}" for t in ts}
    _check_names(net, reverses.values())
    partners = guard_partners(net, layout, semantics, dep)
    layout.reverses, layout.partners = reverses, partners
    layout.semantics = semantics
    layout.dep_kind = dep.kind if dep else None
    arcs, guards = dict(cpn.arcs), dict(cpn.guards)
    for t in ts:
        tr, i = reverses[t], layout.index[t]
        pre, post = net.preset(t), net.postset(t)
        eff = frozenset(effect_of(net, t))
        hl = Var(_hl(t))
        conds = []
        for q in post:
            conds += [Contains(Var(_mvar(q)), x) for x in _items_sorted(net.label(t, q).positive)]
        conds.append(NonEmpty(hl))
        conds += [Member(Triple(Var(_hc(t, u)), layout.index[u], i), hl) for u in partners[t]]
        guards[tr] = And(tuple(conds))

        for x in sorted(set(pre) | set(post)):
            m = Var(_mvar(x))
            arcs[(x, tr)] = m
            if x in post:
                given = net.label(t, x).bases
                out = MolDiff(m, MolUnion(tuple(Component(m, a) for a in sorted(given))))
            else:
                out = m
            if x in pre:
                back = [BreakComponent(Var(_mvar(q)), eff, a) for q in post
                        for a in sorted(net.label(x, t).bases & net.label(t, q).bases)]
                out = MolUnion((out, *back))
            arcs[(tr, x)] = out

        arcs[(layout.thp[t], tr)] = hl
        arcs[(tr, layout.thp[t])] = DropLatest(hl)
        for u in ts:
            if u == t:
                continue
            hu = layout.thp[u]
            arcs[(hu, tr)] = Var(_hl(u))
            arcs[(tr, hu)] = Renumber(Var(_hl(u)), i, LatestK(hl, layout.index[u]))
            hp = layout.pair_place(t, u)
            arcs[(hp, tr)] = Var(_hc(t, u))
            arcs[(tr, hp)] = AddInt(Var(_hc(t, u)), -1)
    return CpnNet(dict(cpn.places), list(cpn.transitions) + [reverses[t] for t in ts], arcs,
                  guards, dict(cpn.init), dict(cpn.variables))


def translate(net: NetDef, semantics=BACKTRACKING,
              dep: DependenceRelation | None = None) -> tuple[CpnNet, TranslationLayout]:
    cpn, layout = translate_forward(net, semantics, dep)
    return add_reverses(net, cpn, layout, semantics, dep), layout


# -- state correspondence -----------------------------------------------------

def rpn_state_to_cpn_marking(net: NetDef, layout: TranslationLayout, state: State) -> dict:
    ts = layout.transitions
    H = state.history
    out = {p: frozenset({_mol(state.marking[p])}) for p in net.places}
    for t in ts:
        i = layout.index[t]
        if len(ts) == 1:
            triples = {(r + 1, i, i) for r, _ in enumerate(sorted(H[t]))}
        else:
            triples = set()
            for k in H[t]:
                for u in ts:
                    if u != t:
                        before = sum(1 for h in H[t] | H[u] if h < k)
                        triples.add((before + 1, layout.index[u], i))
        out[layout.thp[t]] = frozenset({frozenset(triples)})
    for (a, b), hp in layout.chp.items():
        out[hp] = frozenset({len(H[a]) + len(H[b])})
    return out


def _single(marking, place):
    toks = marking.get(place, frozenset())
    if len(toks) != 1:
        raise NotCorresponding(f"place {place} holds {len(toks)} tokens, expected one")
    return next(iter(toks))


def recover_history(triples: frozenset, n_transitions: int) -> frozenset:
    """Indices of a transition from the triple list in its history place."""
    size = len(triples)
    if n_transitions == 1:
        return frozenset(k for k, _, _ in triples)
    width = n_transitions - 1
    if size == 0:
        return frozenset()
    if size == width:
        return frozenset({1 + sum(k - 1 for k, _, _ in triples)})
    if size == 2 * width:
        latest = {}
        for k, j, i in triples:
            if j not in latest or k > latest[j][0]:
                latest[j] = (k, j, i)
        max_hist = set(latest.values())
        min_hist = triples - max_hist
        first = 1 + sum(k - 1 for k, _, _ in min_hist)
        shadowed = sum(1 for (kg, jg, _) in triples
                       if any(kj > kg and jj == jg for (kj, jj, _) in triples))
        second = 1 + sum(k - 1 for k, _, _ in max_hist) \
            - shadowed * Fraction(n_transitions - 2, n_transitions - 1)
        if second.denominator != 1:
            raise NotCorresponding(f"non-integral recovered index {second}")
        return frozenset({first, int(second)})
    raise NotCorresponding(
        f"history list of size {size} is not one of 0, {width}, {2 * width}")


def cpn_marking_to_rpn_state(net: NetDef, layout: TranslationLayout, marking) -> State:
    m = {}
    for p in net.places:
        tok = _single(marking, p)
        if not isinstance(tok, Molecule):
            raise NotCorresponding(f"place {p} does not hold a molecule")
        m[p] = set(tok.items())
    n = len(layout.index)
    hist = {t: recover_history(_single(marking, layout.thp[t]), n) for t in layout.transitions}
    return State(m, hist)


@dataclass
class CorrespondenceReport:
    direction: str
    diffs: dict  # place -> (expected, actual) in canonical text form
    history: dict | None = None
    verdict: bool = True

    def __str__(self):
        if self.verdict:
            return f"{self.direction}: corresponding"
        lines = [f"{self.direction}: {len(self.diffs)} place(s) differ"]
        for p, (want, got) in sorted(self.diffs.items()):
            lines.append(f"  {p}: expected {want}, found {got}")
        return "\n".join(lines)


def _show(toks) -> str:
    return "{" + ", ".join(sorted(canon(v) for v in toks)) + "}"


def check_correspondence(net: NetDef, layout: TranslationLayout, state: State,
                         marking) -> CorrespondenceReport:
    want = rpn_state_to_cpn_marking(net, layout, state)
    diffs = {}
    for p in sorted(set(want) | set(marking)):
        a, b = want.get(p, frozenset()), marking.get(p, frozenset())
        if a != b:
            diffs[p] = (_show(a), _show(b))
    history = None
    try:
        history = {t: sorted(v) for t, v in
                   cpn_marking_to_rpn_state(net, layout, marking).history.items()}
    except (NotCorresponding, TypeError):
        pass
    return CorrespondenceReport("rpn->cpn", diffs, history, not diffs)

