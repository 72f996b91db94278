"""A small coloured Petri net interpreter over structured inscription terms.

Places hold sets of tokens (no multiplicities). Every input arc is inscribed with
a single variable; a binding picks one token per input arc. Guards and output
arc inscriptions are terms evaluated under the binding, each output arc
producing exactly one token.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields
from itertools import product
from typing import Mapping

from .core import bond, con, fmt_item


class CpnError(Exception):
    pass


class EvalError(CpnError):
    """Unbound variable or ill-typed operand during evaluation."""


class CpnTypeError(CpnError):
    """A token does not belong to the colour set of its place."""


class BindingNotEnabled(CpnError):
    pass


# -- values -------------------------------------------------------------------

@dataclass(frozen=True)
class Molecule:
    """Pair (bases, bonds); one token holds the whole content of an RPN place."""

    bases: frozenset = frozenset()
    bonds: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "bases", frozenset(self.bases))
        object.__setattr__(self, "bonds", frozenset(self.bonds))

    @classmethod
    def of(cls, items) -> "Molecule":
        items = set(items)
        return cls({x for x in items if isinstance(x, str)},
                   {x for x in items if isinstance(x, tuple)})

    def items(self) -> frozenset:
        return self.bases | self.bonds

    def __str__(self):
        return canon(self)


def canon(v) -> str:
    """Deterministic text form of a token, used for ordering and digests."""
    if isinstance(v, Molecule):
        return ("({" + ",".join(sorted(v.bases)) + "},{"
                + ",".join(fmt_item(b) for b in sorted(v.bonds)) + "})")
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return v
    if isinstance(v, tuple):
        return "(" + ",".join(canon(x) for x in v) + ")"
    if isinstance(v, frozenset):
        return "[" + ",".join(sorted(canon(x) for x in v)) + "]"
    raise TypeError(f"not a CPN value: {v!r}")


def _is_triple(v):
    return (isinstance(v, tuple) and len(v) == 3
            and all(isinstance(x, int) and not isinstance(x, bool) for x in v))


@dataclass(frozen=True)
class ColourSet:
    kind: str
    bound: int | None = None

    KINDS = ("Base", "Bond", "Bases", "Bonds", "Molecule", "Hist", "HistList", "BoundInt",
             "Bool")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown colour set {self.kind!r}")
        if self.kind == "BoundInt" and self.bound is None:
            raise ValueError("BoundInt needs a bound")

    def __contains__(self, v) -> bool:
        k = self.kind
        if k == "Base":
            return isinstance(v, str)
        if k == "Bond":
            return isinstance(v, tuple) and len(v) == 2 and all(isinstance(x, str) for x in v)
        if k == "Bases":
            return isinstance(v, frozenset) and all(isinstance(x, str) for x in v)
        if k == "Bonds":
            return isinstance(v, frozenset) and all(isinstance(x, tuple) for x in v)
        if k == "Molecule":
            return isinstance(v, Molecule) and all(
                a in v.bases and b in v.bases for a, b in v.bonds)
        if k == "Hist":
            return _is_triple(v) and v[0] >= 1
        if k == "HistList":
            return isinstance(v, frozenset) and all(_is_triple(x) and x[0] >= 1 for x in v)
        if k == "BoundInt":
            return isinstance(v, int) and not isinstance(v, bool) and 0 <= v <= self.bound
        return isinstance(v, bool)

    def __str__(self):
        return f"BoundInt({self.bound})" if self.kind == "BoundInt" else self.kind


MOLECULE = ColourSet("Molecule")
HIST_LIST = ColourSet("HistList")


# -- terms --------------------------------------------------------------------

TERMS: dict[str, type] = {}


def term(cls):
    cls = dataclass(frozen=True)(cls)
    TERMS[cls.__name__] = cls
    return cls


class Term:
    def eval(self, env: Mapping):
        raise NotImplementedError

    def variables(self) -> set:
        out = set()
        for f in fields(self):
            v = getattr(self, f.name)
            for x in (v if isinstance(v, tuple) and v and isinstance(v[0], Term) else (v,)):
                if isinstance(x, Term):
                    out |= x.variables()
        return out


def _molecule(v, what) -> Molecule:
    if not isinstance(v, Molecule):
        raise EvalError(f"{what}: expected a molecule, got {canon_or_repr(v)}")
    return v


def _hist(v, what) -> frozenset:
    if not (isinstance(v, frozenset) and all(_is_triple(x) for x in v)):
        raise EvalError(f"{what}: expected a triple list, got {canon_or_repr(v)}")
    return v


def _int(v, what) -> int:
    if not isinstance(v, int) or isinstance(v, bool):
        raise EvalError(f"{what}: expected an integer, got {canon_or_repr(v)}")
    return v


def canon_or_repr(v):
    try:
        return canon(v)
    except TypeError:
        return repr(v)


@term
class Var(Term):
    name: str

    def eval(self, env):
        try:
            return env[self.name]
        except KeyError:
            raise EvalError(f"unbound variable {self.name}") from None

    def variables(self):
        return {self.name}


@term
class Const(Term):
    value: object

    def eval(self, env):
        return self.value


@term
class MolUnion(Term):
    args: tuple

    def eval(self, env):
        items = set()
        for a in self.args:
            items |= _molecule(a.eval(env), "MolUnion").items()
        return Molecule.of(items)


@term
class MolDiff(Term):
    left: Term
    right: Term

    def eval(self, env):
        left = _molecule(self.left.eval(env), "MolDiff")
        right = _molecule(self.right.eval(env), "MolDiff")
        return Molecule.of(left.items() - right.items())


@term
class Component(Term):
    """The connected component of ``base`` inside a molecule."""

    mol: Term
    base: str

    def eval(self, env):
        return Molecule.of(con(self.base, _molecule(self.mol.eval(env), "Component").items()))


@term
class BreakComponent(Term):
    """Delete ``bonds`` from a molecule and keep the component holding ``base``."""

    mol: Term
    bonds: frozenset
    base: str

    def eval(self, env):
        m = _molecule(self.mol.eval(env), "BreakComponent")
        return Molecule.of(con(self.base, m.items() - self.bonds))


@term
class Contains(Term):
    mol: Term
    item: object

    def eval(self, env):
        return self.item in _molecule(self.mol.eval(env), "Contains").items()


@term
class Not(Term):
    arg: Term

    def eval(self, env):
        v = self.arg.eval(env)
        if not isinstance(v, bool):
            raise EvalError("Not: expected a boolean")
        return not v


@term
class And(Term):
    args: tuple

    def eval(self, env):
        for a in self.args:
            v = a.eval(env)
            if not isinstance(v, bool):
                raise EvalError("And: expected booleans")
            if not v:
                return False
        return True


@term
class AddInt(Term):
    arg: Term
    k: int

    def eval(self, env):
        return _int(self.arg.eval(env), "AddInt") + self.k


@term
class Triple(Term):
    n: Term
    j: int
    i: int

    def eval(self, env):
        return (_int(self.n.eval(env), "Triple"), self.j, self.i)


@term
class SetWith(Term):
    base: Term
    elems: tuple

    def eval(self, env):
        s = _hist(self.base.eval(env), "SetWith")
        return s | frozenset(e.eval(env) for e in self.elems)


@term
class Member(Term):
    elem: Term
    set: Term

    def eval(self, env):
        return self.elem.eval(env) in _hist(self.set.eval(env), "Member")


@term
class NonEmpty(Term):
    set: Term

    def eval(self, env):
        return bool(_hist(self.set.eval(env), "NonEmpty"))


@term
class Size(Term):
    set: Term

    def eval(self, env):
        return len(_hist(self.set.eval(env), "Size"))


def _latest(hist) -> dict:
    best = {}
    for n, j, i in hist:
        if j not in best or n > best[j][0]:
            best[j] = (n, j, i)
    return best


@term
class DropLatest(Term):
    """Remove, for every partner j, the triple (n, j, i) with the largest n."""

    set: Term

    def eval(self, env):
        s = _hist(self.set.eval(env), "DropLatest")
        return s - frozenset(_latest(s).values())


@term
class LatestK(Term):
    """Largest n among the triples (n, j, _) for the fixed partner j."""

    set: Term
    j: int

    def eval(self, env):
        s = _hist(self.set.eval(env), "LatestK")
        best = _latest(s)
        if self.j not in best:
            raise EvalError(f"LatestK: no triple for partner {self.j}")
        return best[self.j][0]


@term
class Renumber(Term):
    """Rewrite (m, partner, x) to (m - 1, partner, x) whenever m > threshold."""

    set: Term
    partner: int
    threshold: Term

    def eval(self, env):
        s = _hist(self.set.eval(env), "Renumber")
        k = _int(self.threshold.eval(env), "Renumber")
        return frozenset((m - 1, j, i) if j == self.partner and m > k else (m, j, i)
                         for m, j, i in s)


def eval_expr(t: Term, binding: Mapping):
    return t.eval(binding)


# -- term serialisation -------------------------------------------------------

def value_to_json(v):
    if isinstance(v, Molecule):
        return {"molecule": [sorted(v.bases), [list(b) for b in sorted(v.bonds)]]}
    if isinstance(v, (bool, int, str)) or v is None:
        return v
    if isinstance(v, tuple):
        return {"tuple": [value_to_json(x) for x in v]}
    if isinstance(v, frozenset):
        return {"set": sorted((value_to_json(x) for x in v), key=lambda x: repr(x))}
    raise TypeError(f"cannot encode {v!r}")


def value_from_json(d):
    if isinstance(d, dict):
        if "molecule" in d:
            bases, bonds = d["molecule"]
            return Molecule(frozenset(bases), frozenset(bond(*b) for b in bonds))
        if "tuple" in d:
            return tuple(value_from_json(x) for x in d["tuple"])
        if "set" in d:
            return frozenset(value_from_json(x) for x in d["set"])
        raise ValueError(f"unknown value encoding {d!r}")
    return d


def term_to_json(t: Term) -> dict:
    out = {"op": type(t).__name__}
    for f in fields(t):
        v = getattr(t, f.name)
        if isinstance(v, Term):
            out[f.name] = term_to_json(v)
        elif isinstance(v, tuple) and v and all(isinstance(x, Term) for x in v):
            out[f.name] = {"terms": [term_to_json(x) for x in v]}
        else:
            out[f.name] = value_to_json(v)
    return out


def term_from_json(d: dict) -> Term:
    cls = TERMS[d["op"]]
    kw = {}
    for f in fields(cls):
        v = d[f.name]
        if isinstance(v, dict) and "op" in v:
            kw[f.name] = term_from_json(v)
        elif isinstance(v, dict) and "terms" in v:
            kw[f.name] = tuple(term_from_json(x) for x in v["terms"])
        else:
            kw[f.name] = value_from_json(v)
    return cls(**kw)


# -- nets ---------------------------------------------------------------------

@dataclass
class CpnNet:
    """(P, T, D, Sigma, V, C, G, E, I): arcs map (src, dst) to E, guards to G."""

    places: dict  # place -> ColourSet (C)
    transitions: list
    arcs: dict  # (src, dst) -> Term (D and E)
    guards: dict = field(default_factory=dict)
    init: dict = field(default_factory=dict)  # place -> Term yielding a set of tokens
    variables: dict = field(default_factory=dict)  # name -> ColourSet

    def __post_init__(self):
        if set(self.places) & set(self.transitions):
            raise CpnError("places and transitions must be disjoint")
        self._index()

    def _index(self):
        self._in = {t: [] for t in self.transitions}
        self._out = {t: [] for t in self.transitions}
        for (src, dst) in sorted(self.arcs):
            if src in self.places and dst in self._in:
                self._in[dst].append(src)
            elif src in self._out and dst in self.places:
                self._out[src].append(dst)
            else:
                raise CpnError(f"arc {src}->{dst} must join a place and a transition")

    def copy(self) -> "CpnNet":
        return CpnNet(dict(self.places), list(self.transitions), dict(self.arcs),
                      dict(self.guards), dict(self.init), dict(self.variables))

    def without_arc(self, src, dst) -> "CpnNet":
        c = self.copy()
        del c.arcs[(src, dst)]
        c._index()
        return c

    @property
    def colours(self) -> set:
        return set(self.places.values()) | set(self.variables.values())

    def inputs(self, t) -> list:
        return self._in[t]

    def outputs(self, t) -> list:
        return self._out[t]

    def guard(self, t) -> Term:
        return self.guards.get(t, Const(True))

    def initial_marking(self) -> dict:
        out = {}
        for p, colour in self.places.items():
            toks = eval_expr(self.init[p], {}) if p in self.init else frozenset()
            for v in toks:
                if v not in colour:
                    raise CpnTypeError(f"initial token {canon(v)} not in {colour} at {p}")
            out[p] = frozenset(toks)
        return out


def marking_key(m: Mapping) -> tuple:
    return tuple((p, tuple(sorted(canon(v) for v in m[p]))) for p in sorted(m))


def marking_digest(m: Mapping) -> str:
    return hashlib.sha1(repr(marking_key(m)).encode()).hexdigest()[:12]


def binding_digest(b: Mapping) -> str:
    text = ";".join(f"{k}={canon(b[k])}" for k in sorted(b))
    return hashlib.sha1(text.encode()).hexdigest()[:8]


def enumerate_bindings(cpn: CpnNet, marking: Mapping, t) -> list[dict]:
    """Every assignment of one token per input-arc variable.

    Guards are not evaluated here; see :func:`enabled_bindings`.
    """
    slots = []
    for p in cpn.inputs(t):
        e = cpn.arcs[(p, t)]
        if not isinstance(e, Var):
            raise CpnError(f"input arc {p}->{t} must be inscribed with a variable")
        colour = cpn.variables.get(e.name, cpn.places[p])
        toks = sorted((v for v in marking.get(p, ()) if v in colour), key=canon)
        slots.append((e.name, toks))
    out = []
    for combo in product(*(toks for _, toks in slots)):
        b = {}
        ok = True
        for (name, _), v in zip(slots, combo):
            if name in b and b[name] != v:
                ok = False
                break
            b[name] = v
        if ok:
            out.append(b)
    return out


def guard_holds(cpn: CpnNet, t, binding: Mapping) -> bool:
    v = eval_expr(cpn.guard(t), binding)
    if not isinstance(v, bool):
        raise EvalError(f"guard of {t} is not boolean")
    return v


def enabled_bindings(cpn: CpnNet, marking: Mapping, t) -> list[dict]:
    return [b for b in enumerate_bindings(cpn, marking, t) if guard_holds(cpn, t, b)]


def cpn_enabled(cpn: CpnNet, marking: Mapping, t) -> bool:
    return any(guard_holds(cpn, t, b) for b in enumerate_bindings(cpn, marking, t))


def cpn_fire(cpn: CpnNet, marking: Mapping, t, binding: Mapping) -> dict:
    if not guard_holds(cpn, t, binding):
        raise BindingNotEnabled(f"guard of {t} is false under the binding")
    new = {p: frozenset(v) for p, v in marking.items()}
    for p in cpn.inputs(t):
        tok = eval_expr(cpn.arcs[(p, t)], binding)
        if tok not in new.get(p, frozenset()):
            raise BindingNotEnabled(f"token {canon_or_repr(tok)} not available in {p}")
        new[p] = new[p] - {tok}
    for p in cpn.outputs(t):
        tok = eval_expr(cpn.arcs[(t, p)], binding)
        if tok not in cpn.places[p]:
            raise CpnTypeError(f"{t} produced {canon_or_repr(tok)} outside {cpn.places[p]} at {p}")
        new[p] = new.get(p, frozenset()) | {tok}
    return new


def cpn_to_dot(cpn: CpnNet, name="cpn") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for p, c in sorted(cpn.places.items()):
        lines.append(f'  "{p}" [shape=ellipse, label="{p}\\n{c}"];')
    for t in cpn.transitions:
        lines.append(f'  "{t}" [shape=box];')
    for (src, dst) in sorted(cpn.arcs):
        lines.append(f'  "{src}" -> "{dst}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
