"""JSON documents for nets and generated CPNs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .core import ArcLabel, NetDef, NetError, bases_in, bond, bonds_in

NET_FORMAT = "revnets.rpn/1"
CPN_FORMAT = "revnets.cpn/1"


class DocumentError(ValueError):
    """Unreadable or malformed document."""


@dataclass
class NetDocument:
    net: NetDef
    traces: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    version: str = NET_FORMAT


def _bond_list(bs):
    return [list(b) for b in sorted(bs)]


def net_to_json(doc: NetDocument | NetDef) -> dict:
    if isinstance(doc, NetDef):
        doc = NetDocument(doc)
    net = doc.net
    arcs = []
    for (src, dst), lab in sorted(net.arcs.items()):
        arcs.append({
            "from": src, "to": dst,
            "bases": sorted(lab.bases), "neg_bases": sorted(lab.neg_bases),
            "bonds": _bond_list(lab.bonds), "neg_bonds": _bond_list(lab.neg_bonds),
        })
    marking = {}
    for p, c in sorted(net.initial_marking.items()):
        if c:
            marking[p] = {"bases": sorted(bases_in(c)), "bonds": _bond_list(bonds_in(c))}
    out = {
        "format": doc.version,
        "places": sorted(net.places),
        "transitions": sorted(net.transitions),
        "bases": sorted(net.bases),
        "bonds": _bond_list(net.bonds),
        "arcs": arcs,
        "initial_marking": marking,
    }
    if doc.traces:
        out["traces"] = {k: list(v) for k, v in sorted(doc.traces.items())}
    if doc.notes:
        out["notes"] = list(doc.notes)
    return out


def net_from_json(data: dict) -> NetDocument:
    try:
        if data.get("format", NET_FORMAT) != NET_FORMAT:
            raise DocumentError(f"unsupported format {data.get('format')!r}")
        arcs = {}
        for a in data.get("arcs", []):
            arcs[(a["from"], a["to"])] = ArcLabel(
                bases=a.get("bases", []), neg_bases=a.get("neg_bases", []),
                bonds=[bond(*b) for b in a.get("bonds", [])],
                neg_bonds=[bond(*b) for b in a.get("neg_bonds", [])],
            )
        marking = {}
        for p, c in data.get("initial_marking", {}).items():
            marking[p] = set(c.get("bases", [])) | {bond(*b) for b in c.get("bonds", [])}
        net = NetDef(
            places=data["places"], transitions=data["transitions"], bases=data["bases"],
            bonds=[tuple(b) for b in data.get("bonds", [])], arcs=arcs,
            initial_marking=marking,
        )
    except DocumentError:
        raise
    except NetError as e:
        raise DocumentError(f"invalid net: {e}") from e
    except (KeyError, TypeError, AttributeError, ValueError) as e:
        raise DocumentError(f"malformed net document: {e!r}") from e
    return NetDocument(net, dict(data.get("traces", {})), list(data.get("notes", [])))


def dumps(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def loads_net(text: str) -> NetDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"invalid JSON: {e}") from e
    if not isinstance(data, dict):
        raise DocumentError("net document must be a JSON object")
    return net_from_json(data)


def load_net(path) -> NetDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise DocumentError(str(e)) from e
    return loads_net(text)


def dumps_net(doc: NetDocument | NetDef) -> str:
    return dumps(net_to_json(doc))


def save_net(doc: NetDocument | NetDef, path):
    Path(path).write_text(dumps_net(doc), encoding="utf-8")


@dataclass
class CpnDocument:
    cpn: object  # CpnNet
    layout: object  # TranslationLayout
    source_digest: str
    semantics: str
    dep_kind: str | None
    version: str = CPN_FORMAT


def cpn_to_json(doc: CpnDocument) -> dict:
    from .cpn import term_to_json, value_to_json

    cpn, lay = doc.cpn, doc.layout
    return {
        "format": doc.version,
        "provenance": {"source_digest": doc.source_digest, "semantics": doc.semantics,
                       "dependence": doc.dep_kind},
        "places": {p: {"colour": c.kind, **({"bound": c.bound} if c.bound is not None else {})}
                   for p, c in sorted(cpn.places.items())},
        "variables": {v: {"colour": c.kind, **({"bound": c.bound} if c.bound is not None else {})}
                      for v, c in sorted(cpn.variables.items())},
        "transitions": list(cpn.transitions),
        "arcs": [{"from": s, "to": d, "expr": term_to_json(e)}
                 for (s, d), e in sorted(cpn.arcs.items())],
        "guards": {t: term_to_json(g) for t, g in sorted(cpn.guards.items())},
        "init": {p: value_to_json(e.eval({})) for p, e in sorted(cpn.init.items())},
        "layout": {
            "index": dict(sorted(lay.index.items())),
            "thp": dict(sorted(lay.thp.items())),
            "chp": [[a, b, h] for (a, b), h in sorted(lay.chp.items())],
            "shp": [list(p) for p in sorted(lay.shp)],
            "bhp": [list(p) for p in sorted(lay.bhp)],
            "reverses": dict(sorted(lay.reverses.items())),
            "partners": {t: list(v) for t, v in sorted(lay.partners.items())},
        },
    }


def cpn_from_json(data: dict) -> CpnDocument:
    from .cpn import ColourSet, Const, CpnNet, term_from_json, value_from_json
    from .translate import TranslationLayout

    try:
        if data.get("format") != CPN_FORMAT:
            raise DocumentError(f"unsupported format {data.get('format')!r}")

        def colour(d):
            return ColourSet(d["colour"], d.get("bound"))

        cpn = CpnNet(
            places={p: colour(c) for p, c in data["places"].items()},
            transitions=list(data["transitions"]),
            arcs={(a["from"], a["to"]): term_from_json(a["expr"]) for a in data["arcs"]},
            guards={t: term_from_json(g) for t, g in data["guards"].items()},
            init={p: Const(value_from_json(v)) for p, v in data["init"].items()},
            variables={v: colour(c) for v, c in data["variables"].items()},
        )
        lay = data["layout"]
        prov = data["provenance"]
        layout = TranslationLayout(
            semantics=prov["semantics"], dep_kind=prov["dependence"],
            index=dict(lay["index"]), thp=dict(lay["thp"]),
            chp={(a, b): h for a, b, h in lay["chp"]},
            shp=frozenset(tuple(p) for p in lay["shp"]),
            bhp=frozenset(tuple(p) for p in lay["bhp"]),
            reverses=dict(lay["reverses"]),
            partners={t: list(v) for t, v in lay["partners"].items()},
        )
    except DocumentError:
        raise
    except Exception as e:
        raise DocumentError(f"malformed CPN document: {e!r}") from e
    return CpnDocument(cpn, layout, prov["source_digest"], prov["semantics"], prov["dependence"])


def dumps_cpn(doc: CpnDocument) -> str:
    return dumps(cpn_to_json(doc))


def loads_cpn(text: str) -> CpnDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"invalid JSON: {e}") from e
    return cpn_from_json(data)
