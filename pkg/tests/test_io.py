import importlib.util
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import FIXTURE_DIR, load
from revnets.core import bond
from revnets.explore import check_lockstep
from revnets.io import (
    CpnDocument, DocumentError, NetDocument, dumps_cpn, dumps_net, load_net, loads_cpn,
    loads_net, net_from_json, net_to_json, save_net,
)
from revnets.translate import translate

ALL = sorted(p.name.removesuffix(".rpn.json") for p in FIXTURE_DIR.glob("*.rpn.json"))


@pytest.mark.parametrize("name", ALL)
def test_canonical_bytes_round_trip(name):
    text = (FIXTURE_DIR / f"{name}.rpn.json").read_text()
    assert dumps_net(loads_net(text)) == text


def test_fixtures_match_generator():
    spec = importlib.util.spec_from_file_location("build", FIXTURE_DIR / "build.py")
    build = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(build)
    for name, doc in build.FIXTURES.items():
        assert dumps_net(doc) == (FIXTURE_DIR / f"{name}.rpn.json").read_text()


def test_traces_and_notes_survive(tmp_path):
    doc = load_net(FIXTURE_DIR / "figure4.rpn.json")
    assert doc.traces["stuck"] == ["t1", "t2", "t3", "t4", "~t2"]
    save_net(doc, tmp_path / "x.rpn.json")
    again = load_net(tmp_path / "x.rpn.json")
    assert again.net == doc.net and again.notes == doc.notes


@given(st.sets(st.sampled_from("abcd"), min_size=1),
       st.sets(st.sampled_from([bond("a", "b"), bond("c", "d")])))
def test_marking_round_trip(bases, bonds):
    bonds = {b for b in bonds if b[0] in bases and b[1] in bases}
    data = {"places": ["p", "q"], "transitions": [], "bases": sorted(bases),
            "bonds": [list(b) for b in sorted(bonds)], "arcs": [],
            "initial_marking": {"p": {"bases": sorted(bases),
                                      "bonds": [list(b) for b in sorted(bonds)]}}}
    doc = net_from_json(data)
    assert net_from_json(net_to_json(doc)).net == doc.net
    assert doc.net.initial_marking["p"] == set(bases) | bonds


@pytest.mark.parametrize("text", ["{oops", "[]", '{"format": "other"}', '{"places": []}',
                                  '{"places": ["p"], "transitions": ["p"], "bases": []}'])
def test_bad_documents(text):
    with pytest.raises(DocumentError):
        loads_net(text)


def test_missing_file(tmp_path):
    with pytest.raises(DocumentError):
        load_net(tmp_path / "absent.json")


def test_cpn_document_round_trip():
    n = load("figure3c")
    cpn, lay = translate(n)
    doc = CpnDocument(cpn, lay, n.digest, "backtracking", None)
    text = dumps_cpn(doc)
    back = loads_cpn(text)
    assert dumps_cpn(back) == text
    assert back.source_digest == n.digest
    assert check_lockstep(n, back.cpn, back.layout).ok
    data = json.loads(text)
    assert data["provenance"] == {"source_digest": n.digest, "semantics": "backtracking",
                                  "dependence": None}


def test_cpn_document_is_reproducible():
    n = load("figure1")
    a = dumps_cpn(CpnDocument(*translate(n), n.digest, "backtracking", None))
    b = dumps_cpn(CpnDocument(*translate(load("figure1")), n.digest, "backtracking", None))
    assert a == b


def test_bad_cpn_document():
    with pytest.raises(DocumentError):
        loads_cpn('{"format": "revnets.cpn/1"}')
    with pytest.raises(DocumentError):
        loads_cpn("nope")


def test_net_document_defaults():
    doc = NetDocument(load("single"))
    assert doc.traces == {} and doc.notes == []
