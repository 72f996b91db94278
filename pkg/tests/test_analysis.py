import pytest

from conftest import load
from revnets.analysis import (
    BOND_CREATING, TRANSFERRING, NotTransAcyclic, classify_transitions, co_backward_conflict,
    cycle_transitions, dependence, find_cycles, forward_reachable, is_trans_acyclic,
    marking_oriented_dependence, require_trans_acyclic, structural_dependence,
)
from revnets.core import ArcLabel, NetDef
from revnets.reversing import CO, MARKING, STRUCTURAL


def pairs(rel):
    return set(rel.listing())


def test_figure1_classes():
    c = classify_transitions(load("figure1"))
    assert c == {"t1": TRANSFERRING, "t2": TRANSFERRING, "t3": BOND_CREATING,
                 "t4": BOND_CREATING}


def test_negated_bond_on_input_is_still_bond_creating():
    c = classify_transitions(load("figure3a"))
    assert c["t3"] == BOND_CREATING


class TestCycles:
    def test_acyclic(self):
        assert find_cycles(load("figure1")) == []

    def test_self_loop(self):
        n = NetDef({"p"}, {"t"}, {"a"}, set(),
                   {("p", "t"): ArcLabel.of("a"), ("t", "p"): ArcLabel.of("a")}, {"p": {"a"}})
        assert find_cycles(n) == [("p", "t", "p")]

    def test_two_cycles_share_p1(self):
        cyc = find_cycles(load("figure3a"))
        assert cyc == [("p1", "t1", "p2", "t2", "p4", "t3", "p1"), ("p1", "t4", "p5", "t5", "p1")]
        assert cycle_transitions(cyc[1]) == ["t4", "t5"]

    def test_cycles_start_at_least_place(self):
        for name in ["figure3a", "figure3b", "figure3c", "figure4"]:
            for c in find_cycles(load(name)):
                places = c[0::2]
                assert c[0] == c[-1] == min(places)
                assert len(set(c[:-1])) == len(c) - 1

    def test_figure4_cycle_count(self):
        assert len(find_cycles(load("figure4"))) == 3


class TestTransAcyclic:
    @pytest.mark.parametrize("name", ["figure1", "figure2", "figure3a", "figure3b", "figure3c",
                                      "figure4", "single"])
    def test_fixtures(self, name):
        assert is_trans_acyclic(load(name)) == (True, None)

    def test_transport_loop(self):
        ok, witness = is_trans_acyclic(load("transport_loop"))
        assert not ok and witness == ("p1", "t1", "p2", "t2", "p1")
        with pytest.raises(NotTransAcyclic):
            require_trans_acyclic(load("transport_loop"))


class TestStructural:
    def test_figure1(self):
        assert pairs(structural_dependence(load("figure1"))) == {
            ("t1", "t3"), ("t2", "t3"), ("t3", "t4")}

    def test_figure3a(self):
        assert pairs(structural_dependence(load("figure3a"))) == {
            ("t1", "t2"), ("t1", "t3"), ("t1", "t5"), ("t2", "t3"), ("t3", "t6"), ("t3", "t4"),
            ("t4", "t5"), ("t5", "t6")}

    def test_disjoint_neighbourhoods(self):
        n = NetDef({"p", "q", "r", "s"}, {"t", "u"}, {"a", "b"}, set(),
                   {("p", "t"): ArcLabel.of("a"), ("t", "q"): ArcLabel.of("a"),
                    ("r", "u"): ArcLabel.of("b"), ("u", "s"): ArcLabel.of("b")})
        assert pairs(structural_dependence(n)) == set()

    def test_figure3b_t3_t5_independent(self):
        assert not structural_dependence(load("figure3b")).dependent("t3", "t5")


class TestMarkingOriented:
    def test_figure3a_t3_t5_independent(self):
        assert not marking_oriented_dependence(load("figure3a")).dependent("t3", "t5")

    def test_figure3b_t3_t5_dependent(self):
        assert marking_oriented_dependence(load("figure3b")).dependent("t3", "t5")

    def test_single_transition(self):
        assert pairs(marking_oriented_dependence(load("single"))) == set()

    def test_requires_trans_acyclic(self):
        with pytest.raises(NotTransAcyclic):
            marking_oriented_dependence(load("transport_loop"))

    def test_reachable_count(self):
        assert len(forward_reachable(load("figure3a"))) == 181


class TestCo:
    def test_reflexive(self):
        for name in ["figure1", "figure3a", "figure3c", "figure4"]:
            n = load(name)
            rel = co_backward_conflict(n)
            assert all(rel.dependent(t, t) for t in n.transitions)

    def test_figure3a(self):
        rel = co_backward_conflict(load("figure3a"))
        assert not rel.dependent("t3", "t5")

    def test_figure3c(self):
        rel = co_backward_conflict(load("figure3c"))
        assert not rel.dependent("t4", "t6")
        assert rel.dependent("t1", "t4") and rel.dependent("t1", "t6")
        assert {"t4", "t6"} <= rel.independent

    def test_figure4(self):
        rel = co_backward_conflict(load("figure4"))
        assert not rel.dependent("t2", "t4")
        assert pairs(rel) == {("t1", "t3")}

    def test_single_has_no_independent(self):
        assert co_backward_conflict(load("single")).independent == frozenset()


def test_dependence_dispatch():
    n = load("figure1")
    assert dependence(n, STRUCTURAL).kind == STRUCTURAL
    assert dependence(n, MARKING).kind == MARKING
    assert dependence(n, CO).kind == CO
    with pytest.raises(ValueError):
        dependence(n, "nope")


@pytest.mark.parametrize("name", ["figure1", "figure3a", "figure3b", "figure3c", "figure4"])
def test_relations_symmetric(name):
    n = load(name)
    for kind in (STRUCTURAL, MARKING, CO):
        rel = dependence(n, kind)
        for a in n.transitions:
            for b in n.transitions:
                assert rel.dependent(a, b) == rel.dependent(b, a)
