import pytest

from conftest import load
from revnets.analysis import dependence
from revnets.core import NotEnabled, RpnError, SequenceError, fire_sequence
from revnets.reversing import (
    BACKTRACKING, CAUSAL, CO, MARKING, STRUCTURAL, DependenceRelation, Move, bt_enabled,
    co_enabled, enabled_moves, fire_backtrack, fire_causal_reverse, fire_move, fire_moves,
    parse_moves,
)


def after(name, seq):
    n = load(name)
    return n, fire_sequence(n, n.initial_state(), seq)


def reversible(n, s, semantics, dep=None):
    return {m.transition for m in enabled_moves(n, s, semantics, dep) if m.reverse}


class TestMoves:
    def test_parse(self):
        assert parse_moves("t1, ~t2,t3") == [Move("t1"), Move("t2", True), Move("t3")]
        assert parse_moves(["~t1"]) == [Move("t1", True)]
        assert str(Move("t4", True)) == "~t4"

    def test_relation_is_symmetric(self):
        rel = DependenceRelation(STRUCTURAL, {("t2", "t1")})
        assert rel.dependent("t1", "t2") and rel.dependent("t2", "t1")
        assert rel.partners("t1") == ["t2"]

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            DependenceRelation("bogus", frozenset())


class TestBacktracking:
    def test_only_last_transition(self):
        n, s = after("figure1", ["t1", "t2"])
        assert not bt_enabled(n, s, "t1")
        assert bt_enabled(n, s, "t2")
        assert reversible(n, s, BACKTRACKING) == {"t2"}

    def test_full_undo(self):
        n, s = after("figure1", ["t1", "t2", "t3", "t4"])
        for t in ["t4", "t3", "t2", "t1"]:
            s = fire_backtrack(n, s, t)
        assert s == n.initial_state()

    def test_breaks_created_bond(self):
        n, s = after("single", ["t1"])
        s = fire_move(n, s, Move("t1", True))
        assert s.marking == {"p1": {"a"}, "p2": {"b"}, "p3": set()}

    def test_not_enabled(self):
        n, s = after("figure1", ["t1", "t2"])
        with pytest.raises(NotEnabled):
            fire_backtrack(n, s, "t1")

    def test_never_fired(self):
        n = load("figure1")
        assert not bt_enabled(n, n.initial_state(), "t1")


class TestCausal:
    def test_independent_transitions_reverse_in_any_order(self):
        n, s = after("figure1", ["t1", "t2"])
        dep = dependence(n, STRUCTURAL)
        assert reversible(n, s, CAUSAL, dep) == {"t1", "t2"}
        s2 = fire_causal_reverse(n, s, "t1", dep)
        # t2's index slides down to keep the range contiguous
        assert s2.history["t2"] == {1} and s2.history["t1"] == set()
        assert s2.marking["p1"] == {"a"}

    def test_dependent_later_transition_blocks(self):
        n, s = after("figure1", ["t1", "t2", "t3"])
        dep = dependence(n, STRUCTURAL)
        assert not co_enabled(n, s, "t1", dep)
        assert reversible(n, s, CAUSAL, dep) == {"t3"}

    def test_fire_moves_reports_position(self):
        n = load("figure1")
        with pytest.raises(SequenceError) as e:
            fire_moves(n, n.initial_state(), "t1,t2,~t1", BACKTRACKING)
        assert e.value.position == 2

    def test_fire_moves_returns_every_state(self):
        n = load("figure1")
        dep = dependence(n, STRUCTURAL)
        states = fire_moves(n, n.initial_state(), "t1,t2,~t1,~t2", CAUSAL, dep)
        assert len(states) == 5 and states[-1] == n.initial_state()

    def test_causal_needs_relation(self):
        n, s = after("figure1", ["t1"])
        with pytest.raises(RpnError):
            fire_move(n, s, Move("t1", True), CAUSAL, None)


class TestFigure3a:
    SEQ = ["t1", "t2", "t3", "t4", "t5"]

    def test_structural_only_t5(self):
        n, s = after("figure3a", self.SEQ)
        assert reversible(n, s, CAUSAL, dependence(n, STRUCTURAL)) == {"t5"}

    def test_co_allows_t3_and_t5(self):
        n, s = after("figure3a", self.SEQ)
        assert {"t3", "t5"} <= reversible(n, s, CAUSAL, dependence(n, CO))

    def test_second_firing_of_t1(self):
        n, s = after("figure3a", ["t1", "t2", "t3"])
        fwd = {m.transition for m in enabled_moves(n, s) if not m.reverse}
        assert {"t1", "t4", "t6"} <= fwd
        n, s = after("figure3a", ["t1", "t2", "t3", "t1"])
        assert s.history["t1"] == {1, 4}
        assert not s.marking["p3"]
        assert "t2" not in {m.transition for m in enabled_moves(n, s) if not m.reverse}

    def test_twice_fired_reverse_drops_latest(self):
        n, s = after("figure3a", ["t1", "t2", "t3", "t1"])
        s = fire_backtrack(n, s, "t1")
        assert s.history["t1"] == {1}


class TestFigure4:
    def test_stuck_configuration(self):
        n, s = after("figure4", ["t1", "t2", "t3", "t4"])
        assert s.marking["p1"] == {"a", "b", "c", "d", ("a", "b"), ("b", "c"), ("c", "d")}
        dep = dependence(n, CO)
        assert reversible(n, s, CAUSAL, dep) == {"t2", "t4"}
        s = fire_move(n, s, Move("t2", True), CAUSAL, dep)
        assert "d" in s.marking["p4"] and ("c", "d") in s.marking["p4"]
        assert reversible(n, s, CAUSAL, dep) == {"t3"}

    def test_structural_forces_t4_first(self):
        n, s = after("figure4", ["t1", "t2", "t3", "t4"])
        assert reversible(n, s, CAUSAL, dependence(n, STRUCTURAL)) == {"t4"}

    def test_marking_relation_is_usable(self):
        n, s = after("figure4", ["t1", "t2", "t3", "t4"])
        assert reversible(n, s, CAUSAL, dependence(n, MARKING)) == {"t4"}
