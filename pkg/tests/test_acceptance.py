"""End-to-end acceptance checks; each one logs a single PASS/FAIL line."""

import io
from itertools import combinations

from conftest import CYCLIC_FIXTURES, FIXTURE_DIR, REFERENCE_FIXTURES, load
from revnets.analysis import BOND_CREATING, classify_transitions, dependence, is_trans_acyclic
from revnets.cli import main
from revnets.core import bond, con, fire_sequence
from revnets.explore import (
    check_lockstep, check_reversal_roundtrips, explore_cpn, explore_rpn, find_stuck_states,
    is_stuck,
)
from revnets.reversing import (
    BACKTRACKING, CAUSAL, CO, DEPENDENCE_KINDS, STRUCTURAL, enabled_moves, fire_moves,
    parse_moves,
)
from revnets.translate import cpn_marking_to_rpn_state, rpn_state_to_cpn_marking, translate

BASES = "abcdef"


def configurations(net):
    """(semantics, dependence) pairs: backtracking once, causal under every relation."""
    yield BACKTRACKING, None
    for kind in DEPENDENCE_KINDS:
        yield CAUSAL, dependence(net, kind)


def label(sem, dep):
    return sem if dep is None else f"{sem}/{dep.kind}"


def verdict(log, number, title, failures):
    status = "PASS" if not failures else "FAIL"
    line = f"CRITERION {number}: {status} {title}"
    if failures:
        line += f" ({len(failures)} failure(s); first: {failures[0]})"
    log.append(line)
    print(line)
    assert not failures, failures


def test_criterion_1_figure1_replay(acceptance_log):
    failures = []
    out = io.StringIO()
    code = main(["run", str(FIXTURE_DIR / "figure1.rpn.json"), "--moves", "t1,t2,t3,t4"], out=out)
    last = out.getvalue().rstrip().split("\n\n")[-1].splitlines()
    if code != 0:
        failures.append(f"exit code {code}")
    if "p7: {a, b, c, a-b, b-c}" not in last:
        failures.append("p7 does not hold {a, b, c, a-b, b-c}")
    if last[-1] != "H: t1:{1}, t2:{2}, t3:{3}, t4:{4}":
        failures.append(f"history line {last[-1]!r}")
    n = load("figure1")
    s = fire_sequence(n, n.initial_state(), ["t1", "t2", "t3", "t4"])
    back = fire_moves(n, s, parse_moves("~t4,~t3,~t2,~t1"), BACKTRACKING)[-1]
    if back != n.initial_state():
        failures.append("backtracking did not restore the initial state")
    verdict(acceptance_log, 1, "figure1 replay and backtracking restore", failures)


def test_criterion_2_balanced_sequences_return_home(acceptance_log):
    failures, checked = [], 0
    for name, max_len in [("figure1", 8)] + [(c, 6) for c in CYCLIC_FIXTURES]:
        n = load(name)
        for sem, dep in configurations(n):
            res = check_reversal_roundtrips(n, sem, dep, trials=0, max_len=max_len)
            checked += res.checked
            if not res.ok:
                failures.append(f"{name} {label(sem, dep)}: {res}")
    verdict(acceptance_log, 2,
            f"balanced sequences return to the initial state ({checked} sequences)", failures)


def test_criterion_3_lockstep(acceptance_log):
    failures, runs = [], 0
    for name in REFERENCE_FIXTURES:
        n = load(name)
        for sem, dep in configurations(n):
            runs += 1
            cpn, layout = translate(n, sem, dep)
            res = check_lockstep(n, cpn, layout, sem, dep)
            if not res.ok:
                failures.append(f"{name} {label(sem, dep)}: {res}")
                continue
            cpn_count = len(explore_cpn(cpn))
            if res.rpn_states != cpn_count:
                failures.append(f"{name} {label(sem, dep)}: {res.rpn_states} RPN states, "
                                f"{cpn_count} CPN markings")
    verdict(acceptance_log, 3, f"lockstep RPN/CPN exploration ({runs} runs)", failures)


def test_criterion_4_history_recovery(acceptance_log):
    failures, states, twice = [], 0, 0
    for name in REFERENCE_FIXTURES:
        n = load(name)
        _, layout = translate(n)
        seen = set()
        for sem, dep in configurations(n):
            seen.update(explore_rpn(n, sem, dep).states)
        for s in seen:
            states += 1
            twice += sum(1 for h in s.history.values() if len(h) == 2)
            try:
                back = cpn_marking_to_rpn_state(n, layout, rpn_state_to_cpn_marking(n, layout, s))
            except Exception as e:  # a non-integral index surfaces here
                failures.append(f"{name}: {e}")
                continue
            if back != s:
                failures.append(f"{name}: recovered state differs for history {s.history}")
    if twice == 0:
        failures.append("no state exercised a twice-fired transition")
    verdict(acceptance_log, 4,
            f"history recovery is the identity ({states} states, {twice} twice-fired histories)",
            failures)


def test_criterion_5_firing_bound(acceptance_log):
    failures = []
    for name in REFERENCE_FIXTURES:
        n = load(name)
        if not is_trans_acyclic(n)[0]:
            continue
        classes = classify_transitions(n)
        limit = 2 * len(n.transitions)
        for sem, dep in configurations(n):
            for s in explore_rpn(n, sem, dep).states:
                for t, h in s.history.items():
                    cap = 1 if classes[t] == BOND_CREATING else 2
                    if len(h) > cap:
                        failures.append(f"{name} {label(sem, dep)}: {t} fired {len(h)} times")
                if s.max_index() > limit:
                    failures.append(f"{name} {label(sem, dep)}: index {s.max_index()} > {limit}")
    verdict(acceptance_log, 5, "firing counts and history indices stay bounded", failures)


def test_criterion_6_dependence_behaviour(acceptance_log):
    failures = []
    n = load("figure3a")
    s = fire_sequence(n, n.initial_state(), ["t1", "t2", "t3", "t4", "t5"])

    def reversible(kind):
        return {m.transition for m in enabled_moves(n, s, CAUSAL, dependence(n, kind)) if m.reverse}

    if reversible(STRUCTURAL) != {"t5"}:
        failures.append(f"figure3a structural reverse set {sorted(reversible(STRUCTURAL))}")
    if not {"t3", "t5"} <= reversible(CO):
        failures.append(f"figure3a co reverse set {sorted(reversible(CO))}")

    n4 = load("figure4")
    co = dependence(n4, CO)
    st = fire_moves(n4, n4.initial_state(), parse_moves("t1,t2,t3,t4,~t2"), CAUSAL, co)[-1]
    if not is_stuck(n4, st, co, CAUSAL):
        failures.append("figure4 co: t1 t2 t3 t4 ~t2 is not stuck")
    if not find_stuck_states(n4, co):
        failures.append("figure4 co: search found no stuck state")
    structural_stuck = find_stuck_states(n4, dependence(n4, STRUCTURAL))
    if structural_stuck:
        failures.append(f"figure4 structural: stuck after {structural_stuck[0][0]}")
    verdict(acceptance_log, 6, "reverse-enabled sets and stuck-state search", failures)


def path_reachable(a, bases, bonds):
    """Bases joined to ``a`` by some simple path, found by enumerating all of them."""
    adj = {x: [y for p in bonds if x in p for y in p if y != x] for x in bases}
    found = {a}

    def walk(x, visited):
        for y in adj[x]:
            if y not in visited:
                found.add(y)
                walk(y, visited | {y})

    walk(a, {a})
    return found


def test_criterion_7_con_oracle(acceptance_log):
    failures, cases = [], 0
    for size in range(1, 7):
        bases = BASES[:size]
        pairs = [bond(x, y) for x, y in combinations(bases, 2)]
        for mask in range(1 << len(pairs)):
            bonds = {p for k, p in enumerate(pairs) if mask >> k & 1}
            c = set(bases) | bonds
            for a in BASES[:min(size + 1, 6)]:
                cases += 1
                if a not in c:
                    expect = frozenset()
                else:
                    reach = path_reachable(a, bases, bonds)
                    expect = frozenset(reach) | {b for b in bonds if b[0] in reach}
                if con(a, c) != expect:
                    failures.append(f"con({a}, {sorted(map(str, c))})")
    verdict(acceptance_log, 7, f"con matches path enumeration ({cases} cases)", failures)


def test_criterion_8_fault_injection(acceptance_log):
    failures = []
    n = load("figure1")
    cpn, layout = translate(n)
    hist = layout.history_places()
    arcs = [arc for arc in cpn.arcs if hist & set(arc)]
    for src, dst in arcs:
        res = check_lockstep(n, cpn.without_arc(src, dst), layout)
        if res.ok:
            failures.append(f"arc {src}->{dst} removed without divergence")
    if not arcs:
        failures.append("no history-place arcs found")
    verdict(acceptance_log, 8, f"every history-place arc is load-bearing ({len(arcs)} arcs)",
            failures)

