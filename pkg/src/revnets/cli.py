"""Command-line interface: validate, run, repl, analyze, translate, check."""

from __future__ import annotations

import argparse
import cmd
import sys
from pathlib import Path

from .analysis import (
    BOND_CREATING, TRANSFERRING, NotTransAcyclic, classify_transitions, dependence, find_cycles,
    is_trans_acyclic,
)
from .core import (
    NotEnabled, RpnError, SequenceError, UnknownTransition, validate_marking,
    validate_well_formed,
)
from .cpn import cpn_to_dot
from .explore import (
    StateCapExceeded, check_lockstep, check_reversal_roundtrips, explore_rpn, find_stuck_states,
    max_states_from_env,
)
from .io import CpnDocument, DocumentError, dumps, dumps_cpn, load_net
from .reversing import (
    BACKTRACKING, CAUSAL, CO, MARKING, STRUCTURAL, Move, enabled_moves, fire_move, parse_moves,
)
from .translate import TranslationError, translate

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3

DEP_NAMES = {"structural": STRUCTURAL, "marking": MARKING, "co": CO}


def resolve_path(name: str) -> Path:
    """Accept a path, or a bare fixture name such as ``figure1``."""
    p = Path(name)
    if p.exists() or p.suffix:
        return p
    for cand in (Path("fixtures") / f"{name}.rpn.json", Path(f"{name}.rpn.json")):
        if cand.exists():
            return cand
    return p


def _load(args):
    return load_net(resolve_path(args.net)).net


def _semantics(args):
    """--dep without --semantics implies causal reversing."""
    if args.semantics:
        return args.semantics
    return CAUSAL if args.dep else BACKTRACKING


def _dep(net, args):
    return dependence(net, DEP_NAMES[args.dep or "structural"])


def _setup(net, args):
    sem = _semantics(args)
    dep = _dep(net, args) if sem == CAUSAL else None
    return sem, dep


def _join(ts) -> str:
    return ",".join(ts) if ts else "-"


def _pairs(rel) -> list[str]:
    return [f"({a},{b})" for a, b in rel.listing()]


# -- commands -----------------------------------------------------------------

def cmd_validate(args, out=sys.stdout) -> int:
    net = _load(args)
    problems = [str(v) for v in validate_well_formed(net)] + validate_marking(net)
    for line in problems:
        print(line, file=out)
    if problems:
        return EXIT_FAIL
    print(f"well-formed: {len(net.places)} places, {len(net.transitions)} transitions", file=out)
    return EXIT_OK


def cmd_run(args, out=sys.stdout) -> int:
    net = _load(args)
    sem, dep = _setup(net, args)
    moves = parse_moves(args.moves or "")
    for m in moves:
        if m.transition not in net.transitions:
            print(f"error: unknown transition {m.transition!r}", file=out)
            return EXIT_INPUT
    state = net.initial_state()
    print("initial", file=out)
    print(state, file=out)
    for i, m in enumerate(moves):
        try:
            state = fire_move(net, state, m, sem, dep)
        except NotEnabled as e:
            print(f"error: {SequenceError(i, str(m), e)}", file=out)
            return EXIT_FAIL
        print(f"\nafter {m}", file=out)
        print(state, file=out)
    return EXIT_OK


class Repl(cmd.Cmd):
    intro = "Commands: list, fire t, undo t, state, history, quit."
    prompt = "rpn> "

    def __init__(self, net, semantics, dep, stdout=None, stdin=None):
        super().__init__(stdin=stdin, stdout=stdout)
        self.net, self.semantics, self.dep = net, semantics, dep
        self.state = net.initial_state()
        self.use_rawinput = stdin is None

    def say(self, text):
        self.stdout.write(text + "\n")

    def do_list(self, arg):
        moves = enabled_moves(self.net, self.state, self.semantics, self.dep)
        self.say("forward: " + _join([m.transition for m in moves if not m.reverse]))
        self.say("reverse: " + _join([m.transition for m in moves if m.reverse]))

    def _fire(self, t, reverse):
        if t not in self.net.transitions:
            self.say(f"unknown transition {t!r}")
            return
        try:
            self.state = fire_move(self.net, self.state, Move(t, reverse), self.semantics, self.dep)
        except RpnError as e:
            self.say(f"cannot {'undo' if reverse else 'fire'} {t}: {getattr(e, 'reason', e)}")
            return
        self.say(("undid " if reverse else "fired ") + t)

    def do_fire(self, arg):
        self._fire(arg.strip(), False)

    def do_undo(self, arg):
        self._fire(arg.strip(), True)

    def do_state(self, arg):
        self.say(str(self.state))

    def do_history(self, arg):
        self.say(str(self.state).splitlines()[-1])

    def do_quit(self, arg):
        return True

    do_EOF = do_quit

    def default(self, line):
        self.say(f"unknown command {line.split()[0]!r}; " + self.intro)

    def emptyline(self):
        pass


def cmd_repl(args, out=sys.stdout) -> int:
    net = _load(args)
    sem, dep = _setup(net, args)
    Repl(net, sem, dep, stdout=out).cmdloop()
    return EXIT_OK


def analyze_report(net) -> dict:
    classes = classify_transitions(net)
    cycles = find_cycles(net)
    acyclic, witness = is_trans_acyclic(net)
    deps = {"structural": _pairs(dependence(net, STRUCTURAL))}
    if acyclic:
        deps["marking"] = _pairs(dependence(net, MARKING))
    else:
        deps["marking"] = None
    co = dependence(net, CO)
    deps["co"] = _pairs(co)
    return {
        "transferring": [t for t in net.transition_order if classes[t] == TRANSFERRING],
        "bond_creating": [t for t in net.transition_order if classes[t] == BOND_CREATING],
        "cycles": [list(c) for c in cycles],
        "trans_acyclic": acyclic,
        "witness": list(witness) if witness else None,
        "dependence": deps,
        "co_independent": sorted(co.independent),
    }


def cmd_analyze(args, out=sys.stdout) -> int:
    rep = analyze_report(_load(args))
    if args.json:
        out.write(dumps(rep))
        return EXIT_OK
    acyc = "yes" if rep["trans_acyclic"] else "NO (" + " ".join(rep["witness"]) + ")"
    print(f"trans-acyclic: {acyc}; cycles: {len(rep['cycles'])}; "
          f"transferring: {_join(rep['transferring'])}", file=out)
    print(f"bond-creating: {_join(rep['bond_creating'])}", file=out)
    for c in rep["cycles"]:
        print("cycle: " + " ".join(c), file=out)
    for name, pairs in rep["dependence"].items():
        if pairs is None:
            print(f"{name} dependence: skipped, net is not trans-acyclic", file=out)
        else:
            print(f"{name} dependence: {' '.join(pairs) or '-'}", file=out)
    print(f"co-independent transitions: {_join(rep['co_independent'])}", file=out)
    return EXIT_OK


def cmd_translate(args, out=sys.stdout) -> int:
    net = _load(args)
    sem, dep = _setup(net, args)
    cpn, layout = translate(net, sem, dep)
    doc = CpnDocument(cpn, layout, net.digest, sem, dep.kind if dep else None)
    text = dumps_cpn(doc)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote {args.output}: {len(cpn.places)} places, {len(cpn.transitions)} transitions",
              file=out)
    else:
        out.write(text)
    if args.dot:
        Path(args.dot).write_text(cpn_to_dot(cpn), encoding="utf-8")
    return EXIT_OK


def cmd_check(args, out=sys.stdout) -> int:
    net = _load(args)
    sem, dep = _setup(net, args)
    cap = max_states_from_env()
    if args.theorem == "lockstep":
        cpn, layout = translate(net, sem, dep)
        res = check_lockstep(net, cpn, layout, sem, dep, max_states=cap)
        print(res, file=out)
        code = EXIT_OK if res.ok else EXIT_FAIL
    elif args.theorem == "roundtrip":
        res = check_reversal_roundtrips(net, sem, dep, trials=args.trials, max_len=args.max_len,
                                        seed=args.seed)
        print(res, file=out)
        code = EXIT_OK if res.ok else EXIT_FAIL
    else:
        stuck = find_stuck_states(net, dep, sem, max_states=cap)
        if not stuck:
            print("stuck: none; every reachable state can reverse to the initial state", file=out)
            code = EXIT_OK
        else:
            print(f"stuck: {len(stuck)} state(s) cannot reverse to the initial state", file=out)
            trace, state = stuck[0]
            print(f"trace: {trace}", file=out)
            print(state, file=out)
            code = EXIT_FAIL
    if args.dot:
        Path(args.dot).write_text(explore_rpn(net, sem, dep, cap).to_dot(), encoding="utf-8")
    return code


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="revnets",
                                 description="Reversing Petri nets: simulate, analyse, compile.")
    sub = ap.add_subparsers(dest="command", required=True)

    def net_cmd(name, help_text, reversing=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("net", help="net document path or fixture name")
        if reversing:
            p.add_argument("--semantics", choices=[BACKTRACKING, CAUSAL],
                           help="reversal semantics (default backtracking; causal if --dep given)")
            p.add_argument("--dep", choices=sorted(DEP_NAMES),
                           help="dependence relation for causal reversing (default structural)")
        return p

    net_cmd("validate", "check well-formedness").set_defaults(func=cmd_validate)
    p = net_cmd("run", "execute a move sequence", True)
    p.add_argument("--moves", default="", help='comma-separated moves, "~t" reverses t')
    p.set_defaults(func=cmd_run)
    net_cmd("repl", "interactive stepping", True).set_defaults(func=cmd_repl)
    p = net_cmd("analyze", "cycles, transition classes, dependence relations")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)
    p = net_cmd("translate", "compile to a coloured Petri net", True)
    p.add_argument("-o", "--output")
    p.add_argument("--dot", help="also write the CPN structure as DOT")
    p.set_defaults(func=cmd_translate)
    p = net_cmd("check", "run a theorem check over the state space", True)
    p.add_argument("--theorem", choices=["lockstep", "roundtrip", "stuck"], required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=200, help="random walks for roundtrip")
    p.add_argument("--max-len", type=int, default=8, help="bound on roundtrip sequence length")
    p.add_argument("--dot", help="also write the RPN state space as DOT")
    p.set_defaults(func=cmd_check)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out=out)
    except (DocumentError, UnknownTransition, OSError) as e:
        print(f"error: {e}", file=out)
        return EXIT_INPUT
    except StateCapExceeded as e:
        print(f"error: {e}", file=out)
        return EXIT_CAP
    except (NotTransAcyclic, TranslationError) as e:
        print(f"error: {e}", file=out)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
