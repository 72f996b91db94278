"""Regenerate the *.rpn.json fixtures in this directory.

    python fixtures/build.py
"""

from pathlib import Path

from revnets.core import ArcLabel, NetDef, bond
from revnets.io import NetDocument, save_net

HERE = Path(__file__).parent


def make(arcs, marking, notes=(), traces=None):
    """arcs: list of (src, dst, [items]) with items like "a", "a-b", "!a-b"."""
    places, transitions, bases, bonds = set(), set(), set(), set()
    labels = {}
    for src, dst, items in arcs:
        if src.startswith("t"):
            transitions.add(src), places.add(dst)
        else:
            places.add(src), transitions.add(dst)
        lab = ArcLabel.of(*items)
        labels[(src, dst)] = lab
        bases |= lab.bases | lab.neg_bases
        bonds |= lab.bonds | lab.neg_bonds
    mk = {}
    for p, items in marking.items():
        places.add(p)
        c = set()
        for s in items:
            if "-" in s:
                c.add(bond(*s.split("-")))
            else:
                c.add(s)
        mk[p] = c
        bases |= {x for x in c if isinstance(x, str)}
        bonds |= {x for x in c if isinstance(x, tuple)}
    net = NetDef(places, transitions, bases, bonds, labels, mk)
    return NetDocument(net, dict(traces or {}), list(notes))


FIXTURES = {
    "figure1": make(
        [
            ("p1", "t1", ["a"]), ("t1", "p3", ["a"]),
            ("p2", "t2", ["b"]), ("t2", "p4", ["b"]),
            ("p3", "t3", ["a"]), ("p4", "t3", ["b"]), ("t3", "p5", ["a", "b", "a-b"]),
            ("p5", "t4", ["b"]), ("p6", "t4", ["c"]), ("t4", "p7", ["b", "c", "b-c"]),
        ],
        {"p1": ["a"], "p2": ["b"], "p6": ["c"]},
        traces={"forward": ["t1", "t2", "t3", "t4"]},
    ),
    "figure2": make(
        [
            ("p1", "t1", ["a"]), ("p2", "t1", ["c"]), ("t1", "p3", ["a", "c", "a-c"]),
            ("p3", "t2", ["a"]), ("t2", "p4", ["a"]),
        ],
        {"p1": ["a"], "p2": ["c"]},
        notes=["Reconstruction: t1 creates the bond a-c, t2 transports a."],
    ),
    "figure3a": make(
        [
            ("p1", "t1", ["a"]), ("t1", "p2", ["a"]),
            ("p2", "t2", ["a"]), ("p3", "t2", ["c"]), ("t2", "p4", ["a", "c"]),
            ("p4", "t3", ["a", "c", "!a-c"]), ("t3", "p1", ["a", "c", "a-c"]),
            ("p1", "t4", ["b"]), ("t4", "p5", ["b"]),
            ("p5", "t5", ["b"]), ("p6", "t5", ["d"]), ("t5", "p1", ["b", "d", "b-d"]),
            ("p1", "t6", ["a", "c", "a-c"]), ("t6", "p7", ["a", "c", "a-c"]),
        ],
        {"p1": ["a", "b"], "p3": ["c"], "p6": ["d"]},
        notes=[
            "Reconstruction. Claims it must satisfy:",
            "structural dependence is exactly {t1t2,t1t3,t1t5,t2t3,t3t6,t3t4,t4t5,t5t6}",
            "after t1 t2 t3, t1 can fire a second time and t4, t6 are enabled",
            "after t1 t2 t3 t1, p3 is empty and t2 cannot fire",
            "after t1 t2 t3 t4 t5 only t5 is reversible under structural dependence",
            "t3 and t5 are marking-oriented and co-independent",
        ],
        traces={"cycles": ["t1", "t2", "t3", "t4", "t5"]},
    ),
    "figure3b": make(
        [
            ("p1", "t1", ["a"]), ("t1", "p2", ["a"]),
            ("p2", "t2", ["a"]), ("p3", "t2", ["c"]), ("t2", "p4", ["a", "c"]),
            ("p4", "t3", ["a", "c", "!a-c"]), ("t3", "p1", ["a", "c", "a-c"]),
            ("p1", "t4", ["a"]), ("t4", "p5", ["a"]),
            ("p5", "t5", ["a"]), ("p6", "t5", ["d"]), ("t5", "p1", ["a", "d", "a-d"]),
        ],
        {"p1": ["a"], "p3": ["c"], "p6": ["d"]},
        notes=[
            "Reconstruction. Claims it must satisfy:",
            "t3 and t5 are structurally independent",
            "t3 and t5 are marking-oriented dependent: both move components holding a",
        ],
    ),
    "figure3c": make(
        [
            ("p0", "t1", ["a"]), ("t1", "p1", ["a"]),
            ("p1", "t2", ["a"]), ("t2", "p2", ["a"]),
            ("p2", "t3", ["a"]), ("p6", "t3", ["b"]), ("t3", "p3", ["a", "b", "a-b"]),
            ("p3", "t4", ["a"]), ("t4", "p1", ["a"]),
            ("p1", "t5", ["a"]), ("p5", "t5", ["c"]), ("t5", "p4", ["a", "c", "a-c"]),
            ("p4", "t6", ["a"]), ("t6", "p1", ["a"]),
        ],
        {"p0": ["a"], "p5": ["c"], "p6": ["b"]},
        notes=[
            "Reconstruction. Claims it must satisfy:",
            "t4 and t6 are co-independent and both co-dependent on t1",
            "t2 and t6 both transfer a",
        ],
    ),
    "figure4": make(
        [
            ("p1", "t1", ["c"]), ("p2", "t1", ["b"]), ("t1", "p4", ["b", "c", "b-c"]),
            ("p4", "t2", ["c"]), ("t2", "p1", ["c"]),
            ("p3", "t3", ["d"]), ("t3", "p4", ["d"]),
            ("p1", "t4", ["c"]), ("p4", "t4", ["d"]), ("t4", "p1", ["c", "d", "c-d"]),
        ],
        {"p1": ["c"], "p2": ["a", "b", "a-b"], "p3": ["d"]},
        notes=[
            "Reconstruction. Claims it must satisfy:",
            "after t1 t2 t3 t4, p1 holds the molecule a-b-c-d",
            "t2 and t4 are co-independent",
            "with co-dependence, t1 t2 t3 t4 ~t2 leaves d bonded to c in p4 and no",
            "sequence of reverse moves returns to the initial state",
            "with structural dependence no reachable state is stuck",
        ],
        traces={"stuck": ["t1", "t2", "t3", "t4", "~t2"]},
    ),
    "transport_loop": make(
        [("p1", "t1", ["a"]), ("t1", "p2", ["a"]), ("p2", "t2", ["a"]), ("t2", "p1", ["a"])],
        {"p1": ["a"]},
    ),
    "fork": make(
        [("p1", "t1", ["a"]), ("t1", "p2", ["a"]), ("t1", "p3", ["a"])],
        {"p1": ["a"]},
    ),
    "single": make(
        [("p1", "t1", ["a"]), ("p2", "t1", ["b"]), ("t1", "p3", ["a", "b", "a-b"])],
        {"p1": ["a"], "p2": ["b"]},
    ),
}


if __name__ == "__main__":
    for name, doc in FIXTURES.items():
        save_net(doc, HERE / f"{name}.rpn.json")
        print(name)
