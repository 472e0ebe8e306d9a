"""
Built-in reference fixtures: four weighted trees and four junction-tree
pairs with known tour weights, payloads and propagation counts.
"""
from typing import Dict, Callable

import numpy as np

from logic.potential_algebra import Variable, make_scope, make_table
from logic.junction_tree import Clique, make_junction_tree
from logic.linkage import make_dsepset
from logic.tour import WeightedTree, make_weighted_tree
from workbench.formats import Pair
from workbench.generators import pair_from_linkages

_NODES = [f"C{k}" for k in range(1, 11)]

FIG5_TREE = make_weighted_tree(
    _NODES,
    [
        ("C5", "C2", 1.0), ("C2", "C6", 1.0), ("C6", "C7", 1.0), ("C7", "C8", 1.0),
        ("C2", "C1", 1.0), ("C1", "C9", 1.0), ("C9", "C10", 1.0),
        ("C1", "C3", 1.0), ("C1", "C4", 1.0),
    ],
)

FIG6_TREE = make_weighted_tree(
    _NODES,
    [
        ("C8", "C7", 1.0), ("C7", "C6", 2.0), ("C6", "C2", 4.0), ("C2", "C1", 8.0),
        ("C1", "C4", 6.0), ("C2", "C5", 4.0), ("C1", "C3", 4.0),
        ("C1", "C9", 2.0), ("C9", "C10", 3.0),
    ],
)

# FIG6_TREE relabelled so that the leaves come first: C5 v1, C8 v2, C10 v3,
# C4 v4, C3 v5, C2 v6, C6 v7, C7 v8, C1 v9, C9 v10.
FIG7_TREE = make_weighted_tree(
    [f"v{k}" for k in range(1, 11)],
    [
        ("v2", "v8", 1.0), ("v8", "v7", 2.0), ("v7", "v6", 4.0), ("v6", "v9", 8.0),
        ("v9", "v4", 6.0), ("v6", "v1", 4.0), ("v9", "v5", 4.0),
        ("v9", "v10", 2.0), ("v10", "v3", 3.0),
    ],
)

FIG4_TREE = make_weighted_tree(
    ["C1", "C2", "C3", "C4", "C5"],
    [("C1", "C2", 1.0), ("C1", "C3", 1.0), ("C1", "C4", 1.0), ("C2", "C5", 1.0)],
)

# Linkage L_i hosted at C_i; every clique of T^a is a linkage host.
FIG4_LINKAGES = (
    ("s12", "s13", "s14"),
    ("s12", "s25"),
    ("s13", "o3"),
    ("s14", "o4"),
    ("s25", "o5"),
)
FIG4_LINKAGE_EDGES = ((0, 1), (0, 2), (0, 3), (1, 4))

# Three 5-variable linkages in a chain over ten binary shared variables.
PAYLOAD_LINKAGES = (
    ("a", "b", "c", "d", "e"),
    ("d", "e", "f", "g", "h"),
    ("f", "g", "h", "i", "j"),
)
PAYLOAD_LINKAGE_EDGES = ((0, 1), (1, 2))


def fig4_pair(seed: int = 4) -> Pair:
    return pair_from_linkages(FIG4_LINKAGES, FIG4_LINKAGE_EDGES, seed, private_b=2)


def payload_pair(seed: int = 3) -> Pair:
    return pair_from_linkages(PAYLOAD_LINKAGES, PAYLOAD_LINKAGE_EDGES, seed)


def pair2l(seed: int = 0) -> Pair:
    """
    T^a = {A,B,C}-{C,D,E}, T^b = {B,C,F}-{C,D,G}, I = {B,C,D}; linkages
    {B,C} and {C,D}.
    """
    rng = np.random.default_rng(seed)
    v = {name: Variable(name, 2) for name in "ABCDEFG"}

    def side(first: str, second: str, p: str, q: str):
        scopes = {p: make_scope(v[x] for x in first), q: make_scope(v[x] for x in second)}
        return make_junction_tree(
            [Clique(cid, scope) for cid, scope in scopes.items()],
            [(p, q)],
            {cid: make_table(scope, rng.uniform(0.1, 1.0, size=scope.size)) for cid, scope in scopes.items()},
        )

    jt_a = side("ABC", "CDE", "C1", "C2")
    jt_b = side("BCF", "CDG", "D1", "D2")
    return Pair(jt_a, jt_b, make_dsepset(v[x] for x in "BCD"))


def interior_pair(seed: int = 5) -> Pair:
    """
    T^a is a star on C0{B,Y} with leaves C1{A,B}, C2{B,C}, C3{B,D}, and the
    chain C3 - C4{D,Z} - C5{D,E}; I = {A..E}. C0 and C4 host nothing and
    stay inside the host tree: the linkage reduction folds C0 into C1 and
    C4 into C3. T^b is the path D1{A,B,F} - D2{B,C} - D3{B,D} - D4{D,E}.
    """
    rng = np.random.default_rng(seed)
    v = {name: Variable(name, 2) for name in "ABCDEFYZ"}

    def build(layout, edges):
        scopes = {cid: make_scope(v[x] for x in names) for cid, names in layout.items()}
        return make_junction_tree(
            [Clique(cid, scope) for cid, scope in scopes.items()],
            edges,
            {cid: make_table(scope, rng.uniform(0.1, 1.0, size=scope.size)) for cid, scope in scopes.items()},
        )

    jt_a = build(
        {"C0": "BY", "C1": "AB", "C2": "BC", "C3": "BD", "C4": "DZ", "C5": "DE"},
        [("C0", "C1"), ("C0", "C2"), ("C0", "C3"), ("C3", "C4"), ("C4", "C5")],
    )
    jt_b = build(
        {"D1": "ABF", "D2": "BC", "D3": "BD", "D4": "DE"},
        [("D1", "D2"), ("D2", "D3"), ("D3", "D4")],
    )
    return Pair(jt_a, jt_b, make_dsepset(v[x] for x in "ABCDE"))


TREES: Dict[str, WeightedTree] = {
    "FIG4": FIG4_TREE,
    "FIG5": FIG5_TREE,
    "FIG6": FIG6_TREE,
    "FIG7": FIG7_TREE,
}

PAIRS: Dict[str, Callable[[], Pair]] = {
    "FIG4": fig4_pair,
    "PAIR2L": pair2l,
    "PAYLOAD": payload_pair,
    "INTERIOR": interior_pair,
}

