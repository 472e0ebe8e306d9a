from typing import List, Sequence, Tuple, Dict
import logging

import networkx as nx
import numpy as np

from logic.potential_algebra import Variable, make_scope, make_table
from logic.junction_tree import Clique, JunctionTree, DEFAULT_ORACLE_LIMIT, make_junction_tree
from logic.linkage import make_dsepset
from logic.tour import WeightedTree, make_weighted_tree
from workbench.formats import Pair

logger = logging.getLogger(__name__)

MAX_LINKAGES = 4
POTENTIAL_RANGE = (0.1, 1.0)


# ============================================================================
# TREES
# ============================================================================

def gen_tree(n: int, seed: int, weight_range: Tuple[int, int] = (1, 9)) -> WeightedTree:
    """
    Uniform random labeled tree on N1..Nn decoded from a random Prüfer
    sequence, integer weights drawn from weight_range (inclusive).
    """
    if n < 2:
        raise ValueError(f"gen_tree needs n >= 2, got {n}")
    low, high = weight_range
    if low < 1 or high < low:
        raise ValueError(f"weight range must satisfy 1 <= low <= high, got {weight_range}")

    rng = np.random.default_rng(seed)
    prufer = [int(x) for x in rng.integers(0, n, size=n - 2)]
    g = nx.from_prufer_sequence(prufer) if prufer else nx.path_graph(2)

    names = [f"N{k + 1}" for k in range(n)]
    edges = [
        (names[u], names[v], float(rng.integers(low, high + 1)))
        for u, v in sorted(tuple(sorted(e)) for e in g.edges)
    ]
    return make_weighted_tree(names, edges)


# ============================================================================
# PAIRS
# ============================================================================

def _clique_ids(prefix: str, count: int) -> List[str]:
    width = len(str(count))
    return [f"{prefix}{k + 1:0{width}d}" for k in range(count)]


def _assemble(
        prefix: str,
        scopes: List[List[str]],
        edges: List[Tuple[int, int]],
        variables: Dict[str, Variable],
        rng: np.random.Generator,
) -> JunctionTree:
    ids = _clique_ids(prefix, len(scopes))
    cliques, potentials = [], {}
    for cid, var_ids in zip(ids, scopes):
        scope = make_scope(variables[v] for v in var_ids)
        cliques.append(Clique(cid, scope))
        potentials[cid] = make_table(scope, rng.uniform(*POTENTIAL_RANGE, size=scope.size))
    return make_junction_tree(cliques, [(ids[a], ids[b]) for a, b in edges], potentials)


def _side(
        prefix: str,
        linkage_scopes: List[List[str]],
        linkage_edges: List[Tuple[int, int]],
        private: List[str],
        variables: Dict[str, Variable],
        rng: np.random.Generator,
        pendants: bool,
) -> JunctionTree:
    """
    Host cliques = linkage scopes plus exclusive private variables; with
    pendants=True each private variable may instead open a non-host clique
    hanging off a host and sharing part of its scope.
    """
    scopes = [list(s) for s in linkage_scopes]
    edges = list(linkage_edges)
    held_back = []
    for var in private:
        if pendants and rng.random() < 0.5:
            held_back.append(var)
        else:
            scopes[int(rng.integers(len(linkage_scopes)))].append(var)

    for var in held_back:
        host = int(rng.integers(len(linkage_scopes)))
        shared = [v for v in scopes[host] if rng.random() < 0.5]
        scopes.append(shared + [var])
        edges.append((host, len(scopes) - 1))

    return _assemble(prefix, scopes, edges, variables, rng)


def pair_from_linkages(
        scopes: Sequence[Sequence[str]],
        edges: Sequence[Tuple[int, int]],
        seed: int,
        private_a: int = 0,
        private_b: int = 0,
        cardinality: int = 2,
        prefix_a: str = "C",
        prefix_b: str = "D",
) -> Pair:
    """
    Pair whose T^a linkage tree is exactly the given scopes (cliques
    C1..Cm in the given order) joined by edges (0-based indices). T^b has
    the same shape. Private variables are distributed over host cliques.

    Adjacent scopes must not contain one another, otherwise the linkage
    reduction merges them.
    """
    rng = np.random.default_rng(seed)
    shared = sorted({v for s in scopes for v in s})
    a_vars = [f"a{k + 1}" for k in range(private_a)]
    b_vars = [f"b{k + 1}" for k in range(private_b)]
    variables = {v: Variable(v, cardinality) for v in shared + a_vars + b_vars}

    scopes = [list(s) for s in scopes]
    jt_a = _side(prefix_a, scopes, list(edges), a_vars, variables, rng, pendants=False)
    jt_b = _side(prefix_b, scopes, list(edges), b_vars, variables, rng, pendants=False)
    return Pair(jt_a, jt_b, make_dsepset(variables[v] for v in shared))


def _random_linkage_tree(n_shared: int, rng: np.random.Generator) -> Tuple[List[List[str]], List[Tuple[int, int]]]:
    """
    Linkage scopes over i01.. such that every edge owns a separator variable
    and every leaf owns a variable of its own.
    """
    names = [f"i{k + 1:02d}" for k in range(n_shared)]
    m = int(rng.integers(1, min(MAX_LINKAGES, max(1, n_shared - 1)) + 1))
    if m == 1:
        return [names], []

    prufer = [int(x) for x in rng.integers(0, m, size=m - 2)]
    g = nx.from_prufer_sequence(prufer) if prufer else nx.path_graph(2)
    leaves = [k for k in range(m) if g.degree(k) == 1]
    if (m - 1) + len(leaves) > n_shared:
        g = nx.path_graph(m)
        leaves = [0, m - 1]
    edges = sorted(tuple(sorted(e)) for e in g.edges)

    scopes: List[List[str]] = [[] for _ in range(m)]
    pool = list(names)
    rng.shuffle(pool)
    for a, b in edges:
        var = pool.pop()
        scopes[a].append(var)
        scopes[b].append(var)
    for leaf in leaves:
        scopes[leaf].append(pool.pop())
    for var in pool:
        if rng.random() < 0.5:
            a, b = edges[int(rng.integers(len(edges)))]
            scopes[a].append(var)
            scopes[b].append(var)
        else:
            scopes[int(rng.integers(m))].append(var)
    return scopes, edges


def gen_pair(
        n_shared: int,
        n_private_a: int,
        n_private_b: int,
        seed: int,
        cardinality: int = 2,
        oracle_limit: int = DEFAULT_ORACLE_LIMIT,
) -> Pair:
    """
    Random pair satisfying every open_session precondition: a random
    linkage tree over the shared variables (1 to 4 linkages), T^a built
    from it with private-a variables and pendant non-host cliques, T^b
    with private-b variables in the same shape. Potentials are seeded
    uniforms in [0.1, 1.0).
    """
    if n_shared < 1:
        raise ValueError(f"gen_pair needs n_shared >= 1, got {n_shared}")
    if n_private_a < 0 or n_private_b < 0:
        raise ValueError("private variable counts must be >= 0")
    widest = cardinality ** (n_shared + max(n_private_a, n_private_b))
    if widest > oracle_limit:
        raise ValueError(
            f"joint of {widest} cells exceeds the oracle limit of {oracle_limit}"
        )

    rng = np.random.default_rng(seed)
    scopes, edges = _random_linkage_tree(n_shared, rng)

    shared = sorted({v for s in scopes for v in s})
    a_vars = [f"a{k + 1:02d}" for k in range(n_private_a)]
    b_vars = [f"b{k + 1:02d}" for k in range(n_private_b)]
    variables = {v: Variable(v, cardinality) for v in shared + a_vars + b_vars}

    jt_a = _side("A", scopes, edges, a_vars, variables, rng, pendants=True)
    jt_b = _side("B", scopes, edges, b_vars, variables, rng, pendants=True)
    logger.debug("gen_pair seed %d: %d linkages, %d + %d cliques", seed, len(scopes),
                 len(jt_a.cliques), len(jt_b.cliques))
    return Pair(jt_a, jt_b, make_dsepset(variables[v] for v in shared))


def gen_pair_params(seed: int, max_variables: int = 10) -> Tuple[int, int, int]:
    """(n_shared, n_private_a, n_private_b) with at most max_variables in total."""
    rng = np.random.default_rng(seed)
    n_shared = int(rng.integers(1, max_variables - 1))
    room = max_variables - n_shared
    n_private_a = int(rng.integers(0, room + 1))
    return n_shared, n_private_a, int(rng.integers(0, room - n_private_a + 1))
