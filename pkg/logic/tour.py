from typing import NamedTuple, Tuple, Dict, FrozenSet, Iterable, Optional, List, Sequence, Counter as CounterType
from collections import Counter
from functools import lru_cache
import itertools
import logging

import networkx as nx
import numpy as np

from logic.linkage import HostTree

logger = logging.getLogger(__name__)

DEFAULT_BRUTE_FORCE_LIMIT = 9


# ============================================================================
# ERRORS
# ============================================================================

class TourError(ValueError):
    """Raised on malformed trees, walks or numberings."""


# ============================================================================
# DOMAIN TYPES
# ============================================================================

class WeightedEdge(NamedTuple):
    u: str
    v: str
    weight: float  # > 0, same in both directions


class WeightedTree(NamedTuple):
    """
    Tree with positive symmetric link weights.

    nodes keeps declaration order; every "smallest id" / "ascending id"
    tie-break in this module means earliest in that order.
    """
    nodes: Tuple[str, ...]
    edges: Tuple[WeightedEdge, ...]
    hosts: FrozenSet[str]

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.nodes)
        for e in self.edges:
            g.add_edge(e.u, e.v, weight=e.weight)
        return g

    def rank(self) -> Dict[str, int]:
        return {node: k for k, node in enumerate(self.nodes)}

    @property
    def leaves(self) -> Tuple[str, ...]:
        degree = Counter()
        for e in self.edges:
            degree[e.u] += 1
            degree[e.v] += 1
        return tuple(n for n in self.nodes if degree[n] == 1)

    @property
    def total_weight(self) -> float:
        return sum(e.weight for e in self.edges)


class TerminalChain(NamedTuple):
    """Simple path whose two ends are leaves."""
    path: Tuple[str, ...]
    weight: float


class OpenTour(NamedTuple):
    """
    A walk visiting every node at least once (the t[] array). Also used
    for closed tours, where walk[0] == walk[-1].
    """
    walk: Tuple[str, ...]
    weight: float


class Numbering(NamedTuple):
    order: Tuple[str, ...]  # order[k] is the node numbered k + 1


def make_weighted_tree(
        nodes: Iterable[str],
        edges: Iterable[Tuple[str, str, float]],
        hosts: Optional[Iterable[str]] = None,
) -> WeightedTree:
    """
    Raises:
        TourError: duplicate node, unknown endpoint, weight <= 0, not a tree
    """
    nodes = tuple(nodes)
    if not nodes:
        raise TourError("tree has no nodes")
    if len(set(nodes)) != len(nodes):
        raise TourError("duplicate node ids")

    known = set(nodes)
    weighted = []
    for u, v, w in edges:
        if u not in known or v not in known:
            raise TourError(f"edge ({u}, {v}) references an unknown node")
        if not w > 0:
            raise TourError(f"edge ({u}, {v}) weight must be > 0, got {w}")
        weighted.append(WeightedEdge(u, v, w))

    tree = WeightedTree(
        nodes=nodes,
        edges=tuple(weighted),
        hosts=frozenset(known if hosts is None else hosts),
    )
    if not tree.hosts <= known:
        raise TourError(f"host flags on unknown nodes {sorted(tree.hosts - known)}")
    if not nx.is_tree(tree.graph()):
        raise TourError("edges do not form a tree over the nodes")
    return tree


def _children(g: nx.Graph, rank: Dict[str, int], node: str, blocked: Iterable[str]) -> List[str]:
    blocked = set(blocked)
    return sorted((v for v in g.neighbors(node) if v not in blocked), key=rank.__getitem__)


def _depth_first_walk(g: nx.Graph, rank: Dict[str, int], root: str, parent: Optional[str]) -> List[str]:
    """Visits below root (excluding root itself), recording every return."""
    walk: List[str] = []
    stack = [(root, iter(_children(g, rank, root, [] if parent is None else [parent])))]
    while stack:
        node, pending = stack[-1]
        child = next(pending, None)
        if child is None:
            stack.pop()
            if stack:
                walk.append(stack[-1][0])
            continue
        walk.append(child)
        stack.append((child, iter(_children(g, rank, child, [node]))))
    return walk


def _first_visits(walk: Sequence[str]) -> Tuple[str, ...]:
    seen = {}
    for node in walk:
        seen.setdefault(node, None)
    return tuple(seen)


# ============================================================================
# WALKS
# ============================================================================

def tour_weight(tree: WeightedTree, walk: Sequence[str]) -> float:
    """
    Raises:
        TourError: empty walk, unknown node or non-adjacent step
    """
    if not walk:
        raise TourError("empty walk")
    g = tree.graph()
    for node in walk:
        if node not in g:
            raise TourError(f"walk visits unknown node {node}")
    total = 0.0
    for u, v in zip(walk, walk[1:]):
        if not g.has_edge(u, v):
            raise TourError(f"walk step {u} -> {v} is not a tree link")
        total += g[u][v]["weight"]
    return total


def is_tour(tree: WeightedTree, walk: Sequence[str]) -> bool:
    """A walk over tree links that visits each node at least once."""
    if not walk or set(walk) != set(tree.nodes):
        return False
    g = tree.graph()
    return all(g.has_edge(u, v) for u, v in zip(walk, walk[1:]))


def edge_traversal_counts(walk: Sequence[str]) -> CounterType[Tuple[str, str]]:
    return Counter(tuple(sorted((u, v))) for u, v in zip(walk, walk[1:]))


def closed_tour(tree: WeightedTree) -> OpenTour:
    """
    Depth-first double traversal from the first declared node; every link
    is traversed exactly twice. A single-node tree gives the trivial walk.
    """
    g = tree.graph()
    root = tree.nodes[0]
    walk = [root] + _depth_first_walk(g, tree.rank(), root, None)
    return OpenTour(walk=tuple(walk), weight=tour_weight(tree, walk))


# ============================================================================
# TERMINAL CHAINS
# ============================================================================

def leaf_distances(tree: WeightedTree) -> Dict[str, Dict[str, float]]:
    """
    f[i][j]: weight of the unique path from node i to leaf j, one
    traversal per leaf.
    """
    g = tree.graph()
    f: Dict[str, Dict[str, float]] = {node: {} for node in tree.nodes}
    for leaf in tree.leaves:
        for node, dist in nx.single_source_dijkstra_path_length(g, leaf, weight="weight").items():
            f[node][leaf] = dist
    return f


def leaf_eccentricities(tree: WeightedTree, f: Optional[Dict[str, Dict[str, float]]] = None) -> Dict[str, float]:
    """M[i] = max over leaves j of f[i][j], for every leaf i."""
    f = f if f is not None else leaf_distances(tree)
    return {leaf: max(f[leaf][j] for j in tree.leaves) for leaf in tree.leaves}


def heaviest_terminal_chain(tree: WeightedTree) -> TerminalChain:
    """
    x = first leaf with the largest M[x]; y = first leaf at distance M[x]
    from x; the chain is the x -> y path.

    Raises:
        TourError: fewer than two leaves
    """
    leaves = tree.leaves
    if len(leaves) < 2:
        raise TourError(f"need at least 2 leaves, got {len(leaves)}")

    f = leaf_distances(tree)
    m = leaf_eccentricities(tree, f)
    best = max(m.values())
    x = next(leaf for leaf in leaves if m[leaf] == best)
    y = next(leaf for leaf in leaves if f[x][leaf] == m[x])

    path = nx.shortest_path(tree.graph(), x, y)
    return TerminalChain(path=tuple(path), weight=m[x])


def terminal_chains(tree: WeightedTree) -> List[TerminalChain]:
    """All terminal chains, one per unordered leaf pair."""
    g = tree.graph()
    f = leaf_distances(tree)
    leaves = tree.leaves
    return [
        TerminalChain(path=tuple(nx.shortest_path(g, a, b)), weight=f[a][b])
        for i, a in enumerate(leaves)
        for b in leaves[i + 1:]
    ]


# ============================================================================
# OPEN TOURS
# ============================================================================

def open_tour_from_chain(tree: WeightedTree, chain: Sequence[str]) -> Tuple[OpenTour, Numbering]:
    """
    Travel the chain end to end, detouring depth-first into every
    off-chain subtree at each chain node (ascending node order). Chain
    links are traversed once, all other links twice.
    """
    g = tree.graph()
    leaves = set(tree.leaves)
    if len(chain) < 2 or chain[0] not in leaves or chain[-1] not in leaves:
        raise TourError(f"{list(chain)} is not a terminal chain")
    if len(set(chain)) != len(chain):
        raise TourError(f"chain {list(chain)} repeats a node")
    for u, v in zip(chain, chain[1:]):
        if not g.has_edge(u, v):
            raise TourError(f"chain step {u} -> {v} is not a tree link")

    rank = tree.rank()
    on_chain = set(chain)
    walk: List[str] = []
    for z in chain:
        walk.append(z)
        for u in _children(g, rank, z, on_chain):
            walk.append(u)
            walk.extend(_depth_first_walk(g, rank, u, z))
            walk.append(z)

    return OpenTour(walk=tuple(walk), weight=tour_weight(tree, walk)), Numbering(_first_visits(walk))


def min_weight_open_tour(tree: WeightedTree) -> Tuple[OpenTour, Numbering]:
    """
    Minimum-weight open tour and its first-visit numbering. The weight is
    twice the total link weight minus the heaviest terminal chain.

    Raises:
        TourError: single-node tree
    """
    n = len(tree.nodes)
    if n < 2:
        raise TourError(f"open tour needs at least 2 nodes, got {n}")
    if n == 2:
        walk = tree.nodes
        return OpenTour(walk=walk, weight=tour_weight(tree, walk)), Numbering(walk)

    chain = heaviest_terminal_chain(tree)
    tour, numbering = open_tour_from_chain(tree, chain.path)
    logger.debug("open tour over %d nodes: chain weight %s, tour weight %s", n, chain.weight, tour.weight)
    return tour, numbering


# ============================================================================
# NUMBERINGS
# ============================================================================

def check_numbering_consistent(tree: WeightedTree, numbering: Numbering) -> bool:
    """
    Each node after the first must be adjacent to an earlier node (in a
    tree that earlier neighbor is necessarily unique).

    Raises:
        TourError: numbering is not a permutation of the nodes
    """
    order = numbering.order
    if len(order) != len(tree.nodes) or set(order) != set(tree.nodes):
        raise TourError(f"numbering {list(order)} is not a permutation of the tree nodes")
    g = tree.graph()
    seen = {order[0]}
    for node in order[1:]:
        if not any(nb in seen for nb in g.neighbors(node)):
            return False
        seen.add(node)
    return True


def path_weight_matrix(tree: WeightedTree) -> np.ndarray:
    """All-pairs path weights, rows/columns in declaration order."""
    g = tree.graph()
    rank = tree.rank()
    d = np.zeros((len(tree.nodes), len(tree.nodes)))
    for source, lengths in nx.all_pairs_dijkstra_path_length(g, weight="weight"):
        for target, dist in lengths.items():
            d[rank[source], rank[target]] = dist
    return d


def numbering_weight(tree: WeightedTree, numbering: Numbering) -> float:
    """Sum of path weights between consecutively numbered nodes."""
    d = path_weight_matrix(tree)
    rank = tree.rank()
    idx = [rank[n] for n in numbering.order]
    return float(sum(d[a, b] for a, b in zip(idx, idx[1:])))


@lru_cache(maxsize=None)
def _permutations(n: int) -> np.ndarray:
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int8)
    perms.setflags(write=False)
    return perms


def brute_force_min_numbering(
        tree: WeightedTree,
        limit: int = DEFAULT_BRUTE_FORCE_LIMIT,
) -> Tuple[Numbering, float]:
    """
    Exhaustive minimum over all n! numberings of the sum of path weights
    between consecutively numbered nodes.

    Raises:
        TourError: more than `limit` nodes
    """
    n = len(tree.nodes)
    if n > limit:
        raise TourError(f"brute force over {n} nodes exceeds the limit of {limit}")
    if n == 1:
        return Numbering(tree.nodes), 0.0

    d = path_weight_matrix(tree)
    perms = _permutations(n)
    costs = d[perms[:, :-1], perms[:, 1:]].sum(axis=1)
    best = int(np.argmin(costs))
    order = tuple(tree.nodes[i] for i in perms[best])
    return Numbering(order), float(costs[best])


# ============================================================================
# HOST-TREE REDUCTION
# ============================================================================

def reduce_to_host_tree(
        host: HostTree,
        hosts: Iterable[str],
        cost_model: str = "unit",
) -> WeightedTree:
    """
    Weighted tree for linkage ordering.

    Link weights: "unit" gives 1; "statespace" gives the sepset state-space
    size plus the mean state-space size of the two endpoint cliques (the
    mean of both directions). Non-host leaves are pruned and non-host
    nodes of degree 2 are folded into a single link carrying both weights;
    non-host branch nodes stay.
    """
    hosts = set(hosts)
    if not hosts:
        raise TourError("reduction needs at least one host")
    if not hosts <= set(host.cliques):
        raise TourError(f"hosts {sorted(hosts - set(host.cliques))} are not in the host tree")
    if cost_model not in ("unit", "statespace"):
        raise TourError(f"unknown cost model {cost_model!r}")

    g = nx.Graph()
    g.add_nodes_from(host.cliques)
    for a, b in host.edges:
        if cost_model == "unit":
            w = 1.0
        else:
            sep = host.scopes[a].intersection(host.scopes[b]).size
            w = sep + (host.scopes[a].size + host.scopes[b].size) / 2.0
        g.add_edge(a, b, weight=w)

    changed = True
    while changed:
        changed = False
        for node in sorted(g.nodes):
            if node in hosts:
                continue
            if g.degree(node) <= 1:
                g.remove_node(node)
            elif g.degree(node) == 2:
                a, b = sorted(g.neighbors(node))
                w = g[a][node]["weight"] + g[node][b]["weight"]
                g.remove_node(node)
                g.add_edge(a, b, weight=w)
            else:
                continue
            changed = True
            break

    kept_non_hosts = sorted(n for n in g.nodes if n not in hosts)
    if kept_non_hosts:
        logger.warning("non-host cliques kept in the weighted tree: %s", kept_non_hosts)

    nodes = tuple(n for n in host.cliques if n in g)
    return WeightedTree(
        nodes=nodes,
        edges=tuple(WeightedEdge(a, b, d["weight"]) for a, b, d in sorted(g.edges(data=True))),
        hosts=frozenset(hosts),
    )
