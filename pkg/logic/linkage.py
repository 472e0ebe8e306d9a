from typing import NamedTuple, Tuple, Dict, Optional, List, Iterable
import logging

import networkx as nx

from logic.potential_algebra import Scope, Variable, make_scope
from logic.junction_tree import JunctionTree, Edge, edge_key

logger = logging.getLogger(__name__)


# ============================================================================
# ERRORS
# ============================================================================

class LinkageError(ValueError):
    """Raised when a d-sepset cannot be served by the given junction trees."""


# ============================================================================
# DOMAIN TYPES
# ============================================================================

class DSepset(NamedTuple):
    """The variables shared by the two junction trees."""
    vars: Scope


class HostTree(NamedTuple):
    """
    Minimal subtree of a junction tree that still contains the d-sepset.

    scopes keeps the ORIGINAL clique scopes; linkage derivation works on
    copies.
    """
    cliques: Tuple[str, ...]
    edges: Tuple[Edge, ...]
    scopes: Dict[str, Scope]

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.cliques)
        g.add_edges_from(self.edges)
        return g

    def path(self, a: str, b: str) -> List[str]:
        """The unique host-tree path from a to b (inclusive)."""
        return nx.shortest_path(self.graph(), a, b)


class Linkage(NamedTuple):
    """A maximal shared scope of the d-sepset and the cliques hosting it on each side."""
    index: int  # 1-based, L_index
    vars: Scope
    host_a: str
    host_b: Optional[str] = None


class LinkageTree(NamedTuple):
    """
    Linkages in index order (linkages[k].index == k + 1), tree edges over
    linkage indices, and for each linkage the host-tree cliques that were
    merged into it.
    """
    linkages: Tuple[Linkage, ...]
    edges: Tuple[Tuple[int, int], ...]
    members: Dict[int, Tuple[str, ...]]

    def linkage(self, index: int) -> Linkage:
        if not 1 <= index <= len(self.linkages):
            raise LinkageError(
                f"linkage index {index} out of range 1..{len(self.linkages)}"
            )
        return self.linkages[index - 1]

    def group_of(self, clique_id: str) -> Optional[int]:
        for index, cliques in self.members.items():
            if clique_id in cliques:
                return index
        return None

    @property
    def indices(self) -> Tuple[int, ...]:
        return tuple(l.index for l in self.linkages)


def make_dsepset(variables: Iterable[Variable]) -> DSepset:
    scope = make_scope(variables)
    if not scope.variables:
        raise LinkageError("d-sepset must be non-empty")
    return DSepset(scope)


# ============================================================================
# HOST TREE
# ============================================================================

def build_host_tree(jt: JunctionTree, dsepset: DSepset) -> HostTree:
    """
    Repeatedly remove a leaf clique C when C ∩ I is empty or contained in
    another clique still in the tree. Leaves are scanned in ascending id
    order and the scan restarts after every removal.

    Raises:
        LinkageError: some d-sepset variable is absent from jt
    """
    present = set(jt.scope.ids)
    missing = [v for v in dsepset.vars.ids if v not in present]
    if missing:
        raise LinkageError(f"d-sepset variables {missing} absent from junction tree")

    shared = set(dsepset.vars.ids)
    g = jt.graph()

    removed = True
    while removed:
        removed = False
        for leaf in sorted(n for n in g.nodes if g.degree(n) == 1):
            part = shared & set(jt.cliques[leaf].vars.ids)
            if not part or any(
                    part <= set(jt.cliques[other].vars.ids)
                    for other in g.nodes if other != leaf
            ):
                g.remove_node(leaf)
                logger.debug("host tree: removed leaf %s", leaf)
                removed = True
                break

    cliques = tuple(sorted(g.nodes))
    return HostTree(
        cliques=cliques,
        edges=tuple(sorted(edge_key(a, b) for a, b in g.edges)),
        scopes={cid: jt.cliques[cid].vars for cid in cliques},
    )


# ============================================================================
# LINKAGE TREE
# ============================================================================

def build_linkage_tree(host: HostTree, dsepset: DSepset) -> LinkageTree:
    """
    Reduce the host tree to its linkage tree:

    1. drop a variable outside I that occurs in a single clique;
    2. union a clique that became a subset of an adjacent clique into that
       neighbor (smallest neighbor id first), reconnecting its other
       neighbors.

    Both rules are applied until neither fires. Cover validity is checked
    separately by validate_linkage_cover().
    """
    shared = set(dsepset.vars.ids)
    scopes = {cid: set(host.scopes[cid].ids) for cid in host.cliques}
    groups = {cid: [cid] for cid in host.cliques}
    g = host.graph()

    changed = True
    while changed:
        changed = False

        counts: Dict[str, List[str]] = {}
        for cid in sorted(g.nodes):
            for var in scopes[cid]:
                counts.setdefault(var, []).append(cid)
        for var, holders in sorted(counts.items()):
            if var not in shared and len(holders) == 1:
                scopes[holders[0]].discard(var)
                changed = True

        for c in sorted(g.nodes):
            target = next((d for d in sorted(g.neighbors(c)) if scopes[c] <= scopes[d]), None)
            if target is None:
                continue
            for other in list(g.neighbors(c)):
                if other != target:
                    g.add_edge(other, target)
            g.remove_node(c)
            groups[target].extend(groups.pop(c))
            logger.debug("linkage tree: merged %s into %s", c, target)
            changed = True
            break

    survivors = sorted(g.nodes)
    order = [survivors[0]] + [child for _, child in nx.bfs_edges(g, survivors[0], sort_neighbors=sorted)]
    index_of = {cid: k + 1 for k, cid in enumerate(order)}

    variables = {v.id: v for s in host.scopes.values() for v in s.variables}
    linkages = []
    for cid in order:
        scope = make_scope(variables[v] for v in scopes[cid])
        covering = [m for m in groups[cid] if set(scope.ids) <= set(host.scopes[m].ids)]
        host_a = min(covering, key=lambda m: (host.scopes[m].size, m))
        linkages.append(Linkage(index=index_of[cid], vars=scope, host_a=host_a))

    edges = tuple(sorted(
        tuple(sorted((index_of[a], index_of[b]))) for a, b in g.edges
    ))
    return LinkageTree(
        linkages=tuple(linkages),
        edges=edges,
        members={index_of[cid]: tuple(sorted(groups[cid])) for cid in order},
    )


def validate_linkage_cover(lt: LinkageTree, dsepset: DSepset) -> bool:
    """True iff the linkages together contain exactly the variables of I."""
    covered = set()
    for linkage in lt.linkages:
        covered |= set(linkage.vars.ids)
    return covered == set(dsepset.vars.ids)


def assign_hosts(lt: LinkageTree, jt_b: JunctionTree) -> LinkageTree:
    """
    Pick, for every linkage, the peer clique that hosts it: the smallest
    state space among cliques containing the linkage, then smallest id.

    Raises:
        LinkageError: no clique of jt_b contains some linkage
    """
    assigned = []
    for linkage in lt.linkages:
        candidates = [
            c for c in jt_b.cliques.values() if set(linkage.vars.ids) <= set(c.vars.ids)
        ]
        if not candidates:
            raise LinkageError(
                f"peer cannot host linkage L{linkage.index} {list(linkage.vars.ids)}"
            )
        best = min(candidates, key=lambda c: (c.vars.size, c.id))
        assigned.append(linkage._replace(host_b=best.id))
    return lt._replace(linkages=tuple(assigned))


# ============================================================================
# PAYLOAD ACCOUNTING
# ============================================================================

def payload_entries(lt: LinkageTree) -> int:
    """Entries shipped when passing every linkage table once."""
    return sum(linkage.vars.size for linkage in lt.linkages)


def direct_payload_entries(dsepset: DSepset) -> int:
    """Entries shipped when passing B(I) itself."""
    return dsepset.vars.size
