from typing import NamedTuple, Tuple, Dict, Iterable, Optional, List, Sequence, Mapping
import logging

import networkx as nx

from logic.potential_algebra import (
    PotentialTable,
    Scope,
    make_scope,
    multiply,
    divide,
    marginalize,
    normalize,
    ones,
    max_abs_difference,
)

logger = logging.getLogger(__name__)

DEFAULT_ORACLE_LIMIT = 2 ** 20

Edge = Tuple[str, str]  # clique ids, sorted


# ============================================================================
# ERRORS
# ============================================================================

class StructureError(ValueError):
    """Raised when a junction tree (or a walk over it) is malformed."""


class OracleLimitError(ValueError):
    """Raised when the brute-force joint would exceed the configured size."""


# ============================================================================
# DOMAIN TYPES
# ============================================================================

class Clique(NamedTuple):
    """A named cluster of variables."""
    id: str
    vars: Scope


class JunctionTree(NamedTuple):
    """
    Clique tree with Hugin-style stored sepset beliefs.

    Treated as an immutable value: every propagation primitive returns a
    new JunctionTree and leaves its input untouched.
    """
    cliques: Dict[str, Clique]
    edges: Tuple[Edge, ...]
    belief: Dict[str, PotentialTable]
    sepset_belief: Dict[Edge, PotentialTable]

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(sorted(self.cliques))
        g.add_edges_from(self.edges)
        return g

    def sepset(self, a: str, b: str) -> Scope:
        return self.cliques[a].vars.intersection(self.cliques[b].vars)

    def neighbors(self, clique_id: str) -> List[str]:
        out = [b if a == clique_id else a for a, b in self.edges if clique_id in (a, b)]
        return sorted(out)

    @property
    def scope(self) -> Scope:
        variables = []
        for clique in self.cliques.values():
            variables.extend(clique.vars.variables)
        return make_scope(variables, merge=True)


class StructureReport(NamedTuple):
    """Outcome of validate_jt(); violations are human-readable."""
    valid: bool
    violations: Tuple[str, ...]


class ConsistencyReport(NamedTuple):
    """Largest normalized sepset-marginal gap over all edges, and where it occurs."""
    consistent: bool
    worst_edge: Optional[Edge]
    max_discrepancy: float


class PassRecord(NamedTuple):
    """One inter-clique belief propagation."""
    source: str
    target: str
    weight: float


class PassLedger:
    """
    Running count of inter-clique passes.

    cost_model "unit" weighs every pass 1; "statespace" weighs it by the
    state-space size of the receiving clique plus that of the sepset.
    """

    def __init__(self, cost_model: str = "unit"):
        if cost_model not in ("unit", "statespace"):
            raise ValueError(f"unknown cost model {cost_model!r}")
        self.cost_model = cost_model
        self.passes = 0
        self.weighted_cost = 0.0
        self.records: List[PassRecord] = []

    def add(self, record: PassRecord) -> None:
        self.passes += 1
        self.weighted_cost += record.weight
        self.records.append(record)


def edge_key(a: str, b: str) -> Edge:
    return (a, b) if a <= b else (b, a)


def pass_weight(jt: JunctionTree, source: str, target: str, cost_model: str = "unit") -> float:
    if cost_model == "unit":
        return 1.0
    return float(jt.cliques[target].vars.size + jt.sepset(source, target).size)


# ============================================================================
# CONSTRUCTION AND VALIDATION
# ============================================================================

def make_junction_tree(
        cliques: Iterable[Clique],
        edges: Iterable[Tuple[str, str]],
        potentials: Optional[Mapping[str, PotentialTable]] = None,
) -> JunctionTree:
    """
    Assemble a junction tree. Clique beliefs start as the given potentials
    (all-ones where absent) and every sepset belief starts as all-ones.

    Tree-ness and running intersection are reported by validate_jt(), not
    enforced here.
    """
    by_id: Dict[str, Clique] = {}
    for clique in cliques:
        if clique.id in by_id:
            raise StructureError(f"duplicate clique id {clique.id}")
        if not clique.vars.variables:
            raise StructureError(f"clique {clique.id} has no variables")
        by_id[clique.id] = clique
    if not by_id:
        raise StructureError("a junction tree needs at least one clique")

    keys: List[Edge] = []
    for a, b in edges:
        for end in (a, b):
            if end not in by_id:
                raise StructureError(f"edge ({a}, {b}) references unknown clique {end}")
        if a == b:
            raise StructureError(f"self-loop on clique {a}")
        key = edge_key(a, b)
        if key in keys:
            raise StructureError(f"duplicate edge ({a}, {b})")
        keys.append(key)

    potentials = dict(potentials or {})
    belief: Dict[str, PotentialTable] = {}
    for cid in sorted(by_id):
        table = potentials.pop(cid, None)
        if table is None:
            table = ones(by_id[cid].vars)
        elif table.scope.ids != by_id[cid].vars.ids:
            raise StructureError(
                f"potential scope {list(table.scope.ids)} does not match clique "
                f"{cid} {list(by_id[cid].vars.ids)}"
            )
        belief[cid] = table
    if potentials:
        raise StructureError(f"potentials given for unknown cliques {sorted(potentials)}")

    sepset_belief = {
        key: ones(by_id[key[0]].vars.intersection(by_id[key[1]].vars))
        for key in keys
    }
    return JunctionTree(
        cliques={cid: by_id[cid] for cid in sorted(by_id)},
        edges=tuple(sorted(keys)),
        belief=belief,
        sepset_belief=sepset_belief,
    )


def validate_jt(jt: JunctionTree) -> StructureReport:
    """
    Check tree-ness, running intersection and table scopes. Every violation
    is listed; nothing is raised.
    """
    violations: List[str] = []
    g = jt.graph()

    if not nx.is_tree(g):
        if not nx.is_connected(g):
            violations.append("not a tree: clique graph is disconnected")
        else:
            violations.append("not a tree: clique graph contains a cycle")
    else:
        for var_id in jt.scope.ids:
            holders = [cid for cid, c in jt.cliques.items() if var_id in c.vars]
            if nx.is_connected(g.subgraph(holders)):
                continue
            # report the first offending pair
            for i, a in enumerate(holders):
                found = False
                for b in holders[i + 1:]:
                    path = nx.shortest_path(g, a, b)
                    missing = [c for c in path if var_id not in jt.cliques[c].vars]
                    if missing:
                        violations.append(
                            f"running intersection violation: variable {var_id} absent "
                            f"from clique {missing[0]} on path {a}-{b}"
                        )
                        found = True
                        break
                if found:
                    break

    for cid, clique in jt.cliques.items():
        table = jt.belief.get(cid)
        if table is None or table.scope.ids != clique.vars.ids:
            violations.append(f"belief scope mismatch at clique {cid}")
    for a, b in jt.edges:
        table = jt.sepset_belief.get((a, b))
        if table is None or table.scope.ids != jt.sepset(a, b).ids:
            violations.append(f"sepset belief scope mismatch at edge {a}-{b}")

    return StructureReport(valid=not violations, violations=tuple(violations))


def _require_valid(jt: JunctionTree) -> None:
    report = validate_jt(jt)
    if not report.valid:
        raise StructureError("; ".join(report.violations))


def _require_clique(jt: JunctionTree, clique_id: str) -> None:
    if clique_id not in jt.cliques:
        raise StructureError(f"unknown clique {clique_id}")


# ============================================================================
# MESSAGE PASSING
# ============================================================================

def replace_belief(jt: JunctionTree, clique_id: str, table: PotentialTable) -> JunctionTree:
    _require_clique(jt, clique_id)
    if table.scope.ids != jt.cliques[clique_id].vars.ids:
        raise StructureError(f"belief scope does not match clique {clique_id}")
    return jt._replace(belief={**jt.belief, clique_id: table})


def pass_message(
        jt: JunctionTree,
        source: str,
        target: str,
        ledger: Optional[PassLedger] = None,
) -> Tuple[JunctionTree, PassRecord]:
    """
    Hugin absorption of target from source through their sepset:

        new_sep = marginal of belief(source) on the sepset
        belief(target) *= new_sep / old_sep
    """
    key = edge_key(source, target)
    if key not in jt.sepset_belief:
        raise StructureError(f"cliques {source} and {target} are not adjacent")

    new_sep = marginalize(jt.belief[source], jt.sepset(source, target))
    ratio = divide(new_sep, jt.sepset_belief[key])
    updated = multiply(jt.belief[target], ratio)

    record = PassRecord(
        source, target, pass_weight(jt, source, target, ledger.cost_model if ledger else "unit")
    )
    if ledger is not None:
        ledger.add(record)
    logger.debug("pass %s -> %s (weight %s)", source, target, record.weight)

    return jt._replace(
        belief={**jt.belief, target: updated},
        sepset_belief={**jt.sepset_belief, key: new_sep},
    ), record


def _bfs_edges(g: nx.Graph, root: str) -> List[Tuple[str, str]]:
    return list(nx.bfs_edges(g, root, sort_neighbors=sorted))


def collect_evidence(jt: JunctionTree, root: str, ledger: Optional[PassLedger] = None) -> JunctionTree:
    """Inward pass toward root, leaves first."""
    _require_clique(jt, root)
    for parent, child in reversed(_bfs_edges(jt.graph(), root)):
        jt, _ = pass_message(jt, child, parent, ledger)
    return jt


def distribute_evidence(jt: JunctionTree, root: str, ledger: Optional[PassLedger] = None) -> JunctionTree:
    """Outward pass from root over every edge: exactly n - 1 passes."""
    _require_clique(jt, root)
    for parent, child in _bfs_edges(jt.graph(), root):
        jt, _ = pass_message(jt, parent, child, ledger)
    return jt


def distribute_on_subtree(
        jt: JunctionTree,
        root: str,
        allowed: Iterable[str],
        ledger: Optional[PassLedger] = None,
) -> JunctionTree:
    """
    Outward pass from root restricted to the subtree induced by allowed.
    Terminates at the leaves of that subtree: |allowed| - 1 passes.
    """
    allowed = set(allowed)
    unknown = allowed - set(jt.cliques)
    if unknown:
        raise StructureError(f"unknown cliques {sorted(unknown)}")
    if root not in allowed:
        raise StructureError(f"root {root} is outside the allowed subtree")
    sub = jt.graph().subgraph(allowed)
    if not nx.is_connected(sub):
        raise StructureError(f"allowed cliques {sorted(allowed)} do not induce a connected subtree")

    for parent, child in _bfs_edges(sub, root):
        jt, _ = pass_message(jt, parent, child, ledger)
    return jt


def distribute_on_chain(
        jt: JunctionTree,
        path: Sequence[str],
        ledger: Optional[PassLedger] = None,
) -> JunctionTree:
    """Pass along consecutive pairs of a simple path: len(path) - 1 passes."""
    if not path:
        raise StructureError("empty chain")
    if len(set(path)) != len(path):
        raise StructureError(f"chain {list(path)} repeats a clique")
    for cid in path:
        _require_clique(jt, cid)
    for source, target in zip(path, path[1:]):
        jt, _ = pass_message(jt, source, target, ledger)
    return jt


def calibrate(jt: JunctionTree, ledger: Optional[PassLedger] = None) -> JunctionTree:
    """Collect to, then distribute from, the smallest clique id."""
    _require_valid(jt)
    root = min(jt.cliques)
    jt = collect_evidence(jt, root, ledger)
    return distribute_evidence(jt, root, ledger)


# ============================================================================
# ORACLES AND CHECKS
# ============================================================================

def joint_table(jt: JunctionTree, limit: int = DEFAULT_ORACLE_LIMIT) -> PotentialTable:
    """
    Brute-force joint: product of clique beliefs over product of sepset
    beliefs (0/0 = 0).

    Raises:
        OracleLimitError: the joint would exceed `limit` cells
    """
    scope = jt.scope
    if scope.size > limit:
        raise OracleLimitError(
            f"joint over {len(scope.variables)} variables has {scope.size} cells, "
            f"limit is {limit}"
        )

    numerator = ones(scope)
    for table in jt.belief.values():
        numerator = multiply(numerator, table)

    denominator = ones(Scope(()))
    for table in jt.sepset_belief.values():
        denominator = multiply(denominator, table)

    return divide(numerator, denominator)


def consistency_check(jt: JunctionTree, tol: float = 1e-9) -> ConsistencyReport:
    """
    Compare, for every edge, the normalized marginals of both endpoints on
    their sepset.
    """
    worst_edge: Optional[Edge] = None
    worst = 0.0
    for a, b in jt.edges:
        sep = jt.sepset(a, b)
        left = marginalize(jt.belief[a], sep)
        right = marginalize(jt.belief[b], sep)
        if left.total > 0 and right.total > 0:
            gap = max_abs_difference(normalize(left), normalize(right))
        elif left.total == 0 and right.total == 0:
            gap = 0.0
        else:
            gap = 1.0
        if gap > worst:
            worst, worst_edge = gap, (a, b)
    return ConsistencyReport(consistent=worst <= tol, worst_edge=worst_edge, max_discrepancy=worst)


def marginal(jt: JunctionTree, var_ids: Iterable[str]) -> PotentialTable:
    """Normalized marginal read off the first clique containing all var_ids."""
    var_ids = tuple(var_ids)
    for cid, clique in jt.cliques.items():
        if set(var_ids) <= set(clique.vars.ids):
            return normalize(marginalize(jt.belief[cid], var_ids))
    raise StructureError(f"no clique contains all of {sorted(var_ids)}")
