from typing import NamedTuple, Tuple, Optional, Sequence, Dict, List
from enum import Enum
import logging

import numpy as np

from logic.potential_algebra import (
    PotentialTable,
    multiply,
    divide,
    marginalize,
    normalize,
    max_abs_difference,
)
from logic.junction_tree import (
    JunctionTree,
    PassLedger,
    StructureError,
    DEFAULT_ORACLE_LIMIT,
    validate_jt,
    calibrate,
    distribute_evidence,
    distribute_on_subtree,
    distribute_on_chain,
    joint_table,
    marginal,
    replace_belief,
)
from logic.linkage import (
    DSepset,
    HostTree,
    LinkageTree,
    LinkageError,
    build_host_tree,
    build_linkage_tree,
    validate_linkage_cover,
    assign_hosts,
)
from logic.tour import (
    WeightedTree,
    Numbering,
    make_weighted_tree,
    min_weight_open_tour,
    reduce_to_host_tree,
    check_numbering_consistent,
)

logger = logging.getLogger(__name__)

LinkageOrder = Tuple[int, ...]  # linkage indices in absorption order


# ============================================================================
# ERRORS
# ============================================================================

class OrderError(ValueError):
    """Raised when a linkage order is not a consistent permutation."""


# ============================================================================
# DOMAIN TYPES
# ============================================================================

class Variant(Enum):
    """The three UpdateBelief schedules."""
    UB1 = "ub1"  # full DistributeEvidence after every absorb
    UB2 = "ub2"  # DistributeEvidenceOnHostTree between absorbs
    UB3 = "ub3"  # DistributeEvidenceOnChain to the next host between absorbs


class CostReport(NamedTuple):
    """
    Counters of one variant run. Coordination passes are those between the
    first and the last absorb; the closing full distribution is reported as
    finalization.
    """
    variant: str
    order: LinkageOrder
    coordination_passes: int
    finalization_passes: int
    payload_entries: int
    weighted_cost: float


class PairSession:
    """
    One T^a-absorbs-from-T^b interaction.

    jt_b is never reassigned; jt_a evolves with each variant run and
    prior_a keeps the calibrated starting point for reset() and the oracle.
    """

    def __init__(
            self,
            jt_a: JunctionTree,
            jt_b: JunctionTree,
            dsepset: DSepset,
            host_tree: HostTree,
            linkage_tree: LinkageTree,
            cost_model: str = "unit",
            oracle_limit: int = DEFAULT_ORACLE_LIMIT,
    ):
        self.prior_a = jt_a
        self.jt_a = jt_a
        self.jt_b = jt_b
        self.dsepset = dsepset
        self.host_tree = host_tree
        self.linkage_tree = linkage_tree
        self.cost_model = cost_model
        self.oracle_limit = oracle_limit
        self.last_variant: Optional[Variant] = None
        self.last_order: LinkageOrder = ()
        self._zero_counters()

    def _zero_counters(self) -> None:
        self.coordination = PassLedger(self.cost_model)
        self.finalization = PassLedger(self.cost_model)
        self.payload = 0

    def reset(self) -> None:
        """Back to the calibrated prior T^a with zeroed counters."""
        self.jt_a = self.prior_a
        self.last_variant = None
        self.last_order = ()
        self._zero_counters()

    @property
    def m(self) -> int:
        return len(self.linkage_tree.linkages)

    def host_a(self, index: int) -> str:
        return self.linkage_tree.linkage(index).host_a


# ============================================================================
# SESSION SETUP
# ============================================================================

def open_session(
        jt_a: JunctionTree,
        jt_b: JunctionTree,
        dsepset: DSepset,
        cost_model: str = "unit",
        oracle_limit: int = DEFAULT_ORACLE_LIMIT,
) -> PairSession:
    """
    Calibrate both trees, derive T^a's host and linkage trees relative to
    T^b, assign peer hosts and validate the cover.

    Raises:
        StructureError: either tree is structurally invalid
        LinkageError: invalid cover or a linkage T^b cannot host
    """
    for name, jt in (("jt_a", jt_a), ("jt_b", jt_b)):
        report = validate_jt(jt)
        if not report.valid:
            raise StructureError(f"{name}: " + "; ".join(report.violations))

    absent = [v for v in dsepset.vars.ids if v not in jt_b.scope]
    if absent:
        raise LinkageError(f"d-sepset variables {absent} absent from jt_b")

    jt_a = calibrate(jt_a)
    jt_b = calibrate(jt_b)

    host = build_host_tree(jt_a, dsepset)
    lt = build_linkage_tree(host, dsepset)
    if not validate_linkage_cover(lt, dsepset):
        covered = sorted({v for l in lt.linkages for v in l.vars.ids})
        raise LinkageError(
            f"linkage cover violation: linkages cover {covered}, "
            f"d-sepset is {list(dsepset.vars.ids)}"
        )
    lt = assign_hosts(lt, jt_b)

    logger.info(
        "session opened: %d linkages over %d host cliques (of %d)",
        len(lt.linkages), len(host.cliques), len(jt_a.cliques),
    )
    return PairSession(jt_a, jt_b, dsepset, host, lt, cost_model, oracle_limit)


# ============================================================================
# LINKAGE ORDERS
# ============================================================================

def linkage_tree_as_weighted(lt: LinkageTree) -> WeightedTree:
    """Unit-weight tree over nodes "L1".."Lm"."""
    return make_weighted_tree(
        nodes=[f"L{i}" for i in lt.indices],
        edges=[(f"L{a}", f"L{b}", 1.0) for a, b in lt.edges],
    )


def check_order(lt: LinkageTree, order: Sequence[int]) -> LinkageOrder:
    """
    Raises:
        OrderError: order is not a permutation of the linkage indices or
            is inconsistent with the linkage tree
    """
    order = tuple(int(i) for i in order)
    if sorted(order) != sorted(lt.indices):
        raise OrderError(f"order {list(order)} is not a permutation of linkages {list(lt.indices)}")
    tree = linkage_tree_as_weighted(lt)
    if not check_numbering_consistent(tree, Numbering(tuple(f"L{i}" for i in order))):
        raise OrderError(f"order {list(order)} is inconsistent with the linkage tree")
    return order


def optimal_linkage_order(session: PairSession, cost_model: Optional[str] = None) -> LinkageOrder:
    """
    Linkage order from the minimum-weight open tour of the weighted host
    tree: first visits of the tour, each clique standing for the linkage it
    was merged into.
    """
    lt = session.linkage_tree
    hosts = {l.host_a for l in lt.linkages}
    tree = reduce_to_host_tree(session.host_tree, hosts, cost_model or session.cost_model)

    if len(tree.nodes) == 1:
        walk: Tuple[str, ...] = tree.nodes
    else:
        walk = min_weight_open_tour(tree)[0].walk

    order: List[int] = []
    for clique_id in walk:
        index = lt.group_of(clique_id)
        if index is not None and index not in order:
            order.append(index)
    return check_order(lt, order)


def random_consistent_order(lt: LinkageTree, seed: int) -> LinkageOrder:
    """Uniformly grown order: start anywhere, then any frontier linkage."""
    rng = np.random.default_rng(seed)
    adjacency: Dict[int, List[int]] = {i: [] for i in lt.indices}
    for a, b in lt.edges:
        adjacency[a].append(b)
        adjacency[b].append(a)

    order = [int(rng.choice(lt.indices))]
    frontier = sorted(set(adjacency[order[0]]))
    while frontier:
        pick = frontier.pop(int(rng.integers(len(frontier))))
        order.append(pick)
        frontier = sorted((set(frontier) | set(adjacency[pick])) - set(order))
    return tuple(order)


# ============================================================================
# ABSORPTION AND VARIANTS
# ============================================================================

def absorb_through_linkage(session: PairSession, index: int) -> PairSession:
    """
    U_i^a absorbs from U_i^b through L_i:

        belief(U_i^a) *= B(L_i^b) / B(L_i^a)
    """
    linkage = session.linkage_tree.linkage(index)
    peer = marginalize(session.jt_b.belief[linkage.host_b], linkage.vars)
    local = marginalize(session.jt_a.belief[linkage.host_a], linkage.vars)
    updated = multiply(session.jt_a.belief[linkage.host_a], divide(peer, local))

    session.jt_a = replace_belief(session.jt_a, linkage.host_a, updated)
    session.payload += linkage.vars.size
    logger.debug("absorbed L%d at %s from %s", index, linkage.host_a, linkage.host_b)
    return session


def _begin(session: PairSession, variant: Variant, order: LinkageOrder) -> None:
    session._zero_counters()
    session.last_variant = variant
    session.last_order = order


def _finish(session: PairSession) -> Tuple[PairSession, CostReport]:
    report = cost_report(session)
    logger.info(
        "%s order %s: coordination %d, finalization %d, payload %d",
        report.variant, list(report.order), report.coordination_passes,
        report.finalization_passes, report.payload_entries,
    )
    return session, report


def update_belief(session: PairSession, order: Optional[Sequence[int]] = None) -> Tuple[PairSession, CostReport]:
    """Absorb through each linkage, each followed by a full distribution."""
    order = check_order(session.linkage_tree, order or session.linkage_tree.indices)
    _begin(session, Variant.UB1, order)

    for k, index in enumerate(order):
        absorb_through_linkage(session, index)
        ledger = session.coordination if k < len(order) - 1 else session.finalization
        session.jt_a = distribute_evidence(session.jt_a, session.host_a(index), ledger)
    return _finish(session)


def update_belief2(session: PairSession, order: Optional[Sequence[int]] = None) -> Tuple[PairSession, CostReport]:
    """Distribution between absorbs stops at the leaves of the host tree."""
    order = check_order(session.linkage_tree, order or session.linkage_tree.indices)
    _begin(session, Variant.UB2, order)

    for k, index in enumerate(order):
        absorb_through_linkage(session, index)
        root = session.host_a(index)
        if k < len(order) - 1:
            session.jt_a = distribute_on_subtree(
                session.jt_a, root, session.host_tree.cliques, session.coordination
            )
        else:
            session.jt_a = distribute_evidence(session.jt_a, root, session.finalization)
    return _finish(session)


def update_belief3(session: PairSession, order: Optional[Sequence[int]] = None) -> Tuple[PairSession, CostReport]:
    """
    Between absorbs, propagate only along the host-tree path to the next
    linkage host. Defaults to the optimal order.
    """
    if order is None:
        order = optimal_linkage_order(session)
    order = check_order(session.linkage_tree, order)
    _begin(session, Variant.UB3, order)

    for k, index in enumerate(order):
        absorb_through_linkage(session, index)
        here = session.host_a(index)
        if k < len(order) - 1:
            chain = session.host_tree.path(here, session.host_a(order[k + 1]))
            session.jt_a = distribute_on_chain(session.jt_a, chain, session.coordination)
        else:
            session.jt_a = distribute_evidence(session.jt_a, here, session.finalization)
    return _finish(session)


_VARIANTS = {
    Variant.UB1: update_belief,
    Variant.UB2: update_belief2,
    Variant.UB3: update_belief3,
}


def run_variant(
        session: PairSession,
        variant: Variant,
        order: Optional[Sequence[int]] = None,
) -> Tuple[PairSession, CostReport]:
    return _VARIANTS[Variant(variant)](session, order)


def cost_report(session: PairSession) -> CostReport:
    if session.last_variant is None:
        raise ValueError("no variant has run on this session")
    return CostReport(
        variant=session.last_variant.value,
        order=session.last_order,
        coordination_passes=session.coordination.passes,
        finalization_passes=session.finalization.passes,
        payload_entries=session.payload,
        weighted_cost=session.coordination.weighted_cost + session.finalization.weighted_cost,
    )


# ============================================================================
# ORACLE
# ============================================================================

def expected_posterior(session: PairSession, limit: Optional[int] = None) -> PotentialTable:
    """
    normalize(B(T^a) * B(I^b) / B(I^a)) computed on brute-force joints of
    the calibrated prior T^a and of T^b.
    """
    limit = limit or session.oracle_limit
    joint_a = joint_table(session.prior_a, limit)
    joint_b = joint_table(session.jt_b, limit)
    belief_ia = marginalize(joint_a, session.dsepset.vars)
    belief_ib = marginalize(joint_b, session.dsepset.vars)
    return normalize(multiply(joint_a, divide(belief_ib, belief_ia)))


def posterior_deviation(session: PairSession, expected: Optional[PotentialTable] = None) -> float:
    """Max abs deviation of the normalized current T^a joint from the oracle."""
    expected = expected if expected is not None else expected_posterior(session)
    actual = normalize(joint_table(session.jt_a, session.oracle_limit))
    return max_abs_difference(actual, expected)


def posterior_marginals(session: PairSession) -> Dict[str, Tuple[float, ...]]:
    """Normalized single-variable marginals of I read from T^a."""
    return {
        var_id: marginal(session.jt_a, [var_id]).flat()
        for var_id in session.dsepset.vars.ids
    }
