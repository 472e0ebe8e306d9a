import pytest
from hypothesis import given, settings, strategies as st

from logic.potential_algebra import Variable, make_scope
from logic.junction_tree import Clique, make_junction_tree
from logic.linkage import (
    LinkageError,
    make_dsepset,
    build_host_tree,
    build_linkage_tree,
    validate_linkage_cover,
    assign_hosts,
    payload_entries,
    direct_payload_entries,
)
from workbench import fixtures
from workbench.generators import gen_pair, gen_pair_params

V = {name: Variable(name, 2) for name in "ABCDEFX"}


def tree(layout, edges):
    return make_junction_tree(
        [Clique(cid, make_scope(V[n] for n in names)) for cid, names in layout.items()], edges
    )


def dsepset(names):
    return make_dsepset(V[n] for n in names)


def test_host_tree_prunes_redundant_leaves():
    jt = tree({"C1": "AB", "C2": "BC", "C3": "CD", "C4": "CE"},
              [("C1", "C2"), ("C2", "C3"), ("C2", "C4")])
    host = build_host_tree(jt, dsepset("BC"))
    assert host.cliques == ("C2",)
    assert host.edges == ()


def test_host_tree_keeps_leaves_carrying_private_shared_variables(pair2l):
    pair = pair2l
    host = build_host_tree(pair.jt_a, pair.dsepset)
    assert host.cliques == ("C1", "C2")
    assert host.path("C1", "C2") == ["C1", "C2"]


def test_host_tree_requires_every_shared_variable():
    jt = tree({"C1": "AB"}, [])
    with pytest.raises(LinkageError, match="absent from junction tree"):
        build_host_tree(jt, dsepset("BF"))


def test_linkage_tree_drops_private_variables(pair2l):
    pair = pair2l
    lt = build_linkage_tree(build_host_tree(pair.jt_a, pair.dsepset), pair.dsepset)
    assert [l.vars.ids for l in lt.linkages] == [("B", "C"), ("C", "D")]
    assert [l.host_a for l in lt.linkages] == ["C1", "C2"]
    assert lt.edges == ((1, 2),)
    assert validate_linkage_cover(lt, pair.dsepset)


def test_linkage_tree_merges_contained_clique_into_neighbor():
    jt = tree({"C1": "ABC", "C2": "BCX", "C3": "CD"}, [("C1", "C2"), ("C2", "C3")])
    shared = dsepset("ABCD")
    lt = build_linkage_tree(build_host_tree(jt, shared), shared)
    assert [l.vars.ids for l in lt.linkages] == [("A", "B", "C"), ("C", "D")]
    assert lt.members == {1: ("C1", "C2"), 2: ("C3",)}
    assert lt.group_of("C2") == 1
    assert lt.group_of("C9") is None
    assert lt.edges == ((1, 2),)
    assert lt.linkage(1).host_a == "C1"


def test_assign_hosts_picks_smallest_covering_peer(pair2l):
    pair = pair2l
    lt = build_linkage_tree(build_host_tree(pair.jt_a, pair.dsepset), pair.dsepset)
    lt = assign_hosts(lt, pair.jt_b)
    assert [l.host_b for l in lt.linkages] == ["D1", "D2"]


def test_assign_hosts_reports_hostless_linkage():
    pair = fixtures.pair2l()
    lt = build_linkage_tree(build_host_tree(pair.jt_a, pair.dsepset), pair.dsepset)
    peer = tree({"D1": "BF", "D2": "CD"}, [("D1", "D2")])
    with pytest.raises(LinkageError, match="peer cannot host linkage L1"):
        assign_hosts(lt, peer)


def test_empty_dsepset_rejected():
    with pytest.raises(LinkageError):
        make_dsepset([])


def test_fig4_linkages_are_hosted_in_order(fig4_pair):
    pair = fig4_pair
    lt = build_linkage_tree(build_host_tree(pair.jt_a, pair.dsepset), pair.dsepset)
    assert [l.host_a for l in lt.linkages] == ["C1", "C2", "C3", "C4", "C5"]
    assert lt.edges == ((1, 2), (1, 3), (1, 4), (2, 5))


def test_payload_of_three_overlapping_linkages():
    pair = fixtures.payload_pair()
    lt = build_linkage_tree(build_host_tree(pair.jt_a, pair.dsepset), pair.dsepset)
    assert len(lt.linkages) == 3
    assert payload_entries(lt) == 96
    assert direct_payload_entries(pair.dsepset) == 1024


@settings(max_examples=100, deadline=None)
@given(
    st.integers(min_value=1, max_value=8),
    st.integers(min_value=0, max_value=3),
    st.integers(min_value=0, max_value=10_000),
)
def test_generated_pairs_have_valid_cover(n_shared, n_private, seed):
    pair = gen_pair(n_shared, n_private, n_private, seed)
    lt = build_linkage_tree(build_host_tree(pair.jt_a, pair.dsepset), pair.dsepset)
    assert validate_linkage_cover(lt, pair.dsepset)
    assert 1 <= len(lt.linkages) <= 4
    assign_hosts(lt, pair.jt_b)
    if n_shared == 1:
        assert len(lt.linkages) == 1


def test_linkage_index_is_bounded(pair2l):
    lt = build_linkage_tree(build_host_tree(pair2l.jt_a, pair2l.dsepset), pair2l.dsepset)
    assert lt.linkage(2).vars.ids == ("C", "D")
    for index in (0, -1, 3):
        with pytest.raises(LinkageError, match="out of range"):
            lt.linkage(index)


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 31))
def test_generated_host_and_linkage_trees_are_minimal(seed):
    pair = gen_pair(*gen_pair_params(seed), seed=seed)
    shared = set(pair.dsepset.vars.ids)
    host = build_host_tree(pair.jt_a, pair.dsepset)
    g = host.graph()

    for leaf in (n for n in g.nodes if g.degree(n) == 1):
        part = shared & set(host.scopes[leaf].ids)
        assert part
        assert not any(part <= set(host.scopes[o].ids) for o in host.cliques if o != leaf)

    lt = build_linkage_tree(host, pair.dsepset)
    scopes = [set(l.vars.ids) for l in lt.linkages]
    for i, a in enumerate(scopes):
        for j, b in enumerate(scopes):
            assert i == j or not a <= b
    assert payload_entries(lt) <= direct_payload_entries(pair.dsepset)
