import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from logic.potential_algebra import (
    Variable,
    make_scope,
    make_table,
    multiply,
    marginalize,
    normalize,
    max_abs_difference,
)
from logic.junction_tree import (
    Clique,
    PassLedger,
    StructureError,
    OracleLimitError,
    make_junction_tree,
    replace_belief,
    validate_jt,
    pass_message,
    collect_evidence,
    distribute_evidence,
    distribute_on_subtree,
    distribute_on_chain,
    calibrate,
    joint_table,
    consistency_check,
    marginal,
)
from workbench.generators import gen_pair

V = {name: Variable(name, 2) for name in "ABCDE"}


def clique(cid, names):
    return Clique(cid, make_scope(V[n] for n in names))


def chain_tree(seed=0):
    """C1{A,B} - C2{B,C} - C3{C,D}, with C4{C,E} hanging off C2."""
    rng = np.random.default_rng(seed)
    cliques = [clique("C1", "AB"), clique("C2", "BC"), clique("C3", "CD"), clique("C4", "CE")]
    potentials = {c.id: make_table(c.vars, rng.uniform(0.1, 1.0, size=4)) for c in cliques}
    return make_junction_tree(cliques, [("C1", "C2"), ("C2", "C3"), ("C2", "C4")], potentials)


def test_fresh_tree_starts_with_unit_sepsets():
    jt = chain_tree()
    assert jt.edges == (("C1", "C2"), ("C2", "C3"), ("C2", "C4"))
    assert jt.sepset_belief[("C1", "C2")].flat() == (1.0, 1.0)
    assert validate_jt(jt).valid


@pytest.mark.parametrize("cliques, edges, message", [
    ([], [], "at least one clique"),
    ([clique("C1", "AB"), clique("C1", "BC")], [], "duplicate clique"),
    ([clique("C1", "AB")], [("C1", "C9")], "unknown clique"),
    ([clique("C1", "AB")], [("C1", "C1")], "self-loop"),
    ([clique("C1", "AB"), clique("C2", "BC")], [("C1", "C2"), ("C2", "C1")], "duplicate edge"),
])
def test_make_junction_tree_rejects(cliques, edges, message):
    with pytest.raises(StructureError, match=message):
        make_junction_tree(cliques, edges)


def test_potential_scope_must_match_clique():
    with pytest.raises(StructureError, match="does not match"):
        make_junction_tree([clique("C1", "AB")], [], {"C1": make_table([V["A"]], [1, 1])})


def test_validate_reports_running_intersection():
    jt = make_junction_tree(
        [clique("C1", "AB"), clique("C2", "CD"), clique("C3", "BC")],
        [("C1", "C2"), ("C2", "C3")],
    )
    report = validate_jt(jt)
    assert not report.valid
    assert report.violations == (
        "running intersection violation: variable B absent from clique C2 on path C1-C3",
    )


def test_validate_reports_disconnected_and_cycles():
    disconnected = make_junction_tree([clique("C1", "AB"), clique("C2", "BC")], [])
    assert "disconnected" in validate_jt(disconnected).violations[0]
    cyclic = make_junction_tree(
        [clique("C1", "AB"), clique("C2", "AB"), clique("C3", "AB")],
        [("C1", "C2"), ("C2", "C3"), ("C1", "C3")],
    )
    assert "cycle" in validate_jt(cyclic).violations[0]


def test_pass_message_requires_adjacency():
    with pytest.raises(StructureError, match="not adjacent"):
        pass_message(chain_tree(), "C1", "C3")


def test_pass_message_counts_and_is_pure():
    jt = chain_tree()
    ledger = PassLedger()
    updated, record = pass_message(jt, "C1", "C2", ledger)
    assert (record.source, record.target, record.weight) == ("C1", "C2", 1.0)
    assert ledger.passes == 1
    assert updated.belief["C2"] is not jt.belief["C2"]
    assert jt.sepset_belief[("C1", "C2")].flat() == (1.0, 1.0)


def test_statespace_pass_weight():
    ledger = PassLedger("statespace")
    pass_message(chain_tree(), "C1", "C2", ledger)
    # target {B,C} has 4 states, sepset {B} has 2
    assert ledger.weighted_cost == 6.0


def test_pass_counts_per_primitive():
    jt = chain_tree()
    for run, expected in [
        (lambda l: collect_evidence(jt, "C3", l), 3),
        (lambda l: distribute_evidence(jt, "C3", l), 3),
        (lambda l: distribute_on_subtree(jt, "C1", ["C1", "C2", "C3"], l), 2),
        (lambda l: distribute_on_chain(jt, ["C1", "C2", "C3"], l), 2),
        (lambda l: distribute_on_chain(jt, ["C4"], l), 0),
    ]:
        ledger = PassLedger()
        run(ledger)
        assert ledger.passes == expected


def test_subtree_and_chain_errors():
    jt = chain_tree()
    with pytest.raises(StructureError, match="connected"):
        distribute_on_subtree(jt, "C1", ["C1", "C3"])
    with pytest.raises(StructureError, match="outside"):
        distribute_on_subtree(jt, "C4", ["C1", "C2"])
    with pytest.raises(StructureError, match="not adjacent"):
        distribute_on_chain(jt, ["C1", "C3"])
    with pytest.raises(StructureError, match="repeats"):
        distribute_on_chain(jt, ["C1", "C2", "C1"])


def test_calibration_makes_tree_consistent_and_keeps_joint():
    jt = chain_tree(seed=3)
    before = joint_table(jt)
    assert not consistency_check(jt).consistent

    calibrated = calibrate(jt)
    report = consistency_check(calibrated)
    assert report.consistent
    assert report.max_discrepancy < 1e-12
    assert max_abs_difference(normalize(joint_table(calibrated)), normalize(before)) < 1e-12


def same_beliefs(x, y, tol=1e-12):
    return all(
        max_abs_difference(x.belief[cid], y.belief[cid]) < tol for cid in x.cliques
    ) and all(
        max_abs_difference(x.sepset_belief[key], y.sepset_belief[key]) < tol for key in x.edges
    )


def test_repeated_pass_changes_nothing():
    once, _ = pass_message(chain_tree(seed=2), "C1", "C2")
    twice, _ = pass_message(once, "C1", "C2")
    assert same_beliefs(once, twice)


@pytest.mark.parametrize("root", ["C1", "C2", "C3", "C4"])
def test_distribute_on_consistent_tree_changes_nothing(root):
    calibrated = calibrate(chain_tree(seed=4))
    assert same_beliefs(calibrated, distribute_evidence(calibrated, root))


def test_calibrate_twice_changes_nothing():
    once = calibrate(chain_tree(seed=6))
    assert same_beliefs(once, calibrate(once))


@pytest.mark.parametrize("target", ["C1", "C2", "C3", "C4"])
def test_perturbed_clique_is_located(target):
    calibrated = calibrate(chain_tree(seed=8))
    scope = calibrated.cliques[target].vars
    noise = make_table(scope, np.random.default_rng(8).uniform(0.1, 1.0, size=scope.size))
    perturbed = replace_belief(calibrated, target, multiply(calibrated.belief[target], noise))

    report = consistency_check(perturbed)
    assert not report.consistent
    assert target in report.worst_edge


def test_marginal_reads_calibrated_belief():
    calibrated = calibrate(chain_tree(seed=5))
    expected = marginalize(normalize(joint_table(calibrated)), ["D"])
    assert max_abs_difference(marginal(calibrated, ["D"]), expected) < 1e-12
    with pytest.raises(StructureError):
        marginal(calibrated, ["A", "D"])


def test_joint_table_limit():
    with pytest.raises(OracleLimitError):
        joint_table(chain_tree(), limit=16)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_calibrate_on_generated_trees(seed):
    pair = gen_pair(4, 4, 2, seed)
    calibrated = calibrate(pair.jt_a)
    assert consistency_check(calibrated, 1e-9).consistent
    assert max_abs_difference(
        normalize(joint_table(calibrated)), normalize(joint_table(pair.jt_a))
    ) < 1e-12
