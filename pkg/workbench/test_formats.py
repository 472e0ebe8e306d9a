import json

import pytest

from logic.junction_tree import validate_jt
from workbench import fixtures
from workbench.formats import (
    FormatError,
    pair_from_text,
    pair_to_text,
    tree_from_text,
    tree_to_text,
    load_pair,
    save_pair,
    load_tree,
    save_tree,
)


def test_pair2l_round_trips_bit_identically(tmp_path):
    path = tmp_path / "PAIR2L.pair"
    save_pair(fixtures.pair2l(), str(path))
    first = path.read_text()
    save_pair(load_pair(str(path)), str(path))
    assert path.read_text() == first


def test_tree_round_trips(tmp_path):
    path = tmp_path / "FIG7.tree"
    save_tree(fixtures.FIG7_TREE, str(path))
    assert load_tree(str(path)) == fixtures.FIG7_TREE
    assert tree_to_text(load_tree(str(path))) == path.read_text()


def test_loaded_pair_is_valid():
    pair = pair_from_text(pair_to_text(fixtures.fig4_pair()))
    assert validate_jt(pair.jt_a).valid
    assert validate_jt(pair.jt_b).valid
    assert pair.dsepset.vars.ids == ("o3", "o4", "o5", "s12", "s13", "s14", "s25")


def _pair_doc():
    return json.loads(pair_to_text(fixtures.pair2l()))


def test_undefined_variable_is_named():
    doc = _pair_doc()
    doc["jt_a"]["cliques"][0]["vars"].append("Z")
    with pytest.raises(FormatError, match=r"jt_a\.cliques\[0\].*undefined variables \['Z'\]"):
        pair_from_text(json.dumps(doc))


def test_wrong_potential_length_is_named():
    doc = _pair_doc()
    doc["jt_b"]["cliques"][1]["potential"].pop()
    with pytest.raises(FormatError, match=r"jt_b\.cliques\[1\].*length mismatch"):
        pair_from_text(json.dumps(doc))


def test_missing_field_is_named():
    doc = _pair_doc()
    del doc["dsepset"]
    with pytest.raises(FormatError, match="missing field 'dsepset'"):
        pair_from_text(json.dumps(doc))


def test_running_intersection_violation_is_reported():
    doc = _pair_doc()
    doc["jt_a"]["cliques"][1]["vars"] = ["D", "E"]
    doc["jt_a"]["cliques"][1]["potential"] = [1.0, 1.0, 1.0, 1.0]
    doc["jt_a"]["cliques"].append({"id": "C3", "vars": ["C", "D"], "potential": [1.0] * 4})
    doc["jt_a"]["edges"].append(["C2", "C3"])
    with pytest.raises(FormatError, match="variable C absent from clique C2 on path C1-C3"):
        pair_from_text(json.dumps(doc))


def test_parse_error_has_line_context():
    with pytest.raises(FormatError, match="line 2"):
        pair_from_text('{\n  "variables": [,]\n}', source="bad.pair")


def test_tree_file_rejects_bad_weight():
    text = json.dumps({"nodes": [{"id": "a"}, {"id": "b"}], "edges": [{"u": "a", "v": "b", "weight": 0}]})
    with pytest.raises(FormatError, match="weight"):
        tree_from_text(text)


def test_tree_file_host_flags():
    text = json.dumps({
        "nodes": [{"id": "a", "host": True}, {"id": "b", "host": False}],
        "edges": [{"u": "a", "v": "b", "weight": 2}],
    })
    tree = tree_from_text(text)
    assert tree.hosts == frozenset({"a"})
    assert tree.edges[0].weight == 2.0


def test_missing_file(tmp_path):
    with pytest.raises(FormatError):
        load_pair(str(tmp_path / "absent.pair"))
