"""
JSON file formats for junction-tree pairs and weighted trees.

Output is canonical: fixed key order, two-space indent, shortest
round-trip float repr, trailing newline. Loading a canonical file and
saving it again reproduces it byte for byte.
"""
from typing import NamedTuple, Any, Dict, List
import json
import logging

from logic.potential_algebra import Variable, TableError, make_scope, make_table
from logic.junction_tree import (
    Clique,
    JunctionTree,
    StructureError,
    make_junction_tree,
    validate_jt,
)
from logic.linkage import DSepset, LinkageError, make_dsepset
from logic.tour import WeightedTree, TourError, make_weighted_tree

logger = logging.getLogger(__name__)


class FormatError(ValueError):
    """Raised when a pair or tree file cannot be parsed or validated."""


class Pair(NamedTuple):
    jt_a: JunctionTree
    jt_b: JunctionTree
    dsepset: DSepset


# ============================================================================
# HELPERS
# ============================================================================

def _parse(text: str, source: str) -> Dict[str, Any]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"{source}: line {e.lineno} column {e.colno}: {e.msg}")
    if not isinstance(doc, dict):
        raise FormatError(f"{source}: top level must be an object")
    return doc


def _field(doc: Dict[str, Any], key: str, where: str, kind) -> Any:
    if not isinstance(doc, dict):
        raise FormatError(f"{where}: expected an object")
    if key not in doc:
        raise FormatError(f"{where}: missing field '{key}'")
    value = doc[key]
    if not isinstance(value, kind):
        expected = "number" if isinstance(kind, tuple) else kind.__name__
        raise FormatError(f"{where}.{key}: expected {expected}, got {type(value).__name__}")
    return value


def _dump(doc: Dict[str, Any]) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise FormatError(f"{path}: {e.strerror}")


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


# ============================================================================
# PAIR FILES
# ============================================================================

def _tree_from_doc(doc: Dict[str, Any], where: str, variables: Dict[str, Variable]) -> JunctionTree:
    cliques, potentials = [], {}
    for k, entry in enumerate(_field(doc, "cliques", where, list)):
        at = f"{where}.cliques[{k}]"
        cid = _field(entry, "id", at, str)
        var_ids = _field(entry, "vars", at, list)
        unknown = [v for v in var_ids if v not in variables]
        if unknown:
            raise FormatError(f"{at}: clique {cid} references undefined variables {unknown}")
        try:
            scope = make_scope(variables[v] for v in var_ids)
            cliques.append(Clique(cid, scope))
            if "potential" in entry:
                potentials[cid] = make_table(scope, _field(entry, "potential", at, list))
        except (ValueError, TypeError) as e:
            raise FormatError(f"{at}: {e}")

    edges = []
    for k, edge in enumerate(_field(doc, "edges", where, list)):
        if not (isinstance(edge, list) and len(edge) == 2):
            raise FormatError(f"{where}.edges[{k}]: expected a pair of clique ids")
        edges.append((edge[0], edge[1]))

    try:
        jt = make_junction_tree(cliques, edges, potentials)
    except StructureError as e:
        raise FormatError(f"{where}: {e}")
    report = validate_jt(jt)
    if not report.valid:
        raise FormatError(f"{where}: " + "; ".join(report.violations))
    return jt


def _tree_to_doc(jt: JunctionTree) -> Dict[str, Any]:
    return {
        "cliques": [
            {
                "id": cid,
                "vars": list(clique.vars.ids),
                "potential": list(jt.belief[cid].flat()),
            }
            for cid, clique in jt.cliques.items()
        ],
        "edges": [list(edge) for edge in jt.edges],
    }


def pair_from_text(text: str, source: str = "<pair>") -> Pair:
    """
    Raises:
        FormatError: malformed JSON, missing or mistyped fields, undefined
            variables, wrong potential lengths, invalid junction trees
    """
    doc = _parse(text, source)

    variables: Dict[str, Variable] = {}
    for k, entry in enumerate(_field(doc, "variables", source, list)):
        at = f"{source}.variables[{k}]"
        var_id = _field(entry, "id", at, str)
        if var_id in variables:
            raise FormatError(f"{at}: duplicate variable {var_id}")
        variables[var_id] = Variable(var_id, _field(entry, "cardinality", at, int))

    jt_a = _tree_from_doc(_field(doc, "jt_a", source, dict), f"{source}.jt_a", variables)
    jt_b = _tree_from_doc(_field(doc, "jt_b", source, dict), f"{source}.jt_b", variables)

    shared = _field(doc, "dsepset", source, list)
    unknown = [v for v in shared if v not in variables]
    if unknown:
        raise FormatError(f"{source}.dsepset: undefined variables {unknown}")
    try:
        dsepset = make_dsepset(variables[v] for v in shared)
    except (TableError, LinkageError) as e:
        raise FormatError(f"{source}.dsepset: {e}")
    return Pair(jt_a, jt_b, dsepset)


def pair_to_text(pair: Pair) -> str:
    variables = {}
    for jt in (pair.jt_a, pair.jt_b):
        for v in jt.scope.variables:
            variables[v.id] = v
    doc = {
        "variables": [
            {"id": v.id, "cardinality": v.cardinality}
            for _, v in sorted(variables.items())
        ],
        "jt_a": _tree_to_doc(pair.jt_a),
        "jt_b": _tree_to_doc(pair.jt_b),
        "dsepset": list(pair.dsepset.vars.ids),
    }
    return _dump(doc)


def load_pair(path: str) -> Pair:
    pair = pair_from_text(_read(path), source=path)
    logger.debug("loaded pair %s: %d + %d cliques", path, len(pair.jt_a.cliques), len(pair.jt_b.cliques))
    return pair


def save_pair(pair: Pair, path: str) -> None:
    _write(path, pair_to_text(pair))


# ============================================================================
# TREE FILES
# ============================================================================

def tree_from_text(text: str, source: str = "<tree>") -> WeightedTree:
    """
    Raises:
        FormatError: malformed JSON, missing fields, or not a positive
            weighted tree
    """
    doc = _parse(text, source)

    nodes: List[str] = []
    hosts: List[str] = []
    for k, entry in enumerate(_field(doc, "nodes", source, list)):
        at = f"{source}.nodes[{k}]"
        node = _field(entry, "id", at, str)
        nodes.append(node)
        if entry.get("host", True):
            hosts.append(node)

    edges = []
    for k, entry in enumerate(_field(doc, "edges", source, list)):
        at = f"{source}.edges[{k}]"
        weight = _field(entry, "weight", at, (int, float))
        edges.append((_field(entry, "u", at, str), _field(entry, "v", at, str), float(weight)))

    try:
        return make_weighted_tree(nodes, edges, hosts)
    except TourError as e:
        raise FormatError(f"{source}: {e}")


def tree_to_text(tree: WeightedTree) -> str:
    doc = {
        "nodes": [{"id": n, "host": n in tree.hosts} for n in tree.nodes],
        "edges": [{"u": e.u, "v": e.v, "weight": e.weight} for e in tree.edges],
    }
    return _dump(doc)


def load_tree(path: str) -> WeightedTree:
    return tree_from_text(_read(path), source=path)


def save_tree(tree: WeightedTree, path: str) -> None:
    _write(path, tree_to_text(tree))
