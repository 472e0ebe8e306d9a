from typing import NamedTuple, Tuple, Iterable, Sequence, Union, Dict
import math

import numpy as np


# Tables are immutable values: numpy buffers are frozen after construction,
# so a table can be shared between trees, sessions and reports freely.


# ============================================================================
# ERRORS
# ============================================================================

class TableError(ValueError):
    """Raised when a belief table or scope is malformed or misused."""


class InconsistentSupportError(TableError):
    """
    A quotient cell has numerator > 0 and denominator = 0.

    Signals that two beliefs were never mutually consistent.
    """

    def __init__(self, cell: int, configuration: Dict[str, int]):
        self.cell = cell
        self.configuration = configuration
        states = ", ".join(f"{var}={state}" for var, state in configuration.items())
        super().__init__(
            f"inconsistent support at cell {cell} ({states}): "
            f"numerator > 0 where denominator = 0"
        )


# ============================================================================
# DOMAIN TYPES
# ============================================================================

class Variable(NamedTuple):
    """A discrete domain variable."""
    id: str
    cardinality: int  # number of states, >= 2


class Scope(NamedTuple):
    """
    Ordered, duplicate-free set of variables, canonically sorted by id.

    Build through make_scope(); the constructor does not re-check.
    """
    variables: Tuple[Variable, ...]

    @property
    def ids(self) -> Tuple[str, ...]:
        return tuple(v.id for v in self.variables)

    @property
    def cards(self) -> Tuple[int, ...]:
        return tuple(v.cardinality for v in self.variables)

    @property
    def size(self) -> int:
        """State-space size (1 for the empty scope)."""
        return math.prod(self.cards)

    def __contains__(self, var_id) -> bool:
        return var_id in self.ids

    def issubset(self, other: "Scope") -> bool:
        return set(self.ids) <= set(other.ids)

    def union(self, other: "Scope") -> "Scope":
        return make_scope(self.variables + other.variables, merge=True)

    def intersection(self, other: "Scope") -> "Scope":
        other_ids = set(other.ids)
        return Scope(tuple(v for v in self.variables if v.id in other_ids))

    def difference(self, other: "Scope") -> "Scope":
        other_ids = set(other.ids)
        return Scope(tuple(v for v in self.variables if v.id not in other_ids))

    def restrict(self, var_ids: Iterable[str]) -> "Scope":
        wanted = set(var_ids)
        missing = wanted - set(self.ids)
        if missing:
            raise TableError(f"variables {sorted(missing)} not in scope {list(self.ids)}")
        return Scope(tuple(v for v in self.variables if v.id in wanted))


class PotentialTable(NamedTuple):
    """
    Dense nonnegative table over a canonical scope.

    values has shape scope.cards; flattened row-major, the LAST scope
    variable varies fastest.
    """
    scope: Scope
    values: np.ndarray

    def flat(self) -> Tuple[float, ...]:
        return tuple(float(x) for x in self.values.reshape(-1))

    @property
    def total(self) -> float:
        return float(self.values.sum())


ScopeLike = Union[Scope, Sequence[Variable]]


# ============================================================================
# CONSTRUCTION
# ============================================================================

def make_scope(variables: Iterable[Variable], merge: bool = False) -> Scope:
    """
    Canonicalize a collection of variables into a sorted Scope.

    With merge=True a repeated id is accepted when its cardinality agrees
    (used for scope unions); otherwise any repeat is an error.
    """
    by_id: Dict[str, Variable] = {}
    for var in variables:
        if var.cardinality < 2:
            raise TableError(
                f"variable {var.id} must have cardinality >= 2, got {var.cardinality}"
            )
        seen = by_id.get(var.id)
        if seen is None:
            by_id[var.id] = var
            continue
        if seen.cardinality != var.cardinality:
            raise TableError(
                f"variable {var.id} has conflicting cardinalities "
                f"{seen.cardinality} and {var.cardinality}"
            )
        if not merge:
            raise TableError(f"duplicate variable {var.id} in scope")
    return Scope(tuple(by_id[k] for k in sorted(by_id)))


def _freeze(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array, dtype=float)
    array.setflags(write=False)
    return array


def _wrap(scope: Scope, values: np.ndarray) -> PotentialTable:
    return PotentialTable(scope=scope, values=_freeze(np.reshape(values, scope.cards)))


def make_table(
        scope: ScopeLike,
        values: Iterable[float],
        degenerate: bool = False,
) -> PotentialTable:
    """
    Build a table from values laid out in the caller's variable order.

    The result always carries the canonical (sorted) scope; values are
    permuted to match. An all-zero table is rejected unless degenerate=True.

    Raises:
        TableError: length mismatch, negative or non-finite entry
    """
    given = tuple(scope.variables if isinstance(scope, Scope) else scope)
    canonical = make_scope(given)
    data = np.asarray(list(values), dtype=float)

    if data.size != canonical.size:
        raise TableError(
            f"length mismatch: scope {[v.id for v in given]} needs "
            f"{canonical.size} values, got {data.size}"
        )
    if not np.all(np.isfinite(data)):
        raise TableError("table entries must be finite")
    if np.any(data < 0):
        raise TableError(f"table entries must be >= 0, got {float(data.min())}")
    if not degenerate and data.size and not np.any(data > 0):
        raise TableError("table has no positive entry")

    shaped = data.reshape(tuple(v.cardinality for v in given))
    position = {v.id: axis for axis, v in enumerate(given)}
    shaped = np.transpose(shaped, [position[v] for v in canonical.ids])
    return _wrap(canonical, shaped)


def ones(scope: Scope) -> PotentialTable:
    return _wrap(scope, np.ones(scope.cards))


# ============================================================================
# ALGEBRA
# ============================================================================

def _expand(table: PotentialTable, target: Scope) -> np.ndarray:
    # Canonical order makes table.scope a subsequence of target.
    shape = tuple(
        var.cardinality if var.id in table.scope else 1 for var in target.variables
    )
    return table.values.reshape(shape)


def multiply(t1: PotentialTable, t2: PotentialTable) -> PotentialTable:
    """Pointwise product over the union scope."""
    union = t1.scope.union(t2.scope)
    return _wrap(union, _expand(t1, union) * _expand(t2, union))


def divide(num: PotentialTable, den: PotentialTable) -> PotentialTable:
    """
    Pointwise quotient num / den with 0/0 = 0.

    Raises:
        TableError: scope(den) is not a subset of scope(num)
        InconsistentSupportError: num > 0 where den = 0
    """
    if not den.scope.issubset(num.scope):
        raise TableError(
            f"divisor scope {list(den.scope.ids)} is not a subset of "
            f"{list(num.scope.ids)}"
        )
    # card agreement
    num.scope.union(den.scope)

    denominator = np.broadcast_to(_expand(den, num.scope), num.scope.cards)
    zero = denominator == 0
    bad = zero & (num.values > 0)
    if np.any(bad):
        index = tuple(int(i) for i in np.argwhere(bad)[0])
        cell = int(np.ravel_multi_index(index, num.scope.cards)) if index else 0
        raise InconsistentSupportError(cell, dict(zip(num.scope.ids, index)))

    quotient = np.divide(
        num.values, denominator, out=np.zeros(num.scope.cards), where=~zero
    )
    return _wrap(num.scope, quotient)


def marginalize(t: PotentialTable, target: Union[Scope, Iterable[str]]) -> PotentialTable:
    """
    Sum out every variable not in target.

    Raises:
        TableError: target is not a subset of scope(t)
    """
    target_ids = target.ids if isinstance(target, Scope) else tuple(target)
    if not set(target_ids) <= set(t.scope.ids):
        raise TableError(
            f"marginalization target {sorted(target_ids)} is not a subset of "
            f"{list(t.scope.ids)}"
        )
    kept = t.scope.restrict(target_ids)
    axes = tuple(i for i, var_id in enumerate(t.scope.ids) if var_id not in kept)
    if not axes:
        return t
    return _wrap(kept, t.values.sum(axis=axes))


def normalize(t: PotentialTable) -> PotentialTable:
    total = t.total
    if total <= 0:
        raise TableError("cannot normalize a table with zero total mass")
    return _wrap(t.scope, t.values / total)


def max_abs_difference(t1: PotentialTable, t2: PotentialTable) -> float:
    if t1.scope.ids != t2.scope.ids:
        raise TableError(
            f"scope mismatch: {list(t1.scope.ids)} vs {list(t2.scope.ids)}"
        )
    if t1.values.size == 0:
        return 0.0
    return float(np.max(np.abs(t1.values - t2.values)))


def table_equal(t1: PotentialTable, t2: PotentialTable, tol: float = 0.0) -> bool:
    return max_abs_difference(t1, t2) <= tol
