"""
Text and JSON renderings of tour results and propagation costs.
"""
from typing import NamedTuple, Optional, Sequence, Dict, Tuple, Any, List
import json

from logic.propagation import CostReport
from logic.tour import OpenTour, Numbering, TerminalChain

RULE = "─" * 32


class BenchRow(NamedTuple):
    label: str
    order: Tuple[int, ...]
    coordination_passes: Optional[int]
    finalization_passes: Optional[int]
    payload_entries: int
    weighted_cost: Optional[float]


class TourResult(NamedTuple):
    eccentricities: Dict[str, float]
    chain: TerminalChain
    tour: OpenTour
    numbering: Numbering
    oracle_weight: Optional[float] = None

    @property
    def oracle_match(self) -> Optional[bool]:
        if self.oracle_weight is None:
            return None
        return self.oracle_weight == self.tour.weight


def _banner(title: str) -> List[str]:
    return [RULE, title, RULE]


def _number(x: float):
    return int(x) if float(x).is_integer() else x


def _dump(doc: Dict[str, Any]) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _order_text(order: Sequence[int]) -> str:
    return ",".join(str(i) for i in order) if order else "-"


# ============================================================================
# TOUR
# ============================================================================

def tour_text(result: TourResult) -> str:
    lines = _banner("MINIMUM-WEIGHT OPEN TOUR")
    lines.append("Leaf eccentricities: " + ", ".join(
        f"{leaf}={_number(m)}" for leaf, m in result.eccentricities.items()
    ))
    lines.append(f"Heaviest terminal chain: {' -> '.join(result.chain.path)} (weight {_number(result.chain.weight)})")
    lines.append(f"Tour: {', '.join(result.tour.walk)}")
    lines.append(f"Numbering: {', '.join(result.numbering.order)}")
    lines.append(f"Weight: {_number(result.tour.weight)}")
    if result.oracle_weight is not None:
        lines += _banner("BRUTE-FORCE ORACLE")
        lines.append(f"Minimum numbering weight: {_number(result.oracle_weight)}")
        lines.append(f"Match: {'yes' if result.oracle_match else 'NO'}")
    return "\n".join(lines) + "\n"


def tour_json(result: TourResult) -> str:
    doc = {
        "eccentricities": {leaf: _number(m) for leaf, m in result.eccentricities.items()},
        "chain": list(result.chain.path),
        "chain_weight": _number(result.chain.weight),
        "tour": list(result.tour.walk),
        "numbering": list(result.numbering.order),
        "weight": _number(result.tour.weight),
    }
    if result.oracle_weight is not None:
        doc["oracle_weight"] = _number(result.oracle_weight)
        doc["oracle_match"] = result.oracle_match
    return _dump(doc)


# ============================================================================
# PROPAGATION
# ============================================================================

def cost_doc(report: CostReport, max_deviation: Optional[float] = None) -> Dict[str, Any]:
    return {
        "variant": report.variant,
        "order": list(report.order),
        "coordination_passes": report.coordination_passes,
        "finalization_passes": report.finalization_passes,
        "payload_entries": report.payload_entries,
        "weighted_cost": _number(report.weighted_cost),
        "max_deviation": max_deviation,
    }


def cost_json(report: CostReport, max_deviation: Optional[float] = None) -> str:
    return _dump(cost_doc(report, max_deviation))


def propagate_text(
        report: CostReport,
        marginals: Dict[str, Tuple[float, ...]],
        max_deviation: Optional[float] = None,
) -> str:
    lines = _banner(f"UPDATE BELIEF ({report.variant})")
    lines.append(f"Linkage order: {_order_text(report.order)}")
    lines.append(f"Coordination passes: {report.coordination_passes}")
    lines.append(f"Finalization passes: {report.finalization_passes}")
    lines.append(f"Payload entries: {report.payload_entries}")
    lines.append(f"Weighted cost: {_number(report.weighted_cost)}")
    if max_deviation is not None:
        lines.append(f"Max deviation from oracle: {max_deviation:.3e}")
    lines += _banner("POSTERIOR MARGINALS")
    for var_id, values in marginals.items():
        lines.append(f"• {var_id}: " + " ".join(f"{p:.6f}" for p in values))
    return "\n".join(lines) + "\n"


def bench_text(rows: Sequence[BenchRow]) -> str:
    lines = _banner("LINKAGE PROPAGATION COST")
    lines.append(f"{'variant':<14}{'order':<14}{'coord':>7}{'final':>7}{'payload':>9}{'weighted':>10}")

    def cell(value, width):
        return f"{'-' if value is None else _number(value):>{width}}"

    for row in rows:
        lines.append(
            f"{row.label:<14}{_order_text(row.order):<14}"
            f"{cell(row.coordination_passes, 7)}{cell(row.finalization_passes, 7)}"
            f"{row.payload_entries:>9}{cell(row.weighted_cost, 10)}"
        )
    return "\n".join(lines) + "\n"


def bench_json(rows: Sequence[BenchRow]) -> str:
    return _dump({"rows": [
        {
            "label": row.label,
            "order": list(row.order),
            "coordination_passes": row.coordination_passes,
            "finalization_passes": row.finalization_passes,
            "payload_entries": row.payload_entries,
            "weighted_cost": None if row.weighted_cost is None else _number(row.weighted_cost),
        }
        for row in rows
    ]})


def verify_text(results: Sequence[Tuple[CostReport, float]], tol: float) -> str:
    lines = _banner("ORACLE VERIFICATION")
    for report, deviation in results:
        status = "ok" if deviation <= tol else "FAIL"
        lines.append(f"{report.variant:<6}order {_order_text(report.order):<14}deviation {deviation:.3e}  {status}")
    worst = max((d for _, d in results), default=0.0)
    lines.append(f"Max deviation: {worst:.3e} (tolerance {tol:g})")
    return "\n".join(lines) + "\n"


def verify_json(results: Sequence[Tuple[CostReport, float]], tol: float) -> str:
    worst = max((d for _, d in results), default=0.0)
    return _dump({
        "tolerance": tol,
        "max_deviation": worst,
        "passed": worst <= tol,
        "runs": [cost_doc(report, deviation) for report, deviation in results],
    })
