from typing import List, Optional, Sequence, TextIO, Tuple
import argparse
import logging
import os
import sys

from config import COST_MODELS, load_config
from logic.junction_tree import OracleLimitError, consistency_check
from logic.linkage import direct_payload_entries
from logic.propagation import (
    CostReport,
    PairSession,
    Variant,
    open_session,
    run_variant,
    optimal_linkage_order,
    random_consistent_order,
    expected_posterior,
    posterior_deviation,
    posterior_marginals,
)
from logic.tour import (
    brute_force_min_numbering,
    leaf_eccentricities,
    heaviest_terminal_chain,
    min_weight_open_tour,
)
from workbench import fixtures, report
from workbench.formats import load_pair, load_tree, save_pair, save_tree
from workbench.generators import gen_pair, gen_tree

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY_FAILED = 2

LOG_FORMAT = "[MSBN] %(levelname)s %(name)s: %(message)s"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ============================================================================
# PARSER
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="msbn", description="Linkage propagation workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tour", help="minimum-weight open tour of a weighted tree")
    p.add_argument("treefile")
    p.add_argument("--oracle", action="store_true", help="also brute-force every numbering")
    p.add_argument("--brute-force-limit", type=int, default=None)
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("propagate", help="run one UpdateBelief variant")
    p.add_argument("pairfile")
    p.add_argument("--variant", choices=[v.value for v in Variant], required=True)
    p.add_argument("--order", default=None, help="comma-separated linkage indices or 'optimal'")
    p.add_argument("--cost-model", choices=COST_MODELS, default=None)
    p.add_argument("--oracle-limit", type=int, default=None)
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("verify", help="check every variant against the joint-table oracle")
    p.add_argument("pairfile")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=None, help="also run random consistent orders")
    p.add_argument("--oracle-limit", type=int, default=None)
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("bench", help="coordination cost of every variant")
    p.add_argument("pairfile")
    p.add_argument("--cost-model", choices=COST_MODELS, default=None)
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("gen", help="write random fixture files")
    kinds = p.add_subparsers(dest="kind", required=True)
    g = kinds.add_parser("pair")
    g.add_argument("--shared", type=int, required=True)
    g.add_argument("--private-a", type=int, default=0)
    g.add_argument("--private-b", type=int, default=0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g = kinds.add_parser("tree")
    g.add_argument("--nodes", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--min-weight", type=int, default=1)
    g.add_argument("--max-weight", type=int, default=9)
    g.add_argument("--out", required=True)

    p = sub.add_parser("fixtures", help="built-in reference fixtures")
    actions = p.add_subparsers(dest="action", required=True)
    e = actions.add_parser("export")
    e.add_argument("name", choices=sorted(set(fixtures.TREES) | set(fixtures.PAIRS)))
    e.add_argument("--dir", default=".")

    return parser


# ============================================================================
# COMMANDS
# ============================================================================

def _parse_order(session: PairSession, text: Optional[str]) -> Optional[Tuple[int, ...]]:
    if text is None:
        return None
    if text.strip().lower() == "optimal":
        return optimal_linkage_order(session)
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ValueError(f"--order must be comma-separated integers or 'optimal', got {text!r}")


def _open(path: str, cost_model: str, oracle_limit: int) -> PairSession:
    pair = load_pair(path)
    return open_session(pair.jt_a, pair.jt_b, pair.dsepset, cost_model, oracle_limit)


def cmd_tour(args, out: TextIO) -> int:
    config = load_config(brute_force_limit=args.brute_force_limit)
    tree = load_tree(args.treefile)
    tour, numbering = min_weight_open_tour(tree)
    oracle = None
    if args.oracle:
        oracle = brute_force_min_numbering(tree, config.brute_force_limit)[1]

    result = report.TourResult(
        eccentricities=leaf_eccentricities(tree),
        chain=heaviest_terminal_chain(tree),
        tour=tour,
        numbering=numbering,
        oracle_weight=oracle,
    )
    out.write(report.tour_json(result) if args.format == "json" else report.tour_text(result))
    if oracle is not None and not result.oracle_match:
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def cmd_propagate(args, out: TextIO) -> int:
    config = load_config(cost_model=args.cost_model, oracle_limit=args.oracle_limit)
    session = _open(args.pairfile, config.cost_model, config.oracle_limit)
    expected = None
    try:
        expected = expected_posterior(session)
    except OracleLimitError as e:
        logger.warning("skipping oracle: %s", e)

    session, cost = run_variant(session, Variant(args.variant), _parse_order(session, args.order))
    deviation = posterior_deviation(session, expected) if expected is not None else None

    if args.format == "json":
        out.write(report.cost_json(cost, deviation))
    else:
        out.write(report.propagate_text(cost, posterior_marginals(session), deviation))
    return EXIT_OK


def _verification_runs(session: PairSession, seed: Optional[int]) -> List[Tuple[Variant, Optional[Tuple[int, ...]]]]:
    runs = [(Variant.UB1, None), (Variant.UB2, None), (Variant.UB3, None)]
    if seed is not None:
        order = random_consistent_order(session.linkage_tree, seed)
        runs += [(variant, order) for variant in Variant]
    return runs


def cmd_verify(args, out: TextIO) -> int:
    config = load_config(tolerance=args.tol, oracle_limit=args.oracle_limit)
    session = _open(args.pairfile, config.cost_model, config.oracle_limit)
    expected = expected_posterior(session)

    results: List[Tuple[CostReport, float]] = []
    for variant, order in _verification_runs(session, args.seed):
        session.reset()
        session, cost = run_variant(session, variant, order)
        gap = consistency_check(session.jt_a, config.tolerance).max_discrepancy
        results.append((cost, max(posterior_deviation(session, expected), gap)))

    text = report.verify_json if args.format == "json" else report.verify_text
    out.write(text(results, config.tolerance))
    if any(deviation > config.tolerance for _, deviation in results):
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def bench_rows(session: PairSession) -> List[report.BenchRow]:
    """ub1, ub2, ub3 in construction order, ub3 optimal, then passing B(I) directly."""
    runs = [
        ("ub1", Variant.UB1, session.linkage_tree.indices),
        ("ub2", Variant.UB2, session.linkage_tree.indices),
        ("ub3-default", Variant.UB3, session.linkage_tree.indices),
        ("ub3-optimal", Variant.UB3, None),
    ]
    rows = []
    for label, variant, order in runs:
        session.reset()
        session, cost = run_variant(session, variant, order)
        rows.append(report.BenchRow(
            label=label,
            order=cost.order,
            coordination_passes=cost.coordination_passes,
            finalization_passes=cost.finalization_passes,
            payload_entries=cost.payload_entries,
            weighted_cost=cost.weighted_cost,
        ))
    rows.append(report.BenchRow(
        label="direct",
        order=(),
        coordination_passes=None,
        finalization_passes=None,
        payload_entries=direct_payload_entries(session.dsepset),
        weighted_cost=None,
    ))
    return rows


def cmd_bench(args, out: TextIO) -> int:
    config = load_config(cost_model=args.cost_model)
    session = _open(args.pairfile, config.cost_model, config.oracle_limit)
    rows = bench_rows(session)
    out.write(report.bench_json(rows) if args.format == "json" else report.bench_text(rows))
    return EXIT_OK


def cmd_gen(args, out: TextIO) -> int:
    if args.kind == "pair":
        config = load_config()
        pair = gen_pair(args.shared, args.private_a, args.private_b, args.seed,
                        oracle_limit=config.oracle_limit)
        save_pair(pair, args.out)
    else:
        tree = gen_tree(args.nodes, args.seed, (args.min_weight, args.max_weight))
        save_tree(tree, args.out)
    out.write(f"wrote {args.out}\n")
    return EXIT_OK


def cmd_fixtures(args, out: TextIO) -> int:
    os.makedirs(args.dir, exist_ok=True)
    written = []
    if args.name in fixtures.TREES:
        path = os.path.join(args.dir, f"{args.name}.tree")
        save_tree(fixtures.TREES[args.name], path)
        written.append(path)
    if args.name in fixtures.PAIRS:
        path = os.path.join(args.dir, f"{args.name}.pair")
        save_pair(fixtures.PAIRS[args.name](), path)
        written.append(path)
    for path in written:
        out.write(f"wrote {path}\n")
    return EXIT_OK


COMMANDS = {
    "tour": cmd_tour,
    "propagate": cmd_propagate,
    "verify": cmd_verify,
    "bench": cmd_bench,
    "gen": cmd_gen,
    "fixtures": cmd_fixtures,
}


def run_cli(argv: Sequence[str], out: TextIO = None, err: TextIO = None) -> int:
    """
    Exit codes: 0 ok, 1 usage or input error, 2 verification failure.
    """
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(list(argv))
        return COMMANDS[args.command](args, out)
    except UsageError as e:
        err.write(f"{e}\n")
        return EXIT_USAGE
    except (ValueError, OSError) as e:
        logger.debug("command failed", exc_info=True)
        err.write(f"error: {e}\n")
        return EXIT_USAGE


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = load_config()
    except ValueError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    logging.basicConfig(level=config.log_level.upper(), format=LOG_FORMAT)
    return run_cli(sys.argv[1:] if argv is None else argv)
