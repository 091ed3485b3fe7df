"""
prodtest - command line entry point
Verification suites, bound sweeps, Schmidt-tail experiments, tester runs and
entanglement measures. Results go to stdout or --out; logs go to stderr.
"""
import argparse
import itertools
import logging
import sys
from functools import partial
from typing import Dict, List, Optional, Sequence

from pydantic import ValidationError

from prodtest import __version__
from prodtest.config.settings import settings
from prodtest.errors import InvalidArgumentError, ProdTestError
from prodtest.models.schemas import BOUND_COLUMNS, TAIL_COLUMNS, ExperimentConfig, GridPoint
from prodtest.services.ensembles import bound_report
from prodtest.services.haar_sampling import derived_rng, lemma4_constants, tail_mc, wilson_interval
from prodtest.services.io_formats import load_graph_file, load_state_file, write_model, write_rows
from prodtest.services.measures import graph_state, is_connected, measure_report
from prodtest.services.testers import StateOracle, bp_tester_naive, mp_tester
from prodtest.services.verification import DEFAULT_MAX_DIM, SUITES, run_suite
from prodtest.services.workers import parallel_map

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def parse_range(text: str) -> List[int]:
    """'a:b' (inclusive), 'a:b:step' or 'a,b,c'."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                start, stop, step = parts[0], parts[1], 1
            elif len(parts) == 3:
                start, stop, step = parts
            else:
                raise ValueError
            if step < 1:
                raise argparse.ArgumentTypeError(f"range step must be positive in {text!r}")
            values = list(range(start, stop + 1, step))
        else:
            values = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid range {text!r}; use a:b, a:b:step or a,b,c")
    if not values:
        raise argparse.ArgumentTypeError(f"range {text!r} is empty")
    return values


def _config(args: argparse.Namespace, **fields) -> ExperimentConfig:
    try:
        return ExperimentConfig(
            subcommand=args.command,
            seed=settings.default_seed if args.seed is None else args.seed,
            out=args.out,
            format=args.format,
            workers=settings.workers if args.workers is None else args.workers,
            **fields,
        )
    except ValidationError as e:
        problems = "; ".join(f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors())
        raise InvalidArgumentError(problems)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_verify(args: argparse.Namespace) -> int:
    config = _config(args)
    report = run_suite(args.suite, seed=config.seed, max_dim=args.max_dim,
                       inject_fault=args.inject_fault, workers=config.workers)
    failed = [c for c in report.checks if not c.passed]
    for check in failed:
        print(f"FAIL {check.suite}/{check.name}: {check.detail}", file=sys.stderr)
    print(f"{args.suite}: {len(report.checks) - len(failed)}/{len(report.checks)} checks passed", file=sys.stderr)
    write_model(report, config.out)
    return 0 if report.passed else 1


def _sweep_row(g: GridPoint, bound_only: bool) -> Dict[str, object]:
    report = bound_report(g, bound_only=bound_only)
    logger.info(f"Grid point n={g.n} k={g.k} d={g.d} done, satisfied={report.satisfied} chain={report.chain_satisfied}")
    return report.to_row()


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _config(args, n_values=args.n, k_values=args.k, d_values=args.d)
    points = []
    for n, k, d in itertools.product(config.n_values, config.k_values, config.d_values):
        try:
            points.append(GridPoint(n=n, k=k, d=d))
        except ValidationError:
            raise InvalidArgumentError(f"invalid grid point n={n}, k={k}, d={d}; need n, k >= 1 and d >= 2")
    rows = parallel_map(partial(_sweep_row, bound_only=args.bound_only), points, config.workers)
    write_rows(rows, BOUND_COLUMNS, config.format, config.out)
    unsatisfied = sum(not (row["satisfied"] and row["chain_satisfied"]) for row in rows)
    if unsatisfied:
        logger.error(f"{unsatisfied} of {len(rows)} grid points violate the bound chain")
        return 1
    return 0


def cmd_tail(args: argparse.Namespace) -> int:
    config = _config(args, n_values=args.n, d_values=args.d, gamma=args.gamma, samples=args.samples)
    for d in config.d_values:
        lemma4_constants(config.gamma, d)
    if config.samples < 1:
        raise InvalidArgumentError(f"samples must be >= 1, got {config.samples}")

    rows = []
    violated = False
    for n, d in itertools.product(config.n_values, config.d_values):
        estimate = tail_mc(n, d, config.gamma, config.samples, seed=config.seed, workers=config.workers)
        rows.append(estimate.to_row())
        lower, _ = wilson_interval(estimate.exceed_count, estimate.samples)
        if n > estimate.n_threshold and lower > estimate.lemma_bound:
            logger.error(f"n={n}, d={d}: observed tail {lower:.3e} (Wilson lower) exceeds the bound {estimate.lemma_bound:.3e}")
            violated = True
    write_rows(rows, TAIL_COLUMNS, config.format, config.out)
    return 1 if violated else 0


def cmd_test(args: argparse.Namespace) -> int:
    config = _config(args, reps=args.reps, reps_per_cut=args.reps_per_cut)
    psi = load_state_file(args.state)
    rng = derived_rng(config.seed, 0)
    oracle = StateOracle(psi)
    if args.mode == "mp":
        outcome = mp_tester(oracle, config.reps, rng)
    else:
        outcome = bp_tester_naive(oracle, config.reps_per_cut, rng)
    logger.info(f"{args.mode.upper()} tester on {args.state}: accepted={outcome.accepted}, "
                f"{outcome.copies_used} copies")
    write_model(outcome, config.out)
    return 0


def cmd_measure(args: argparse.Namespace) -> int:
    config = _config(args)
    connected: Optional[bool] = None
    if args.graph is not None:
        graph = load_graph_file(args.graph)
        psi = graph_state(graph)
        connected = is_connected(graph)
    else:
        psi = load_state_file(args.state)
    if args.restarts < 0:
        raise InvalidArgumentError(f"restarts must be >= 0, got {args.restarts}")
    report = measure_report(psi, restarts=args.restarts, rng=derived_rng(config.seed, 0), connected=connected)
    write_model(report, config.out)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help=f"Master seed, 0 <= seed < 2^64 (default {settings.default_seed})")
    common.add_argument("--workers", type=int, default=None, help="Worker processes (default from PRODTEST_WORKERS)")
    common.add_argument("--out", type=str, default=None, help="Output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="Row format for sweep and tail")
    common.add_argument("--log-level", type=str.upper, choices=LOG_LEVELS, default=None,
                        help="Log level on stderr (default from PRODTEST_LOG_LEVEL)")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="prodtest", description="Numerics for testing product structure of quantum states")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", parents=[common], help="Run invariant suites")
    verify.add_argument("suite", choices=SUITES + ("all",))
    verify.add_argument("--max-dim", type=int, default=DEFAULT_MAX_DIM,
                        help=f"Largest d^(nk) for exact rho/sigma checks (default {DEFAULT_MAX_DIM})")
    verify.add_argument("--inject-fault", type=float, default=0.0, metavar="EPS",
                        help="Perturb Pi^2_2 by EPS; the facts suite must then fail")
    verify.set_defaults(handler=cmd_verify)

    sweep = sub.add_parser("sweep", parents=[common], help="Bound chain over an (n, k, d) grid")
    sweep.add_argument("--n", type=parse_range, required=True)
    sweep.add_argument("--k", type=parse_range, required=True)
    sweep.add_argument("--d", type=parse_range, required=True)
    sweep.add_argument("--bound-only", action="store_true", help="Skip the dense exact routes")
    sweep.set_defaults(handler=cmd_sweep)

    tail = sub.add_parser("tail", parents=[common], help="Monte Carlo estimate of P(Gamma_max > gamma)")
    tail.add_argument("--n", type=parse_range, required=True)
    tail.add_argument("--d", type=parse_range, required=True)
    tail.add_argument("--gamma", type=float, required=True)
    tail.add_argument("--samples", type=int, required=True)
    tail.set_defaults(handler=cmd_tail)

    test = sub.add_parser("test", parents=[common], help="Run the MP or naive BP tester on a state file")
    test.add_argument("--state", required=True)
    test.add_argument("--mode", choices=("mp", "bp"), required=True)
    test.add_argument("--reps", type=int, default=20)
    test.add_argument("--reps-per-cut", type=int, default=5)
    test.set_defaults(handler=cmd_test)

    measure = sub.add_parser("measure", parents=[common], help="Entanglement summary of a state or graph state")
    source = measure.add_mutually_exclusive_group(required=True)
    source.add_argument("--state")
    source.add_argument("--graph")
    measure.add_argument("--restarts", type=int, default=0, help="Alternating-maximization restarts per cut")
    measure.set_defaults(handler=cmd_measure)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=args.log_level or (settings.log_level if settings.log_level in LOG_LEVELS else "INFO"),
        format=LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )
    try:
        return args.handler(args)
    except ProdTestError as e:
        logger.error(f"{type(e).__name__}: {e.detail}")
        print(f"prodtest: error: {e.detail}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
