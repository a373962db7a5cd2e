"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 solver limit (bundle is written but
flagged non-certified), 4 internal accounting error, 1 unexpected failure.
The solver backend can also be selected via the CES_MARKET_BACKEND
environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .formulations import SolverLimitError
from .generate import generate_instance, write_instance
from .instance import InstanceError
from .metrics import AccountingError
from .milp import BackendUnavailableError, SolveParams
from .runner import MODEL_CHOICES, RunConfig, run

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER_LIMIT = 3
EXIT_ACCOUNTING = 4

BACKEND_ENV = "CES_MARKET_BACKEND"


def _add_solver_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--gap", type=float, default=1e-6,
                        help="relative MIP gap (default 1e-6)")
    parser.add_argument("--time-limit", type=float, default=300.0,
                        help="per-solve time limit in seconds (default 300)")
    parser.add_argument("--node-limit", type=int, default=1_000_000,
                        help="branch-and-bound node limit (default 1e6)")
    parser.add_argument("--seed", type=int, default=0,
                        help="deterministic seed recorded in the bundle")
    parser.add_argument("--backend", default=None,
                        help=f"solver backend (default: ${BACKEND_ENV} or 'reference')")


def _add_grid_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--price-start", type=float, default=0.05)
    parser.add_argument("--price-stop", type=float, default=0.5)
    parser.add_argument("--price-step", type=float, default=0.002)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ces-market",
        description="Shared-storage market models: equilibrium, benchmarks, and reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="solve one model or the full comparison")
    p_run.add_argument("--instance", required=True, type=Path)
    p_run.add_argument("--model", choices=MODEL_CHOICES, default="compare")
    p_run.add_argument("--out", required=True, type=Path)
    p_run.add_argument("--curve-step", type=float, default=10.0,
                       help="request increment for the capital-cost curve sweep")
    _add_solver_args(p_run)
    _add_grid_args(p_run)

    p_gen = sub.add_parser("generate", help="write a deterministic synthetic instance")
    p_gen.add_argument("--out", required=True, type=Path)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--buildings", type=int, default=5)
    p_gen.add_argument("--periods", type=int, default=24)
    p_gen.add_argument("--scenarios", type=int, default=3)
    p_gen.add_argument("--buy", type=float, default=0.3)
    p_gen.add_argument("--sell", type=float, default=0.0)

    p_sweep = sub.add_parser("sweep-price", help="lease price sweep only")
    p_sweep.add_argument("--instance", required=True, type=Path)
    p_sweep.add_argument("--out", required=True, type=Path)
    _add_solver_args(p_sweep)
    _add_grid_args(p_sweep)
    return parser


def _config_from_args(args, model: str) -> RunConfig:
    backend = args.backend or os.environ.get(BACKEND_ENV) or "reference"
    params = SolveParams(
        rel_gap=args.gap,
        time_limit=args.time_limit,
        node_limit=args.node_limit,
        seed=args.seed,
    )
    return RunConfig(
        instance=args.instance,
        out_dir=args.out,
        model=model,
        seed=args.seed,
        params=params,
        price_start=args.price_start,
        price_stop=args.price_stop,
        price_step=args.price_step,
        curve_step=getattr(args, "curve_step", 10.0),
        backend=backend,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            inst = generate_instance(
                args.seed, args.buildings, args.periods, args.scenarios,
                buy_price=args.buy, sell_price=args.sell,
            )
            args.out.parent.mkdir(parents=True, exist_ok=True)
            write_instance(inst, args.out)
            print(f"wrote {args.out}")
            return EXIT_OK

        model = "ves" if args.command == "sweep-price" else args.model
        config = _config_from_args(args, model)
        result = run(config)
        for path in result.files:
            print(f"wrote {path}")
        if not result.certified:
            print("warning: at least one solve hit a limit; results are not "
                  "optimality-certified", file=sys.stderr)
            return EXIT_SOLVER_LIMIT
        return EXIT_OK
    except (InstanceError, FileNotFoundError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BackendUnavailableError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverLimitError as exc:
        print(f"solver limit: {exc}", file=sys.stderr)
        return EXIT_SOLVER_LIMIT
    except AccountingError as exc:
        print(f"internal accounting error: {exc}", file=sys.stderr)
        return EXIT_ACCOUNTING
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
