"""
Command-line entry point for the LEO orbit planner
"""

import argparse
import sys
from typing import List, Optional

from .commands.compare import run_compare
from .commands.ingest import run_ingest
from .commands.predict import run_predict
from .commands.train import run_train
from .config import settings
from .errors import IOFailure, OrbitPlannerError, UsageError
from .utils.logging import configure_logging


class PlannerArgumentParser(argparse.ArgumentParser):
    """Reports usage errors as a single `error[usage]` line with exit code 1"""

    def error(self, message: str):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = PlannerArgumentParser(prog="orbit-planner", description=f"{settings.app_name} {settings.version}")
    parser.add_argument("--log-level", default=None, help="Override LOG_LEVEL")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=PlannerArgumentParser)

    ingest = commands.add_parser("ingest", help="Validate a TLE catalog and write the accepted records")
    ingest.add_argument("--catalog", default=None, help="Path or URL (default: ORBIT_CATALOG_URL)")
    ingest.add_argument("--out", dest="output", default=None, help="Validated catalog output path")
    ingest.set_defaults(handler=run_ingest)

    train = commands.add_parser("train", help="Train an A2C or PPO agent")
    train.add_argument("--algorithm", choices=("a2c", "ppo"), default="a2c")
    train.add_argument("--mission", default=None, help="Mission YAML (default: built-in mission)")
    train.add_argument("--catalog", default=None, help="Reference TLE catalog path or URL")
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--timesteps", type=int, default=None)
    train.add_argument("--out", default=None, help="Run directory (default: OUTPUT_DIR)")
    train.set_defaults(handler=run_train)

    predict = commands.add_parser("predict", help="Run one episode with a trained checkpoint")
    predict.add_argument("checkpoint")
    predict.add_argument("--mission", default=None)
    predict.add_argument("--catalog", default=None)
    predict.add_argument("--seed", type=int, default=0)
    predict.add_argument("--deterministic", action=argparse.BooleanOptionalAction, default=True)
    predict.set_defaults(handler=run_predict)

    compare = commands.add_parser("compare", help="Compare A2C and PPO across seeds")
    compare.add_argument("--mission", default=None)
    compare.add_argument("--catalog", default=None)
    compare.add_argument("--seeds", default="0,1,2,3,4", help="Comma-separated seeds")
    compare.add_argument("--timesteps", type=int, default=None, help="Budget for both algorithms")
    compare.add_argument("--out", default=None)
    compare.set_defaults(handler=run_compare)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run one command, map failures to exit codes

    Returns:
        0 on success, 1 usage/config error, 2 data or I/O error, 3 training failure
    """
    try:
        args = build_parser().parse_args(argv)
        configure_logging(args.log_level)
        return args.handler(args)
    except OrbitPlannerError as exc:
        return _report(exc)
    except OSError as exc:
        return _report(IOFailure.from_os_error(exc))


def _report(exc: OrbitPlannerError) -> int:
    print(f"error[{exc.kind}]: {exc.message}".replace("\n", " "), file=sys.stderr)
    return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
