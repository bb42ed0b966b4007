import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import List, Optional

from app.config import settings
from app.errors import ConfigError
from app.runner.coordinator import RunCoordinator
from app.runner.instance import load_instance
from app.runner.reports import RunReport

SUITES = ("identity", "inequalities", "folner", "duality", "oracle", "all")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wpressure",
        description="Weighted topological pressure and the weighted variational principle for subshift chains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def instance_command(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, type=Path, help="instance TOML file")
        p.add_argument("--seed", type=int, help="override the instance seed")
        p.add_argument("--out", type=str, help="output directory")
        p.add_argument("--n-max", dest="n_max", type=int, help="largest schedule index")
        p.add_argument("--refine-max", dest="refine_max", type=int, help="largest scheme refinement")
        p.add_argument("--budget", type=int, help="enumeration budget")
        return p

    instance_command("pressure", "pressure table over the schedule")
    instance_command("variational", "optimize the weighted objective")
    instance_command("nu-construct", "build the measures ν_n and check the log Z identity")
    verify = instance_command("verify", "run a verification suite")
    verify.add_argument("suite", choices=SUITES)

    report = sub.add_parser("report", help="re-render summary.txt from report.json")
    report.add_argument("--out", type=str, default=settings.output_dir, help="output directory holding report.json")
    return parser


async def run_command(args: argparse.Namespace) -> RunReport:
    """
    Load the instance, apply overrides and dispatch to the coordinator.

    Raises:
        ConfigError: config file or overrides fail validation
    """
    instance = load_instance(args.config).with_overrides(
        seed=args.seed,
        n_max=args.n_max,
        refine_max=args.refine_max,
        budget=args.budget,
        out=args.out,
    )
    coordinator = RunCoordinator(instance)
    if args.command == "pressure":
        return await coordinator.cmd_pressure()
    if args.command == "variational":
        return await coordinator.cmd_variational()
    if args.command == "nu-construct":
        return await coordinator.cmd_nu_construct()
    return await coordinator.cmd_verify(args.suite)


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper()),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    args = build_parser().parse_args(argv)
    logger.info(f"Starting {settings.app_name} v{settings.app_version}: {args.command}")

    try:
        if args.command == "report":
            report = RunCoordinator.cmd_report(Path(args.out))
        else:
            report = asyncio.run(run_command(args))
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        print(str(e), file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except FileNotFoundError as e:
        logger.error(f"No report to render: {e}")
        return EXIT_CONFIG_ERROR

    print(f"{report.instance} {report.command}: {'PASS' if report.passed else 'FAIL'}")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
