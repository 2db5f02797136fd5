"""
Command-line interface for the Killing-Poisson toolkit
"""

import argparse
import json
import logging
import os
import sys
import time
from contextlib import contextmanager
from typing import Any, Dict, List, Optional, Sequence

try:
    from rich.console import Console
    from rich.logging import RichHandler
    from rich.markup import escape
    from rich.panel import Panel
    from rich.table import Table
    RICH_AVAILABLE = True
except ImportError:
    RICH_AVAILABLE = False

    def escape(text: str) -> str:
        return text

from . import __version__
from .checks import run_check
from .config import ChartConfig, LieAlgebraConfig
from .contraconn import DEFAULT_RANK_TOL
from .errors import KillingPoissonError, SpecError
from .fixtures import CHART, FIXTURES, LIE, emit, list_fixtures, load_fixture
from .liealg import lie_pipeline

logger = logging.getLogger(__name__)

EXIT_PASS, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    """Route library logging to stderr, through rich when available"""
    level = logging.DEBUG if verbose else logging.ERROR if quiet else logging.WARNING
    if RICH_AVAILABLE:
        handler = RichHandler(console=Console(stderr=True), show_path=False, markup=False)
        fmt = "%(message)s"
    else:
        handler = logging.StreamHandler(sys.stderr)
        fmt = "%(levelname)s %(name)s: %(message)s"
    logging.basicConfig(level=level, format=fmt, handlers=[handler], force=True)


def build_report(fixture: str, reports: Sequence[Any], wall_time: Optional[float] = None) -> Dict[str, Any]:
    """Report document with a fixed key order

    Args:
        fixture: Name of the checked document
        reports: CheckReport-like objects (``to_dict`` and ``passed``)
        wall_time: Seconds spent, only recorded when given

    Returns:
        Dictionary ready for ``json.dumps``
    """
    document = {
        "fixture": fixture,
        "checks": [report.to_dict() for report in reports],
        "pass": bool(reports) and all(report.passed for report in reports),
    }
    if wall_time is not None:
        document["wall_time"] = wall_time
    return document


def write_report(document: Dict[str, Any], path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(document, indent=2))
        f.write("\n")


def _split(text: Optional[str]) -> Optional[List[str]]:
    if not text:
        return None
    return [part.strip() for part in text.split(",") if part.strip()]


def _parameters(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


@contextmanager
def malformed_document(where: str):
    """Report type and value errors raised while reading a document as SpecError"""
    try:
        yield
    except KillingPoissonError:
        raise
    except (TypeError, ValueError, AttributeError) as e:
        raise SpecError(f"malformed document {where}: {e}") from e


class CLI:
    """Command-line interface handler"""

    def __init__(self):
        """Initialize CLI"""
        self.console = Console() if RICH_AVAILABLE else None
        self.quiet = False

    def say(self, message: str, plain: Optional[str] = None) -> None:
        """Print a rich-markup message, or its plain form without rich"""
        if self.quiet:
            return
        if RICH_AVAILABLE:
            self.console.print(message)
        else:
            print(plain if plain is not None else message)

    def error(self, message: str) -> None:
        if RICH_AVAILABLE:
            Console(stderr=True).print(f"[bold red]Error:[/bold red] {escape(message)}", highlight=False)
        else:
            print(f"Error: {message}", file=sys.stderr)

    def print_banner(self):
        """Print application banner"""
        banner = f"Killing-Poisson toolkit v{__version__}\nnumerical checks for Poisson tensors on Riemannian charts"

        if RICH_AVAILABLE:
            self.console.print(Panel(banner, style="bold blue"))
        else:
            print(banner)

    def print_reports(self, reports: Sequence[Any], title: str = "Checks"):
        """Print check outcomes in a table

        Args:
            reports: CheckReport-like objects
            title: Table title
        """
        rows = []
        for report in reports:
            worst = "-" if report.worst_point is None else "(" + ", ".join(f"{c:g}" for c in report.worst_point) + ")"
            rows.append((report.name, report.status, f"{report.max_residual:.3e}", f"{report.tolerance:.0e}", worst))

        if RICH_AVAILABLE:
            table = Table(title=title, show_header=True, header_style="bold magenta")
            table.add_column("Check", style="cyan")
            table.add_column("Status")
            table.add_column("Max residual", justify="right")
            table.add_column("Tolerance", justify="right", style="dim")
            table.add_column("Worst point", style="dim")
            colours = {"pass": "green", "fail": "red", "skipped": "yellow"}
            for name, status, residual, tol, worst in rows:
                table.add_row(escape(name), f"[{colours.get(status, 'white')}]{status}[/]", residual, tol, worst)
            self.console.print(table)
        else:
            print(f"\n{title}")
            print("-" * 72)
            for name, status, residual, tol, worst in rows:
                print(f"{name:28s} {status:8s} {residual:>11s} {tol:>7s}  {worst}")
            print("-" * 72)

        for report in reports:
            for note in report.notes:
                self.say(f"[dim]{escape(report.name)}: {escape(note)}[/dim]", f"{report.name}: {note}")
            for problem in getattr(report, "errors", ()):
                self.say(f"[red]{escape(report.name)}: {escape(problem)}[/red]", f"{report.name}: {problem}")

    def print_summary(self, passed: bool) -> None:
        if passed:
            self.say("\n[green]✓[/green] All checks passed", "\n✓ All checks passed")
        else:
            self.say("\n[red]✗[/red] Some checks failed", "\n✗ Some checks failed")

    def create_parser(self) -> argparse.ArgumentParser:
        """Create argument parser

        Returns:
            Configured ArgumentParser
        """
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument('-v', '--verbose', action='store_true', help='Log per-point progress')
        common.add_argument('-q', '--quiet', action='store_true', help='Only print errors')

        parser = argparse.ArgumentParser(
            prog="pkt",
            description="Killing-Poisson toolkit - numerical checks for Poisson tensors on Riemannian charts",
            formatter_class=argparse.RawDescriptionHelpFormatter,
            epilog="""
Examples:
  # List the shipped chart fixtures, then write one out
  pkt examples list
  pkt examples emit sqrt-so3 fixtures/

  # Run the checks declared in a chart document
  pkt check fixtures/sqrt-so3.json

  # Pick checks and tolerance on the command line, write a JSON report
  pkt check fixtures/sqrt-so3.json --checks jacobi,unimodular,freg,kp3d --tol 1e-7 --report out.json

  # Degree-2 family with other parameters
  pkt examples emit quadratic-family fixtures/ --abc 1,2,3

  # Lie algebra pipeline: CYBE, unimodularity, action, induced bivector
  pkt examples list --kind lie
  pkt examples emit heisenberg fixtures/
  pkt lie fixtures/heisenberg.json

Exit status: 0 all checks pass, 1 some check fails, 2 invalid input.
            """
        )
        parser.add_argument(
            '--version',
            action='version',
            version=f'Killing-Poisson toolkit v{__version__}'
        )
        subparsers = parser.add_subparsers(dest="command", required=True)

        check = subparsers.add_parser('check', parents=[common], help='Run checks on a chart document')
        check.add_argument('spec', help='Chart document (JSON) or the name of a shipped fixture')
        self._add_run_options(check)
        check.add_argument(
            '--checks',
            help='Comma-separated checks, e.g. jacobi,unimodular,casimir:f (default: from the document)'
        )

        lie = subparsers.add_parser('lie', parents=[common], help='Run the Lie algebra pipeline on a document')
        lie.add_argument('spec', help='Lie algebra document (JSON) or the name of a shipped fixture')
        self._add_run_options(lie)
        lie.add_argument(
            '--checks',
            help='Checks run on the induced bivector (default: from the manifold document)'
        )

        examples = subparsers.add_parser('examples', help='List or write shipped fixtures')
        actions = examples.add_subparsers(dest="action", required=True)
        listing = actions.add_parser('list', parents=[common], help='List fixture names')
        listing.add_argument(
            '--kind',
            choices=[CHART, LIE, 'all'],
            default=CHART,
            help='Chart documents, Lie algebra documents or both (default: chart)'
        )
        writer = actions.add_parser('emit', parents=[common], help='Write a fixture as JSON')
        writer.add_argument('name', choices=sorted(FIXTURES), metavar='NAME', help='Fixture name')
        writer.add_argument('directory', help='Output directory')
        writer.add_argument(
            '--abc',
            type=_parameters,
            metavar='A,B,C',
            help='Parameters of quadratic-family (default: 1,1,1)'
        )

        return parser

    @staticmethod
    def _add_run_options(subparser: argparse.ArgumentParser) -> None:
        subparser.add_argument('--tol', type=float, help='Residual tolerance (default: from the document, else 1e-8)')
        subparser.add_argument('--grid', type=int, metavar='N', help='Points per axis (default: from the document, else 5)')
        subparser.add_argument(
            '--rank-tol',
            type=float,
            default=DEFAULT_RANK_TOL,
            help=f'Relative singular value threshold for the rank of pi (default: {DEFAULT_RANK_TOL:g})'
        )
        subparser.add_argument('--report', metavar='PATH', help='Write a JSON report to PATH')
        subparser.add_argument('--timing', action='store_true', help='Record wall time in the report')

    def run(self, args: Optional[list] = None) -> int:
        """Run the CLI application

        Args:
            args: Command-line arguments (uses sys.argv if None)

        Returns:
            Exit code (0 all checks pass, 1 a check fails, 2 invalid input)
        """
        parser = self.create_parser()
        parsed_args = parser.parse_args(args)
        self.quiet = parsed_args.quiet
        configure_logging(parsed_args.verbose, parsed_args.quiet)

        if not self.quiet and parsed_args.command != "examples":
            self.print_banner()

        try:
            if parsed_args.command == "check":
                return self.cmd_check(parsed_args)
            if parsed_args.command == "lie":
                return self.cmd_lie(parsed_args)
            return self.cmd_examples(parsed_args)
        except KillingPoissonError as e:
            self.error(str(e))
            return EXIT_INVALID
        except OSError as e:
            self.error(str(e))
            return EXIT_INVALID

    def _load(self, spec: str, kind: str):
        if not os.path.exists(spec) and spec in FIXTURES and FIXTURES[spec].kind == kind:
            logger.info("using shipped fixture %s", spec)
            return load_fixture(spec)
        return ChartConfig(spec) if kind == CHART else LieAlgebraConfig(spec)

    def _finish(self, name: str, reports: Sequence[Any], parsed_args, started: float) -> int:
        wall_time = time.perf_counter() - started if parsed_args.timing else None
        document = build_report(name, reports, wall_time)
        if not self.quiet:
            self.print_reports(reports, f"{name}")
        if parsed_args.report:
            write_report(document, parsed_args.report)
            self.say(f"[dim]Report written to {parsed_args.report}[/dim]", f"Report written to {parsed_args.report}")
        self.print_summary(document["pass"])
        return EXIT_PASS if document["pass"] else EXIT_FAIL

    def cmd_check(self, parsed_args) -> int:
        """Run the checks of a chart document"""
        started = time.perf_counter()
        with malformed_document(parsed_args.spec):
            config = self._load(parsed_args.spec, CHART)
            model = config.to_model()
            grid = config.to_grid(parsed_args.grid)
            tol = config.get_tolerance(parsed_args.tol)
            checks = config.get_checks(_split(parsed_args.checks))
        # an empty grid is an input error, not a failed check
        grid.points()

        reports = []
        for spec in checks:
            logger.debug("running %s on %s", spec, model.name)
            reports.append(run_check(spec, model, grid, tol, parsed_args.rank_tol))
        return self._finish(config.name, reports, parsed_args, started)

    def cmd_lie(self, parsed_args) -> int:
        """Run the Lie algebra pipeline and the checks of the induced bivector"""
        started = time.perf_counter()
        with malformed_document(parsed_args.spec):
            config = self._load(parsed_args.spec, LIE)
            algebra = config.to_model()
            grid = None
            tol = ChartConfig.DEFAULT_TOLERANCE if parsed_args.tol is None else parsed_args.tol
            checks = _split(parsed_args.checks) or ChartConfig.DEFAULT_CHECKS
            if config.manifold is not None:
                grid = config.manifold.to_grid(parsed_args.grid)
                tol = config.manifold.get_tolerance(parsed_args.tol)
                checks = config.manifold.get_checks(_split(parsed_args.checks))

        reports = lie_pipeline(algebra, grid, tol, checks, parsed_args.rank_tol)
        return self._finish(config.name, reports, parsed_args, started)

    def cmd_examples(self, parsed_args) -> int:
        """List shipped fixtures or write one to a directory"""
        if parsed_args.action == "list":
            kind = None if parsed_args.kind == "all" else parsed_args.kind
            fixtures = list_fixtures(kind)
            if RICH_AVAILABLE:
                table = Table(show_header=True, header_style="bold magenta")
                table.add_column("Name", style="cyan")
                table.add_column("Kind")
                table.add_column("Expect")
                table.add_column("Description", style="dim")
                for fixture in fixtures:
                    table.add_row(fixture.name, fixture.kind, fixture.expect, fixture.description)
                self.console.print(table)
            else:
                for fixture in fixtures:
                    print(f"{fixture.name:24s} {fixture.kind:6s} {fixture.expect:5s} {fixture.description}")
            return EXIT_PASS

        path = emit(parsed_args.name, parsed_args.directory, parsed_args.abc)
        self.say(f"[green]✓[/green] Wrote {path}", f"✓ Wrote {path}")
        return EXIT_PASS


def main():
    """Main entry point for the CLI application"""
    cli = CLI()
    sys.exit(cli.run())


if __name__ == "__main__":
    main()
