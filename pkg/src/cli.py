import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import typer
from rich.console import Console
from rich.panel import Panel

from src.coeff import PrecisionContext
from src.config import (
    VERSION, DEFAULT_PRIME, DEFAULT_COEFF_PRECISION, DEFAULT_T_PRECISION, DEFAULT_MATRIX_BUDGET,
    DEFAULT_JOBS, WORD_BOUND, LAMBDA_METHODS, EXIT_FAILURE, EXIT_SCHEMA, default_n_range,
)
from src.core import (
    RunReport, VerificationJob, MODULE_METHODS, prepare_report, module_report, complex_report,
    formula_report, describe,
)
from src.errors import IwalabError, SchemaError
from src.group_ring import PGroup, cyclic_group, product_group, trivial_group
from src.logger import setup_logging
from src.sampling import FAMILIES
from src.schema import parse_element, parse_module, parse_complex, parse_formula, parse_group
from src.utils import parse_range

logger = logging.getLogger(__name__)
app = typer.Typer(help="iwalab: lambda and mu invariants of Iwasawa modules and perfect complexes.")
console = Console()


@dataclass
class Settings:
    context: PrecisionContext
    n_range: tuple[int, int] | None
    budget: int
    jobs: int
    verbose: bool


def _settings(ctx: typer.Context) -> Settings:
    return ctx.obj


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise SchemaError(f"{path} is not UTF-8 text: {e}")


def _emit(report: RunReport, output: Path | None) -> None:
    if output:
        output.write_text(report.to_json() + "\n", encoding="utf-8")
        describe(report)
        console.print(f"Report saved to: [bold]{output}[/bold]")
    else:
        typer.echo(report.to_json())
    if report.exit_code:
        raise typer.Exit(code=report.exit_code)


def _guarded(action: Callable[[], RunReport], output: Path | None) -> None:
    try:
        report = action()
    except IwalabError as e:
        logger.error(f"{type(e).__name__}: {e}")
        console.print(Panel(str(e), title=type(e).__name__, border_style="red"))
        raise typer.Exit(code=e.exit_code)
    except ValueError as e:
        logger.error(f"invalid input: {e}")
        console.print(f"[bold red]Error:[/bold red] {e}")
        raise typer.Exit(code=EXIT_FAILURE)
    except Exception as e:
        logger.exception("An unexpected error occurred.")
        console.print(f"[bold red]Critical Error:[/bold red] {e}")
        raise typer.Exit(code=EXIT_FAILURE)
    _emit(report, output)


def group_from_spec(spec: str, p: int) -> PGroup:
    """'1' for the trivial group, '9' for Z/9, '3x3' for Z/3 x Z/3."""
    G = trivial_group(p)
    for part in spec.lower().split("x"):
        n = int(part)
        if n > 1:
            H = cyclic_group(n, p)
            G = product_group(G, H) if G.order > 1 else H
    return G


@app.callback()
def main(
    ctx: typer.Context,
    prime: int = typer.Option(DEFAULT_PRIME, "--prime", "-p", help="The prime p"),
    coeff_precision: int = typer.Option(DEFAULT_COEFF_PRECISION, "--coeff-precision", help="Coefficients mod p^N"),
    t_precision: int = typer.Option(DEFAULT_T_PRECISION, "--t-precision", help="Series truncated mod T^M"),
    n_range: str = typer.Option(None, "--n-range", help="Layer range for growth computations, e.g. 0:4"),
    matrix_budget: int = typer.Option(DEFAULT_MATRIX_BUDGET, "--matrix-budget", help="Largest layer matrix size"),
    jobs: int = typer.Option(DEFAULT_JOBS, "--jobs", "-j", help="Parallel workers for batch runs"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose logging"),
):
    """
    Global precision and budget flags shared by every command.
    """
    # the console stays quiet unless asked for with -v or IWALAB_LOG_LEVEL
    setup_logging(verbose, console_output=verbose or "IWALAB_LOG_LEVEL" in os.environ,
                  run_label=f"{ctx.invoked_subcommand or 'iwalab'}-p{prime}")
    try:
        context = PrecisionContext(prime, coeff_precision, t_precision)
        layers = parse_range(n_range) if n_range else None
    except IwalabError as e:
        console.print(Panel(str(e), title=type(e).__name__, border_style="red"))
        raise typer.Exit(code=e.exit_code)
    except ValueError:
        console.print(f"[bold red]Error:[/bold red] --n-range expects 'lo:hi', got '{n_range}'")
        raise typer.Exit(code=EXIT_SCHEMA)
    ctx.obj = Settings(context, layers, matrix_budget, jobs, verbose)


@app.command()
def prepare(
    ctx: typer.Context,
    file: Path = typer.Argument(..., help="Element file", exists=True, dir_okay=False, readable=True),
    output: Path = typer.Option(None, "--output", "-o", help="Write the report here"),
):
    """
    Weierstrass preparation of a power series: mu, lambda, distinguished polynomial and unit.
    """
    s = _settings(ctx)
    _guarded(lambda: prepare_report(parse_element(_read(file), s.context)), output)


@app.command()
def module(
    ctx: typer.Context,
    file: Path = typer.Argument(..., help="Module presentation file", exists=True, dir_okay=False, readable=True),
    method: str = typer.Option("both", "--method", "-m", help=f"One of {', '.join(MODULE_METHODS)}"),
    output: Path = typer.Option(None, "--output", "-o", help="Write the report here"),
):
    """
    Invariants of a finitely presented Lambda-module, by determinant, by layer growth, or both.
    """
    s = _settings(ctx)
    _guarded(lambda: module_report(parse_module(_read(file), s.context), method, s.n_range, s.budget, s.jobs),
             output)


@app.command("complex")
def complex_(
    ctx: typer.Context,
    file: Path = typer.Argument(..., help="Complex file", exists=True, dir_okay=False, readable=True),
    method: str = typer.Option("residual", "--method", "-m", help=f"One of {', '.join(LAMBDA_METHODS)}"),
    output: Path = typer.Option(None, "--output", "-o", help="Write the report here"),
):
    """
    Classify a perfect complex, compute lambda(C), and check the base change identity.
    """
    s = _settings(ctx)
    _guarded(lambda: complex_report(parse_complex(_read(file), s.context), method, s.n_range, s.budget), output)


@app.command("verify-kida")
def verify_kida(
    ctx: typer.Context,
    group: str = typer.Option("3", "--group", "-g", help="Cyclic orders, e.g. 3, 9 or 3x3"),
    group_file: Path = typer.Option(None, "--group-file", help="Group file with a Cayley table", exists=True),
    family: str = typer.Option("a", "--family", "-f", help=f"Random family, one of {', '.join(FAMILIES)}"),
    seeds: str = typer.Option("0:200", "--seeds", "-s", help="Seed range start:stop"),
    method: str = typer.Option("residual", "--method", "-m", help=f"One of {', '.join(LAMBDA_METHODS)}"),
    output: Path = typer.Option(None, "--output", "-o", help="Write the report here"),
):
    """
    Seeded batch check that mu = 0 passes to the base change and lambda(C) = |G| lambda(C-bar).
    """
    s = _settings(ctx)

    def action() -> RunReport:
        p = s.context.p
        G = parse_group(_read(group_file), p) if group_file else group_from_spec(group, p)
        if family not in FAMILIES:
            raise ValueError(f"unknown family '{family}', expected one of {FAMILIES}")
        if method not in LAMBDA_METHODS:
            raise ValueError(f"unknown method '{method}', expected one of {LAMBDA_METHODS}")
        job = VerificationJob(s.context, G, parse_range(seeds), family, method, s.n_range, s.budget,
                              s.jobs, s.verbose or output is None)
        return job.run()

    _guarded(action, output)


@app.command()
def formula(
    ctx: typer.Context,
    file: Path = typer.Argument(..., help="Formula record", exists=True, dir_okay=False, readable=True),
    output: Path = typer.Option(None, "--output", "-o", help="Write the report here"),
):
    """
    Evaluate a Kida-type formula record.
    """
    _guarded(lambda: formula_report(*parse_formula(_read(file))), output)


@app.command()
def check(ctx: typer.Context):
    """
    Check the precision settings and the numeric stack.
    """
    import numpy
    import sympy

    s = _settings(ctx)
    c = s.context
    console.print(f"[bold]Checking iwalab {VERSION} Environment...[/bold]\n")
    console.print(f"[green]✓[/green] numpy {numpy.__version__}")
    console.print(f"[green]✓[/green] sympy {sympy.__version__}")
    console.print(f"[green]✓[/green] p={c.p}, N={c.N}, M={c.M}: p^N = {c.modulus} < 2^63 = {WORD_BOUND}")
    console.print(f"[green]✓[/green] layers {s.n_range or default_n_range(c.p)}, matrix budget {s.budget}")


if __name__ == "__main__":
    app()
