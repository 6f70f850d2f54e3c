import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

from rich.console import Console
from rich.panel import Panel
from rich.progress import Progress, SpinnerColumn, TextColumn, BarColumn, MofNCompleteColumn

from src.coeff import PrecisionContext
from src.complex import PerfectComplex, classify, euler_characteristic, lambda_of_complex, verify_kida
from src.config import (
    VERSION, SCHEMA_REPORT, DEFAULT_MATRIX_BUDGET, DEFAULT_JOBS, MAX_UNSTABLE_FRACTION,
    EXIT_OK, EXIT_VIOLATION, default_n_range,
)
from src.errors import PrecisionError
from src.group_ring import PGroup
from src.iwasawa_module import LambdaModule, exact_invariants, growth_invariants
from src.iwasawa_ring import IwasawaElement, weierstrass_prepare
from src.kida_formulas import evaluate
from src.sampling import ComplexParams, random_complex, rng_for
from src.schema import serialize_element, serialize_module, serialize_complex, serialize_formula
from src.utils import canonical_json, digest

logger = logging.getLogger(__name__)
console = Console()

MODULE_METHODS = ("determinant", "growth", "both")


@dataclass
class RunReport:
    command: str
    inputs_digest: str
    results: dict[str, Any]
    warnings: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)
    seed_range: tuple[int, int] | None = None
    violations: int = 0

    @property
    def exit_code(self) -> int:
        return EXIT_VIOLATION if self.violations else EXIT_OK

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "schema": SCHEMA_REPORT,
            "version": VERSION,
            "command": self.command,
            "inputsDigest": self.inputs_digest,
            "results": self.results,
            "warnings": list(self.warnings),
            "errors": list(self.errors),
            "violations": self.violations,
        }
        if self.seed_range is not None:
            out["seedRange"] = list(self.seed_range)
        return out

    def to_json(self) -> str:
        return canonical_json(self.to_dict())


def _context_dict(ctx: PrecisionContext) -> dict[str, int]:
    return {"p": ctx.p, "N": ctx.N, "M": ctx.M}


# ---------------------------------------------------------------------------
# Single-input commands
# ---------------------------------------------------------------------------

def prepare_report(f: IwasawaElement) -> RunReport:
    ctx = f.context
    prep = weierstrass_prepare(f)
    results = {
        "mu": prep.mu,
        "lambda": prep.lambda_,
        "distinguished": prep.distinguished.lift(),
        "unit": prep.unit.lift(),
    }
    inputs = {"context": _context_dict(ctx), "element": serialize_element(f)}
    return RunReport("prepare", digest(inputs), results)


def module_report(M: LambdaModule, method: str = "both", n_range: tuple[int, int] | None = None,
                  budget: int = DEFAULT_MATRIX_BUDGET, jobs: int = 1) -> RunReport:
    if method not in MODULE_METHODS:
        raise ValueError(f"unknown method '{method}', expected one of {MODULE_METHODS}")
    ctx = M.context
    n_range = n_range or default_n_range(ctx.p)
    inputs = {"context": _context_dict(ctx), "module": serialize_module(M), "method": method,
              "nRange": list(n_range), "budget": budget}
    results: dict[str, Any] = {}
    report = RunReport("module", digest(inputs), results)
    if method in ("determinant", "both"):
        results["determinant"] = exact_invariants(M).to_dict()
    if method in ("growth", "both"):
        results["growth"] = growth_invariants(M, n_range, budget, jobs).to_dict()
    if method == "both":
        det, growth = results["determinant"], results["growth"]
        agree = (det["lambda"], det["mu"]) == (growth["lambda"], growth["mu"])
        results["crossCheck"] = "pass" if agree else "fail"
        if not agree:
            message = f"determinant route {det['lambda'], det['mu']} and growth route " \
                      f"{growth['lambda'], growth['mu']} disagree"
            logger.warning(message)
            report.errors.append(message)
            report.violations += 1
    return report


def complex_report(C: PerfectComplex, method: str = "residual", n_range: tuple[int, int] | None = None,
                   budget: int = DEFAULT_MATRIX_BUDGET) -> RunReport:
    inputs = {"context": _context_dict(C.context), "complex": serialize_complex(C), "method": method,
              "nRange": list(n_range) if n_range else None, "budget": budget}
    classification = classify(C)
    results: dict[str, Any] = {
        "classification": classification.to_dict(),
        "eulerCharacteristic": euler_characteristic(C),
    }
    report = RunReport("complex", digest(inputs), results)
    if classification.mu_zero:
        results["lambda"] = lambda_of_complex(C, method, n_range, budget)
    kida = verify_kida(C, method, n_range, budget)
    results["kida"] = kida.to_dict()
    if kida.violation:
        report.errors.append(f"THEOREM VIOLATION: {kida.to_dict()}")
        report.violations += 1
    return report


def formula_report(tag: str, data: dict[str, Any]) -> RunReport:
    result = evaluate(tag, data)
    return RunReport("formula", digest(serialize_formula(tag, data)), result.to_dict(),
                     warnings=list(result.warnings))


# ---------------------------------------------------------------------------
# Seeded batch verification
# ---------------------------------------------------------------------------

def run_trial(ctx: PrecisionContext, group: PGroup, family: str, seed: int, method: str,
              n_range: tuple[int, int] | None, budget: int) -> dict[str, Any]:
    """One seeded draw; precision failures are recorded, never raised."""
    length = rng_for(seed, "trial-length").randint(1, 3)
    params = ComplexParams(group, family, length=length)
    trial: dict[str, Any] = {"seed": seed, "family": family, "length": length}
    try:
        C = random_complex(ctx, params, seed)
        trial["ranks"] = list(C.ranks)
        trial.update(verify_kida(C, method, n_range, budget).to_dict())
    except PrecisionError as e:
        trial["outcome"] = "unstable"
        trial["error"] = f"{type(e).__name__}: {e}"
    return trial


def _run_trial_args(args: tuple) -> dict[str, Any]:
    return run_trial(*args)


class VerificationJob:
    def __init__(self, ctx: PrecisionContext, group: PGroup, seeds: tuple[int, int], family: str = "a",
                 method: str = "residual", n_range: tuple[int, int] | None = None,
                 budget: int = DEFAULT_MATRIX_BUDGET, jobs: int = DEFAULT_JOBS, verbose: bool = False):
        self.ctx = ctx
        self.group = group
        self.seeds = seeds
        self.family = family
        self.method = method
        self.n_range = n_range
        self.budget = budget
        self.jobs = jobs
        self.verbose = verbose

    def _inputs(self) -> dict[str, Any]:
        return {
            "context": _context_dict(self.ctx),
            "group": self.group.to_dict(),
            "family": self.family,
            "method": self.method,
            "nRange": list(self.n_range) if self.n_range else None,
            "budget": self.budget,
        }

    def run(self) -> RunReport:
        start, stop = self.seeds
        args = [(self.ctx, self.group, self.family, s, self.method, self.n_range, self.budget)
                for s in range(start, stop)]
        logger.info(f"verify-kida: {len(args)} trials, |G|={self.group.order}, family {self.family}")

        if not self.verbose:
            summary = (
                f"  [bold]Group:[/bold]    order {self.group.order}\n"
                f"  [bold]Family:[/bold]   {self.family}\n"
                f"  [bold]Seeds:[/bold]    {start}:{stop}\n"
                f"  [bold]Precision:[/bold] p={self.ctx.p}, N={self.ctx.N}, M={self.ctx.M}"
            )
            console.print(Panel(summary, title="Verification", expand=False, border_style="cyan"))

        trials: list[dict[str, Any]] = []
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            MofNCompleteColumn(),
            transient=True,
            disable=self.verbose
        ) as progress:
            task_id = progress.add_task("Verifying...", total=len(args))
            if self.jobs > 1:
                with ProcessPoolExecutor(max_workers=self.jobs) as pool:
                    # map keeps seed order, so the report does not depend on scheduling
                    for trial in pool.map(_run_trial_args, args):
                        trials.append(trial)
                        progress.advance(task_id)
            else:
                for a in args:
                    trials.append(run_trial(*a))
                    progress.advance(task_id)
        return self._report(trials)

    def _report(self, trials: list[dict[str, Any]]) -> RunReport:
        outcomes = Counter(t["outcome"] for t in trials)
        pairs = Counter(f"{t['lambdaC']}/{t['lambdaCbar']}" for t in trials if "lambdaC" in t)
        results = {
            "trials": trials,
            "summary": {
                "total": len(trials),
                "outcomes": dict(sorted(outcomes.items())),
                "lambdaPairs": dict(sorted(pairs.items())),
            },
        }
        report = RunReport("verify-kida", digest(self._inputs()), results, seed_range=self.seeds,
                           violations=outcomes.get("violation", 0))
        for t in trials:
            if t["outcome"] == "violation":
                report.errors.append(f"THEOREM VIOLATION at seed {t['seed']}")
            elif t["outcome"] == "unstable":
                report.warnings.append(f"seed {t['seed']}: {t['error']}")
        if trials and outcomes.get("unstable", 0) > MAX_UNSTABLE_FRACTION * len(trials):
            message = f"{outcomes['unstable']} of {len(trials)} trials were undecided at this precision"
            logger.warning(message)
            report.warnings.append(message)
        logger.info(f"verify-kida finished: {dict(outcomes)}")
        return report


def describe(report: RunReport) -> None:
    """Human summary of a report on the rich console."""
    if report.errors:
        for e in report.errors:
            console.print(f"[bold red]Error:[/bold red] {e}")
    for w in report.warnings[:10]:
        console.print(f"[bold yellow]Warning:[/bold yellow] {w}")
    if len(report.warnings) > 10:
        console.print(f"[dim]... {len(report.warnings) - 10} more warnings in the report[/dim]")
    if report.exit_code == EXIT_OK:
        console.print(f"[green]✓[/green] {report.command} finished without violations")
