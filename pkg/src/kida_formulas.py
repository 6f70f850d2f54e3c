"""
Riemann-Hurwitz type formulas for lambda-invariants along a p-extension
K_inf / k_inf of Z_p-extensions. Everything here is integer arithmetic on
trusted local data; nothing decides reduction types or splitting.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from sympy import factorint

from src.errors import MissingLocalData, UnknownFormula

logger = logging.getLogger(__name__)

REDUCTION_LABELS = ("good", "split", "pot_good", "pot_split", "other")
LIE_VARIANTS = ("split", "unramified")


def _prime_power(n: int) -> bool:
    return n >= 1 and len(factorint(n)) <= 1


@dataclass(frozen=True)
class PrimeDatum:
    """A class of `count` primes sharing ramification index e and inertia degree f."""
    e: int = 1
    f: int = 1
    count: int = 1
    label: str | None = None
    local_lambda_base: int | None = None
    local_lambda_top: int | None = None

    def __post_init__(self) -> None:
        if self.e < 1 or self.f < 1 or self.count < 1:
            raise ValueError(f"prime datum needs e, f, count >= 1, got e={self.e} f={self.f} count={self.count}")
        if self.label is not None and self.label not in REDUCTION_LABELS:
            raise ValueError(f"unknown reduction label '{self.label}', expected one of {REDUCTION_LABELS}")
        for value in (self.local_lambda_base, self.local_lambda_top):
            if value is not None and value < 0:
                raise ValueError("local lambda values are nonnegative")

    @property
    def n(self) -> int:
        return self.e * self.f

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"e": self.e, "f": self.f, "count": self.count}
        if self.label is not None:
            out["label"] = self.label
        if self.local_lambda_base is not None:
            out["localLambdaBase"] = self.local_lambda_base
        if self.local_lambda_top is not None:
            out["localLambdaTop"] = self.local_lambda_top
        return out


def _check_degree(degree: int) -> None:
    if degree < 1 or not _prime_power(degree):
        raise ValueError(f"degree {degree} is not a prime power")


@dataclass(frozen=True)
class GenericOrdInput:
    degree: int
    lambda_sel_base: int
    lambda_h0a_base: int = 0
    delta_base: int = 0
    lambda_h0a_top: int = 0
    delta_top: int = 0
    primes: tuple[PrimeDatum, ...] = ()

    def __post_init__(self) -> None:
        _check_degree(self.degree)
        if min(self.lambda_sel_base, self.lambda_h0a_base, self.delta_base,
               self.lambda_h0a_top, self.delta_top) < 0:
            raise ValueError("global lambda and delta terms are nonnegative")


@dataclass(frozen=True)
class LieRankInput:
    lambda_base: int
    delta: int = 0
    lambda_h0a_base: int = 0
    delta_base: int = 0
    primes: tuple[PrimeDatum, ...] = ()

    def __post_init__(self) -> None:
        if self.delta not in (0, 1):
            raise ValueError(f"delta must be 0 or 1, got {self.delta}")
        if min(self.lambda_base, self.lambda_h0a_base, self.delta_base) < 0:
            raise ValueError("lambda and delta terms are nonnegative")


@dataclass(frozen=True)
class FormulaResult:
    lambda_top: int
    warnings: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict[str, Any]:
        return {"lambdaTop": self.lambda_top, "warnings": list(self.warnings)}


# ---------------------------------------------------------------------------
# Evaluators
# ---------------------------------------------------------------------------

def eval_main_ord(inp: GenericOrdInput) -> int:
    """
    lambda(Sel top) = [K:k] (lambda(Sel) - lambda(H0 A) - delta)_base
                      + lambda(H0 A)_top + delta_top
                      + sum_w n_w lambda(local base) - lambda(local top).
    """
    local = 0
    for w in inp.primes:
        if w.local_lambda_base is None or w.local_lambda_top is None:
            raise MissingLocalData(f"prime datum {w.to_dict()} lacks local lambda values")
        local += w.count * (w.n * w.local_lambda_base - w.local_lambda_top)
    base = inp.lambda_sel_base - inp.lambda_h0a_base - inp.delta_base
    return inp.degree * base + inp.lambda_h0a_top + inp.delta_top + local


def eval_totally_real(degree: int, lambda_base: int, primes: Sequence[PrimeDatum] = (),
                      xs: bool = False) -> int:
    """lambda - 1 scales by the degree; the S-ramified variant has no prime term."""
    _check_degree(degree)
    ramified = 0 if xs else sum(w.count * (w.e - 1) for w in primes)
    return degree * (lambda_base - 1) + 1 + ramified


def eval_cm_split(degree: int, delta: int, lambda_base: int, primes: Sequence[PrimeDatum] = ()) -> int:
    _check_degree(degree)
    return degree * (lambda_base - delta) + delta + sum(w.count * (w.n - 1) for w in primes)


def eval_kida_classical(degree: int, delta: int, lambda_base: int, primes: Sequence[PrimeDatum] = ()) -> int:
    """Minus-part formula over non-p-adic primes split in the CM extension."""
    _check_degree(degree)
    return degree * (lambda_base - delta) + delta + sum(w.count * (w.e - 1) for w in primes)


def eval_sigma_ramified(degree: int, lambda_base: int, primes: Sequence[PrimeDatum] = ()) -> int:
    # primes above Sigma are excluded by the caller
    _check_degree(degree)
    return degree * (lambda_base - 1) + 1 + sum(w.count * (w.n - 1) for w in primes)


def local_rank_hm1(reduction_type: str, has_p_torsion_point: bool) -> int:
    """lambda of the local H0 term of E[p^inf] at a non-p-adic prime."""
    if reduction_type == "good" and has_p_torsion_point:
        return 2
    if reduction_type == "split":
        return 1
    return 0


def elliptic_local_pair(label: str, has_p_torsion_point: bool = True) -> tuple[int, int]:
    """
    (base, top) local ranks at a prime of the given reduction label. Potentially
    good or split primes acquire their rank only upstairs.
    """
    if label == "pot_good":
        return 0, local_rank_hm1("good", True)
    if label == "pot_split":
        return 0, local_rank_hm1("split", False)
    rank = local_rank_hm1(label, has_p_torsion_point)
    return rank, rank


def eval_elliptic_ordinary(degree: int, lambda_base: int, primes: Sequence[PrimeDatum] = ()) -> int:
    _check_degree(degree)
    total = degree * lambda_base
    for w in primes:
        if w.label is None:
            raise MissingLocalData(f"prime datum {w.to_dict()} lacks a reduction label")
        if w.label == "good":
            total += w.count * 2 * (w.e - 1)
        elif w.label == "split":
            total += w.count * (w.e - 1)
        elif w.label == "pot_good":
            total -= 2 * w.count
        elif w.label == "pot_split":
            total -= w.count
    return total


def eval_elliptic_supersingular(degree: int, lambda_base: int, primes: Sequence[PrimeDatum] = (),
                                epsilon: str | None = None) -> int:
    """Signed Selmer groups obey the ordinary formula; epsilon is recorded only."""
    logger.debug(f"supersingular formula with signs {epsilon!r}")
    return eval_elliptic_ordinary(degree, lambda_base, primes)


def eval_lie_rank(inp: LieRankInput, cm: bool = False, variant: str = "split") -> int:
    """
    Z_p-rank over a p-adic Lie extension. Only primes that do not split
    completely are passed in; the CM shortcut counts each with local rank one.
    """
    if variant not in LIE_VARIANTS:
        raise ValueError(f"unknown Lie variant '{variant}', expected one of {LIE_VARIANTS}")
    if cm:
        return inp.lambda_base - inp.delta + sum(w.count for w in inp.primes)
    local = 0
    for w in inp.primes:
        if w.local_lambda_base is None:
            raise MissingLocalData(f"prime datum {w.to_dict()} lacks its local lambda")
        local += w.count * w.local_lambda_base
    return inp.lambda_base - inp.lambda_h0a_base - inp.delta_base + local


def translate_elliptic(degree: int, lambda_base: int, primes: Sequence[PrimeDatum]) -> GenericOrdInput:
    """Elliptic ordinary data as generic input: finite global torsion, local values from the rank table."""
    generic = []
    for w in primes:
        base, top = elliptic_local_pair(w.label or "other")
        generic.append(PrimeDatum(e=w.e, f=1, count=w.count, label=w.label,
                                  local_lambda_base=base, local_lambda_top=top))
    return GenericOrdInput(degree, lambda_base, primes=tuple(generic))


# ---------------------------------------------------------------------------
# Towers and rank bookkeeping
# ---------------------------------------------------------------------------

def compose_tower(lower: Sequence[PrimeDatum], upper_fibers: Sequence[Sequence[PrimeDatum]],
                  upper_degree: int) -> tuple[tuple[PrimeDatum, ...], tuple[PrimeDatum, ...]]:
    """
    Compose k_inf < K_inf < L_inf. upper_fibers[k] lists the primes of L_inf above
    one prime of the class lower[k]; each fiber must satisfy sum count*e*f == upper_degree.
    Returns the primes of L_inf over k_inf and the primes of L_inf over K_inf.
    """
    if len(upper_fibers) != len(lower):
        raise ValueError("one fiber per lower prime class is required")
    composed, upper = [], []
    for w, fiber in zip(lower, upper_fibers):
        if sum(u.count * u.n for u in fiber) != upper_degree:
            raise ValueError(f"fiber above {w.to_dict()} does not exhaust the degree {upper_degree}")
        for u in fiber:
            composed.append(PrimeDatum(e=w.e * u.e, f=w.f * u.f, count=w.count * u.count))
            upper.append(PrimeDatum(e=u.e, f=u.f, count=w.count * u.count))
    return tuple(composed), tuple(upper)


@dataclass(frozen=True)
class RankBalance:
    p_adic: int
    archimedean: int

    @property
    def balanced(self) -> bool:
        return self.p_adic == self.archimedean

    def to_dict(self) -> dict[str, Any]:
        return {"pAdic": self.p_adic, "archimedean": self.archimedean, "balanced": self.balanced}


def selmer_rank_balance(p_adic_terms: Sequence[tuple[int, int]], real_terms: Sequence[int],
                        complex_terms: Sequence[int]) -> RankBalance:
    """
    sum_{v | p} [k_v:Q_p] rank T_v^-  against  sum_{v real} rank T^(j_v=-1) + sum_{v complex} rank T.
    Equality is the vanishing of the Euler characteristic of the Selmer complex.
    """
    lhs = sum(local_degree * rank for local_degree, rank in p_adic_terms)
    return RankBalance(lhs, sum(real_terms) + sum(complex_terms))


# ---------------------------------------------------------------------------
# Dispatch on the "formula" tag
# ---------------------------------------------------------------------------

def _primes(data: dict[str, Any]) -> tuple[PrimeDatum, ...]:
    return tuple(data.get("primes", ()))


FORMULAS: dict[str, Callable[[dict[str, Any]], int]] = {
    "main-ord": lambda d: eval_main_ord(GenericOrdInput(
        d["degree"], d["lambda_sel_base"], d.get("lambda_h0a_base", 0), d.get("delta_base", 0),
        d.get("lambda_h0a_top", 0), d.get("delta_top", 0), _primes(d))),
    "totally-real": lambda d: eval_totally_real(d["degree"], d["lambda_base"], _primes(d), d.get("xs", False)),
    "cm-split": lambda d: eval_cm_split(d["degree"], d["delta"], d["lambda_base"], _primes(d)),
    "kida-classical": lambda d: eval_kida_classical(d["degree"], d["delta"], d["lambda_base"], _primes(d)),
    "sigma-ramified": lambda d: eval_sigma_ramified(d["degree"], d["lambda_base"], _primes(d)),
    "local-rank-hm1": lambda d: local_rank_hm1(d["reduction_type"], d["has_p_torsion_point"]),
    "elliptic-ordinary": lambda d: eval_elliptic_ordinary(d["degree"], d["lambda_base"], _primes(d)),
    "elliptic-supersingular": lambda d: eval_elliptic_supersingular(
        d["degree"], d["lambda_base"], _primes(d), d.get("epsilon")),
    "lie-rank": lambda d: eval_lie_rank(LieRankInput(
        d["lambda_base"], d.get("delta", 0), d.get("lambda_h0a_base", 0), d.get("delta_base", 0), _primes(d)),
        d.get("cm", False), d.get("variant", "split")),
}
FORMULA_ALIASES = {"kida-cm-unramified": "kida-classical"}

# required schema fields per tag
FORMULA_FIELDS: dict[str, tuple[str, ...]] = {
    "main-ord": ("degree", "lambdaSelBase"),
    "totally-real": ("degree", "lambdaBase"),
    "cm-split": ("degree", "delta", "lambdaBase"),
    "kida-classical": ("degree", "delta", "lambdaBase"),
    "sigma-ramified": ("degree", "lambdaBase"),
    "local-rank-hm1": ("reductionType", "hasPTorsionPoint"),
    "elliptic-ordinary": ("degree", "lambdaBase"),
    "elliptic-supersingular": ("degree", "lambdaBase"),
    "lie-rank": ("lambdaBase",),
}


def formula_tags() -> list[str]:
    return sorted(list(FORMULAS) + list(FORMULA_ALIASES))


def resolve_formula(tag: str) -> str:
    tag = FORMULA_ALIASES.get(tag, tag)
    if tag not in FORMULAS:
        raise UnknownFormula(f"unknown formula '{tag}'; valid formulas: {', '.join(formula_tags())}",
                             valid=formula_tags())
    return tag


def evaluate(tag: str, data: dict[str, Any]) -> FormulaResult:
    """Evaluate the formula named by tag on already-typed data (snake_case keys)."""
    value = FORMULAS[resolve_formula(tag)](data)
    warnings: list[str] = []
    if value < 0:
        message = f"{tag} predicts a negative lambda ({value}); the input violates the formula's hypotheses"
        logger.warning(message)
        warnings.append(message)
    return FormulaResult(value, tuple(warnings))
