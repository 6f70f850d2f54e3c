"""
Finitely presented Lambda-modules M = Lambda^g / A Lambda^r and their
lambda/mu invariants, by the determinant route and by layer growth.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb
from typing import Any

from src.coeff import PrecisionContext, ResidueMatrix, cokernel_profile
from src.config import DEFAULT_MATRIX_BUDGET, MIN_STABLE_LAYERS
from src.errors import (
    NotSquare, ZeroDeterminant, InfiniteQuotient, PrecisionExhausted, PrecisionError, Unstable,
)
from src.iwasawa_ring import IwasawaElement, weierstrass_prepare
from src.linalg import LambdaMatrix, exact_determinant, frac_rank, rational_rank

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LambdaModule:
    generators: int
    relations: LambdaMatrix

    def __post_init__(self) -> None:
        if self.relations.rows != self.generators:
            raise ValueError(f"relation matrix has {self.relations.rows} rows for {self.generators} generators")
        if not self.relations.is_exact:
            raise ValueError("module presentations must have exact polynomial entries")

    @property
    def context(self) -> PrecisionContext:
        return self.relations.context

    @classmethod
    def cyclic(cls, f: IwasawaElement) -> "LambdaModule":
        """Lambda/(f)."""
        return cls(1, LambdaMatrix.from_rows(f.context, [[f]]))

    @classmethod
    def free(cls, ctx: PrecisionContext, rank: int) -> "LambdaModule":
        return cls(rank, LambdaMatrix.zero(ctx, rank, 0))


@dataclass(frozen=True)
class InvariantReport:
    torsion: bool
    method: str
    lambda_: int | None = None
    mu: int | None = None
    nu: int | None = None
    details: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not self.torsion and (self.lambda_ is not None or self.mu is not None):
            raise ValueError("a non-torsion module carries no finite invariants")

    @property
    def invariants(self) -> tuple[int | None, int | None]:
        return self.lambda_, self.mu

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"method": self.method, "torsion": self.torsion}
        if self.torsion:
            out["lambda"] = self.lambda_
            out["mu"] = self.mu
        else:
            out["lambda"] = "inf"
            out["mu"] = "inf"
        if self.nu is not None:
            out["nu"] = self.nu
        out.update(self.details)
        return out


def direct_sum(M1: LambdaModule, M2: LambdaModule) -> LambdaModule:
    ctx = M1.context
    A, B = M1.relations, M2.relations
    block = LambdaMatrix.block(ctx, [
        [A, LambdaMatrix.zero(ctx, A.rows, B.cols)],
        [LambdaMatrix.zero(ctx, B.rows, A.cols), B],
    ])
    return LambdaModule(M1.generators + M2.generators, block)


def exact_invariants(M: LambdaModule) -> InvariantReport:
    """(lambda, mu) of a square presentation from the Weierstrass data of its determinant."""
    A = M.relations
    if A.rows != A.cols:
        raise NotSquare(f"determinant route needs a square presentation, got {A.rows}x{A.cols}")
    det = exact_determinant(A)
    if not any(det):
        raise ZeroDeterminant("determinant vanishes identically; the module is not torsion",
                              identically_zero=True)
    element = IwasawaElement.polynomial(M.context, det)
    try:
        prep = weierstrass_prepare(element)
    except PrecisionError as exc:
        raise ZeroDeterminant(f"determinant is invisible at this precision: {exc}",
                              identically_zero=False) from exc
    logger.debug(f"determinant route: det={det}, lambda={prep.lambda_}, mu={prep.mu}")
    return InvariantReport(True, "determinant", prep.lambda_, prep.mu,
                           details={"determinant": element.lift()})


# ---------------------------------------------------------------------------
# Finite layers M / omega_n M
# ---------------------------------------------------------------------------

def omega_coefficients(p: int, n: int) -> list[int]:
    """Integer coefficients of (1+T)^(p^n) - 1, lowest degree first."""
    d = p ** n
    return [0] + [comb(d, i) for i in range(1, d + 1)]


def divmod_monic(coeffs: list[int], monic: list[int], modulus: int | None) -> tuple[list[int], list[int]]:
    """Long division by a monic polynomial in (Z/modulus)[T], or Z[T] without a modulus."""
    d = len(monic) - 1
    work = list(coeffs)
    quotient = [0] * max(len(work) - d, 0)
    for top in range(len(work) - 1, d - 1, -1):
        c = work[top] % modulus if modulus else work[top]
        if not c:
            continue
        quotient[top - d] = c
        for i in range(d + 1):
            work[top - d + i] -= c * monic[i]
        if modulus:
            for i in range(top - d, top + 1):
                work[i] %= modulus
    out = (work + [0] * d)[:d]
    return quotient, ([c % modulus for c in out] if modulus else out)


def _reduce_mod_monic(coeffs: list[int], monic: list[int], modulus: int | None) -> list[int]:
    return divmod_monic(coeffs, monic, modulus)[1]


def layer_block(coeffs: list[int], monic: list[int], modulus: int | None = None) -> list[list[int]]:
    """
    Matrix of multiplication by a(T) on Z_p[T]/(monic) in the basis 1, T, ...;
    column j holds a(T) * T^j reduced.
    """
    d = len(monic) - 1
    cols = [_reduce_mod_monic([0] * j + list(coeffs), monic, modulus) for j in range(d)]
    return [[cols[j][i] for j in range(d)] for i in range(d)]


def quotient_matrix(A: LambdaMatrix, monic: list[int], modulus: int | None = None) -> list[list[int]]:
    """A read over Z_p through Z_p[T]/(monic) = Z_p^deg, one deg x deg block per entry."""
    d = len(monic) - 1
    rows = [[0] * (A.cols * d) for _ in range(A.rows * d)]
    for i in range(A.rows):
        for j in range(A.cols):
            entry = A.entry(i, j)
            if entry.is_zero():
                continue
            block = layer_block(entry.lift(), monic, modulus)
            for a in range(d):
                rows[i * d + a][j * d:(j + 1) * d] = block[a]
    return rows


def layer_matrix(A: LambdaMatrix, p: int, n: int, modulus: int | None = None) -> list[list[int]]:
    """The presentation A read over Z_p through Lambda/omega_n = Z_p^(p^n)."""
    return quotient_matrix(A, omega_coefficients(p, n), modulus)


def layer_profile(A: LambdaMatrix, n: int) -> tuple[int, int]:
    """cokernel_profile of A over Lambda/omega_n at the working precision."""
    ctx = A.context
    d = ctx.p ** n
    rows = layer_matrix(A, ctx.p, n, ctx.modulus)
    return cokernel_profile(ResidueMatrix.from_rows(ctx, rows, A.cols * d))


def finite_quotient_log_size(M: LambdaModule, n: int, budget: int = DEFAULT_MATRIX_BUDGET) -> int:
    """log_p |M / omega_n M|."""
    ctx = M.context
    p, N = ctx.p, ctx.N
    d = p ** n
    if M.generators == 0:
        return 0
    if M.generators * d > budget:
        raise PrecisionExhausted(f"layer {n} needs {M.generators * d} rows, over the matrix budget {budget}",
                                 n=n, budget=budget)
    size = M.generators * d
    visible, log_size = layer_profile(M.relations, n)
    if visible < size:
        if frac_rank(M.relations) < M.generators:
            raise InfiniteQuotient("presentation has a rank defect over Frac(Lambda)", n=n)
        exact_rows = layer_matrix(M.relations, p, n)
        if rational_rank(exact_rows, (size, M.relations.cols * d)) < size:
            raise InfiniteQuotient(f"M / omega_{n} M is infinite", n=n)
        raise PrecisionExhausted(f"layer {n} has elementary divisors at p^{N} or beyond", n=n)
    logger.debug(f"layer n={n}: |M/omega_n M| = p^{log_size}")
    return log_size


def fit_growth(sizes: dict[int, int], p: int) -> tuple[int, int, int, int]:
    """
    Solve s_n = mu*p^n + lambda*n + nu from the last three layers and return
    (mu, lambda, nu, n0) with n0 the first layer from which the fit is exact.
    """
    ns = sorted(sizes)
    if len(ns) < MIN_STABLE_LAYERS:
        raise Unstable(f"need at least {MIN_STABLE_LAYERS} layers to fit growth, got {len(ns)}")
    n = ns[-3]
    s0, s1, s2 = sizes[n], sizes[n + 1], sizes[n + 2]
    d1, d2 = s1 - s0, s2 - s1
    scale = p ** n * (p - 1) ** 2
    if (d2 - d1) % scale:
        raise Unstable(f"layer sizes {[sizes[k] for k in ns]} give a non-integral mu")
    mu = (d2 - d1) // scale
    lam = d1 - mu * p ** n * (p - 1)
    nu = s0 - mu * p ** n - lam * n
    if mu < 0 or lam < 0:
        raise Unstable(f"layer sizes {[sizes[k] for k in ns]} give mu={mu}, lambda={lam}")
    n0 = ns[-1]
    for k in reversed(ns):
        if sizes[k] != mu * p ** k + lam * k + nu:
            break
        n0 = k
    if n0 > ns[-1] - (MIN_STABLE_LAYERS - 1):
        raise Unstable(f"growth fit mu={mu}, lambda={lam}, nu={nu} holds only from layer {n0}; "
                       f"raise n_max, N or M", sizes=[sizes[k] for k in ns])
    return mu, lam, nu, n0


def growth_invariants(M: LambdaModule, n_range: tuple[int, int], budget: int = DEFAULT_MATRIX_BUDGET,
                      jobs: int = 1) -> InvariantReport:
    """(lambda, mu, nu) from exact layer sizes log_p |M/omega_n M|."""
    p = M.context.p
    n_min, n_max = n_range
    while n_max >= n_min and M.generators * p ** n_max > budget:
        n_max -= 1
    if n_max - n_min < MIN_STABLE_LAYERS - 1:
        raise Unstable(f"range {n_range} leaves fewer than {MIN_STABLE_LAYERS} layers within budget {budget}")
    if M.generators and frac_rank(M.relations) < M.generators:
        return InvariantReport(False, "growth")
    layers = list(range(n_min, n_max + 1))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            sizes = dict(zip(layers, pool.map(lambda n: finite_quotient_log_size(M, n, budget), layers)))
    else:
        sizes = {n: finite_quotient_log_size(M, n, budget) for n in layers}
    mu, lam, nu, n0 = fit_growth(sizes, p)
    return InvariantReport(True, "growth", lam, mu, nu, details={"layers": [sizes[n] for n in layers], "n0": n0})
