"""
Matrices over Lambda and the three ways this project measures them:

* rank over Frac(Lambda), through the balanced integer lift evaluated at
  integer points with exact rational rank;
* T-adic elimination of the mod-p reduction over F_p[[T]] (numpy);
* exact determinants and adjugates over Z[T] (sympy).
"""
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from sympy import Matrix, Poly, Symbol, ZZ, QQ
from sympy.polys.matrices import DomainMatrix

from src.coeff import PrecisionContext
from src.config import MAX_RESIDUAL_DEPTH
from src.errors import PrecisionExhausted, NotSquare
from src.iwasawa_ring import IwasawaElement

logger = logging.getLogger(__name__)

T_SYMBOL = Symbol("T")


@dataclass(frozen=True)
class LambdaMatrix:
    """rows x cols matrix over Lambda, acting on column vectors."""
    rows: int
    cols: int
    entries: tuple[IwasawaElement, ...]
    context: PrecisionContext

    def __post_init__(self) -> None:
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(f"expected {self.rows * self.cols} entries, got {len(self.entries)}")

    @classmethod
    def from_rows(cls, ctx: PrecisionContext, rows: Sequence[Sequence[IwasawaElement]],
                  cols: int | None = None) -> "LambdaMatrix":
        ncols = cols if cols is not None else (len(rows[0]) if rows else 0)
        return cls(len(rows), ncols, tuple(e for r in rows for e in r), ctx)

    @classmethod
    def from_lists(cls, ctx: PrecisionContext, rows: Sequence[Sequence[Sequence[int]]],
                   cols: int | None = None) -> "LambdaMatrix":
        """Entries given as integer coefficient lists (exact polynomials)."""
        return cls.from_rows(ctx, [[IwasawaElement.polynomial(ctx, e) for e in r] for r in rows], cols)

    @classmethod
    def zero(cls, ctx: PrecisionContext, rows: int, cols: int) -> "LambdaMatrix":
        z = IwasawaElement.zero(ctx)
        return cls(rows, cols, (z,) * (rows * cols), ctx)

    @classmethod
    def identity(cls, ctx: PrecisionContext, n: int) -> "LambdaMatrix":
        one, z = IwasawaElement.one(ctx), IwasawaElement.zero(ctx)
        return cls(n, n, tuple(one if i == j else z for i in range(n) for j in range(n)), ctx)

    @classmethod
    def block(cls, ctx: PrecisionContext, blocks: Sequence[Sequence["LambdaMatrix"]]) -> "LambdaMatrix":
        """Assemble from a grid of blocks with consistent shapes."""
        heights = [row[0].rows for row in blocks]
        widths = [b.cols for b in blocks[0]] if blocks else []
        out: list[list[IwasawaElement]] = []
        for bi, row in enumerate(blocks):
            for b, w in zip(row, widths):
                if b.rows != heights[bi] or b.cols != w:
                    raise ValueError("inconsistent block shapes")
            for i in range(heights[bi]):
                out.append([b.entry(i, j) for b in row for j in range(b.cols)])
        return cls.from_rows(ctx, out, sum(widths))

    def entry(self, i: int, j: int) -> IwasawaElement:
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> list[IwasawaElement]:
        return list(self.entries[i * self.cols:(i + 1) * self.cols])

    def to_rows(self) -> list[list[IwasawaElement]]:
        return [self.row(i) for i in range(self.rows)]

    def to_lists(self) -> list[list[list[int]]]:
        return [[e.lift() for e in r] for r in self.to_rows()]

    def columns(self, picked: Sequence[int]) -> "LambdaMatrix":
        return LambdaMatrix.from_rows(self.context, [[r[j] for j in picked] for r in self.to_rows()], len(picked))

    def transpose(self) -> "LambdaMatrix":
        return LambdaMatrix.from_rows(self.context, [[self.entry(i, j) for i in range(self.rows)]
                                                     for j in range(self.cols)], self.rows)

    def is_zero(self) -> bool:
        return all(e.is_zero() for e in self.entries)

    @property
    def is_exact(self) -> bool:
        return all(e.is_exact for e in self.entries)

    def degree_bound(self) -> int | None:
        """Largest degree of the balanced lifts, None when some entry is truncated."""
        if not self.is_exact:
            return None
        return max((len(e.lift()) - 1 for e in self.entries), default=0)

    def __add__(self, other: "LambdaMatrix") -> "LambdaMatrix":
        self._same_shape(other)
        return LambdaMatrix(self.rows, self.cols, tuple(a + b for a, b in zip(self.entries, other.entries)),
                            self.context)

    def __sub__(self, other: "LambdaMatrix") -> "LambdaMatrix":
        self._same_shape(other)
        return LambdaMatrix(self.rows, self.cols, tuple(a - b for a, b in zip(self.entries, other.entries)),
                            self.context)

    def __neg__(self) -> "LambdaMatrix":
        return LambdaMatrix(self.rows, self.cols, tuple(-a for a in self.entries), self.context)

    def scale(self, c: IwasawaElement | int) -> "LambdaMatrix":
        return LambdaMatrix(self.rows, self.cols, tuple(a * c for a in self.entries), self.context)

    def __matmul__(self, other: "LambdaMatrix") -> "LambdaMatrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        zero = IwasawaElement.zero(self.context)
        out = []
        for i in range(self.rows):
            for j in range(other.cols):
                acc = zero
                for k in range(self.cols):
                    a = self.entry(i, k)
                    if a.is_zero():
                        continue
                    b = other.entry(k, j)
                    if not b.is_zero():
                        acc = acc + a * b
                out.append(acc)
        return LambdaMatrix(self.rows, other.cols, tuple(out), self.context)

    def _same_shape(self, other: "LambdaMatrix") -> None:
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} vs {other.rows}x{other.cols}")


# ---------------------------------------------------------------------------
# Rank over Frac(Lambda)
# ---------------------------------------------------------------------------

def _evaluate(coeffs: Sequence[int], t: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def rational_rank(rows: list[list[int]], shape: tuple[int, int]) -> int:
    if not shape[0] or not shape[1]:
        return 0
    dm = DomainMatrix([[ZZ(x) for x in r] for r in rows], shape, ZZ)
    return dm.convert_to(QQ).rank()


def frac_rank(A: LambdaMatrix, lower: int = 0, upper: int | None = None) -> int:
    """
    Rank over Frac(Lambda) of the balanced lift. A rank k seen at (k+1)*deg + 1
    distinct points bounds every (k+1)-minor as a polynomial with too many roots.

    `lower` and `upper` are bounds already known to the caller (a mod-p rank,
    or what d^2 = 0 leaves over); evaluation stops as soon as they meet.
    """
    full = min(A.rows, A.cols)
    if upper is not None:
        full = min(full, upper)
    if full <= lower:
        return max(full, 0)
    lifts = [e.lift() for e in A.entries]
    deg = max((len(c) - 1 for c in lifts), default=0)
    best, t = lower, 0
    while True:
        values = [_evaluate(c, t) for c in lifts]
        rows = [values[i * A.cols:(i + 1) * A.cols] for i in range(A.rows)]
        best = max(best, rational_rank(rows, (A.rows, A.cols)))
        t += 1
        if best >= full or t > (best + 1) * max(deg, 0):
            break
    logger.debug(f"Frac(Lambda) rank of {A.rows}x{A.cols} (deg {deg}): {best} after {t} points")
    return best


# ---------------------------------------------------------------------------
# Elimination over F_p[[T]]
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TAdicReduction:
    """Elementary divisors T^v of the mod-p reduction, with the pivots that produced them."""
    valuations: tuple[int, ...]
    pivot_rows: tuple[int, ...]
    pivot_cols: tuple[int, ...]
    depth: int

    @property
    def rank(self) -> int:
        return len(self.valuations)

    @property
    def total_valuation(self) -> int:
        return sum(self.valuations)


def mod_p_array(A: LambdaMatrix, K: int) -> np.ndarray:
    p = A.context.p
    arr = np.zeros((A.rows, A.cols, K), dtype=np.int64)
    for idx, e in enumerate(A.entries):
        coeffs = [c % p for c in e.coeffs[:K]]
        if coeffs:
            arr[idx // A.cols, idx % A.cols, :len(coeffs)] = coeffs
    return arr


def _series_inverse(u: np.ndarray, p: int) -> np.ndarray:
    K = u.shape[0]
    inv = np.zeros(K, dtype=np.int64)
    c0 = pow(int(u[0]), -1, p)
    inv[0] = c0
    for n in range(1, K):
        s = int(np.dot(u[1:n + 1], inv[n - 1::-1]))
        inv[n] = (-s * c0) % p
    return inv


def _toeplitz(v: np.ndarray) -> np.ndarray:
    """L[..., n, m] = v[..., n - m] for n >= m, else 0."""
    K = v.shape[-1]
    n = np.arange(K)[:, None]
    m = np.arange(K)[None, :]
    diff = n - m
    lower = diff >= 0
    return np.take(v, np.where(lower, diff, 0), axis=-1) * lower


def _eliminate(arr: np.ndarray, p: int) -> tuple[list[int], list[int], list[int]]:
    """
    Full-pivoting elimination by least T-valuation. Because the pivot always
    has the least valuation, no absolute T-adic precision is lost.
    """
    R, C, K = arr.shape
    A = arr.copy()
    row_ids, col_ids = list(range(R)), list(range(C))
    vals: list[int] = []
    prow: list[int] = []
    pcol: list[int] = []
    while A.shape[0] and A.shape[1]:
        nz = A != 0
        present = nz.any(axis=2)
        if not present.any():
            break
        v_all = np.where(present, np.argmax(nz, axis=2), K)
        i, j = np.unravel_index(np.argmin(v_all), v_all.shape)
        v = int(v_all[i, j])
        pivot_row = A[i]
        unit = np.concatenate([pivot_row[j, v:], np.zeros(v, dtype=np.int64)])
        inv = _series_inverse(unit, p)
        others = np.delete(A, i, axis=0)
        if others.shape[0]:
            shifted = np.concatenate([others[:, j, v:], np.zeros((others.shape[0], v), dtype=np.int64)], axis=1)
            factors = (shifted @ _toeplitz(inv).T) % p
            update = np.einsum("km,cnm->kcn", factors, _toeplitz(pivot_row))
            others = (others - update) % p
        A = np.delete(others, j, axis=1)
        vals.append(v)
        prow.append(row_ids.pop(int(i)))
        pcol.append(col_ids.pop(int(j)))
    return vals, prow, pcol


def t_adic_reduction(A: LambdaMatrix, depth: int | None = None) -> TAdicReduction:
    """
    Elementary divisors of A mod p over F_p[[T]].

    A rank deficiency is only accepted once the working depth exceeds
    (k+1)*deg - sum(v), the largest valuation a nonzero bordered minor could
    still hide; otherwise the depth grows up to MAX_RESIDUAL_DEPTH.
    """
    ctx = A.context
    full = min(A.rows, A.cols)
    if full == 0:
        return TAdicReduction((), (), (), 0)
    deg = A.degree_bound()
    K = depth or ctx.M
    if deg is None:
        K = min(K, ctx.M)
    while True:
        vals, prow, pcol = _eliminate(mod_p_array(A, K), ctx.p)
        k = len(vals)
        if k == full:
            break
        if deg is not None:
            needed = (k + 1) * deg - sum(vals)
            if K > needed:
                break
            if K < MAX_RESIDUAL_DEPTH:
                K = min(max(2 * K, needed + 1), MAX_RESIDUAL_DEPTH)
                logger.debug(f"T-adic depth raised to {K} (rank {k} of {full} not yet certified)")
                continue
        raise PrecisionExhausted(
            f"rank deficiency of a {A.rows}x{A.cols} matrix mod p is not certified at T-depth {K}",
            rank=k, depth=K,
        )
    order = sorted(range(len(vals)), key=lambda n: vals[n])
    return TAdicReduction(tuple(vals[n] for n in order), tuple(prow[n] for n in order),
                          tuple(pcol[n] for n in order), K)


# ---------------------------------------------------------------------------
# Exact polynomial algebra over Z[T]
# ---------------------------------------------------------------------------

def to_poly(coeffs: Sequence[int]) -> Poly:
    return Poly(list(reversed(list(coeffs))) or [0], T_SYMBOL, domain=ZZ)


def from_poly(poly: Poly) -> list[int]:
    return [int(c) for c in reversed(poly.all_coeffs())]


def lifted_sympy(A: LambdaMatrix) -> Matrix:
    return Matrix(A.rows, A.cols, [to_poly(e.lift()).as_expr() for e in A.entries])


def exact_determinant(A: LambdaMatrix) -> list[int]:
    """Determinant of the balanced lift over Z[T], lowest degree first."""
    if A.rows != A.cols:
        raise NotSquare(f"determinant of a {A.rows}x{A.cols} matrix")
    if A.rows == 0:
        return [1]
    exprs = [[to_poly(e.lift()).as_expr() for e in r] for r in A.to_rows()]
    dm = DomainMatrix.from_list_sympy(A.rows, A.cols, exprs)
    det = dm.domain.to_sympy(dm.det())
    return from_poly(Poly(det, T_SYMBOL, domain=ZZ))


def exact_adjugate(A: LambdaMatrix) -> list[list[list[int]]]:
    """Adjugate of the balanced lift over Z[T]; adj(A) @ A = det(A) * I."""
    if A.rows != A.cols:
        raise NotSquare(f"adjugate of a {A.rows}x{A.cols} matrix")
    if A.rows == 0:
        return []
    if A.rows == 1:
        return [[[1]]]
    adj = lifted_sympy(A).adjugate(method="bareiss")
    return [[from_poly(Poly(adj[i, j].expand(), T_SYMBOL, domain=ZZ)) for j in range(A.cols)]
            for i in range(A.rows)]


def multiply_polys(f: Sequence[int], g: Sequence[int]) -> list[int]:
    return from_poly(to_poly(f) * to_poly(g))


def coefficient_lists(rows: Iterable[Iterable[IwasawaElement]]) -> list[list[list[int]]]:
    return [[e.lift() for e in r] for r in rows]
