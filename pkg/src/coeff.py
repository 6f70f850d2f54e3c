"""
Exact arithmetic in Z/p^N and linear algebra over it.

Residues are plain Python integers reduced modulo p^N; the precision context
rejects p^N >= 2^63 so every stored value fits a machine word.
"""
import math
import logging
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from src.config import WORD_BOUND
from src.errors import InvalidPrecision, NotAUnit
from src.utils import is_prime

logger = logging.getLogger(__name__)

# Valuation of zero: ">= N, indistinguishable from 0 at this precision".
INFINITE_VALUATION = math.inf


@dataclass(frozen=True)
class PrecisionContext:
    p: int
    N: int
    M: int

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise InvalidPrecision(f"p = {self.p} is not prime", p=self.p)
        if self.N < 1 or self.M < 1:
            raise InvalidPrecision(f"precisions must be positive (N={self.N}, M={self.M})", N=self.N, M=self.M)
        if self.p ** self.N >= WORD_BOUND:
            raise InvalidPrecision(f"p^N = {self.p}^{self.N} exceeds the word bound 2^63", p=self.p, N=self.N)

    @property
    def modulus(self) -> int:
        return self.p ** self.N

    def with_t_precision(self, M: int) -> "PrecisionContext":
        return PrecisionContext(self.p, self.N, M)

    def residue(self, value: int) -> "Residue":
        return Residue(value, self)


@dataclass(frozen=True)
class Residue:
    value: int
    context: PrecisionContext = field(compare=True)

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", self.value % self.context.modulus)

    def _other(self, other: "Residue | int") -> int:
        return other.value if isinstance(other, Residue) else other

    def __add__(self, other: "Residue | int") -> "Residue":
        return Residue(self.value + self._other(other), self.context)

    def __sub__(self, other: "Residue | int") -> "Residue":
        return Residue(self.value - self._other(other), self.context)

    def __mul__(self, other: "Residue | int") -> "Residue":
        return Residue(self.value * self._other(other), self.context)

    def __neg__(self) -> "Residue":
        return Residue(-self.value, self.context)

    __radd__ = __add__
    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.value == 0


def int_valuation(value: int, p: int, N: int) -> int | float:
    value %= p ** N
    if value == 0:
        return INFINITE_VALUATION
    v = 0
    while value % p == 0:
        value //= p
        v += 1
    return v


def valuation(x: Residue) -> int | float:
    """Largest v < N with p^v | x, or INFINITE_VALUATION for zero."""
    return int_valuation(x.value, x.context.p, x.context.N)


def invert_int(value: int, p: int, N: int) -> int:
    q = p ** N
    if value % p == 0:
        raise NotAUnit(f"{value % q} is not a unit modulo {p}^{N}", value=value % q)
    return pow(value, -1, q)


def invert_unit(x: Residue) -> Residue:
    return Residue(invert_int(x.value, x.context.p, x.context.N), x.context)


@dataclass(frozen=True)
class ResidueMatrix:
    rows: int
    cols: int
    entries: tuple[Residue, ...]
    context: PrecisionContext | None = None

    def __post_init__(self) -> None:
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(f"expected {self.rows * self.cols} entries, got {len(self.entries)}")
        contexts = {e.context for e in self.entries}
        if len(contexts) > 1:
            raise ValueError("entries mix precision contexts")
        if self.context is None and contexts:
            object.__setattr__(self, "context", contexts.pop())

    @classmethod
    def from_rows(cls, ctx: PrecisionContext, rows: Iterable[Iterable[int]], cols: int | None = None) -> "ResidueMatrix":
        data = [list(r) for r in rows]
        ncols = cols if cols is not None else (len(data[0]) if data else 0)
        entries = tuple(Residue(v, ctx) for r in data for v in r)
        return cls(len(data), ncols, entries, ctx)

    def entry(self, i: int, j: int) -> Residue:
        return self.entries[i * self.cols + j]

    def to_rows(self) -> list[list[int]]:
        return [[self.entries[i * self.cols + j].value for j in range(self.cols)] for i in range(self.rows)]

    def transpose_rows(self) -> list[list[int]]:
        return [[self.entries[i * self.cols + j].value for i in range(self.rows)] for j in range(self.cols)]


class HowellResult(NamedTuple):
    H: ResidueMatrix
    log_kernel_size: int
    log_image_size: int


def howell_rows(rows: list[list[int]], width: int, p: int, N: int) -> tuple[list[list[int]], list[int]]:
    """
    Howell form of the row span of `rows` over Z/p^N.

    Returns the nonzero Howell rows and the pivot valuation of each row. Pivots
    are normalised to p^v; entries above a pivot are reduced modulo it; the
    rows p^(N-v) * pivot_row are fed back so that the Howell property holds.
    """
    q = p ** N
    work = [[x % q for x in r] for r in rows]
    work = [r for r in work if any(r)]
    H: list[list[int]] = []
    pivots: list[tuple[int, int]] = []
    for c in range(width):
        candidates = [r for r in work if r[c]]
        if not candidates:
            continue
        piv = min(candidates, key=lambda r: int_valuation(r[c], p, N))
        work.remove(piv)
        v = int_valuation(piv[c], p, N)
        pv = p ** v
        inv = invert_int(piv[c] // pv, p, N)
        piv = [x * inv % q for x in piv]
        next_work = []
        for r in work:
            if r[c]:
                factor = r[c] // pv
                r = [(x - factor * y) % q for x, y in zip(r, piv)]
            if any(r):
                next_work.append(r)
        work = next_work
        if v > 0:
            extra = [x * p ** (N - v) % q for x in piv]
            if any(extra):
                work.append(extra)
        H.append(piv)
        pivots.append((c, v))

    # Reduce entries above each pivot, left to right.
    for i, (c, v) in enumerate(pivots):
        pv = p ** v
        for k in range(i):
            factor = H[k][c] // pv
            if factor:
                H[k] = [(x - factor * y) % q for x, y in zip(H[k], H[i])]
    return H, [v for _, v in pivots]


def howell_form(A: ResidueMatrix) -> HowellResult:
    """
    Howell normal form of the column span of A over Z/p^N.

    H holds the span's Howell basis as its columns (zero columns dropped), so
    howell_form(H).H == H. Sizes are log_p cardinalities; the kernel is that of
    A acting on column vectors, hence log_kernel + log_image = cols * N.
    """
    ctx = A.context
    if ctx is None:
        if A.cols:
            raise ValueError("an empty matrix with columns needs an explicit context")
        return HowellResult(A, 0, 0)
    p, N = ctx.p, ctx.N
    basis, vals = howell_rows(A.transpose_rows(), A.rows, p, N)
    log_image = sum(N - v for v in vals)
    log_kernel = A.cols * N - log_image
    H = ResidueMatrix(
        A.rows,
        len(basis),
        tuple(Residue(basis[j][i], ctx) for i in range(A.rows) for j in range(len(basis))),
        ctx,
    )
    logger.debug(f"Howell form: {A.rows}x{A.cols} -> {len(basis)} columns, log|im|={log_image}")
    return HowellResult(H, log_kernel, log_image)


def cokernel_profile(A: ResidueMatrix) -> tuple[int, int]:
    """
    (k, s) for the column span S of A: k = log_p |S / pS| counts the elementary
    divisors visible below p^N, s = log_p |coker A|.
    """
    ctx = A.context
    span = howell_form(A)
    if ctx is None:
        return 0, 0
    scaled = ResidueMatrix(span.H.rows, span.H.cols, tuple(x * ctx.p for x in span.H.entries), ctx)
    k = span.log_image_size - howell_form(scaled).log_image_size
    return k, A.rows * ctx.N - span.log_image_size


def solve_in_span(columns: list[list[int]], target: list[int], p: int, N: int) -> list[int] | None:
    """
    Coefficients c with sum_k c_k * columns[k] = target over Z/p^N, or None
    when the target lies outside the span. Same sweep as howell_rows, with
    every working vector carrying the combination that produced it.
    """
    q = p ** N
    n, K = len(target), len(columns)
    work = [([x % q for x in col], [int(k == j) for j in range(K)]) for k, col in enumerate(columns)]
    work = [w for w in work if any(w[0])]
    t = [x % q for x in target]
    coeffs = [0] * K
    for c in range(n):
        candidates = [w for w in work if w[0][c]]
        if not candidates:
            if t[c]:
                return None
            continue
        vec, track = min(candidates, key=lambda w: int_valuation(w[0][c], p, N))
        work.remove((vec, track))
        v = int_valuation(vec[c], p, N)
        pv = p ** v
        inv = invert_int(vec[c] // pv, p, N)
        vec = [x * inv % q for x in vec]
        track = [x * inv % q for x in track]
        if t[c] % pv:
            return None
        factor = t[c] // pv
        t = [(x - factor * y) % q for x, y in zip(t, vec)]
        coeffs = [(x + factor * y) % q for x, y in zip(coeffs, track)]
        next_work = []
        for w_vec, w_track in work:
            if w_vec[c]:
                factor = w_vec[c] // pv
                w_vec = [(x - factor * y) % q for x, y in zip(w_vec, vec)]
                w_track = [(x - factor * y) % q for x, y in zip(w_track, track)]
            if any(w_vec):
                next_work.append((w_vec, w_track))
        work = next_work
        if v > 0:
            scale = p ** (N - v)
            extra = [x * scale % q for x in vec]
            if any(extra):
                work.append((extra, [x * scale % q for x in track]))
    return coeffs if not any(t) else None

