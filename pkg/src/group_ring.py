"""
Finite p-groups by Cayley table and the group ring Lambda[G].

Modules are free right Lambda[G]-modules of column vectors. A matrix acts by
multiplying its entries into the vector from the left, (Av)_i = sum_j A_ij v_j,
which commutes with scalars acting from the right, so matrices are right-module
maps also when G is non-abelian, and coker(A) is a right module.
`regular_expand` replaces every entry by its left-regular block, which forgets
the G-action and keeps the Lambda-module; coinvariants are coker(A) tensored
with Lambda over Lambda[G] through the augmentation.
"""
import logging
from dataclasses import dataclass
from itertools import product
from typing import Sequence

from src.coeff import PrecisionContext
from src.config import MAX_GROUP_ORDER
from src.errors import NotAssociative, NoIdentity, NotPPower, GroupTooLarge
from src.iwasawa_module import LambdaModule
from src.iwasawa_ring import IwasawaElement
from src.linalg import LambdaMatrix
from src.utils import p_power_exponent

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PGroup:
    order: int
    table: tuple[tuple[int, ...], ...]
    identity_index: int
    p: int

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inverse(self, a: int) -> int:
        return next(b for b in range(self.order) if self.table[a][b] == self.identity_index)

    def is_abelian(self) -> bool:
        return all(self.table[a][b] == self.table[b][a] for a in range(self.order) for b in range(a))

    def to_dict(self) -> dict:
        return {"order": self.order, "table": [list(r) for r in self.table]}


def validate_group(table: Sequence[Sequence[int]], p: int) -> PGroup:
    """Check a Cayley table exhaustively and wrap it as a p-group."""
    n = len(table)
    if n > MAX_GROUP_ORDER:
        raise GroupTooLarge(f"group order {n} exceeds {MAX_GROUP_ORDER}", order=n)
    rows = tuple(tuple(int(x) for x in r) for r in table)
    if n == 0 or any(len(r) != n for r in rows) or any(not 0 <= x < n for r in rows for x in r):
        raise NoIdentity(f"table is not an {n}x{n} table on 0..{n - 1}")
    if p_power_exponent(n, p) is None:
        raise NotPPower(f"order {n} is not a power of {p}", order=n, p=p)

    identity = next((e for e in range(n)
                     if all(rows[e][x] == x and rows[x][e] == x for x in range(n))), None)
    if identity is None:
        raise NoIdentity("table has no two-sided identity")
    for a in range(n):
        if not any(rows[a][b] == identity and rows[b][a] == identity for b in range(n)):
            raise NoIdentity(f"element {a} has no inverse", element=a)
    for a, b, c in product(range(n), repeat=3):
        if rows[rows[a][b]][c] != rows[a][rows[b][c]]:
            raise NotAssociative(f"({a}*{b})*{c} != {a}*({b}*{c})", triple=[a, b, c])
    return PGroup(n, rows, identity, p)


def cyclic_group(n: int, p: int) -> PGroup:
    return validate_group([[(i + j) % n for j in range(n)] for i in range(n)], p)


def trivial_group(p: int) -> PGroup:
    return PGroup(1, ((0,),), 0, p)


def product_group(G: PGroup, H: PGroup) -> PGroup:
    """G x H with (g, h) stored at index g * |H| + h."""
    m = H.order
    table = [[G.mul(a // m, b // m) * m + H.mul(a % m, b % m) for b in range(G.order * m)]
             for a in range(G.order * m)]
    return validate_group(table, G.p)


# ---------------------------------------------------------------------------
# Lambda[G]
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupRingElement:
    coeffs: tuple[IwasawaElement, ...]
    group: PGroup

    def __post_init__(self) -> None:
        if len(self.coeffs) != self.group.order:
            raise ValueError(f"expected {self.group.order} coefficients, got {len(self.coeffs)}")
        if len({c.context for c in self.coeffs}) != 1:
            raise ValueError("coefficients mix precision contexts")
        if not all(c.is_exact for c in self.coeffs):
            raise ValueError("group ring coefficients must be exact polynomials")

    @property
    def context(self) -> PrecisionContext:
        return self.coeffs[0].context

    @classmethod
    def from_lists(cls, ctx: PrecisionContext, group: PGroup, lists: Sequence[Sequence[int]]) -> "GroupRingElement":
        padded = list(lists) + [[]] * (group.order - len(lists))
        return cls(tuple(IwasawaElement.polynomial(ctx, c) for c in padded), group)

    @classmethod
    def scalar(cls, group: PGroup, value: IwasawaElement) -> "GroupRingElement":
        """value placed on the identity."""
        zero = IwasawaElement.zero(value.context)
        return cls(tuple(value if g == group.identity_index else zero for g in range(group.order)), group)

    @classmethod
    def basis(cls, ctx: PrecisionContext, group: PGroup, g: int) -> "GroupRingElement":
        one, zero = IwasawaElement.one(ctx), IwasawaElement.zero(ctx)
        return cls(tuple(one if h == g else zero for h in range(group.order)), group)

    @classmethod
    def zero(cls, ctx: PrecisionContext, group: PGroup) -> "GroupRingElement":
        return cls((IwasawaElement.zero(ctx),) * group.order, group)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def to_lists(self) -> list[list[int]]:
        return [c.lift() for c in self.coeffs]

    def augment(self) -> IwasawaElement:
        acc = IwasawaElement.zero(self.context)
        for c in self.coeffs:
            acc = acc + c
        return acc

    def __add__(self, other: "GroupRingElement") -> "GroupRingElement":
        return GroupRingElement(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.group)

    def __sub__(self, other: "GroupRingElement") -> "GroupRingElement":
        return GroupRingElement(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)), self.group)

    def __neg__(self) -> "GroupRingElement":
        return GroupRingElement(tuple(-a for a in self.coeffs), self.group)

    def __mul__(self, other: "GroupRingElement") -> "GroupRingElement":
        G = self.group
        out = [IwasawaElement.zero(self.context)] * G.order
        for g, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for h, b in enumerate(other.coeffs):
                if not b.is_zero():
                    k = G.mul(g, h)
                    out[k] = out[k] + a * b
        return GroupRingElement(tuple(out), G)

    def regular_block(self) -> LambdaMatrix:
        """Left multiplication h -> self * h on Lambda[G] in the basis of group elements."""
        G = self.group
        ctx = self.context
        rows = [[IwasawaElement.zero(ctx)] * G.order for _ in range(G.order)]
        for g, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for h in range(G.order):
                k = G.mul(g, h)
                rows[k][h] = rows[k][h] + a
        return LambdaMatrix.from_rows(ctx, rows, G.order)


@dataclass(frozen=True)
class GroupRingMatrix:
    """rows x cols matrix over Lambda[G]; a right-module map on column vectors, v -> A v."""
    rows: int
    cols: int
    entries: tuple[GroupRingElement, ...]
    group: PGroup
    context: PrecisionContext

    def __post_init__(self) -> None:
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(f"expected {self.rows * self.cols} entries, got {len(self.entries)}")

    @classmethod
    def from_rows(cls, ctx: PrecisionContext, group: PGroup, rows: Sequence[Sequence[GroupRingElement]],
                  cols: int | None = None) -> "GroupRingMatrix":
        ncols = cols if cols is not None else (len(rows[0]) if rows else 0)
        return cls(len(rows), ncols, tuple(e for r in rows for e in r), group, ctx)

    @classmethod
    def from_lists(cls, ctx: PrecisionContext, group: PGroup, rows: Sequence[Sequence[Sequence[Sequence[int]]]],
                   cols: int | None = None) -> "GroupRingMatrix":
        return cls.from_rows(ctx, group, [[GroupRingElement.from_lists(ctx, group, e) for e in r] for r in rows],
                             cols)

    @classmethod
    def zero(cls, ctx: PrecisionContext, group: PGroup, rows: int, cols: int) -> "GroupRingMatrix":
        z = GroupRingElement.zero(ctx, group)
        return cls(rows, cols, (z,) * (rows * cols), group, ctx)

    @classmethod
    def identity(cls, ctx: PrecisionContext, group: PGroup, n: int) -> "GroupRingMatrix":
        one = GroupRingElement.basis(ctx, group, group.identity_index)
        z = GroupRingElement.zero(ctx, group)
        return cls(n, n, tuple(one if i == j else z for i in range(n) for j in range(n)), group, ctx)

    @classmethod
    def diagonal(cls, group: PGroup, n: int, value: IwasawaElement) -> "GroupRingMatrix":
        """value * I_n with value embedded as a scalar."""
        ctx = value.context
        s, z = GroupRingElement.scalar(group, value), GroupRingElement.zero(ctx, group)
        return cls(n, n, tuple(s if i == j else z for i in range(n) for j in range(n)), group, ctx)

    @classmethod
    def block(cls, ctx: PrecisionContext, group: PGroup,
              blocks: Sequence[Sequence["GroupRingMatrix"]]) -> "GroupRingMatrix":
        heights = [row[0].rows for row in blocks]
        widths = [b.cols for b in blocks[0]] if blocks else []
        out: list[list[GroupRingElement]] = []
        for bi, row in enumerate(blocks):
            for b, w in zip(row, widths):
                if b.rows != heights[bi] or b.cols != w:
                    raise ValueError("inconsistent block shapes")
            for i in range(heights[bi]):
                out.append([b.entry(i, j) for b in row for j in range(b.cols)])
        return cls.from_rows(ctx, group, out, sum(widths))

    def entry(self, i: int, j: int) -> GroupRingElement:
        return self.entries[i * self.cols + j]

    def to_rows(self) -> list[list[GroupRingElement]]:
        return [list(self.entries[i * self.cols:(i + 1) * self.cols]) for i in range(self.rows)]

    def to_lists(self) -> list[list[list[list[int]]]]:
        return [[e.to_lists() for e in r] for r in self.to_rows()]

    def is_zero(self) -> bool:
        return all(e.is_zero() for e in self.entries)

    def __add__(self, other: "GroupRingMatrix") -> "GroupRingMatrix":
        self._same_shape(other)
        return GroupRingMatrix(self.rows, self.cols, tuple(a + b for a, b in zip(self.entries, other.entries)),
                               self.group, self.context)

    def __sub__(self, other: "GroupRingMatrix") -> "GroupRingMatrix":
        self._same_shape(other)
        return GroupRingMatrix(self.rows, self.cols, tuple(a - b for a, b in zip(self.entries, other.entries)),
                               self.group, self.context)

    def __neg__(self) -> "GroupRingMatrix":
        return GroupRingMatrix(self.rows, self.cols, tuple(-a for a in self.entries), self.group, self.context)

    def __matmul__(self, other: "GroupRingMatrix") -> "GroupRingMatrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        zero = GroupRingElement.zero(self.context, self.group)
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
        return GroupRingMatrix(self.rows, other.cols, tuple(out), self.group, self.context)

    def _same_shape(self, other: "GroupRingMatrix") -> None:
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} vs {other.rows}x{other.cols}")


def regular_expand(A: GroupRingMatrix) -> LambdaMatrix:
    """(rows*|G|) x (cols*|G|) matrix over Lambda; expand(AB) = expand(A) expand(B) for every G."""
    ctx = A.context
    if not A.rows or not A.cols:
        return LambdaMatrix.zero(ctx, A.rows * A.group.order, A.cols * A.group.order)
    blocks = [[e.regular_block() for e in r] for r in A.to_rows()]
    return LambdaMatrix.block(ctx, blocks)


def augment_matrix(A: GroupRingMatrix) -> LambdaMatrix:
    """Entrywise augmentation g -> 1."""
    return LambdaMatrix.from_rows(A.context, [[e.augment() for e in r] for r in A.to_rows()], A.cols)


def scalar_matrix(group: PGroup, A: LambdaMatrix) -> GroupRingMatrix:
    """Lambda-matrix viewed over Lambda[G] through Lambda -> Lambda[G]."""
    return GroupRingMatrix.from_rows(A.context, group,
                                     [[GroupRingElement.scalar(group, e) for e in r] for r in A.to_rows()], A.cols)


def change_group(A: GroupRingMatrix, group: PGroup) -> GroupRingMatrix:
    """Augment, then view over `group` again (base change to the trivial group when group has order 1)."""
    return scalar_matrix(group, augment_matrix(A))


def coinvariants_presentation(M: GroupRingMatrix) -> LambdaModule:
    """Lambda tensored over Lambda[G] with coker(M): same generators, augmented relations."""
    return LambdaModule(M.rows, augment_matrix(M))


def expanded_module(M: GroupRingMatrix) -> LambdaModule:
    """coker(M) with the G-action forgotten."""
    return LambdaModule(M.rows * M.group.order, regular_expand(M))
