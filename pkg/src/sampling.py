"""
Seeded generators for complexes, modules and presentations.

Every generator draws from its own `random.Random` seeded by (seed, purpose),
so adding draws to one generator never disturbs another.
"""
import hashlib
import random
import logging
from dataclasses import dataclass
from typing import Literal

from src.coeff import PrecisionContext
from src.complex import PerfectComplex, validate_complex, direct_sum, chain_map, cone, shift
from src.group_ring import PGroup, GroupRingElement, GroupRingMatrix
from src.iwasawa_module import LambdaModule
from src.iwasawa_ring import IwasawaElement
from src.linalg import LambdaMatrix

logger = logging.getLogger(__name__)

Family = Literal["a", "b", "c"]
FAMILIES: tuple[str, ...] = ("a", "b", "c")


def rng_for(seed: int, purpose: str) -> random.Random:
    return random.Random(f"{purpose}:{seed}")


def group_key(G: PGroup) -> str:
    """Order plus a digest of the Cayley table; groups of equal order draw differently."""
    digest = hashlib.blake2s(repr(G.table).encode("utf-8"), digest_size=6).hexdigest()
    return f"{G.order}-{digest}"


@dataclass(frozen=True)
class ComplexParams:
    group: PGroup
    family: Family = "a"
    length: int = 1
    max_rank: int = 4
    max_degree: int = 3
    min_degree: int = 0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family '{self.family}', expected one of {FAMILIES}")
        if not 1 <= self.length <= 4 or not 1 <= self.max_rank <= 4 or not 0 <= self.max_degree <= 3:
            raise ValueError("length and ranks are bounded by 4, coefficient degree by 3")
        if self.length > 1 and self.max_rank < 2:
            raise ValueError("complexes longer than one step need max_rank >= 2")


# ---------------------------------------------------------------------------
# Elements
# ---------------------------------------------------------------------------

def random_polynomial(rng: random.Random, ctx: PrecisionContext, max_degree: int) -> IwasawaElement:
    p = ctx.p
    return IwasawaElement.polynomial(ctx, [rng.randint(-p, p) for _ in range(rng.randint(0, max_degree) + 1)])


def random_group_element(rng: random.Random, ctx: PrecisionContext, G: PGroup, max_degree: int,
                         terms: int = 2) -> GroupRingElement:
    coeffs = [IwasawaElement.zero(ctx)] * G.order
    for g in rng.sample(range(G.order), min(terms, G.order)):
        coeffs[g] = random_polynomial(rng, ctx, max_degree)
    return GroupRingElement(tuple(coeffs), G)


def _poly(ctx: PrecisionContext, coeffs: list[int]) -> IwasawaElement:
    return IwasawaElement.polynomial(ctx, coeffs)


def _with_group(ctx: PrecisionContext, G: PGroup, g: int, base: IwasawaElement,
                on_g: IwasawaElement) -> GroupRingElement:
    """base * 1 + on_g * g."""
    zero = IwasawaElement.zero(ctx)
    return GroupRingElement.scalar(G, base) + GroupRingElement(
        tuple(on_g if h == g else zero for h in range(G.order)), G)


def mu_zero_diagonal(rng: random.Random, ctx: PrecisionContext, G: PGroup) -> GroupRingElement:
    """
    An entry whose expansion has a determinant nonzero mod p, on both sides of
    the augmentation: T + p c, g - (1+T), T g, or one of the units 1, 1+T, g.
    """
    p = ctx.p
    g = rng.randrange(G.order)
    one, zero = _poly(ctx, [1]), IwasawaElement.zero(ctx)
    kind = rng.choice(("linear", "twist", "tg", "one", "one_plus_t", "g"))
    if kind == "linear":
        return GroupRingElement.scalar(G, _poly(ctx, [p * rng.randint(0, p - 1), 1]))
    if kind == "twist":
        return _with_group(ctx, G, g, _poly(ctx, [-1, -1]), one) if g != G.identity_index \
            else GroupRingElement.scalar(G, _poly(ctx, [0, -1]))
    if kind == "tg":
        return _with_group(ctx, G, g, zero, _poly(ctx, [0, 1]))
    if kind == "one":
        return GroupRingElement.scalar(G, one)
    if kind == "one_plus_t":
        return GroupRingElement.scalar(G, _poly(ctx, [1, 1]))
    return GroupRingElement.basis(ctx, G, g)


def p_multiple(rng: random.Random, ctx: PrecisionContext, G: PGroup) -> GroupRingElement:
    x = mu_zero_diagonal(rng, ctx, G)
    return GroupRingElement(tuple(c * ctx.p for c in x.coeffs), G)


def _diagonal_entry(rng: random.Random, ctx: PrecisionContext, G: PGroup, family: str,
                    max_degree: int) -> GroupRingElement:
    if family == "c":
        roll = rng.random()
        if roll < 0.15:
            return GroupRingElement.zero(ctx, G)
        if roll < 0.4:
            return random_group_element(rng, ctx, G, max_degree)
        if roll < 0.5:
            return p_multiple(rng, ctx, G)
    return mu_zero_diagonal(rng, ctx, G)


def upper_triangular(rng: random.Random, ctx: PrecisionContext, G: PGroup, size: int, family: str,
                     max_degree: int, force_p: bool = False) -> GroupRingMatrix:
    rows = []
    p_slot = rng.randrange(size) if force_p else -1
    for i in range(size):
        row = []
        for j in range(size):
            if j < i:
                row.append(GroupRingElement.zero(ctx, G))
            elif j == i:
                row.append(p_multiple(rng, ctx, G) if i == p_slot
                           else _diagonal_entry(rng, ctx, G, family, max_degree))
            else:
                row.append(random_group_element(rng, ctx, G, max_degree, terms=1))
        rows.append(row)
    return GroupRingMatrix.from_rows(ctx, G, rows, size)


def _unit_entry(rng: random.Random, ctx: PrecisionContext, G: PGroup) -> GroupRingElement:
    """One of the units 1, -1, g, 1+T, g(1+T) of Lambda[G]."""
    g = rng.randrange(G.order)
    kind = rng.choice(("one", "minus_one", "g", "one_plus_t", "g_one_plus_t"))
    if kind == "one":
        return GroupRingElement.scalar(G, _poly(ctx, [1]))
    if kind == "minus_one":
        return GroupRingElement.scalar(G, _poly(ctx, [-1]))
    if kind == "g":
        return GroupRingElement.basis(ctx, G, g)
    if kind == "one_plus_t":
        return GroupRingElement.scalar(G, _poly(ctx, [1, 1]))
    return _with_group(ctx, G, g, IwasawaElement.zero(ctx), _poly(ctx, [1, 1]))


def acyclic_block(rng: random.Random, ctx: PrecisionContext, G: PGroup, size: int) -> GroupRingMatrix:
    """An invertible L D U over Lambda[G]: unitriangular factors around a diagonal of units."""
    zero = GroupRingElement.zero(ctx, G)
    one = GroupRingElement.basis(ctx, G, G.identity_index)
    D = GroupRingMatrix.from_rows(ctx, G, [[_unit_entry(rng, ctx, G) if i == j else zero for j in range(size)]
                                           for i in range(size)], size)

    def triangle(lower: bool) -> GroupRingMatrix:
        rows = []
        for i in range(size):
            row = []
            for j in range(size):
                if i == j:
                    row.append(one)
                elif (j < i) == lower:
                    row.append(random_group_element(rng, ctx, G, 1, terms=1))
                else:
                    row.append(zero)
            rows.append(row)
        return GroupRingMatrix.from_rows(ctx, G, rows, size)

    return triangle(True) @ D @ triangle(False)


def unipotent_pair(rng: random.Random, ctx: PrecisionContext, G: PGroup, size: int,
                   steps: int = 2) -> tuple[GroupRingMatrix, GroupRingMatrix]:
    """U and U^-1 as products of elementary matrices I + c e_uv with constant-times-g entries."""
    U = GroupRingMatrix.identity(ctx, G, size)
    U_inv = GroupRingMatrix.identity(ctx, G, size)
    if size < 2:
        return U, U_inv
    for _ in range(steps):
        u, v = rng.sample(range(size), 2)
        g = rng.randrange(G.order)
        c = rng.randint(-ctx.p, ctx.p)
        coeff = GroupRingElement(tuple(IwasawaElement.constant(ctx, c if h == g else 0) for h in range(G.order)), G)
        E = _elementary(ctx, G, size, u, v, coeff)
        E_inv = _elementary(ctx, G, size, u, v, -coeff)
        U = E @ U
        U_inv = U_inv @ E_inv
    return U, U_inv


def _elementary(ctx: PrecisionContext, G: PGroup, size: int, u: int, v: int,
                c: GroupRingElement) -> GroupRingMatrix:
    I = GroupRingMatrix.identity(ctx, G, size)
    entries = list(I.entries)
    entries[u * size + v] = c
    return GroupRingMatrix(size, size, tuple(entries), G, ctx)


# ---------------------------------------------------------------------------
# Complexes
# ---------------------------------------------------------------------------

def _piece_sizes(rng: random.Random, length: int, max_rank: int) -> list[int]:
    sizes: list[int] = []
    for i in range(length):
        room = max_rank - (sizes[-1] if sizes else 0)
        if i < length - 1:
            room -= 1
        sizes.append(rng.randint(1, max(1, room)))
    return sizes


def _acyclic_sizes(rng: random.Random, ranks: list[int], max_rank: int) -> list[int]:
    """At most one contractible generator per step, where both of its degrees have room."""
    sizes = []
    for j in range(len(ranks) - 1):
        room = min(max_rank - ranks[j], max_rank - ranks[j + 1])
        a = rng.randint(0, 1) if room > 0 else 0
        ranks[j] += a
        ranks[j + 1] += a
        sizes.append(a)
    return sizes


def random_complex(ctx: PrecisionContext, params: ComplexParams, seed: int) -> PerfectComplex:
    """
    d^j = U_(j+1) B^j U_j^-1 with B^j block diagonal: a torsion piece A_j from
    C^j to C^(j+1) and a factored acyclic block W_j (an invertible L D U), the
    frames U_j unipotent. A_j is upper triangular over Lambda[G]. Family a has
    diagonals that stay nonzero mod p on both sides of base change, family b
    puts a p-multiple on one diagonal, family c is unconstrained.
    """
    G = params.group
    rng = rng_for(seed, f"complex-{params.family}-{group_key(G)}-{params.length}")
    sizes = _piece_sizes(rng, params.length, params.max_rank)
    forced = rng.randrange(params.length) if params.family == "b" else -1
    pieces = [upper_triangular(rng, ctx, G, s, params.family, params.max_degree, force_p=(k == forced))
              for k, s in enumerate(sizes)]

    def size(k: int) -> int:
        return sizes[k] if 0 <= k < len(sizes) else 0

    ranks = [size(j - 1) + size(j) for j in range(params.length + 1)]
    acyclic = _acyclic_sizes(rng, ranks, params.max_rank)
    blocks = [acyclic_block(rng, ctx, G, a) for a in acyclic]

    def extra(k: int) -> int:
        return acyclic[k] if 0 <= k < len(acyclic) else 0

    def zero(rows: int, cols: int) -> GroupRingMatrix:
        return GroupRingMatrix.zero(ctx, G, rows, cols)

    raw = []
    for j in range(params.length):
        # source C^j = [piece j-1 | piece j | block j-1 | block j], target likewise one step up
        src = (size(j - 1), size(j), extra(j - 1), extra(j))
        tgt = (size(j), size(j + 1), extra(j), extra(j + 1))
        grid = [[zero(h, w) for w in src] for h in tgt]
        grid[0][1] = pieces[j]
        grid[2][3] = blocks[j]
        raw.append(GroupRingMatrix.block(ctx, G, grid))
    frames = [unipotent_pair(rng, ctx, G, r) for r in ranks]
    boundaries = [frames[j + 1][0] @ raw[j] @ frames[j][1] for j in range(params.length)]
    C = validate_complex(params.min_degree, ranks, boundaries, G, ctx)
    logger.debug(f"random complex seed={seed} family={params.family}: ranks {ranks}, acyclic {acyclic}")
    return C


def conjugate(C: PerfectComplex, frames: list[tuple[GroupRingMatrix, GroupRingMatrix]]) -> PerfectComplex:
    """Change of basis degreewise: d^i -> U_(i+1) d^i U_i^-1."""
    boundaries = [frames[k + 1][0] @ d @ frames[k][1] for k, d in enumerate(C.boundaries)]
    return validate_complex(C.min_degree, C.ranks, boundaries, C.group, C.context)


def selmer_shape_complex(ctx: PrecisionContext, group: PGroup, seed: int,
                         balanced: bool = True) -> tuple[PerfectComplex, bool]:
    """
    C = cone(Glob -> Loc)[-1] with Glob = Loc + Extra at degrees 0..2 mapping onto
    Loc by a (conjugated) projection; C sits at degrees 0..3. Unbalanced draws
    add a free rank-one term to Extra, which moves the Euler characteristic.
    """
    rng = rng_for(seed, f"selmer-{group_key(group)}")
    loc = random_complex(ctx, ComplexParams(group, "a", length=2, max_rank=2), rng.randrange(2 ** 31))
    extra = random_complex(ctx, ComplexParams(group, "a", length=2, max_rank=2), rng.randrange(2 ** 31))
    if not balanced:
        extra = direct_sum(extra, validate_complex(1, (1,), (), group, ctx))
    glob = direct_sum(loc, extra)
    frames = [unipotent_pair(rng, ctx, group, glob.rank(i)) for i in glob.degrees]
    glob = conjugate(glob, frames)
    components = {}
    for k, i in enumerate(glob.degrees):
        proj = GroupRingMatrix.block(ctx, group, [[
            GroupRingMatrix.identity(ctx, group, loc.rank(i)),
            GroupRingMatrix.zero(ctx, group, loc.rank(i), extra.rank(i)),
        ]])
        components[i] = proj @ frames[k][1]
    phi = chain_map(glob, loc, components)
    C = shift(cone(phi), -1)
    return C, balanced


# ---------------------------------------------------------------------------
# Modules and presentations
# ---------------------------------------------------------------------------

def random_square_module(ctx: PrecisionContext, seed: int, max_size: int = 2) -> LambdaModule:
    """
    Square torsion presentation whose determinant is coprime to every omega_n:
    upper triangular with a diagonal of T + p c (c a unit), p, p (T + p c) or
    units, then multiplied on both sides by elementary matrices with entries
    a + b T. An entry above the diagonal is arbitrary when one of its two
    diagonal entries is a unit or p; otherwise it lies in the ideal of the two
    diagonal entries, so layer divisors of two linear factors never stack up
    past p^N.
    """
    rng = rng_for(seed, "square-module")
    p = ctx.p
    size = rng.randint(1, max_size)
    kinds, diag = [], []
    for _ in range(size):
        c = rng.randint(1, p - 1)
        kind = rng.choice(("linear", "linear", "p", "p_linear", "unit"))
        coeffs = {"linear": [p * c, 1], "p": [p], "p_linear": [p * p * c, p], "unit": [1, rng.randint(0, p)]}[kind]
        kinds.append(kind)
        diag.append(_poly(ctx, coeffs))
    rows = [[diag[i] if i == j else IwasawaElement.zero(ctx) for j in range(size)] for i in range(size)]
    for i in range(size):
        for j in range(i + 1, size):
            if {kinds[i], kinds[j]} & {"unit", "p"}:
                rows[i][j] = random_polynomial(rng, ctx, 2)
            else:
                rows[i][j] = diag[i] * random_polynomial(rng, ctx, 1) + diag[j] * random_polynomial(rng, ctx, 1)
    A = LambdaMatrix.from_rows(ctx, rows, size)
    for _ in range(2 if size > 1 else 0):
        u, v = rng.sample(range(size), 2)
        A = _lambda_elementary(ctx, size, u, v, [rng.randint(-p, p), rng.randint(-p, p)]) @ A
        u, v = rng.sample(range(size), 2)
        A = A @ _lambda_elementary(ctx, size, u, v, [rng.randint(-p, p), rng.randint(-p, p)])
    return LambdaModule(size, A)


def _lambda_elementary(ctx: PrecisionContext, size: int, u: int, v: int, coeffs: list[int]) -> LambdaMatrix:
    entries = list(LambdaMatrix.identity(ctx, size).entries)
    entries[u * size + v] = _poly(ctx, coeffs)
    return LambdaMatrix(size, size, tuple(entries), ctx)


def random_group_ring_presentation(ctx: PrecisionContext, G: PGroup, seed: int,
                                   family: Literal["mu0", "mu_pos", "any"] = "any") -> GroupRingMatrix:
    """Square presentation over Lambda[G]; 'mu0' keeps every diagonal nonzero mod p, 'mu_pos' forces a p-multiple."""
    rng = rng_for(seed, f"presentation-{family}-{group_key(G)}")
    if family == "any":
        family = rng.choice(("mu0", "mu_pos"))
    size = rng.randint(1, 2)
    A = upper_triangular(rng, ctx, G, size, "a", 1, force_p=(family == "mu_pos"))
    U, _ = unipotent_pair(rng, ctx, G, size)
    V, _ = unipotent_pair(rng, ctx, G, size)
    return U @ A @ V
