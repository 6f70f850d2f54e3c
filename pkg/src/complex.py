"""
Bounded cochain complexes of finite free Lambda[G]-modules.

Conventions: boundaries raise degree and act on column vectors; d^i has shape
rank(i+1) x rank(i). The cone of phi: C' -> C has C''^i = C'^(i+1) + C^i with
boundary [[-d', 0], [phi, d]]; the shift C[k]^i = C^(i+k) carries (-1)^k d.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Sequence

from src.coeff import PrecisionContext, solve_in_span
from src.config import DEFAULT_MATRIX_BUDGET, DET_CROSS_CHECK_LIMIT, LAMBDA_METHODS, default_n_range
from src.errors import (
    BoundaryMismatch, NotAComplex, NotChainMap, NotMuZero, MuNotZeroAtTop, SearchBudgetExceeded,
    NotAnnihilating, LengthTooShort, Unstable, TDepthExhausted, TheoremViolation, PrecisionExhausted,
)
from src.group_ring import (
    PGroup, GroupRingElement, GroupRingMatrix, regular_expand, change_group, trivial_group,
)
from src.iwasawa_module import divmod_monic, layer_profile, quotient_matrix
from src.iwasawa_ring import IwasawaElement, weierstrass_prepare
from src.utils import trim_zeros
from src.linalg import (
    LambdaMatrix, TAdicReduction, t_adic_reduction, frac_rank, exact_determinant, exact_adjugate,
    multiply_polys,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PerfectComplex:
    min_degree: int
    ranks: tuple[int, ...]
    boundaries: tuple[GroupRingMatrix, ...]
    group: PGroup
    context: PrecisionContext

    @property
    def max_degree(self) -> int:
        return self.min_degree + len(self.ranks) - 1

    @property
    def length(self) -> int:
        return self.max_degree - self.min_degree

    @property
    def degrees(self) -> range:
        return range(self.min_degree, self.max_degree + 1)

    def rank(self, i: int) -> int:
        if self.min_degree <= i <= self.max_degree:
            return self.ranks[i - self.min_degree]
        return 0

    def boundary(self, i: int) -> GroupRingMatrix:
        """d^i : C^i -> C^(i+1), zero outside the stored range."""
        if self.min_degree <= i < self.max_degree:
            return self.boundaries[i - self.min_degree]
        return GroupRingMatrix.zero(self.context, self.group, self.rank(i + 1), self.rank(i))

    def to_dict(self) -> dict[str, Any]:
        return {
            "group": self.group.to_dict(),
            "minDegree": self.min_degree,
            "ranks": list(self.ranks),
            "boundaries": [d.to_lists() for d in self.boundaries],
        }


def validate_complex(min_degree: int, ranks: Sequence[int], boundaries: Sequence[GroupRingMatrix],
                     group: PGroup, ctx: PrecisionContext) -> PerfectComplex:
    ranks = tuple(int(r) for r in ranks)
    if not ranks or any(r < 0 for r in ranks):
        raise BoundaryMismatch(f"ranks {list(ranks)} must be a nonempty list of nonnegative integers")
    if len(boundaries) != len(ranks) - 1:
        raise BoundaryMismatch(f"{len(ranks)} terms need {len(ranks) - 1} boundaries, got {len(boundaries)}")
    for k, d in enumerate(boundaries):
        i = min_degree + k
        if (d.rows, d.cols) != (ranks[k + 1], ranks[k]):
            raise BoundaryMismatch(f"d^{i} is {d.rows}x{d.cols}, expected {ranks[k + 1]}x{ranks[k]}", degree=i)
        if d.group != group:
            raise BoundaryMismatch(f"d^{i} lives over a different group", degree=i)
    for k in range(len(boundaries) - 1):
        if not (boundaries[k + 1] @ boundaries[k]).is_zero():
            raise NotAComplex(f"d^{min_degree + k + 1} d^{min_degree + k} != 0", degree=min_degree + k)
    return PerfectComplex(min_degree, ranks, tuple(boundaries), group, ctx)


def two_term(d: GroupRingMatrix, min_degree: int = 0) -> PerfectComplex:
    """[C^a --d--> C^(a+1)]."""
    return validate_complex(min_degree, (d.cols, d.rows), (d,), d.group, d.context)


def _trimmed(lo: int, ranks: list[int], boundary_of, group: PGroup, ctx: PrecisionContext) -> PerfectComplex:
    """Drop zero-rank terms at both ends and build the complex from boundary_of(i)."""
    start, stop = 0, len(ranks)
    while start < stop - 1 and ranks[start] == 0:
        start += 1
    while stop - 1 > start and ranks[stop - 1] == 0:
        stop -= 1
    a = lo + start
    kept = ranks[start:stop]
    return validate_complex(a, kept, [boundary_of(a + k) for k in range(len(kept) - 1)], group, ctx)


def shift(C: PerfectComplex, k: int) -> PerfectComplex:
    sign = -1 if k % 2 else 1
    boundaries = tuple(-d if sign < 0 else d for d in C.boundaries)
    return PerfectComplex(C.min_degree - k, C.ranks, boundaries, C.group, C.context)


def direct_sum(C1: PerfectComplex, C2: PerfectComplex) -> PerfectComplex:
    ctx, G = C1.context, C1.group
    lo = min(C1.min_degree, C2.min_degree)
    hi = max(C1.max_degree, C2.max_degree)
    ranks = [C1.rank(i) + C2.rank(i) for i in range(lo, hi + 1)]

    def boundary_of(i: int) -> GroupRingMatrix:
        d1, d2 = C1.boundary(i), C2.boundary(i)
        return GroupRingMatrix.block(ctx, G, [
            [d1, GroupRingMatrix.zero(ctx, G, d1.rows, d2.cols)],
            [GroupRingMatrix.zero(ctx, G, d2.rows, d1.cols), d2],
        ])

    return _trimmed(lo, ranks, boundary_of, G, ctx)


@dataclass(frozen=True)
class ChainMap:
    source: PerfectComplex
    target: PerfectComplex
    components: dict[int, GroupRingMatrix] = field(default_factory=dict)

    def at(self, i: int) -> GroupRingMatrix:
        if i in self.components:
            return self.components[i]
        return GroupRingMatrix.zero(self.target.context, self.target.group, self.target.rank(i), self.source.rank(i))

    @property
    def degrees(self) -> range:
        lo = min(self.source.min_degree, self.target.min_degree)
        hi = max(self.source.max_degree, self.target.max_degree)
        return range(lo, hi + 1)


def chain_map(source: PerfectComplex, target: PerfectComplex,
              components: dict[int, GroupRingMatrix]) -> ChainMap:
    """Validated degreewise map; d phi = phi d' is checked exactly."""
    phi = ChainMap(source, target, dict(components))
    for i in phi.degrees:
        f = phi.at(i)
        if (f.rows, f.cols) != (target.rank(i), source.rank(i)):
            raise NotChainMap(f"phi^{i} is {f.rows}x{f.cols}, expected {target.rank(i)}x{source.rank(i)}", degree=i)
    for i in phi.degrees:
        lhs = target.boundary(i) @ phi.at(i)
        rhs = phi.at(i + 1) @ source.boundary(i)
        if not (lhs - rhs).is_zero():
            raise NotChainMap(f"phi does not commute with the boundaries at degree {i}", degree=i)
    return phi


def identity_map(C: PerfectComplex) -> ChainMap:
    return ChainMap(C, C, {i: GroupRingMatrix.identity(C.context, C.group, C.rank(i)) for i in C.degrees})


def cone(phi: ChainMap) -> PerfectComplex:
    Cp, C = phi.source, phi.target
    ctx, G = C.context, C.group
    lo = min(Cp.min_degree - 1, C.min_degree)
    hi = max(Cp.max_degree - 1, C.max_degree)
    ranks = [Cp.rank(i + 1) + C.rank(i) for i in range(lo, hi + 1)]

    def boundary_of(i: int) -> GroupRingMatrix:
        dp, d = Cp.boundary(i + 1), C.boundary(i)
        return GroupRingMatrix.block(ctx, G, [
            [-dp, GroupRingMatrix.zero(ctx, G, dp.rows, d.cols)],
            [phi.at(i + 1), d],
        ])

    return _trimmed(lo, ranks, boundary_of, G, ctx)


def base_change(C: PerfectComplex) -> PerfectComplex:
    """Lambda tensored over Lambda[G], termwise by augmentation."""
    trivial = trivial_group(C.group.p)
    return PerfectComplex(C.min_degree, C.ranks, tuple(change_group(d, trivial) for d in C.boundaries),
                          trivial, C.context)


def base_change_map(phi: ChainMap) -> ChainMap:
    trivial = trivial_group(phi.target.group.p)
    return ChainMap(base_change(phi.source), base_change(phi.target),
                    {i: change_group(f, trivial) for i, f in phi.components.items()})


def _sign(i: int) -> int:
    return -1 if i % 2 else 1


def euler_characteristic(C: PerfectComplex) -> int:
    return sum(_sign(i) * C.rank(i) for i in C.degrees)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComplexClassification:
    torsion: bool
    mu_zero: bool
    per_degree_torsion: tuple[bool, ...]
    per_degree_mu_zero: tuple[bool, ...]

    def __post_init__(self) -> None:
        if self.mu_zero and not self.torsion:
            raise ValueError("a mu-zero complex must be torsion")

    def to_dict(self) -> dict[str, Any]:
        return {
            "torsion": self.torsion,
            "muZero": self.mu_zero,
            "perDegreeTorsion": list(self.per_degree_torsion),
            "perDegreeMuZero": list(self.per_degree_mu_zero),
        }


class _Profile(NamedTuple):
    expanded: dict[int, LambdaMatrix]
    residual: dict[int, TAdicReduction]
    sizes: dict[int, int]


def _residual_profile(C: PerfectComplex) -> _Profile:
    """Expanded boundaries and their elimination over F_p[[T]]."""
    order = C.group.order
    expanded: dict[int, LambdaMatrix] = {}
    residual: dict[int, TAdicReduction] = {}
    for i in range(C.min_degree, C.max_degree):
        expanded[i] = regular_expand(C.boundary(i))
        residual[i] = t_adic_reduction(expanded[i])
    sizes = {i: C.rank(i) * order for i in C.degrees}
    return _Profile(expanded, residual, sizes)


def _mod_p_rank(profile: _Profile, i: int) -> int:
    return profile.residual[i].rank if i in profile.residual else 0


def _mu_zero_flags(C: PerfectComplex, profile: _Profile) -> tuple[bool, ...]:
    return tuple(profile.sizes[i] == _mod_p_rank(profile, i) + _mod_p_rank(profile, i - 1) for i in C.degrees)


def classify(C: PerfectComplex) -> ComplexClassification:
    """
    Torsion and mu = 0 per degree from rank counts: over Frac(Lambda) for
    torsion, over F_p((T)) for mu = 0. Mod-p ranks are lower bounds for the
    Frac(Lambda) ranks, and d^2 = 0 bounds them from above.
    """
    profile = _residual_profile(C)
    mu_flags = _mu_zero_flags(C, profile)
    frac: dict[int, int] = {}
    for i, E in profile.expanded.items():
        upper = min(profile.sizes[i] - _mod_p_rank(profile, i - 1),
                    profile.sizes.get(i + 1, 0) - _mod_p_rank(profile, i + 1))
        frac[i] = frac_rank(E, lower=_mod_p_rank(profile, i), upper=upper)
    tors_flags = tuple(profile.sizes[i] == frac.get(i, 0) + frac.get(i - 1, 0) for i in C.degrees)
    result = ComplexClassification(all(tors_flags), all(mu_flags), tors_flags, mu_flags)
    logger.debug(f"classified complex at degrees {C.min_degree}..{C.max_degree}: {result.to_dict()}")
    return result


def is_mu_zero(C: PerfectComplex) -> bool:
    return all(_mu_zero_flags(C, _residual_profile(C)))


# ---------------------------------------------------------------------------
# lambda(C)
# ---------------------------------------------------------------------------

def _residual_lambda(C: PerfectComplex, profile: _Profile) -> int:
    """Euler characteristic of C/p: dim H^i(C/p) is the T-length of coker d^(i-1)'s torsion."""
    total = 0
    for i in C.degrees:
        if i - 1 in profile.residual:
            total += _sign(i) * profile.residual[i - 1].total_valuation
    return total


def _layer_euler(C: PerfectComplex, profile: _Profile, n: int) -> int:
    N = C.context.N
    d = C.context.p ** n
    ranks: dict[int, int] = {}
    logs: dict[int, int] = {}
    for i, E in profile.expanded.items():
        visible, log_coker = layer_profile(E, n)
        # log_coker counts every hidden divisor as p^N; keep only the visible ones
        ranks[i], logs[i] = visible, log_coker - (E.rows * d - visible) * N
    chi = 0
    for i in C.degrees:
        if profile.sizes[i] * d != ranks.get(i, 0) + ranks.get(i - 1, 0):
            raise Unstable(f"cohomology of layer {n} is infinite at degree {i} (or hidden beyond p^{N})",
                           n=n, degree=i)
        chi += _sign(i) * logs.get(i - 1, 0)
    return chi


def _growth_lambda(C: PerfectComplex, profile: _Profile, n_range: tuple[int, int], budget: int) -> int:
    p = C.context.p
    widest = max(profile.sizes.values(), default=0)
    n_min, n_max = n_range
    while n_max >= n_min and widest * p ** n_max > budget:
        n_max -= 1
    if n_max - n_min < 2:
        raise Unstable(f"range {n_range} leaves fewer than 3 layers within budget {budget}")
    chis = [_layer_euler(C, profile, n) for n in range(n_min, n_max + 1)]
    diffs = [b - a for a, b in zip(chis, chis[1:])]
    if diffs[-1] != diffs[-2]:
        raise Unstable(f"layer Euler characteristics {chis} have not stabilised", chis=chis)
    logger.debug(f"layer Euler characteristics {chis}")
    return diffs[-1]


def _determinant_lambda(C: PerfectComplex, profile: _Profile) -> int | None:
    """lambda of a square two-term complex from det of its expanded boundary."""
    if len(C.ranks) != 2:
        return None
    E = profile.expanded[C.min_degree]
    if E.rows != E.cols or E.rows == 0:
        return None
    if E.rows > DET_CROSS_CHECK_LIMIT:
        logger.debug(f"determinant cross-check skipped: expanded size {E.rows} > {DET_CROSS_CHECK_LIMIT}")
        return None
    det = exact_determinant(E)
    prep = weierstrass_prepare(IwasawaElement.polynomial(C.context, det))
    return _sign(C.min_degree + 1) * prep.lambda_


def lambda_of_complex(C: PerfectComplex, method: str = "residual", n_range: tuple[int, int] | None = None,
                      budget: int = DEFAULT_MATRIX_BUDGET, cross_check: bool = True) -> int:
    """
    lambda(C) = sum (-1)^i lambda(H^i(C)) for a mu = 0 complex.

    The residual method reads it off C/p; the growth method off the Euler
    characteristics of the finite layers C / omega_n. Two-term square complexes
    are cross-checked against the determinant of the expanded boundary.
    """
    if method not in LAMBDA_METHODS:
        raise ValueError(f"unknown lambda method '{method}', expected one of {LAMBDA_METHODS}")
    profile = _residual_profile(C)
    if not all(_mu_zero_flags(C, profile)):
        raise NotMuZero("lambda(C) is only defined here for mu = 0 complexes")
    if method == "residual":
        lam = _residual_lambda(C, profile)
    else:
        lam = _growth_lambda(C, profile, n_range or default_n_range(C.context.p), budget)
    if cross_check:
        det_lam = _determinant_lambda(C, profile)
        if det_lam is not None and det_lam != lam:
            raise Unstable(f"{method} route gives lambda={lam}, determinant route gives {det_lam}",
                           method=method, determinant=det_lam)
    logger.debug(f"lambda(C) = {lam} by {method}")
    return lam


# ---------------------------------------------------------------------------
# Annihilators and the reduction step
# ---------------------------------------------------------------------------

def _top_minor(C: PerfectComplex) -> tuple[LambdaMatrix, tuple[int, ...], list[int]]:
    """Expanded d^(b-1), the residual pivot columns, and the exact minor on them."""
    b = C.max_degree
    E = regular_expand(C.boundary(b - 1))
    red = t_adic_reduction(E)
    if red.rank < E.rows:
        raise MuNotZeroAtTop(f"H^{b} is not mu-zero: mod-p rank {red.rank} < {E.rows}", degree=b)
    cols = tuple(sorted(red.pivot_cols))
    return E, cols, exact_determinant(E.columns(cols))


def find_annihilator(C: PerfectComplex) -> IwasawaElement:
    """
    A distinguished f killing H^b(C): the distinguished part of the maximal
    minor of the expanded top boundary on the columns of least T-valuation
    mod p. The minor is p^0 * P * u with u a unit, so P kills what it kills.
    """
    b = C.max_degree
    if C.rank(b) == 0:
        return IwasawaElement.one(C.context)
    if C.length < 1:
        raise MuNotZeroAtTop(f"H^{b} = C^{b} is free of positive rank", degree=b)
    E, cols, minor = _top_minor(C)
    if len(minor) - 1 >= C.context.M:
        raise SearchBudgetExceeded(f"annihilator has degree {len(minor) - 1} >= M = {C.context.M}",
                                   degree=len(minor) - 1)
    # E_S adj(E_S) = det(E_S) I puts det(E_S) e_j in the image for every j.
    E_S = E.columns(cols)
    adj = exact_adjugate(E_S)
    for j in range(E.rows):
        for r in range(E.rows):
            image = _sum_polys([multiply_polys(E_S.entry(r, k).lift(), adj[k][j]) for k in range(len(cols))])
            if image != (minor if r == j else []):
                raise NotAnnihilating(f"generator {j} of C^{b} is not hit by the minor", generator=j)
    f = _split_minor(C.context, minor)[0]
    logger.debug(f"annihilator of H^{b}: {f.lift()}")
    return f


def _split_minor(ctx: PrecisionContext, minor: list[int]) -> tuple[IwasawaElement, IwasawaElement]:
    """minor = P * u in (Z/p^N)[T] with P distinguished; both factors are polynomials."""
    prep = weierstrass_prepare(IwasawaElement.polynomial(ctx, minor))
    if prep.mu:
        raise MuNotZeroAtTop(f"maximal minor {minor} is divisible by p^{prep.mu}")
    P = prep.distinguished
    u, r = divmod_monic(minor, P.lift(), ctx.modulus)
    if any(r):
        raise PrecisionExhausted(f"distinguished part {P.lift()} does not divide {minor} modulo p^{ctx.N}")
    return P, IwasawaElement.polynomial(ctx, u)


def _sum_polys(polys: Sequence[list[int]]) -> list[int]:
    width = max((len(q) for q in polys), default=0)
    return trim_zeros([sum(q[k] for q in polys if k < len(q)) for k in range(width)])


class ReductionStep(NamedTuple):
    cprime: PerfectComplex
    csecond: PerfectComplex
    lift: GroupRingMatrix
    unit: IwasawaElement


def _lift_generator(E: LambdaMatrix, cols: tuple[int, ...], adj: list[list[list[int]]], P: IwasawaElement,
                    u: IwasawaElement, f: IwasawaElement, target: int) -> list[list[int]]:
    """
    x in Lambda^cols with E x = f u e_target.

    Solve E x0 = f e_target in (Lambda/P)^rows, a free Z/p^N-module with basis
    T^k (k < deg P); the residual f e_target - E x0 is then P z, and
    E_S adj(E_S) z = P u z gives x = u x0 + adj(E_S) z on the pivot columns.
    """
    ctx = E.context
    q = ctx.modulus
    monic = P.lift()
    lam = len(monic) - 1
    x0: list[list[int]] = [[] for _ in range(E.cols)]
    if lam:
        block_rows = quotient_matrix(E, monic, q)
        generators = [[r[j] for r in block_rows] for j in range(E.cols * lam)]
        rhs = [0] * (E.rows * lam)
        rhs[target * lam:(target + 1) * lam] = divmod_monic(f.lift(), monic, q)[1]
        coeffs = solve_in_span(generators, rhs, ctx.p, ctx.N)
        if coeffs is None:
            raise NotAnnihilating(f"f = {f.lift()} does not kill generator {target} modulo {monic}",
                                  generator=target)
        x0 = [trim_zeros(coeffs[k * lam:(k + 1) * lam]) for k in range(E.cols)]
    z: list[list[int]] = []
    for r in range(E.rows):
        image = _sum_polys([multiply_polys(E.entry(r, k).lift(), x0[k]) for k in range(E.cols)])
        residual = _sum_polys([f.lift() if r == target else [], [-c for c in image]])
        quotient, rem = divmod_monic(residual, monic, q)
        if any(rem):
            raise NotAnnihilating(f"residual at row {r} is not divisible by {monic}", generator=target)
        z.append(quotient)
    x = [multiply_polys(u.lift(), v) for v in x0]
    for k, col in enumerate(cols):
        x[col] = _sum_polys([x[col]] + [multiply_polys(adj[k][r], z[r]) for r in range(E.rows)])
    return [[c % q for c in v] for v in x]


def _equivariant_lift(C: PerfectComplex, f: IwasawaElement) -> tuple[GroupRingMatrix, IwasawaElement]:
    """
    (X, u) over Lambda[G] with d^(b-1) X = f u, u a unit polynomial. One
    Lambda-solution per generator of C^b fixes X; the G-translates follow.
    """
    b = C.max_degree
    ctx, G = C.context, C.group
    order = G.order
    if not f.is_exact:
        raise ValueError("the annihilator must be an exact polynomial")
    r_src, r_tgt = C.rank(b - 1), C.rank(b)
    E, cols, minor = _top_minor(C)
    P, u = _split_minor(ctx, minor)
    adj = exact_adjugate(E.columns(cols))
    if max(f.degree(), 0) + max(u.degree(), 0) >= ctx.M:
        raise TDepthExhausted(f"f u has degree >= M = {ctx.M}", unit=u.lift())
    depth = E.degree_bound() or 0
    columns: list[list[list[list[int]]]] = []
    for j in range(r_tgt):
        x = _lift_generator(E, cols, adj, P, u, f, j * order + G.identity_index)
        if max((len(trim_zeros(v)) - 1 for v in x), default=0) + depth >= ctx.M:
            raise TDepthExhausted("lift needs T-precision beyond M", generator=j)
        columns.append([[trim_zeros(x[k * order + g]) for g in range(order)] for k in range(r_src)])
    rows = [[GroupRingElement.from_lists(ctx, G, columns[j][k]) for j in range(r_tgt)] for k in range(r_src)]
    X = GroupRingMatrix.from_rows(ctx, G, rows, r_tgt)
    fu = GroupRingMatrix.diagonal(G, r_tgt, f * u)
    if not (C.boundary(b - 1) @ X - fu).is_zero():
        raise NotAnnihilating("d X != f u at working precision")
    return X, u


def reduce_step(C: PerfectComplex, f: IwasawaElement) -> ReductionStep:
    """
    C' = [C^b --f u--> C^b] at degrees b-1, b with the map (X, id) into C, and
    the cone C'' with its split top degree removed: C'' lives at degrees
    a..b-1 with C''^(b-2) = C^b + C^(b-2) and boundary [X, d^(b-2)] into C^(b-1).

    u is the unit part of the top maximal minor, so C' is isomorphic to
    [C^b --f--> C^b] by rescaling its lower term.
    """
    if C.length < 1:
        raise LengthTooShort(f"reduction needs at least two terms, got degrees {C.min_degree}..{C.max_degree}")
    ctx, G = C.context, C.group
    a, b = C.min_degree, C.max_degree
    rb = C.rank(b)
    X, u = _equivariant_lift(C, f)
    f_scalar = GroupRingMatrix.diagonal(G, rb, f * u)
    cprime = validate_complex(b - 1, (rb, rb), (f_scalar,), G, ctx)

    lo = min(a, b - 2)
    ranks = [C.rank(i) for i in range(lo, b - 1)]
    ranks[b - 2 - lo] += rb
    ranks.append(C.rank(b - 1))

    def boundary_of(i: int) -> GroupRingMatrix:
        if i == b - 2:
            return GroupRingMatrix.block(ctx, G, [[X, C.boundary(b - 2)]])
        if i == b - 3:
            d = C.boundary(b - 3)
            return GroupRingMatrix.block(ctx, G, [[GroupRingMatrix.zero(ctx, G, rb, d.cols)], [d]])
        return C.boundary(i)

    csecond = _trimmed(lo, ranks, boundary_of, G, ctx)
    return ReductionStep(cprime, csecond, X, u)


def reduction_map(C: PerfectComplex, step: ReductionStep) -> ChainMap:
    """The chain map C' -> C of a reduction step."""
    b = C.max_degree
    return chain_map(step.cprime, C, {
        b - 1: step.lift,
        b: GroupRingMatrix.identity(C.context, C.group, C.rank(b)),
    })


# ---------------------------------------------------------------------------
# Base change verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KidaReport:
    mu_zero_c: bool
    mu_zero_cbar: bool
    group_order: int
    lambda_c: int | None = None
    lambda_cbar: int | None = None
    identity_holds: bool | None = None

    def __post_init__(self) -> None:
        if self.identity_holds is not None and not (self.mu_zero_c and self.mu_zero_cbar):
            raise ValueError("identityHolds is only recorded when both sides are mu-zero")

    @property
    def violation(self) -> bool:
        return self.mu_zero_c != self.mu_zero_cbar or self.identity_holds is False

    @property
    def outcome(self) -> str:
        if self.violation:
            return "violation"
        return "holds" if self.identity_holds else "consistent-non-mu-zero"

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "muZeroC": self.mu_zero_c,
            "muZeroCbar": self.mu_zero_cbar,
            "groupOrder": self.group_order,
            "outcome": self.outcome,
        }
        if self.identity_holds is not None:
            out.update(lambdaC=self.lambda_c, lambdaCbar=self.lambda_cbar, identityHolds=self.identity_holds)
        return out


def verify_kida(C: PerfectComplex, method: str = "residual", n_range: tuple[int, int] | None = None,
                budget: int = DEFAULT_MATRIX_BUDGET, strict: bool = False) -> KidaReport:
    """
    mu = 0 for C iff for its base change, and then lambda(C) = |G| lambda(C-bar).
    A violation is logged and recorded in the report; strict mode raises it.
    """
    Cbar = base_change(C)
    mu_c, mu_cbar = is_mu_zero(C), is_mu_zero(Cbar)
    order = C.group.order
    if not (mu_c and mu_cbar):
        report = KidaReport(mu_c, mu_cbar, order)
    else:
        lam = lambda_of_complex(C, method, n_range, budget)
        lam_bar = lambda_of_complex(Cbar, method, n_range, budget)
        report = KidaReport(True, True, order, lam, lam_bar, lam == order * lam_bar)
    if report.violation:
        logger.warning(f"THEOREM VIOLATION: {report.to_dict()}")
        if strict:
            raise TheoremViolation(f"base change identity fails: {report.to_dict()}", **report.to_dict())
    return report


# ---------------------------------------------------------------------------
# Triangle bookkeeping
# ---------------------------------------------------------------------------

def two_of_three(cprime: PerfectComplex, c: PerfectComplex, csecond: PerfectComplex) -> dict[str, Any]:
    """Membership of a triangle's vertices in D_tors and D_{mu=0}; two members force the third."""
    classes = [classify(x) for x in (cprime, c, csecond)]
    torsion = [k.torsion for k in classes]
    mu_zero = [k.mu_zero for k in classes]
    return {
        "torsion": torsion,
        "muZero": mu_zero,
        "holds": sum(torsion) != 2 and sum(mu_zero) != 2,
    }


@dataclass(frozen=True)
class SelmerShapeReport:
    h0_vanishes: bool
    outside_vanishes: bool
    euler_characteristic: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "h0Vanishes": self.h0_vanishes,
            "outsideVanishes": self.outside_vanishes,
            "eulerCharacteristic": self.euler_characteristic,
        }


def check_selmer_shape(C: PerfectComplex, supported: Sequence[int] = (1, 2, 3)) -> SelmerShapeReport:
    """Fraction-field vanishing of H^i(C) outside `supported`, and the Euler characteristic."""
    cls = classify(C)
    flags = dict(zip(C.degrees, cls.per_degree_torsion))
    outside = all(flags[i] for i in C.degrees if i not in supported)
    return SelmerShapeReport(flags.get(0, True), outside, euler_characteristic(C))
