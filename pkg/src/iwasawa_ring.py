"""
Arithmetic of Lambda = Z_p[[T]] truncated to (p^N, T^M).

Elements without `exact_degree` are residues modulo (p^N, T^M). Elements with
`exact_degree` are genuine polynomials whose tail beyond the window is zero.
"""
import logging
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Sequence

from src.coeff import PrecisionContext, Residue, int_valuation, invert_int, INFINITE_VALUATION
from src.errors import PrecisionExhausted, TDepthExhausted, NotDistinguished
from src.utils import balanced, trim_zeros

logger = logging.getLogger(__name__)


def _mul(a: Sequence[int], b: Sequence[int], q: int, M: int) -> list[int]:
    out = [0] * M
    for i, x in enumerate(a):
        if not x or i >= M:
            continue
        for j in range(min(len(b), M - i)):
            y = b[j]
            if y:
                out[i + j] += x * y
    return [v % q for v in out]


@dataclass(frozen=True)
class IwasawaElement:
    coeffs: tuple[int, ...]
    context: PrecisionContext
    exact_degree: int | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        ctx = self.context
        q = ctx.modulus
        coeffs = tuple(c % q for c in self.coeffs[:ctx.M]) + (0,) * max(0, ctx.M - len(self.coeffs))
        object.__setattr__(self, "coeffs", coeffs)
        if self.exact_degree is not None and any(coeffs[self.exact_degree + 1:]):
            raise ValueError(f"coefficients beyond exact degree {self.exact_degree} are nonzero")

    # -- construction ------------------------------------------------------

    @classmethod
    def polynomial(cls, ctx: PrecisionContext, coeffs: Iterable[int]) -> "IwasawaElement":
        """
        Exact polynomial from an integer coefficient list (lowest degree first).
        Degrees that do not fit the window give a truncated element.
        """
        trimmed = trim_zeros([c % ctx.modulus for c in coeffs])
        degree = max(len(trimmed) - 1, 0)
        if degree >= ctx.M:
            return cls(tuple(trimmed[:ctx.M]), ctx, None)
        return cls(tuple(trimmed), ctx, degree)

    @classmethod
    def series(cls, ctx: PrecisionContext, coeffs: Iterable[int]) -> "IwasawaElement":
        return cls(tuple(coeffs), ctx, None)

    @classmethod
    def constant(cls, ctx: PrecisionContext, value: int) -> "IwasawaElement":
        return cls.polynomial(ctx, [value])

    @classmethod
    def zero(cls, ctx: PrecisionContext) -> "IwasawaElement":
        return cls.polynomial(ctx, [])

    @classmethod
    def one(cls, ctx: PrecisionContext) -> "IwasawaElement":
        return cls.polynomial(ctx, [1])

    @classmethod
    def t(cls, ctx: PrecisionContext) -> "IwasawaElement":
        return cls.polynomial(ctx, [0, 1])

    # -- inspection --------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.exact_degree is not None

    @property
    def residues(self) -> tuple[Residue, ...]:
        return tuple(Residue(c, self.context) for c in self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def degree(self) -> int:
        """Index of the highest nonzero coefficient in the window, -1 for zero."""
        return len(trim_zeros(list(self.coeffs))) - 1

    def to_list(self) -> list[int]:
        return trim_zeros(list(self.coeffs))

    def lift(self) -> list[int]:
        """Balanced integer lift of the coefficients, trimmed."""
        return trim_zeros([balanced(c, self.context.modulus) for c in self.coeffs])

    def mod_p(self) -> list[int]:
        p = self.context.p
        return trim_zeros([c % p for c in self.coeffs])

    def content_valuation(self) -> int | float:
        vals = [int_valuation(c, self.context.p, self.context.N) for c in self.coeffs]
        return min(vals) if vals else INFINITE_VALUATION

    def is_unit(self) -> bool:
        return self.coeffs[0] % self.context.p != 0

    # -- arithmetic --------------------------------------------------------

    def _exact_sum(self, other: "IwasawaElement") -> int | None:
        if self.is_exact and other.is_exact:
            return max(self.exact_degree, other.exact_degree)
        return None

    def __add__(self, other: "IwasawaElement") -> "IwasawaElement":
        q = self.context.modulus
        return IwasawaElement(tuple((a + b) % q for a, b in zip(self.coeffs, other.coeffs)), self.context,
                              self._exact_sum(other))

    def __sub__(self, other: "IwasawaElement") -> "IwasawaElement":
        q = self.context.modulus
        return IwasawaElement(tuple((a - b) % q for a, b in zip(self.coeffs, other.coeffs)), self.context,
                              self._exact_sum(other))

    def __neg__(self) -> "IwasawaElement":
        q = self.context.modulus
        return IwasawaElement(tuple(-a % q for a in self.coeffs), self.context, self.exact_degree)

    def __mul__(self, other: "IwasawaElement | int") -> "IwasawaElement":
        ctx = self.context
        if isinstance(other, int):
            return IwasawaElement(tuple(a * other % ctx.modulus for a in self.coeffs), ctx, self.exact_degree)
        exact = None
        if self.is_exact and other.is_exact:
            d = max(self.degree(), 0) + max(other.degree(), 0)
            if d < ctx.M:
                exact = d
        return IwasawaElement(tuple(_mul(self.coeffs, other.coeffs, ctx.modulus, ctx.M)), ctx, exact)

    __rmul__ = __mul__

    def shift(self, k: int) -> "IwasawaElement":
        """Multiplication by T^k."""
        ctx = self.context
        exact = None
        if self.is_exact and self.degree() + k < ctx.M:
            exact = max(self.degree(), 0) + k
        return IwasawaElement((0,) * k + self.coeffs, ctx, exact)

    def inverse(self) -> "IwasawaElement":
        """Inverse of a unit as a truncated series."""
        ctx = self.context
        q, M = ctx.modulus, ctx.M
        c0 = invert_int(self.coeffs[0], ctx.p, ctx.N)
        inv = [0] * M
        inv[0] = c0
        for n in range(1, M):
            s = sum(self.coeffs[k] * inv[n - k] for k in range(1, n + 1))
            inv[n] = (-s * c0) % q
        return IwasawaElement.series(ctx, inv)

    def __repr__(self) -> str:
        tag = f"exact<={self.exact_degree}" if self.is_exact else f"mod T^{self.context.M}"
        return f"IwasawaElement({self.to_list()}, p={self.context.p}, {tag})"


@dataclass(frozen=True)
class Preparation:
    mu: int
    distinguished: IwasawaElement
    unit: IwasawaElement
    lambda_: int

    def recompose(self) -> IwasawaElement:
        ctx = self.distinguished.context
        return (self.distinguished * self.unit) * (ctx.p ** self.mu)


def is_distinguished(P: IwasawaElement) -> bool:
    if not P.is_exact:
        return False
    d = P.degree()
    if d < 0 or P.coeffs[d] != 1:
        return False
    return all(c % P.context.p == 0 for c in P.coeffs[:d])


def weierstrass_prepare(f: IwasawaElement) -> Preparation:
    """
    f = p^mu * P * u with P distinguished and u a unit, by Hensel lifting the
    mod-p factorisation f/p^mu = T^lambda * (unit) one p-adic digit at a time.
    """
    ctx = f.context
    p, N, M, q = ctx.p, ctx.N, ctx.M, ctx.modulus
    mu = f.content_valuation()
    if mu == INFINITE_VALUATION:
        raise PrecisionExhausted(f"element vanishes modulo ({p}^{N}, T^{M})", element=f.to_list())
    g = [c // p ** mu for c in f.coeffs]
    lam = next((i for i, c in enumerate(g) if c % p), None)
    if lam is None:
        raise TDepthExhausted(f"no unit coefficient below T^{M}; lambda >= {M}", mu=mu)

    P = [0] * lam + [1]
    u = g[lam:] + [0] * lam
    for k in range(1, N):
        prod = _mul(P, u, q, M)
        e = [(a - b) % q for a, b in zip(g, prod)]
        if not any(e):
            break
        pk = p ** k
        if any(c % pk for c in e):
            raise PrecisionExhausted("Hensel step lost precision", step=k)
        u_inv = IwasawaElement.series(ctx, u).inverse().coeffs
        x = [c % p for c in _mul([c // pk for c in e], u_inv, q, M)]
        dP, dq = x[:lam], x[lam:] + [0] * lam
        P = [(a + pk * b) % q for a, b in zip(P, dP + [0])]
        du = _mul(dq, u, q, M)
        u = [(a + pk * b) % q for a, b in zip(u, du)]

    distinguished = IwasawaElement(tuple(P), ctx, lam)
    unit = IwasawaElement.series(ctx, u)
    prep = Preparation(mu, distinguished, unit, lam)
    if prep.recompose().coeffs != f.coeffs:
        raise PrecisionExhausted("Weierstrass preparation failed to recompose", element=f.to_list())
    logger.debug(f"prepared {f.to_list()[:8]}...: mu={mu}, lambda={lam}")
    return prep


def weierstrass_divide(f: IwasawaElement, P: IwasawaElement,
                       initial: IwasawaElement | None = None) -> tuple[IwasawaElement, IwasawaElement]:
    """
    f = q * P + r with deg r < deg P, for P distinguished. The fixed point
    q = (f - q * A) div T^d (A the p-divisible lower part of P) is a p-adic
    contraction, so it is reached from any starting guess.
    """
    if not is_distinguished(P) or P.degree() < 1:
        raise NotDistinguished(f"{P.to_list()} is not a distinguished polynomial of positive degree")
    ctx = f.context
    q_mod, M, d = ctx.modulus, ctx.M, P.degree()
    A = list(P.coeffs[:d])
    quotient = list(initial.coeffs) if initial is not None else [0] * M
    cap = ctx.N + M
    for _ in range(cap):
        w = [(a - b) % q_mod for a, b in zip(f.coeffs, _mul(quotient, A, q_mod, M))]
        nxt = w[d:] + [0] * d
        if nxt == quotient:
            break
        quotient = nxt
    else:
        raise PrecisionExhausted(f"Weierstrass division did not converge in {cap} steps")
    remainder = IwasawaElement.polynomial(ctx, w[:d])
    exact = None
    if f.is_exact:
        exact = max(f.degree() - d, 0)
    qe = IwasawaElement(tuple(quotient), ctx, exact if exact is not None and not any(quotient[exact + 1:]) else None)
    return qe, remainder


def omega(n: int, ctx: PrecisionContext) -> IwasawaElement:
    """(1 + T)^(p^n) - 1 as an exact polynomial."""
    deg = ctx.p ** n
    if deg >= ctx.M:
        raise TDepthExhausted(f"omega_{n} has degree {deg} >= M = {ctx.M}", n=n)
    return IwasawaElement.polynomial(ctx, [0] + [comb(deg, i) for i in range(1, deg + 1)])


def invariants_of_element(f: IwasawaElement) -> tuple[int, int]:
    """(lambda, mu) of Lambda/(f)."""
    prep = weierstrass_prepare(f)
    return prep.lambda_, prep.mu
