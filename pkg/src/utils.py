import json
import hashlib
import logging
from typing import Any

from sympy import isprime, multiplicity

logger = logging.getLogger(__name__)


def canonical_json(obj: Any) -> str:
    """
    Deterministic JSON text: sorted keys, no insignificant whitespace.
    """
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def digest(obj: Any) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def balanced(value: int, modulus: int) -> int:
    """Representative of value mod modulus in (-modulus/2, modulus/2]."""
    value %= modulus
    return value - modulus if value > modulus // 2 else value


def is_prime(n: int) -> bool:
    return bool(isprime(n))


def p_power_exponent(n: int, p: int) -> int | None:
    """k with n == p**k, or None."""
    if n < 1:
        return None
    k = multiplicity(p, n)
    return k if p ** k == n else None


def parse_range(text: str) -> tuple[int, int]:
    """'0:4' or '0..4' -> (0, 4)."""
    sep = ".." if ".." in text else ":"
    lo, hi = text.split(sep)
    return int(lo), int(hi)


def trim_zeros(coeffs: list[int]) -> list[int]:
    out = list(coeffs)
    while out and out[-1] == 0:
        out.pop()
    return out
