"""Class numbers of negative discriminants, analytic upper bounds, and the genus of X_0^+(p)."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from enum import Enum
from fractions import Fraction
from math import gcd, isqrt

from mpmath.ctx_iv import MPIntervalContext
from mpmath.libmp import to_rational

from .arith import factorize, genus_x0, is_prime, kronecker

# Private interval context (outward rounding) for the transcendental bounds.
iv = MPIntervalContext()
iv.prec = 96


class Method(Enum):
    ReducedForms = "reduced-forms"
    CoxFormula = "cox-formula"


def _squarefree(n: int) -> bool:
    return all(e == 1 for _, e in factorize(abs(n))) if n not in (0, 1, -1) else n != 0


def is_fundamental(D: int) -> bool:
    if D % 4 == 1:
        return _squarefree(D)
    if D % 4 == 0:
        k = D // 4
        return k % 4 in (2, 3) and _squarefree(k)
    return False


@dataclass(frozen=True)
class Discriminant:
    D: int
    fundamental: bool
    d: int  # fundamental part
    m: int  # conductor, D = d * m^2

    @classmethod
    def of(cls, D: int) -> "Discriminant":
        if D >= 0 or D % 4 not in (0, 1):
            raise ValueError(f"{D} is not a negative discriminant")
        m = 1
        for p, e in factorize(-D):
            m *= p ** (e // 2)
        # shrink m until D/m^2 is a discriminant that is fundamental
        for k in sorted((k for k in range(1, m + 1) if m % k == 0), reverse=True):
            if D % (k * k) == 0 and is_fundamental(D // (k * k)):
                return cls(D, k == 1, D // (k * k), k)
        raise AssertionError(f"no fundamental part found for {D}")


@dataclass(frozen=True)
class ClassNumberResult:
    D: Discriminant
    h: int
    method: Method


def reduced_forms(D: int) -> list[tuple[int, int, int]]:
    """Reduced primitive forms (a, b, c) of discriminant D < 0, sorted."""
    Discriminant.of(D)
    out = []
    # b >= 0 first; (a, -b, c) is reduced too unless b = 0, b = a or a = c
    for b in range(D % 2, isqrt(-D // 3) + 1, 2):
        q = (b * b - D) // 4
        for a in range(max(b, 1), isqrt(q) + 1):
            if q % a:
                continue
            c = q // a
            if gcd(gcd(a, b), c) != 1:
                continue
            out.append((a, b, c))
            if 0 < b < a < c:
                out.append((a, -b, c))
    return sorted(out)


@lru_cache(maxsize=4096)
def class_number_reduced(D: int) -> int:
    return len(reduced_forms(D))


def class_number(D: int) -> ClassNumberResult:
    return ClassNumberResult(Discriminant.of(D), class_number_reduced(D), Method.ReducedForms)


def class_number_cox(d: int, m: int) -> int:
    """h(d m^2) from h(d) via the conductor formula."""
    if d >= 0 or not is_fundamental(d):
        raise ValueError(f"{d} is not a negative fundamental discriminant")
    if m < 1:
        raise ValueError("conductor must be positive")
    if m == 1:
        w = 1
    elif d == -3:
        w = 3
    elif d == -4:
        w = 2
    else:
        w = 1
    val = Fraction(class_number_reduced(d) * m, w)
    for p, _ in factorize(m):
        val *= 1 - Fraction(kronecker(d, p), p)
    if val.denominator != 1 or val < 1:
        raise ArithmeticError(f"conductor formula gave {val} for d={d}, m={m}")
    return int(val)


@dataclass(frozen=True)
class CertifiedBound:
    """A real number known to lie in [lower, upper]; value is a float for display."""

    lower: Fraction
    upper: Fraction

    @property
    def value(self) -> float:
        return float((self.lower + self.upper) / 2)

    def certainly_ge(self, x) -> bool:
        return self.lower >= x

    def certainly_gt(self, x) -> bool:
        return self.lower > x

    def certainly_lt(self, x) -> bool:
        return self.upper < x


def _certify(v) -> CertifiedBound:
    # interval endpoints are binary floats, so converting them is exact
    lo, hi = (Fraction(*map(int, to_rational(end))) for end in v._mpi_)
    return CertifiedBound(lo, hi)


def ramare_bound(d: int) -> CertifiedBound:
    """sqrt|d|/(2 pi) * (log|d| + 5 - 2 log 6), enclosed by outward-rounded intervals."""
    if d >= -4 or not is_fundamental(d):
        raise ValueError(f"need a fundamental discriminant below -4, got {d}")
    n = iv.mpf(-d)
    return _certify(iv.sqrt(n) / (2 * iv.pi) * (iv.log(n) + 5 - 2 * iv.log(6)))


def h4p_bound(p: int) -> CertifiedBound:
    """3 sqrt(p)/(2 pi) * (log p + 5 - 2 log 6), an upper bound for h(-4p)."""
    if p < 5 or not is_prime(p):
        raise ValueError(f"need a prime p >= 5, got {p}")
    x = iv.mpf(p)
    return _certify(3 * iv.sqrt(x) / (2 * iv.pi) * (iv.log(x) + 5 - 2 * iv.log(6)))


def alpha(p: int) -> Fraction:
    if p % 8 == 7:
        return Fraction(2)
    if p % 8 == 3:
        return Fraction(4, 3)
    return Fraction(1)


@lru_cache(maxsize=None)
def genus_x0_plus(p: int) -> int:
    """Genus of X_0(p)/w_p for a prime p > 3."""
    if p <= 3 or not is_prime(p):
        raise ValueError(f"need a prime p > 3, got {p}")
    g = genus_x0(p)
    val = (2 * g + 2 - alpha(p) * class_number_reduced(-4 * p)) / 4
    if val.denominator != 1 or val < 0:
        raise ArithmeticError(f"plus-genus formula gave {val} at p={p}")
    return int(val)


def plus_genus_inequality(p: int) -> bool:
    """g/3 + 3 < g+ <= g/2, in exact rationals."""
    g = genus_x0(p)
    gp = genus_x0_plus(p)
    return Fraction(g, 3) + 3 < gp <= Fraction(g, 2)


def analytic_threshold_check(p: int) -> bool:
    """Certified check of g/3 + 3 < g/2 + 1/2 - 3 sqrt(p)/(4 pi) (log p + 3 - 2 log 6)."""
    g = genus_x0(p)
    x = iv.mpf(p)
    rhs = iv.mpf(g) / 2 + iv.mpf(1) / 2 - 3 * iv.sqrt(x) / (4 * iv.pi) * (iv.log(x) + 3 - 2 * iv.log(6))
    return _certify(rhs - (iv.mpf(g) / 3 + 3)).certainly_gt(0)
