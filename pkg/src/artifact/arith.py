"""Exact arithmetic invariants of the modular curve X_0(N).

Everything here works over the integers (with ``Fraction`` where a quotient is
unavoidable); there is no floating point in this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

# Deterministic Miller-Rabin witnesses, valid for every n < 3.3 * 10^24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_in(lo: int, hi: int) -> list[int]:
    """Primes p with lo <= p < hi (simple sieve)."""
    if hi <= 2:
        return []
    sieve = bytearray([1]) * hi
    sieve[0:2] = b"\x00\x00"
    for i in range(2, isqrt(hi - 1) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, hi, i)))
    return [i for i in range(max(lo, 2), hi) if sieve[i]]


@lru_cache(maxsize=4096)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorisation by trial division, as ((prime, exponent), ...)."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out = []
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if m > 1:
        out.append((m, 1))
    return tuple(out)


@dataclass(frozen=True)
class Level:
    N: int

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 1:
            raise ValueError(f"level must be a positive integer, got {self.N!r}")

    @property
    def is_prime(self) -> bool:
        return is_prime(self.N)


def _n(N) -> int:
    return N.N if isinstance(N, Level) else Level(N).N


def psi(N) -> int:
    n = _n(N)
    out = n
    for p, _ in factorize(n):
        out = out // p * (p + 1)
    return out


def omega(N) -> int:
    return len(factorize(_n(N)))


def euler_phi(n: int) -> int:
    out = n
    for p, _ in factorize(n):
        out = out // p * (p - 1)
    return out


def _local_roots(p: int, e: int, special: int) -> int:
    # roots of x^2+1 (special=2) or x^2+x+1 (special=3) modulo p^e
    if p == special:
        return 1 if e == 1 else 0
    if special == 2:
        return 2 if p % 4 == 1 else 0
    return 2 if p % 3 == 1 else 0


def nu2(N) -> int:
    """Number of solutions of x^2 + 1 = 0 in Z/NZ."""
    out = 1
    for p, e in factorize(_n(N)):
        out *= _local_roots(p, e, 2)
    return out


def nu3(N) -> int:
    """Number of solutions of x^2 + x + 1 = 0 in Z/NZ."""
    out = 1
    for p, e in factorize(_n(N)):
        out *= _local_roots(p, e, 3)
    return out


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def nu_inf(N) -> int:
    """Number of cusps of X_0(N)."""
    n = _n(N)
    return sum(euler_phi(gcd(d, n // d)) for d in divisors(n))


@dataclass(frozen=True)
class GenusProfile:
    N: Level
    psi: int
    omega: int
    nu2: int
    nu3: int
    nu_inf: int
    genus: int


@lru_cache(maxsize=None)
def genus_profile(N) -> GenusProfile:
    lvl = N if isinstance(N, Level) else Level(N)
    ps, n2, n3, ninf = psi(lvl), nu2(lvl), nu3(lvl), nu_inf(lvl)
    g = 1 + Fraction(ps, 12) - Fraction(n2, 4) - Fraction(n3, 3) - Fraction(ninf, 2)
    if g.denominator != 1 or g < 0:
        raise ArithmeticError(f"genus formula gave {g} at level {lvl.N}")
    return GenusProfile(lvl, ps, omega(lvl), n2, n3, ninf, int(g))


def genus_x0(N) -> int:
    return genus_profile(N).genus


def genus_lower_bound(p: int) -> Fraction:
    """(p - 13)/12, a lower bound for the genus of X_0(p)."""
    return Fraction(p - 13, 12)


def kronecker(d: int, n: int) -> int:
    """Kronecker symbol (d/n) for n >= 1."""
    if n < 1:
        raise ValueError("kronecker symbol needs n >= 1")
    result = 1
    while n % 2 == 0:
        n //= 2
        if d % 2 == 0:
            return 0
        if d % 8 in (3, 5):
            result = -result
    # Jacobi symbol (d/n) for odd n
    a = d % n if n > 1 else 0
    if n == 1:
        return result
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0
