"""Point-count lower bounds over F_{q^2} and the resulting finiteness thresholds."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .arith import Level, is_prime, omega, psi

# The finiteness pipeline reduces modulo q = 2.
REDUCTION_PRIME = 2


@dataclass(frozen=True)
class OggBound:
    N: Level
    q: int
    L: Fraction


def ogg_bound(N, q: int) -> OggBound:
    lvl = N if isinstance(N, Level) else Level(N)
    if not is_prime(q):
        raise ValueError(f"q={q} is not prime")
    if lvl.N % q == 0:
        raise ValueError(f"q={q} divides the level {lvl.N}")
    return OggBound(lvl, q, Fraction(q - 1, 12) * psi(lvl) + 2 ** omega(lvl))


def ogg_lower_bound(N, q: int) -> Fraction:
    """L_q(N) = (q-1)/12 * psi(N) + 2^omega(N)."""
    return ogg_bound(N, q).L


def finiteness_threshold(d: int) -> int:
    if d < 1:
        raise ValueError("degree must be positive")
    return 120 * d - 24


def finite_by_ogg(p: int, d: int) -> bool:
    """True iff the F_4 point count forces finitely many degree-d points on X_0(p)."""
    return p > finiteness_threshold(d)


def frey_gonality_cap(d: int) -> int:
    """Infinitely many points of degree <= d force gonality <= 2d."""
    if d < 1:
        raise ValueError("degree must be positive")
    return 2 * d
