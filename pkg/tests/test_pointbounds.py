from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from artifact.arith import Level, primes_in
from artifact.pointbounds import (
    REDUCTION_PRIME,
    finite_by_ogg,
    finiteness_threshold,
    frey_gonality_cap,
    ogg_bound,
    ogg_lower_bound,
)

ODD_PRIMES = primes_in(3, 20000)


def test_ogg_bound_prime_level():
    # psi(p) = p + 1, two cusps
    assert ogg_lower_bound(11, 2) == Fraction(12, 12) + 2
    assert ogg_lower_bound(701, 2) == Fraction(702, 12) + 2
    b = ogg_bound(Level(15), 2)
    assert b.q == 2 and b.L == Fraction(24, 12) + 4


def test_ogg_bound_rejects():
    with pytest.raises(ValueError):
        ogg_bound(10, 2)
    with pytest.raises(ValueError):
        ogg_bound(11, 4)


@given(st.sampled_from(ODD_PRIMES), st.sampled_from(ODD_PRIMES))
def test_ogg_monotone_in_level(p, r):
    if p < r:
        assert ogg_lower_bound(p, REDUCTION_PRIME) < ogg_lower_bound(r, REDUCTION_PRIME)


@given(st.integers(min_value=1, max_value=50), st.sampled_from(ODD_PRIMES))
def test_ogg_threshold_is_sound(d, p):
    # gonality >= #X(F_4)/(4 + 1) must exceed the Frey cap 2d
    if finite_by_ogg(p, d):
        assert ogg_lower_bound(p, REDUCTION_PRIME) / (REDUCTION_PRIME**2 + 1) > frey_gonality_cap(d)


@given(st.integers(min_value=1, max_value=50))
def test_threshold_monotone(d):
    assert finiteness_threshold(d + 1) > finiteness_threshold(d)
    assert finiteness_threshold(d) == 120 * d - 24


@pytest.mark.parametrize("p,expected", [(691, False), (701, True), (2, False), (709, True)])
def test_degree6_boundary(p, expected):
    assert finite_by_ogg(p, 6) is expected


def test_degree_validation():
    for fn in (finiteness_threshold, frey_gonality_cap):
        with pytest.raises(ValueError):
            fn(0)
