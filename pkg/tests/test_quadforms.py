from fractions import Fraction
from math import gcd, isqrt, log, pi, sqrt

import pytest
from hypothesis import given, settings, strategies as st

from artifact.arith import genus_x0, primes_in
from artifact.quadforms import (
    Discriminant,
    Method,
    alpha,
    analytic_threshold_check,
    class_number,
    class_number_cox,
    class_number_reduced,
    genus_x0_plus,
    h4p_bound,
    is_fundamental,
    plus_genus_inequality,
    ramare_bound,
    reduced_forms,
)

DISCS = st.integers(min_value=-4000, max_value=-3).filter(lambda D: D % 4 in (0, 1))


def brute_class_number(D):
    """Count SL2(Z)-classes by listing every primitive form with |b| <= a <= c (independent of reduced_forms)."""
    seen = set()
    for a in range(1, isqrt(-D) + 1):
        for b in range(-a, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a or gcd(gcd(a, b), c) != 1:
                continue
            # normalise the boundary cases to the reduced representative
            if b == -a or (a == c and b < 0):
                b = -b
            seen.add((a, b, c))
    return len(seen)


@pytest.mark.parametrize(
    "D,h",
    [(-3, 1), (-4, 1), (-7, 1), (-8, 1), (-12, 1), (-15, 2), (-16, 1), (-20, 2), (-23, 3), (-27, 1),
     (-36, 2), (-44, 3), (-47, 5), (-56, 4), (-71, 7), (-99, 2), (-163, 1), (-167, 11), (-191, 13), (-199, 9)],
)
def test_class_numbers_known(D, h):
    assert class_number_reduced(D) == h


@given(DISCS)
def test_reduced_forms_match_brute_force(D):
    forms = reduced_forms(D)
    assert len(forms) == brute_class_number(D)
    for a, b, c in forms:
        assert b * b - 4 * a * c == D
        assert abs(b) <= a <= c


@given(DISCS)
def test_discriminant_decomposition(D):
    disc = Discriminant.of(D)
    assert disc.d * disc.m**2 == D
    assert is_fundamental(disc.d)
    assert disc.fundamental == (disc.m == 1)


@given(DISCS)
def test_cox_formula_equals_reduced_count(D):
    disc = Discriminant.of(D)
    assert class_number_cox(disc.d, disc.m) == class_number_reduced(D)


def test_class_number_result():
    r = class_number(-23)
    assert r.h == 3 and r.method is Method.ReducedForms and r.D.fundamental


@pytest.mark.parametrize("bad", [0, 5, -1, -2, -5])
def test_discriminant_rejects(bad):
    with pytest.raises(ValueError):
        Discriminant.of(bad)


def test_cox_rejects_non_fundamental():
    with pytest.raises(ValueError):
        class_number_cox(-12, 2)
    with pytest.raises(ValueError):
        class_number_cox(-3, 0)


def test_ramare_bound_formula():
    b = ramare_bound(-20)
    ref = sqrt(20) / (2 * pi) * (log(20) + 5 - 2 * log(6))
    assert b.lower <= Fraction(ref) + Fraction(1, 10**12) and Fraction(ref) - Fraction(1, 10**12) <= b.upper
    assert b.upper - b.lower < Fraction(1, 10**20)
    assert b.value == pytest.approx(3.1404, abs=1e-4)
    assert b.certainly_ge(class_number_reduced(-20))


@given(DISCS.filter(lambda D: D < -4 and is_fundamental(D)))
def test_ramare_bound_dominates(d):
    assert ramare_bound(d).certainly_ge(class_number_reduced(d))


def test_ramare_rejects():
    for d in (-3, -4, -12, 5):
        with pytest.raises(ValueError):
            ramare_bound(d)


@given(st.sampled_from(primes_in(5, 5000)))
def test_h4p_bound_dominates(p):
    assert h4p_bound(p).certainly_ge(class_number_reduced(-4 * p))


def test_alpha_by_residue():
    assert alpha(7) == 2 and alpha(23) == 2
    assert alpha(3) == Fraction(4, 3) and alpha(11) == Fraction(4, 3)
    assert alpha(5) == 1 and alpha(17) == 1


@pytest.mark.parametrize(
    "p,gp",
    [(11, 0), (23, 0), (31, 0), (37, 1), (41, 0), (43, 1), (47, 0), (59, 0), (67, 2), (71, 0), (73, 2),
     (97, 3), (103, 2), (107, 2), (109, 3), (113, 3), (127, 3), (167, 2), (191, 2), (223, 6), (227, 5)],
)
def test_plus_genus_known(p, gp):
    assert genus_x0_plus(p) == gp


@given(st.sampled_from(primes_in(5, 20000)))
def test_plus_genus_bounds(p):
    gp = genus_x0_plus(p)
    assert 0 <= gp <= genus_x0(p)
    assert Fraction(genus_x0(p) + 1, 2) - gp >= 0


def test_plus_genus_rejects():
    for p in (2, 3, 4, 9):
        with pytest.raises(ValueError):
            genus_x0_plus(p)


def test_sandwich_fails_for_small_primes():
    assert not plus_genus_inequality(37)
    assert plus_genus_inequality(3001)


@settings(max_examples=25)
@given(st.sampled_from(primes_in(43644, 60000)))
def test_analytic_check_implies_inequality(p):
    if analytic_threshold_check(p):
        assert plus_genus_inequality(p)


def test_analytic_check_fails_small():
    assert not analytic_threshold_check(1009)
