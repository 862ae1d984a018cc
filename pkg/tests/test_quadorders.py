from __future__ import annotations

from math import gcd, isqrt

import pytest
from hypothesis import given, settings, strategies as st
from sympy import primerange

from cmequi.errors import InputError
from cmequi.quadorders import (
    QuadOrder,
    class_number,
    class_number_bruteforce,
    class_number_formula,
    factor_discriminant,
    fundamental_discriminants,
    is_fundamental,
    kronecker,
    unit_count,
)


def naive_class_number(d: int) -> int:
    """Reduced forms counted by a plain triple loop (no divisor tricks)."""
    h = 0
    for a in range(1, isqrt(-d // 3) + 1):
        for b in range(-a + 1, a + 1):
            if (b * b - d) % (4 * a):
                continue
            c = (b * b - d) // (4 * a)
            if c < a or (b < 0 and a == c):
                continue
            if gcd(gcd(a, b), c) == 1:
                h += 1
    return h


def naive_legendre(D: int, p: int) -> int:
    if D % p == 0:
        return 0
    return 1 if any((x * x - D) % p == 0 for x in range(p)) else -1


@pytest.mark.parametrize("D,p,expected", [(-4, 2, 0), (-3, 11, -1), (-7, 11, 1)])
def test_kronecker_examples(D, p, expected):
    assert kronecker(D, p) == expected


def test_kronecker_rejects_composite():
    with pytest.raises(InputError):
        kronecker(-3, 9)


@pytest.mark.parametrize("d,expected", [(-4, (-4, 1)), (-12, (-3, 2)), (-48, (-3, 4)), (-63, (-7, 3)), (-16, (-4, 2))])
def test_factor_discriminant(d, expected):
    assert factor_discriminant(d) == expected


@pytest.mark.parametrize("d", [0, 5, -5, -6, -2])
def test_factor_discriminant_rejects(d):
    with pytest.raises(InputError):
        factor_discriminant(d)


@pytest.mark.parametrize("d,expected", [(-3, 1), (-23, 3), (-47, 5), (-4, 1), (-63, 4), (-12, 1), (-16, 1)])
def test_bruteforce_examples(d, expected):
    assert class_number_bruteforce(d) == expected


def test_bruteforce_matches_naive_loop():
    for n in range(3, 1500):
        d = -n
        if d % 4 in (0, 1):
            assert class_number_bruteforce(d) == naive_class_number(d), d


@pytest.mark.parametrize("D,c,expected", [(-4, 2, 1), (-3, 2, 1), (-7, 3, 4)])
def test_formula_examples(D, c, expected):
    assert class_number_formula(D, c) == expected


def test_formula_rejects_nonfundamental():
    with pytest.raises(InputError):
        class_number_formula(-12, 1)


@pytest.mark.parametrize("D,c,u", [(-3, 1, 6), (-4, 1, 4), (-3, 2, 2), (-4, 3, 2), (-7, 1, 2)])
def test_unit_count(D, c, u):
    assert unit_count(D, c) == u


def test_quadorder_type():
    O = QuadOrder(-7, 3)
    assert O.disc == -63 and O.units == 2 and O.class_number == 4
    with pytest.raises(InputError):
        QuadOrder(-8 * 4, 1)


def test_fundamental_list():
    Ds = fundamental_discriminants(3, 30)
    assert Ds == [-3, -4, -7, -8, -11, -15, -19, -20, -23, -24]
    assert all(is_fundamental(D) for D in Ds)


def test_formula_small_range():
    for D in fundamental_discriminants(3, 400):
        for c in range(1, 8):
            assert class_number_formula(D, c) == class_number_bruteforce(D * c * c)


discriminants = st.integers(3, 20000).map(lambda n: -n).filter(lambda d: d % 4 in (0, 1))


@given(discriminants)
def test_factor_recompose(d):
    D, c = factor_discriminant(d)
    assert D * c * c == d and is_fundamental(D)
    assert class_number(d) == class_number_bruteforce(d)


@settings(max_examples=60)
@given(st.sampled_from(fundamental_discriminants(3, 2000)), st.sampled_from(list(primerange(3, 60))), st.integers(1, 20))
def test_kronecker_periodic(D, p, k):
    D2 = D - 4 * p * k
    assert kronecker(D, p) == kronecker(D2, p)
    assert kronecker(D, p) == naive_legendre(D, p)


@given(st.sampled_from(fundamental_discriminants(3, 500)), st.sampled_from(fundamental_discriminants(3, 500)))
def test_kronecker_multiplicative(D1, D2):
    for p in (3, 5, 7, 11, 13):
        assert kronecker(D1 * D2, p) == kronecker(D1, p) * kronecker(D2, p)
