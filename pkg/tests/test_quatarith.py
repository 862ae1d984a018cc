from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st
from sympy import primerange

from cmequi.errors import InputError
from cmequi.quatarith import (
    IdealClassSet,
    auxiliary_prime,
    build_algebra,
    class_set,
    conjugate_order,
    eichler_mass,
    eichler_order,
    hilbert_symbol,
    mass,
    maximal_order,
    order_of,
    right_ideal_class_set,
    unit_order,
)


def naive_hilbert(a, b, p):
    """Solubility of a x^2 + b y^2 = z^2 mod p^k for a large enough power, primitive solutions."""
    k = 5 if p == 2 else 3
    m = p**k
    squares = {}
    for z in range(m):
        squares.setdefault(z * z % m, []).append(z)
    for x in range(m):
        for y in range(m):
            for z in squares.get((a * x * x + b * y * y) % m, ()):
                if x % p or y % p or z % p:
                    return 1
    return -1


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_hilbert_symbol_against_local_solubility(p):
    for a in (-1, -2, -3, -5, -6, -7, -11, 2, 3, 5, 6, 10, 14):
        for b in (-1, -2, -3, -7, -10, 3, 5):
            assert hilbert_symbol(a, b, p) == naive_hilbert(a, b, p), (a, b, p)


@pytest.mark.parametrize("ram,ab", [((2,), (-1, -1)), ((3,), (-1, -3)), ((11,), (-1, -11))])
def test_build_algebra(ram, ab):
    A = build_algebra(ram)
    assert (A.a, A.b) == ab and A.disc == ram[0]


@pytest.mark.parametrize("ram", [(2, 3), (), (4,), (2, 3, 5, 7)])
def test_build_algebra_rejects(ram):
    with pytest.raises(InputError):
        build_algebra(ram)


@pytest.mark.parametrize("delta", [2, 3, 5, 7, 11, 13, 30, 42, 97])
def test_maximal_order_discriminant(delta):
    O = order_of(delta)
    assert O.discriminant() == delta
    assert O.contains((0, 0, 0, 0)) and O.contains((1, 0, 0, 0))


def test_hurwitz_order_contains_half_sum():
    O = order_of(2)
    assert O.contains((1, 1, 1, 1), 2)
    assert unit_order(O) == 12


@pytest.mark.parametrize("delta,N", [(11, 7), (2, 3), (3, 5), (13, 6), (2, 15)])
def test_eichler_order_discriminant(delta, N):
    E = order_of(delta, N)
    assert E.discriminant() == delta * N
    assert order_of(delta).lattice.contains_lattice(E.lattice)


def test_eichler_level_one_is_maximal():
    O = order_of(11)
    assert eichler_order(O, 1) is O


@pytest.mark.parametrize("N", [4, 11, 0])
def test_eichler_order_rejects(N):
    with pytest.raises(InputError):
        eichler_order(order_of(11), N)


@pytest.mark.parametrize("delta,N,h,units", [
    (2, 1, 1, [12]),
    (3, 1, 1, [6]),
    (11, 1, 2, [2, 3]),
    (11, 7, 8, None),
    (37, 1, 3, [1, 1, 1]),
])
def test_class_sets(delta, N, h, units):
    S = class_set(delta, N)
    assert len(S) == h
    if units is not None:
        assert sorted(S.unit_orders) == sorted(units)
    assert mass(S) == eichler_mass(delta, N)


def test_mass_examples():
    assert class_set(2).mass() == Fraction(1, 12)
    assert class_set(11).mass() == Fraction(5, 6)
    assert class_set(3).mass() == Fraction(1, 6)
    assert class_set(11, 7).mass() == Fraction(20, 3)


@pytest.mark.parametrize("delta,N", [(11, 1), (23, 1), (11, 7), (5, 3), (67, 1)])
def test_class_count_independent_of_neighbour_prime(delta, N):
    O = order_of(delta, N)
    a = right_ideal_class_set(O, auxiliary_prime(delta, N, 0))
    b = right_ideal_class_set(O, auxiliary_prime(delta, N, 1))
    assert [c.gram for c in a.classes] == [c.gram for c in b.classes]
    assert a.unit_orders == b.unit_orders


@pytest.mark.parametrize("delta,N", [(11, 7), (2, 5), (43, 2), (13, 6)])
def test_class_orders_are_eichler_of_same_discriminant(delta, N):
    S = class_set(delta, N)
    for R in S.class_orders():
        assert R.discriminant() == delta * N


def test_classes_pairwise_non_isomorphic():
    from cmequi.quatarith import ideals_isomorphic

    S = class_set(11, 7)
    A = S.order.algebra
    for i, a in enumerate(S.classes):
        for j, b in enumerate(S.classes):
            assert ideals_isomorphic(A, a.ideal, a.norm, b.ideal, b.norm) == (i == j)


def test_json_round_trip():
    S = class_set(11, 7)
    T = IdealClassSet.from_json(S.to_json())
    assert T.to_json() == S.to_json()
    short = S.to_json(full=False)
    assert set(short) == {"delta", "level", "classes"}
    assert all(len(c["gram"]) == 10 for c in short["classes"])


def test_bad_neighbour_prime():
    with pytest.raises(InputError):
        right_ideal_class_set(order_of(11), 11)


elements = st.tuples(*[st.integers(-3, 3)] * 4).filter(any)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([2, 3, 11, 13]), elements)
def test_unit_order_conjugation_invariant(delta, alpha):
    O = order_of(delta)
    coords = [sum(c * r[k] for c, r in zip(alpha, O.rows)) for k in range(4)]
    if O.algebra.nrd(coords) == 0:
        return
    C = conjugate_order(O, coords)
    assert C.discriminant() == delta
    assert unit_order(C) == unit_order(O)


def test_mass_identity_small_primes():
    for d in primerange(2, 60):
        for N in (1, 2, 3, 5):
            if d % N == 0 or (N > 1 and d == N):
                continue
            S = class_set(d, N)
            assert S.mass() == eichler_mass(d, N)
