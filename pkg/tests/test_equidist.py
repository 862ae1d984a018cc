from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cmequi.errors import ConsistencyError, InputError
from cmequi.equidist import (
    EmbeddingCount,
    WeightedMeasure,
    admissible,
    bruteforce_embeddings,
    convergence_experiment,
    deviation_slope,
    embedding_counts_from_reps,
    embedding_number,
    locus,
    mu_Dc,
    mu_canonical,
    smooth_locus_measure,
    tv_distance,
    window_medians,
)
from cmequi.grosslattice import class_gross_lattices
from cmequi.quadorders import fundamental_discriminants, kronecker
from cmequi.quatarith import class_set


@pytest.mark.parametrize("delta,N,dmax,cmax", [(11, 1, 100, 1), (2, 1, 40, 3), (3, 1, 40, 3), (3, 2, 40, 2), (11, 7, 60, 1)])
def test_counts_match_bruteforce(delta, N, dmax, cmax):
    S = class_set(delta, N)
    gross = class_gross_lattices(S)
    for D in fundamental_discriminants(3, dmax):
        for c in range(1, cmax + 1):
            E = embedding_number(S, gross, D, c)
            brute = tuple(bruteforce_embeddings(R, D * c * c) for R in S.class_orders())
            assert E.counts == brute, (D, c)


def test_split_discriminant_has_no_embeddings():
    S = class_set(11)
    gross = class_gross_lattices(S)
    for D in fundamental_discriminants(3, 300):
        if kronecker(D, 11) == 1:
            assert embedding_number(S, gross, D, 1).total == 0


def test_d_minus_3_into_delta_11():
    S = class_set(11)
    assert embedding_number(S, class_gross_lattices(S), -3, 1).counts == (0, 2)


def test_non_integral_count_raises():
    with pytest.raises(ConsistencyError):
        embedding_counts_from_reps([1], [2], -7, 1)
    with pytest.raises(InputError):
        S = class_set(11)
        embedding_number(S, class_gross_lattices(S), -12, 1)


def test_mu_canonical_values():
    mu = mu_canonical([2, 3])
    assert mu.weights == (Fraction(3, 5), Fraction(2, 5))
    assert mu.is_probability
    assert mu_canonical([4, 6]).weights == mu.weights
    assert mu_canonical(class_set(11)).weights == mu.weights


def test_tv_examples():
    a = WeightedMeasure((0, 1), (Fraction(1, 2), Fraction(1, 2)))
    b = WeightedMeasure((0, 1), (Fraction(3, 5), Fraction(2, 5)))
    c = WeightedMeasure((0, 1), (Fraction(1), Fraction(0)))
    d = WeightedMeasure((0, 1), (Fraction(0), Fraction(1)))
    assert tv_distance(a, b) == Fraction(1, 10)
    assert tv_distance(a, a) == 0
    assert tv_distance(c, d) == 1
    with pytest.raises(InputError):
        tv_distance(a, WeightedMeasure((0, 2), a.weights))


prob = st.lists(st.integers(0, 20), min_size=3, max_size=3).filter(any).map(
    lambda xs: WeightedMeasure((0, 1, 2), tuple(Fraction(x, sum(xs)) for x in xs))
)


@settings(max_examples=100, deadline=None)
@given(prob, prob, prob)
def test_tv_is_a_metric(x, y, z):
    assert 0 <= tv_distance(x, y) <= 1
    assert tv_distance(x, y) == tv_distance(y, x)
    assert (tv_distance(x, y) == 0) == (x.weights == y.weights)
    assert tv_distance(x, z) <= tv_distance(x, y) + tv_distance(y, z)


def test_mu_Dc_flags():
    E = EmbeddingCount(-4, 1, (0, 0))
    assert "empty" in mu_Dc(E, 0, 1).flags
    E = EmbeddingCount(-7, 1, (1, 1))
    mu = mu_Dc(E, 0, 1)
    assert mu.total == 1 and mu.flags == ()
    with pytest.raises(InputError):
        mu_Dc(E, 0, 2)
    with pytest.raises(InputError):
        WeightedMeasure((0,), (Fraction(0),)).normalized()


def test_supersingular_mass_is_one():
    """sum_i h_i = 2^{omega+eps} h(D) for D unramified at 11 and 7; each ramified prime halves it."""
    S = class_set(11, 7)
    gross = class_gross_lattices(S)
    loc = locus(11, 7, 11)
    n = 0
    for D in fundamental_discriminants(3, 400):
        if admissible(loc, D, 1):
            mu = mu_Dc(embedding_number(S, gross, D, 1), loc.omega, loc.eps)
            ramified = sum(kronecker(D, q) == 0 for q in (7, 11))
            expected = Fraction(1, 2**ramified)
            assert mu.total == expected, D
            n += 1
    assert n > 10


def test_locus():
    assert locus(11, 7, 11).kind == "supersingular"
    loc = locus(11, 7, 7)
    assert (loc.kind, loc.omega, loc.eps) == ("superspecial", 0, 0)
    with pytest.raises(InputError):
        locus(11, 7, 5)


def test_experiment_layout_and_determinism():
    a = convergence_experiment(11, 1, 11, (3, 200))
    b = convergence_experiment(11, 1, 11, (3, 200))
    assert a.to_csv() == b.to_csv()
    lines = a.to_csv().splitlines()
    assert lines[0] == "D,c,absnorm,w0,w1,tv,mass"
    norms = [r.absnorm for r in a.rows]
    assert norms == sorted(norms)
    assert all(0 <= r.tv <= 1 for r in a.rows)
    meds = window_medians(a, [(3, 100), (100, 200), (5000, 6000)])
    assert meds[2] is None and meds[0] is not None


def test_empty_experiment_has_diagnostic():
    exp = convergence_experiment(11, 7, 7, (3, 6))
    assert exp.rows == [] and exp.diagnostic


def test_deviation_slope_shape():
    fits = deviation_slope(11, 1, (3, 3000))
    assert len(fits) == 2
    assert all(f.slope is not None and f.slope < 0.5 for f in fits)
    single = deviation_slope(2, 1, (3, 100))
    assert single[0].slope is None


def test_smooth_locus_measure():
    mu = smooth_locus_measure(22, 2)
    assert mu.support == ("L0", "L1", "R0", "R1")
    assert mu.weights == (Fraction(3, 10), Fraction(1, 5), Fraction(3, 10), Fraction(1, 5))
    assert smooth_locus_measure(22, 11).weights == (Fraction(1, 2), Fraction(1, 2))
