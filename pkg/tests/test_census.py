from __future__ import annotations

import pytest

from cmequi.census import (
    classify_divisor,
    dual_graph,
    eichler_class_number,
    p_fundamental_discriminants,
    ratio_experiment,
    shimura_genus,
    superspecial_count,
    supersingular_count,
    window_max_ratios,
)
from cmequi.errors import InputError
from cmequi.quatarith import class_set


@pytest.mark.parametrize("delta,level,g", [(6, 1, 0), (10, 1, 0), (14, 1, 1), (26, 1, 2), (35, 1, 3), (65, 1, 5), (77, 1, 5), (95, 1, 7), (6, 5, 1), (15, 2, 3)])
def test_shimura_genus(delta, level, g):
    assert shimura_genus(delta, level) == g


@pytest.mark.parametrize("bad", [(7, 1), (30, 1), (6, 3), (12, 1), (1, 1)])
def test_shimura_genus_rejects(bad):
    with pytest.raises(InputError):
        shimura_genus(*bad)


@pytest.mark.parametrize("delta,level,h", [(2, 1, 1), (11, 1, 2), (37, 1, 3), (101, 1, 9), (2, 3, 1), (11, 7, 8), (30, 1, 2)])
def test_eichler_class_number(delta, level, h):
    assert eichler_class_number(delta, level, verify=True) == h


def test_eichler_class_number_rejects_indefinite():
    with pytest.raises(InputError):
        eichler_class_number(6)


def test_supersingular_count():
    assert supersingular_count(13, 5) == 48
    assert supersingular_count(5, 1) is None
    with pytest.raises(InputError):
        supersingular_count(9, 3)


def test_classify_divisor():
    assert classify_divisor(77, 1, 7, -4) == "smooth-supersingular"
    assert classify_divisor(77, 1, 7, -7) == "superspecial"
    assert classify_divisor(6, 1, 5, -4) == "ordinary"
    assert classify_divisor(6, 1, 5, -3) == "supersingular"
    with pytest.raises(InputError):
        classify_divisor(77, 1, 7, -3)  # -3 is a square mod 7: split at a ramified prime
    with pytest.raises(InputError):
        classify_divisor(6, 1, 5, -12)


def test_classify_divisor_unramified_primes():
    assert classify_divisor(77, 1, 3, -3) == "supersingular"
    assert classify_divisor(77, 1, 3, -4) == "supersingular"
    assert classify_divisor(77, 1, 3, -11) == "ordinary"


def test_superspecial_count():
    assert superspecial_count(6, 2) == eichler_class_number(3, 2) == 1
    assert superspecial_count(77, 7) == len(class_set(11, 7)) == 8
    with pytest.raises(InputError):
        superspecial_count(77, 5)


@pytest.mark.parametrize("delta,p,level", [(6, 2, 1), (6, 3, 1), (22, 2, 1), (22, 11, 1), (26, 2, 1), (35, 7, 1), (77, 7, 1), (77, 11, 1), (6, 2, 5), (15, 3, 2)])
def test_dual_graph_betti_is_genus(delta, p, level):
    g = dual_graph(delta, p, level)
    assert g.betti == shimura_genus(delta, level)
    assert g.components() == 1
    # every edge class order sits in one vertex of each family
    assert len(g.edges) == len(class_set(delta // p, level * p))


def test_dual_graph_77_7():
    g = dual_graph(77, 7)
    assert (len(g.edges), g.n_vertices, g.components()) == (8, 4, 1)
    doc = g.to_json()
    assert doc["betti"] == 5
    assert g.edge_list().count("\n") == 9


def test_p_fundamental():
    ds = p_fundamental_discriminants(11, 3, 500)
    assert -484 not in ds and -44 in ds and -99 in ds
    assert all(d % 4 in (0, 1) for d in ds)


def test_ratio_experiment():
    rows = ratio_experiment(11, 1, (3, 400))
    assert {r.cls for r in rows} == {0, 1}
    assert all(r.h >= 1 and r.rstar >= 0 for r in rows)
    m = window_max_ratios(rows, [(3, 200), (200, 401)])
    assert all(x is not None and x > 0 for x in m)
    with pytest.raises(InputError):
        ratio_experiment(77, 1, (3, 10))
