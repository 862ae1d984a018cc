"""Compiled kernels against the pure-Python fallback."""

from __future__ import annotations

import os
import subprocess
import sys
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from cmequi import kernels
from cmequi.lattice import enumerate_short

py = kernels.backend("python")
try:
    cy = kernels.backend("cython")
except ImportError:  # pragma: no cover - extension missing
    cy = None

needs_cy = pytest.mark.skipif(cy is None, reason="compiled kernels not built")


def test_active_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


@needs_cy
def test_compiled_is_default():
    assert kernels.BACKEND == "cython"


def test_env_forces_fallback():
    out = subprocess.run(
        [sys.executable, "-c", "from cmequi import kernels; print(kernels.BACKEND)"],
        env={**os.environ, "CMEQUI_PURE_PYTHON": "1"},
        capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


@needs_cy
def test_class_numbers_agree():
    ds = [-n for n in range(3, 6000) if (-n) % 4 in (0, 1)]
    assert kernels.class_numbers(ds, impl=cy) == kernels.class_numbers(ds, impl=py)


def brute_theta(B, bound):
    r = [0] * (bound + 1)
    rs = [0] * (bound + 1)
    r[0] = 1
    from math import gcd

    for v, x in enumerate_short(B, 2 * bound):
        if v % 2 == 0:
            r[v // 2] += 1
            if gcd(*x) == 1:
                rs[v // 2] += 1
    return r, rs


ternary = st.tuples(*[st.integers(-4, 4)] * 9).filter(
    lambda t: (t[0] * (t[4] * t[8] - t[5] * t[7]) - t[1] * (t[3] * t[8] - t[5] * t[6]) + t[2] * (t[3] * t[7] - t[4] * t[6])) != 0
)


def _gram(t):
    M = [t[0:3], t[3:6], t[6:9]]
    return [[2 * sum(M[i][k] * M[j][k] for k in range(3)) for j in range(3)] for i in range(3)]


@settings(max_examples=40, deadline=None)
@given(ternary, st.integers(1, 60))
def test_theta_backends_agree(t, bound):
    B = _gram(t)
    expect = brute_theta(B, bound)
    assert py.ternary_theta(B, bound) == expect
    if cy is not None:
        assert cy.ternary_theta(B, bound) == expect


def test_overflow_guard_falls_back():
    B = [[2 * 10**9, 0, 0], [0, 2 * 10**9, 0], [0, 0, 2 * 10**9]]
    assert not kernels.ternary_fits_int64(B, 10**12)
    r, rs = kernels.ternary_theta(B, 3)
    assert r == [1, 0, 0, 0]


@pytest.mark.skipif(kernels._compiled is None, reason="compiled kernels not built")
def test_benchmark_script_runs():
    bench = Path(__file__).resolve().parent.parent / "benchmarks" / "bench_kernels.py"
    res = subprocess.run([sys.executable, str(bench), "--quick", "--repeat", "1"], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert res.stdout.count("identical") == 2
