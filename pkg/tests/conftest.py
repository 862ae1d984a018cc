from __future__ import annotations

import pytest
from sympy import primerange

from cmequi.grosslattice import class_gross_lattices
from cmequi.quatarith import class_set

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[n] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def first_coprime_primes(n: int, count: int = 2) -> list[int]:
    return [q for q in primerange(2, 100) if n % q][:count]


def suite_pairs() -> list[tuple[int, int]]:
    """All prime discriminants up to 200 with level 1 and the first two coprime primes."""
    return [(d, n) for d in primerange(2, 201) for n in [1] + first_coprime_primes(d)]


@pytest.fixture(scope="session")
def suite():
    return [class_set(d, n) for d, n in suite_pairs()]


@pytest.fixture(scope="session")
def suite_gross(suite):
    return [class_gross_lattices(S) for S in suite]
