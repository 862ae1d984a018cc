"""Gross lattices of quaternion orders, representation numbers and theta coefficients.

A ternary lattice is stored by its bilinear Gram B(x, y) = Q(x+y) - Q(x) - Q(y),
so Q(x) = x^T B x / 2 and the Q-Gram (B/2) has determinant det(B)/8.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from . import kernels
from .errors import ConsistencyError, InputError
from .lattice import CanonicalForm, det, enumerate_short, hnf, lll_gram, upper_triangle
from .quatarith import QuatOrder

Matrix = tuple[tuple[int, ...], ...]


def _as_matrix(g) -> Matrix:
    return tuple(tuple(int(x) for x in row) for row in g)


@dataclass(frozen=True)
class TernaryLattice:
    gram: Matrix
    provenance: tuple[int, int, int] | None = None

    def __post_init__(self):
        g = _as_matrix(self.gram)
        object.__setattr__(self, "gram", g)
        if len(g) != 3 or any(len(r) != 3 for r in g):
            raise InputError("ternary lattice needs a 3x3 Gram matrix")
        if any(g[i][j] != g[j][i] for i in range(3) for j in range(3)):
            raise InputError("Gram matrix must be symmetric")
        if any(g[i][i] % 2 for i in range(3)):
            raise InputError("bilinear Gram needs even diagonal (integral quadratic form)")
        minors = (g[0][0], g[0][0] * g[1][1] - g[0][1] ** 2, det(g))
        if any(m <= 0 for m in minors):
            raise InputError("Gram matrix is not positive definite")

    @classmethod
    def from_q_gram(cls, q, provenance=None) -> "TernaryLattice":
        """From the Gram of Q itself (half-integral off the diagonal allowed)."""
        g = [[2 * Fraction(q[i][j]) for j in range(3)] for i in range(3)]
        if any(x.denominator != 1 for r in g for x in r):
            raise InputError("Q-Gram must have half-integral off-diagonal entries")
        return cls(tuple(tuple(int(x) for x in r) for r in g), provenance)

    @property
    def q_gram(self) -> tuple[tuple[Fraction, ...], ...]:
        return tuple(tuple(Fraction(x, 2) for x in row) for row in self.gram)

    @property
    def det(self) -> Fraction:
        """Determinant of the Q-Gram."""
        return Fraction(det(self.gram)) / 8

    def Q(self, x) -> int:
        g = self.gram
        return sum(g[i][j] * x[i] * x[j] for i in range(3) for j in range(3)) // 2

    def reduced(self) -> "TernaryLattice":
        gr, _ = lll_gram(self.gram)
        return TernaryLattice(gr, self.provenance)

    def canonical(self) -> CanonicalForm:
        return CanonicalForm(self.gram)

    def gram6(self) -> list[int]:
        return upper_triangle(self.gram)

    def to_json(self) -> dict:
        doc = {"gram": [list(r) for r in self.gram], "det": str(self.det)}
        if self.provenance is not None:
            doc["provenance"] = list(self.provenance)
        return doc


def gross_lattice(R: QuatOrder, provenance=None) -> TernaryLattice:
    """(2R + Z) intersected with the trace-zero space, with the reduced-norm form."""
    A = R.algebra
    gens = [[2 * r[1], 2 * r[2], 2 * r[3]] for r in R.rows]
    rows = hnf(gens)
    if len(rows) != 3:
        raise ConsistencyError(f"Gross lattice has rank {len(rows)}, expected 3")
    den2 = R.den * R.den
    a, b = A.a, A.b
    g = []
    for x in rows:
        row = []
        for y in rows:
            v = 2 * (-a * x[0] * y[0] - b * x[1] * y[1] + a * b * x[2] * y[2])
            if v % den2:
                raise ConsistencyError("Gross lattice form is not integral")
            row.append(v // den2)
        g.append(row)
    gr, _ = lll_gram(g)
    return TernaryLattice(gr, provenance)


def rep_number(L: TernaryLattice, m: int) -> int:
    """#{x in L : Q(x) = m} by direct short-vector enumeration."""
    if m < 0:
        raise InputError("m must be nonnegative")
    if m == 0:
        return 1
    return sum(1 for v, _ in enumerate_short(L.gram, 2 * m) if v == 2 * m)


def primitive_rep_number(L: TernaryLattice, m: int) -> int:
    """Representations of m by vectors with coprime coordinates."""
    if m < 1:
        raise InputError("m must be positive")
    return sum(1 for v, x in enumerate_short(L.gram, 2 * m) if v == 2 * m and gcd(*x) == 1)


def theta_table(L: TernaryLattice, bound: int, impl=None) -> tuple[list[int], list[int]]:
    """``(r, r_star)`` for m = 0..bound in one enumeration pass."""
    if bound < 1:
        raise InputError("bound must be >= 1")
    gr, _ = lll_gram(L.gram)
    return kernels.ternary_theta(gr, bound, impl=impl)


def theta_coeffs(L: TernaryLattice, bound: int) -> list[int]:
    return theta_table(L, bound)[0]


def kohnen_violations(r) -> list[int]:
    """Indices m with r[m] != 0 and m not congruent to 0 or 3 mod 4."""
    return [m for m, v in enumerate(r) if v and m % 4 in (1, 2)]


def theta_csv(r, rs) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "r", "r_star"])
    for m, (x, y) in enumerate(zip(r, rs)):
        w.writerow([m, x, y])
    return buf.getvalue()


def class_gross_lattices(S) -> list[TernaryLattice]:
    """Gross lattice of the order attached to each class of an ideal class set."""
    return [gross_lattice(R, (S.delta, S.level, i)) for i, R in enumerate(S.class_orders())]
