"""Exact integer lattice utilities.

Everything here works on plain Python integers and :class:`fractions.Fraction`
so results are exact: Hermite normal form, exact LLL on a Gram matrix,
Fincke-Pohst enumeration with integer coordinate bounds, and a canonical
successive-minima Gram form (ranks up to 4) used for isometry testing.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import gcd, isqrt
from typing import Iterator, Sequence

Matrix = tuple[tuple[int, ...], ...]


def hnf(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row-style Hermite normal form of the lattice spanned by ``rows``.

    Returns the nonzero rows in echelon form with positive pivots and the
    entries above each pivot reduced into ``[0, pivot)``.
    """
    work = [list(r) for r in rows if any(r)]
    if not work:
        return []
    n = len(work[0])
    out: list[list[int]] = []
    pivots: list[int] = []
    for col in range(n):
        if not work:
            break
        piv = [r for r in work if r[col]]
        rest = [r for r in work if not r[col]]
        if not piv:
            continue
        while len(piv) > 1:
            piv.sort(key=lambda r: abs(r[col]))
            p = piv[0]
            keep = [p]
            for r in piv[1:]:
                q = r[col] // p[col]
                r = [x - q * y for x, y in zip(r, p)]
                if r[col]:
                    keep.append(r)
                elif any(r):
                    rest.append(r)
            piv = keep
        p = piv[0]
        if p[col] < 0:
            p = [-x for x in p]
        out.append(p)
        pivots.append(col)
        work = rest
    for i in range(len(out)):
        c, pv = pivots[i], out[i][pivots[i]]
        for j in range(i):
            q = out[j][c] // pv
            if q:
                out[j] = [x - q * y for x, y in zip(out[j], out[i])]
    return out


def solve_in_hnf(basis: Sequence[Sequence[int]], v: Sequence[int]) -> list[int] | None:
    """Integer coordinates of ``v`` in an HNF basis, or None if ``v`` is not in the lattice."""
    v = list(v)
    coeffs = []
    for row in basis:
        col = next(i for i, x in enumerate(row) if x)
        q, r = divmod(v[col], row[col])
        if r:
            return None
        coeffs.append(q)
        if q:
            v = [x - q * y for x, y in zip(v, row)]
    if any(v):
        return None
    return coeffs


def det(m: Sequence[Sequence]) -> Fraction:
    """Exact determinant (Fraction Gaussian elimination)."""
    a = [[Fraction(x) for x in row] for row in m]
    n = len(a)
    sign = 1
    result = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c]), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            sign = -sign
        pv = a[c][c]
        result *= pv
        for r in range(c + 1, n):
            f = a[r][c] / pv
            if f:
                for k in range(c, n):
                    a[r][k] -= f * a[c][k]
    return sign * result


def int_det(m: Sequence[Sequence[int]]) -> int:
    """Exact determinant of a small integer matrix (cofactors up to 3x3, Bareiss beyond)."""
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if n == 3:
        return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
    a = [list(r) for r in m]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            p = next((r for r in range(k + 1, n) if a[r][k]), None)
            if p is None:
                return 0
            a[k], a[p] = a[p], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def rank(rows: Sequence[Sequence[int]]) -> int:
    return len(hnf(rows))


def is_primitive(rows: Sequence[Sequence[int]]) -> bool:
    """True iff the integer vectors span a saturated sublattice of Z^n."""
    k = len(rows)
    n = len(rows[0])
    g = 0
    for cols in combinations(range(n), k):
        g = gcd(g, int_det([[r[c] for c in cols] for r in rows]))
        if g == 1:
            return True
    return False


def gram(basis: Sequence[Sequence[int]], form: Sequence[Sequence[int]]) -> list[list[int]]:
    """Gram matrix ``basis * form * basis^T``."""
    fb = [[sum(form[i][j] * b[j] for j in range(len(b))) for i in range(len(b))] for b in basis]
    return [[sum(x * y for x, y in zip(u, fv)) for fv in fb] for u in basis]


def qf(g: Sequence[Sequence[int]], x: Sequence[int]) -> int:
    n = len(x)
    return sum(g[i][j] * x[i] * x[j] for i in range(n) for j in range(n))


def lll_gram(g: Sequence[Sequence[int]]):
    """Integral LLL reduction (delta = 3/4) of a positive definite integer Gram matrix.

    Works with the integral Gram-Schmidt data d_i, lambda_ij throughout, so no
    rationals appear. Returns ``(reduced_gram, transform)`` with
    ``reduced = T g T^T``.
    """
    n = len(g)
    # 1-indexed internally, following the usual presentation of the algorithm
    G = [[0] * (n + 1)] + [[0] + [int(x) for x in row] for row in g]
    H = [[0] * (n + 1)] + [[0] + [int(i == j) for j in range(n)] for i in range(n)]
    lam = [[0] * (n + 1) for _ in range(n + 1)]
    d = [0] * (n + 1)
    d[0] = 1
    d[1] = G[1][1]
    if n == 1:
        return [[G[1][1]]], [[1]]

    def red(k, l):
        if 2 * abs(lam[k][l]) <= d[l]:
            return
        q = (2 * lam[k][l] + d[l]) // (2 * d[l])
        H[k] = [x - q * y for x, y in zip(H[k], H[l])]
        row = [G[k][i] - q * G[l][i] for i in range(n + 1)]
        row[k] = G[k][k] - 2 * q * G[k][l] + q * q * G[l][l]
        for i in range(1, n + 1):
            G[k][i] = G[i][k] = row[i]
        lam[k][l] -= q * d[l]
        for i in range(1, l):
            lam[k][i] -= q * lam[l][i]

    def swap(k, kmax):
        H[k], H[k - 1] = H[k - 1], H[k]
        G[k], G[k - 1] = G[k - 1], G[k]
        for row in G:
            row[k], row[k - 1] = row[k - 1], row[k]
        for j in range(1, k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lm = lam[k][k - 1]
        B = (d[k - 2] * d[k] + lm * lm) // d[k - 1]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k] * lam[i][k - 1] - lm * t) // d[k - 1]
            lam[i][k - 1] = (B * t + lm * lam[i][k]) // d[k]
        d[k - 1] = B

    k, kmax = 2, 1
    while k <= n:
        if k > kmax:
            kmax = k
            for j in range(1, k + 1):
                u = G[k][j]
                for i in range(1, j):
                    u = (d[i] * u - lam[k][i] * lam[j][i]) // d[i - 1]
                if j < k:
                    lam[k][j] = u
                else:
                    if u <= 0:
                        raise ValueError("Gram matrix is not positive definite")
                    d[k] = u
        while True:
            red(k, k - 1)
            if 4 * d[k] * d[k - 2] < 3 * d[k - 1] ** 2 - 4 * lam[k][k - 1] ** 2:
                swap(k, kmax)
                k = max(2, k - 1)
            else:
                break
        for l in range(k - 2, 0, -1):
            red(k, l)
        k += 1
    return [row[1:] for row in G[1:]], [row[1:] for row in H[1:]]


def _ldl(g: Sequence[Sequence[int]]):
    """Fincke-Pohst coefficients: x^T g x = sum_i q[i][i] (x_i + sum_{j>i} q[i][j] x_j)^2."""
    n = len(g)
    q = [[Fraction(x) for x in row] for row in g]
    for i in range(n):
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                q[k][l] -= q[k][i] * q[i][l]
    return q


def _int_range(center: Fraction, budget: Fraction, d: Fraction) -> range:
    """All integers x with d * (x - center)^2 <= budget, computed exactly."""
    if budget < 0:
        return range(0)
    t = budget / d
    cn, cd = center.numerator, center.denominator
    y = isqrt(t.numerator * cd * cd // t.denominator)
    lo = -((y - cn) // cd)  # ceil((cn - y) / cd)
    hi = (cn + y) // cd
    return range(lo, hi + 1)


def enumerate_short(g: Sequence[Sequence[int]], bound: int, reduce: bool = True) -> Iterator[tuple[int, tuple[int, ...]]]:
    """Yield ``(x^T g x, x)`` for every nonzero integer x with x^T g x <= bound.

    ``g`` must be an integral positive definite Gram matrix. Coordinates are
    with respect to the basis of ``g``. Exact: bounds come from the rational
    Cholesky decomposition, never from floating point.
    """
    n = len(g)
    if reduce and n > 1:
        gr, T = lll_gram(g)
    else:
        gr, T = [list(r) for r in g], [[int(i == j) for j in range(n)] for i in range(n)]
    q = _ldl(gr)
    x = [0] * n
    B = Fraction(bound)

    def rec(i: int, budget: Fraction):
        c = -sum((q[i][j] * x[j] for j in range(i + 1, n)), Fraction(0))
        for v in _int_range(c, budget, q[i][i]):
            x[i] = v
            rem = budget - q[i][i] * (v - c) ** 2
            if i == 0:
                if any(x):
                    y = tuple(sum(x[k] * T[k][j] for k in range(n)) for j in range(n))
                    yield int(B - rem), y
            else:
                yield from rec(i - 1, rem)
        x[i] = 0

    yield from rec(n - 1, B)


def short_vectors(g: Sequence[Sequence[int]], bound: int) -> list[tuple[int, tuple[int, ...]]]:
    return sorted(enumerate_short(g, bound))


def minimum(g: Sequence[Sequence[int]]) -> int:
    """Smallest nonzero value of x^T g x."""
    gr, _ = lll_gram(g)
    b = min(gr[i][i] for i in range(len(gr)))
    return min(v for v, _ in enumerate_short(gr, b, reduce=False))


def has_vector_of_norm(g: Sequence[Sequence[int]], value: int) -> bool:
    return any(v == value for v, _ in enumerate_short(g, value))


def successive_minima(vectors: list[tuple[int, tuple[int, ...]]], n: int) -> list[int]:
    mins: list[int] = []
    span: list[tuple[int, ...]] = []
    for v, x in vectors:
        if rank(span + [x]) > len(span):
            span.append(x)
            mins.append(v)
            if len(mins) == n:
                break
    return mins


class CanonicalForm:
    """Canonical Gram of a positive definite lattice of rank <= 4.

    Among all bases whose vectors realize the successive minima in order, the
    Gram matrix minimal in the lexicographic order of its off-diagonal columns
    is chosen; it depends only on the isometry class. ``aut`` counts the bases
    reaching it, i.e. the order of the automorphism group. ``basis`` expresses
    one canonical basis in the input coordinates.
    """

    __slots__ = ("gram", "aut", "basis")

    def __init__(self, g: Sequence[Sequence[int]]):
        n = len(g)
        if n > 4:
            raise ValueError("canonical form implemented for rank <= 4")
        gr, T = lll_gram(g)
        top = max(gr[i][i] for i in range(n))
        vecs = sorted(enumerate_short(gr, top, reduce=False))
        lam = successive_minima(vecs, n)
        shells = [[x for v, x in vecs if v == l] for l in lam]
        found = self._search(gr, shells, n)
        if found is None:
            raise RuntimeError("no successive-minima basis found")
        key, bases = found
        b0 = bases[0]
        self.basis = tuple(tuple(sum(b0[i][k] * T[k][j] for k in range(n)) for j in range(n)) for i in range(n))
        self.aut = len(bases)
        G = [[0] * n for _ in range(n)]
        for i in range(n):
            G[i][i] = lam[i]
        pos = 0
        for k in range(1, n):
            for i in range(k):
                G[i][k] = G[k][i] = key[pos]
                pos += 1
        self.gram: Matrix = tuple(tuple(r) for r in G)

    @staticmethod
    def _search(g, shells, n):
        vecs: list[tuple[int, ...]] = []
        index: dict[tuple[int, ...], int] = {}
        ids = []
        for shell in shells:
            row = []
            for v in shell:
                if v not in index:
                    index[v] = len(vecs)
                    vecs.append(v)
                row.append(index[v])
            ids.append(row)
        gv = [[sum(g[i][j] * v[j] for j in range(n)) for i in range(n)] for v in vecs]
        bil = [[sum(a * b for a, b in zip(u, w)) for w in gv] for u in vecs]

        def rec(group, k, key):
            if k == n:
                full = [b for b in group if abs(int_det([vecs[i] for i in b])) == 1]
                return (key, [[vecs[i] for i in b] for b in full]) if full else None
            ext: dict[tuple[int, ...], list] = {}
            for pre in group:
                for v in ids[k]:
                    if v in pre:
                        continue
                    col = tuple(bil[u][v] for u in pre)
                    ext.setdefault(col, []).append(pre + (v,))
            for col in sorted(ext):
                sub = [c for c in ext[col] if is_primitive([vecs[i] for i in c])]
                if not sub:
                    continue
                r = rec(sub, k + 1, key + col)
                if r is not None:
                    return r
            return None

        return rec([(v,) for v in ids[0]], 1, ())


def canonical_gram(g: Sequence[Sequence[int]]) -> Matrix:
    return CanonicalForm(g).gram


def upper_triangle(g: Sequence[Sequence[int]]) -> list[int]:
    n = len(g)
    return [g[i][j] for i in range(n) for j in range(i, n)]


def from_upper_triangle(vals: Sequence[int], n: int) -> Matrix:
    G = [[0] * n for _ in range(n)]
    it = iter(vals)
    for i in range(n):
        for j in range(i, n):
            G[i][j] = G[j][i] = next(it)
    return tuple(tuple(r) for r in G)
