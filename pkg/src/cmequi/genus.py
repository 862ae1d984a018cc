"""Genus and spinor genus of positive ternary lattices via Kneser p-neighbours."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from sympy import factorint, isprime, nextprime

from .errors import ConsistencyError, InputError
from .grosslattice import TernaryLattice, theta_table
from .lattice import CanonicalForm, hnf, lll_gram, upper_triangle
from .quatarith import hilbert_symbol


def automorph_count(L: TernaryLattice) -> int:
    """Order of the integral isometry group of L (including -1)."""
    return CanonicalForm(L.gram).aut


def _det_int(L: TernaryLattice) -> int:
    d = L.det
    return d.numerator * d.denominator


def admissible_primes(L: TernaryLattice, count: int = 2, start: int = 3) -> list[int]:
    """Smallest odd primes not dividing the Q-determinant."""
    bad = 2 * _det_int(L)
    out = []
    p = start - 1
    while len(out) < count:
        p = nextprime(p)
        if bad % p:
            out.append(p)
    return out


def isotropic_lines(L: TernaryLattice, p: int) -> list[tuple[int, int, int]]:
    """Projective representatives (first nonzero coordinate 1) of Q(v) = 0 mod p."""
    g = L.gram
    lines = []
    for v in product(range(p), repeat=3):
        first = next((x for x in v if x), 0)
        if first != 1:
            continue
        if (sum(g[i][j] * v[i] * v[j] for i in range(3) for j in range(3)) // 2) % p == 0:
            lines.append(v)
    return lines


def p_neighbors(L: TernaryLattice, p: int) -> list[TernaryLattice]:
    """Kneser p-neighbours: M = L_v + Z v/p for each isotropic line v mod p."""
    if not isprime(p) or (2 * _det_int(L)) % p == 0:
        raise InputError(f"p={p} must be a prime not dividing 2*det={2 * _det_int(L)}")
    g = L.gram

    def bil(x, y):
        return sum(g[i][j] * x[i] * y[j] for i in range(3) for j in range(3))

    out = []
    for v in isotropic_lines(L, p):
        v = list(v)
        q = bil(v, v) // 2
        f = [bil(v, e) for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
        j = next(i for i in range(3) if f[i] % p)
        # lift so that Q(v) = 0 mod p^2
        t = (-(q // p) * pow(f[j], -1, p)) % p
        v[j] += p * t
        f = [bil(v, e) % p for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
        inv = pow(f[j], -1, p)
        # L_v = {x : B(x, v) = 0 mod p}, then adjoin v / p; everything scaled by p
        gens = []
        for i in range(3):
            e = [0, 0, 0]
            if i == j:
                e[j] = p
            else:
                e[i] = 1
                e[j] = (-f[i] * inv) % p
            gens.append([p * x for x in e])
        gens.append(v)
        rows = hnf(gens)
        G = [[bil(r, s) for s in rows] for r in rows]
        if any(x % (p * p) for row in G for x in row):
            raise ConsistencyError("neighbour lattice is not integral")
        G = [[x // (p * p) for x in row] for row in G]
        gr, _ = lll_gram(G)
        out.append(TernaryLattice(gr))
    return out


def _diagonal(L: TernaryLattice) -> list[Fraction]:
    """Rational diagonalization of Q (Gram-Schmidt on the Q-Gram)."""
    q = [[Fraction(x, 2) for x in row] for row in L.gram]
    out = []
    for i in range(3):
        piv = q[i][i]
        out.append(piv)
        for r in range(i + 1, 3):
            f = q[r][i] / piv
            for c in range(i, 3):
                q[r][c] -= f * q[i][c]
    return out


def _square_class(x: Fraction) -> int:
    return x.numerator * x.denominator


def hasse_invariants(L: TernaryLattice) -> dict[int, int]:
    """Hasse-Witt invariant prod_{i<j} (a_i, a_j)_p at each p | 2 det."""
    a = [_square_class(x) for x in _diagonal(L)]
    primes = sorted(set(factorint(2 * _det_int(L))) | {2})
    out = {}
    for p in primes:
        s = 1
        for i in range(3):
            for j in range(i + 1, 3):
                s *= hilbert_symbol(a[i], a[j], p)
        out[p] = s
    return out


@dataclass
class GenusSet:
    det: Fraction
    classes: list[TernaryLattice]
    automorphs: list[int]
    primes: tuple[int, ...]
    partition: list[list[int]] = field(default_factory=list)
    _theta: dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.classes)

    def index_of(self, L: TernaryLattice) -> int:
        key = CanonicalForm(L.gram).gram
        for i, M in enumerate(self.classes):
            if M.gram == key:
                return i
        raise KeyError("lattice not in genus")

    def mass(self) -> Fraction:
        return sum((Fraction(1, w) for w in self.automorphs), Fraction(0))

    def theta(self, i: int, bound: int) -> tuple[list[int], list[int]]:
        cached = self._theta.get(i)
        if cached is None or len(cached[0]) <= bound:
            cached = theta_table(self.classes[i], bound)
            self._theta[i] = cached
        return cached[0][: bound + 1], cached[1][: bound + 1]

    def to_json(self) -> dict:
        return {
            "det": str(self.det),
            "classes": [{"gram6": upper_triangle(L.gram), "w": w} for L, w in zip(self.classes, self.automorphs)],
            "spinor_partition": self.partition,
        }


def _canonical_lattice(L: TernaryLattice) -> tuple[TernaryLattice, int]:
    cf = CanonicalForm(L.gram)
    return TernaryLattice(cf.gram), cf.aut


def genus_enumerate(L: TernaryLattice, primes=None) -> GenusSet:
    """Closure of {L} under p-neighbours at two admissible primes, one class per isometry type."""
    primes = tuple(primes) if primes else tuple(admissible_primes(L, 2))
    ref = hasse_invariants(L)
    first, w0 = _canonical_lattice(L)
    classes = [first]
    autos = [w0]
    seen = {first.gram: 0}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for p in primes:
            for M in p_neighbors(classes[i], p):
                C, w = _canonical_lattice(M)
                if C.gram in seen:
                    continue
                if hasse_invariants(C) != ref:
                    raise ConsistencyError("neighbour has different local invariants")
                seen[C.gram] = len(classes)
                classes.append(C)
                autos.append(w)
                queue.append(len(classes) - 1)
    order = sorted(range(len(classes)), key=lambda i: upper_triangle(classes[i].gram))
    G = GenusSet(first.det, [classes[i] for i in order], [autos[i] for i in order], primes)
    G.partition = spinor_partition(G, primes[0])
    return G


def spinor_partition(G: GenusSet, p: int) -> list[list[int]]:
    """Connected components of the p-neighbour graph on the classes of G."""
    parent = list(range(len(G)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, L in enumerate(G.classes):
        for M in p_neighbors(L, p):
            try:
                j = G.index_of(M)
            except KeyError:
                raise ConsistencyError("p-neighbour left the enumerated genus") from None
            parent[find(i)] = find(j)
    blocks: dict[int, list[int]] = {}
    for i in range(len(G)):
        blocks.setdefault(find(i), []).append(i)
    return sorted(blocks.values())


def _subset(G: GenusSet, subset) -> list[int]:
    if subset is None or subset == "genus":
        return list(range(len(G)))
    idx = list(subset)
    if not idx:
        raise InputError("subset must be nonempty")
    return idx


def mass_averaged_theta(G: GenusSet, subset, bound: int, primitive: bool = False) -> list[Fraction]:
    """Weighted means sum r(Q,m)/w_Q / sum 1/w_Q over the subset, for m = 0..bound."""
    idx = _subset(G, subset)
    total = sum(Fraction(1, G.automorphs[i]) for i in idx)
    acc = [Fraction(0)] * (bound + 1)
    for i in idx:
        r, rs = G.theta(i, bound)
        row = rs if primitive else r
        wt = Fraction(1, G.automorphs[i])
        for m in range(bound + 1):
            if row[m]:
                acc[m] += row[m] * wt
    return [x / total for x in acc]


def mass_averaged_rep(G: GenusSet, subset, m: int, primitive: bool = False) -> Fraction:
    if m < 1:
        raise InputError("m must be positive")
    return mass_averaged_theta(G, subset, m, primitive)[m]


def spinor_block_of(G: GenusSet, i: int) -> list[int]:
    return next(b for b in G.partition if i in b)
