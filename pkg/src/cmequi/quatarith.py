"""Definite rational quaternion algebras, Eichler orders and right-ideal class sets.

Elements are integer 4-vectors in the frame (1, i, j, k) with i^2 = a,
j^2 = b, ij = -ji = k; lattices are integer HNF row bases over a common
denominator (:class:`QLattice`). Ideal classes are found by breadth-first
search over p-neighbours, deduplicated by a canonical norm-form Gram followed
by an exact isomorphism test, and certified by the Eichler mass formula.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import gcd, isqrt, prod

from sympy import factorint, isprime, nextprime

from .errors import ConsistencyError, InputError
from .lattice import CanonicalForm, det, enumerate_short, has_vector_of_norm, hnf, lll_gram, solve_in_hnf, upper_triangle

Vec = tuple[int, int, int, int]


# ---------------------------------------------------------------------------
# local symbols


def _split_power(x: int, p: int) -> tuple[int, int]:
    e = 0
    while x % p == 0:
        x //= p
        e += 1
    return e, x


def hilbert_symbol(a: int, b: int, p: int) -> int:
    """Hilbert symbol (a, b)_p for nonzero integers a, b and a prime p."""
    alpha, u = _split_power(a, p)
    beta, v = _split_power(b, p)
    if p == 2:
        eps = lambda t: ((t - 1) // 2) % 2  # noqa: E731
        omega = lambda t: ((t * t - 1) // 8) % 2  # noqa: E731
        e = (eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)) % 2
        return -1 if e else 1
    leg = lambda t: 1 if pow(t % p, (p - 1) // 2, p) == 1 else -1  # noqa: E731
    s = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    if beta % 2:
        s *= leg(u)
    if alpha % 2:
        s *= leg(v)
    return s


def ramified_primes(a: int, b: int) -> tuple[int, ...]:
    cands = set(factorint(2 * a * b))
    return tuple(sorted(p for p in cands if hilbert_symbol(a, b, p) == -1))


def phi_disc(delta: int) -> int:
    return prod(p - 1 for p in factorint(delta))


def psi_level(N: int) -> Fraction:
    return N * prod((1 + Fraction(1, p) for p in factorint(N)), start=Fraction(1))


def eichler_mass(delta: int, level: int) -> Fraction:
    """phi(delta) psi(level) / 12."""
    return Fraction(phi_disc(delta)) * psi_level(level) / 12


# ---------------------------------------------------------------------------
# algebra


@dataclass(frozen=True)
class QuatAlgebra:
    a: int
    b: int
    ram: tuple[int, ...]

    def __post_init__(self):
        if self.a >= 0 or self.b >= 0:
            raise InputError("definite algebra needs a < 0 and b < 0")
        if ramified_primes(self.a, self.b) != tuple(self.ram):
            raise ConsistencyError(f"Hilbert symbols of ({self.a},{self.b}) do not match ram={self.ram}")

    @property
    def disc(self) -> int:
        return prod(self.ram)

    def mul(self, x, y):
        a, b = self.a, self.b
        x0, x1, x2, x3 = x
        y0, y1, y2, y3 = y
        return (
            x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3,
            x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2,
            x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1,
            x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
        )

    @staticmethod
    def conj(x):
        return (x[0], -x[1], -x[2], -x[3])

    def nrd(self, x):
        a, b = self.a, self.b
        return x[0] * x[0] - a * x[1] * x[1] - b * x[2] * x[2] + a * b * x[3] * x[3]

    def trd_pair(self, x, y):
        """trd(x * conj(y))."""
        a, b = self.a, self.b
        return 2 * (x[0] * y[0] - a * x[1] * y[1] - b * x[2] * y[2] + a * b * x[3] * y[3])

    @staticmethod
    def trd(x):
        return 2 * x[0]


def build_algebra(ram) -> QuatAlgebra:
    """First definite (a, b), by increasing |a| + |b|, ramified exactly at ``ram``."""
    ram = tuple(sorted(set(int(p) for p in ram)))
    if not ram:
        raise InputError("ramification set must be nonempty (definite algebra)")
    if any(not isprime(p) for p in ram):
        raise InputError(f"ramification set {ram} contains a non-prime")
    if len(ram) % 2 == 0:
        raise InputError(f"no definite algebra ramifies at exactly {ram}: need an odd number of finite primes")
    odd = [p for p in ram if p != 2]
    s = 2
    while True:
        for x in range(1, s):
            a, b = -x, -(s - x)
            if any((a * b) % p for p in odd):
                continue
            if ramified_primes(a, b) == ram:
                return QuatAlgebra(a, b, ram)
        s += 1


@lru_cache(maxsize=None)
def algebra_of_disc(delta: int) -> QuatAlgebra:
    if delta < 2:
        raise InputError(f"definite discriminant must be > 1, got {delta}")
    f = factorint(delta)
    if any(e > 1 for e in f.values()):
        raise InputError(f"discriminant {delta} is not squarefree")
    return build_algebra(tuple(f))


# ---------------------------------------------------------------------------
# lattices


@dataclass(frozen=True)
class QLattice:
    """Z-lattice in the algebra: rows / den, rows in Hermite normal form."""

    rows: tuple[Vec, ...]
    den: int

    @classmethod
    def from_gens(cls, gens, den: int = 1) -> "QLattice":
        rows = hnf(gens)
        g = den
        for r in rows:
            for x in r:
                g = gcd(g, x)
        return cls(tuple(tuple(x // g for x in r) for r in rows), den // g)

    @classmethod
    def standard(cls) -> "QLattice":
        return cls(((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)), 1)

    @property
    def rank(self) -> int:
        return len(self.rows)

    def scaled_rows(self, den: int) -> list[list[int]]:
        f, r = divmod(den, self.den)
        if r:
            raise ValueError("den must be a multiple of the lattice denominator")
        return [[x * f for x in row] for row in self.rows]

    def contains(self, v, vden: int = 1) -> bool:
        num = [x * self.den for x in v]
        if any(x % vden for x in num):
            return False
        return solve_in_hnf(self.rows, [x // vden for x in num]) is not None

    def contains_lattice(self, other: "QLattice") -> bool:
        return all(self.contains(r, other.den) for r in other.rows)

    def covolume(self) -> Fraction:
        return abs(det(self.rows)) / Fraction(self.den) ** 4

    def coords(self, v, vden: int = 1) -> list[int]:
        num = [x * self.den for x in v]
        c = solve_in_hnf(self.rows, [x // vden for x in num]) if not any(x % vden for x in num) else None
        if c is None:
            raise ValueError("vector not in lattice")
        return c

    def to_json(self) -> dict:
        return {"rows": [list(r) for r in self.rows], "den": self.den}

    @classmethod
    def from_json(cls, obj) -> "QLattice":
        return cls(tuple(tuple(r) for r in obj["rows"]), obj["den"])


def lattice_product(A: QuatAlgebra, L: QLattice, M: QLattice) -> QLattice:
    gens = [A.mul(x, y) for x in L.rows for y in M.rows]
    return QLattice.from_gens(gens, L.den * M.den)


def lattice_conj(L: QLattice) -> QLattice:
    return QLattice.from_gens([QuatAlgebra.conj(r) for r in L.rows], L.den)


def lattice_sum(L: QLattice, M: QLattice) -> QLattice:
    den = L.den * M.den // gcd(L.den, M.den)
    return QLattice.from_gens(L.scaled_rows(den) + M.scaled_rows(den), den)


def norm_gram(A: QuatAlgebra, L: QLattice, scale: int = 1) -> list[list[int]]:
    """Integral Gram trd(e_i conj(e_j)) / (den^2 scale); x^T G x = 2 nrd(x) / scale."""
    q = L.den * L.den * scale
    G = []
    for x in L.rows:
        row = []
        for y in L.rows:
            t, r = divmod(A.trd_pair(x, y), q)
            if r:
                raise ConsistencyError("norm form is not integral at the requested scale")
            row.append(t)
        G.append(row)
    return G


def reduced_discriminant(A: QuatAlgebra, L: QLattice) -> int:
    """Reduced discriminant of an order: sqrt |det trd(e_i conj(e_j))|."""
    d = abs(det(norm_gram(A, L)))
    if d.denominator != 1 or isqrt(int(d)) ** 2 != d:
        raise ConsistencyError(f"trace-form determinant {d} is not a perfect square")
    return isqrt(int(d))


def _is_integral_ring_lattice(A: QuatAlgebra, L: QLattice) -> bool:
    q = L.den * L.den
    for x in L.rows:
        if A.nrd(x) % q or A.trd(x) % L.den:
            return False
        for y in L.rows:
            if A.trd_pair(x, y) % q:
                return False
    return True


def _ring_closure(A: QuatAlgebra, L: QLattice, max_steps: int = 20) -> QLattice | None:
    """Smallest multiplicatively closed lattice containing L, or None once non-integral."""
    for _ in range(max_steps):
        if not _is_integral_ring_lattice(A, L):
            return None
        M = lattice_sum(L, lattice_product(A, L, L))
        if M == L:
            return L
        L = M
    return None


# ---------------------------------------------------------------------------
# orders


@dataclass(frozen=True)
class QuatOrder:
    algebra: QuatAlgebra
    lattice: QLattice
    level: int = 1

    @property
    def delta(self) -> int:
        return self.algebra.disc

    @property
    def rows(self):
        return self.lattice.rows

    @property
    def den(self):
        return self.lattice.den

    def discriminant(self) -> int:
        return reduced_discriminant(self.algebra, self.lattice)

    def gram(self) -> list[list[int]]:
        return norm_gram(self.algebra, self.lattice)

    def contains(self, v, vden: int = 1) -> bool:
        return self.lattice.contains(v, vden)


def maximal_order(A: QuatAlgebra) -> QuatOrder:
    """Saturate Z<1,i,j,k> one prime-index step at a time until the discriminant is disc(A)."""
    O = QLattice.standard()
    target = A.disc
    while True:
        d = reduced_discriminant(A, O)
        if d == target:
            break
        if d % target:
            raise ConsistencyError(f"order discriminant {d} not divisible by {target}")
        p = min(factorint(d // target))
        for c in product(range(p), repeat=4):
            if not any(c):
                continue
            x = tuple(sum(ci * r[k] for ci, r in zip(c, O.rows)) for k in range(4))
            den = O.den * p
            if A.trd(x) % den or A.nrd(x) % (den * den):
                continue
            L = lattice_sum(O, QLattice.from_gens([x], den))
            R = _ring_closure(A, L)
            if R is not None and R != O:
                O = R
                break
        else:
            raise ConsistencyError(f"saturation failed at p={p}")
    return QuatOrder(A, O, 1)


def _eichler_generator(O: QuatOrder, N: int) -> Vec:
    """First x in O (lexicographic coordinates mod N) with N | nrd(x) and x primitive at every q | N."""
    A = O.algebra
    qs = list(factorint(N))
    dd = O.den * O.den
    for c in product(range(N), repeat=4):
        if any(all(ci % q == 0 for ci in c) for q in qs):
            continue
        x = tuple(sum(ci * r[k] for ci, r in zip(c, O.rows)) for k in range(4))
        if A.nrd(x) % (dd * N) == 0:
            return x
    raise ConsistencyError(f"no level-{N} generator found")


def _check_level(O: QuatOrder, N: int) -> None:
    if N < 1:
        raise InputError(f"level must be positive, got {N}")
    f = factorint(N)
    if any(e > 1 for e in f.values()):
        raise InputError(f"level {N} is not squarefree")
    if gcd(N, O.delta) != 1:
        raise InputError(f"level {N} is not coprime to the discriminant {O.delta}")


def eichler_order(O: QuatOrder, N: int, generator: Vec | None = None) -> QuatOrder:
    """Z + N O + x O for a maximal order O: locally upper-triangular mod q at each q | N."""
    _check_level(O, N)
    if O.level != 1:
        raise InputError("eichler_order expects a maximal order")
    if N == 1:
        return O
    x = generator if generator is not None else _eichler_generator(O, N)
    den = O.den * O.den
    gens = [[den, 0, 0, 0]]
    gens += [[N * O.den * v for v in r] for r in O.rows]
    gens += [list(O.algebra.mul(x, r)) for r in O.rows]
    E = QuatOrder(O.algebra, QLattice.from_gens(gens, den), N)
    if E.discriminant() != O.delta * N:
        raise ConsistencyError(f"Eichler order of level {N} has discriminant {E.discriminant()}")
    return E


@lru_cache(maxsize=None)
def order_of(delta: int, level: int = 1) -> QuatOrder:
    """The standard Eichler order of the given discriminant and level."""
    O = maximal_order(algebra_of_disc(delta))
    return eichler_order(O, level)


def unit_count(A: QuatAlgebra, L: QLattice) -> int:
    """Number of units (elements of reduced norm 1) of an order."""
    G = norm_gram(A, L)
    return sum(1 for v, _ in enumerate_short(G, 2) if v == 2)


def unit_order(O: QuatOrder) -> int:
    """#(O^x / {+-1})."""
    return unit_count(O.algebra, O.lattice) // 2


def conjugate_order(O: QuatOrder, alpha) -> QuatOrder:
    """alpha O alpha^{-1} for an integral alpha."""
    A = O.algebra
    n = A.nrd(alpha)
    ac = A.conj(alpha)
    gens = [A.mul(A.mul(alpha, r), ac) for r in O.rows]
    return QuatOrder(A, QLattice.from_gens(gens, O.den * n), O.level)


# ---------------------------------------------------------------------------
# right ideals


def left_order(A: QuatAlgebra, I: QLattice, norm: int) -> QLattice:
    """O_L(I) = I conj(I) / nrd(I) for an invertible ideal."""
    gens = [A.mul(x, A.conj(y)) for x in I.rows for y in I.rows]
    return QLattice.from_gens(gens, I.den * I.den * norm)


def ideal_norm_gram(A: QuatAlgebra, I: QLattice, norm: int) -> list[list[int]]:
    return norm_gram(A, I, norm)


def ideals_isomorphic(A: QuatAlgebra, I: QLattice, nI: int, J: QLattice, nJ: int) -> bool:
    """I and J are isomorphic right ideals iff J conj(I) has an element of norm nrd(I) nrd(J)."""
    gens = [A.mul(x, A.conj(y)) for x in J.rows for y in I.rows]
    L = QLattice.from_gens(gens, J.den * I.den)
    return has_vector_of_norm(norm_gram(A, L, nI * nJ), 2)


def p_neighbours(O: QuatOrder, I: QLattice, norm: int, p: int) -> list[QLattice]:
    """The p + 1 right O-ideals J in I with [I : J] = p^2 (p must not divide disc * level)."""
    A = O.algebra
    den = I.den * O.den
    base = [[p * O.den * v for v in r] for r in I.rows]
    q = I.den * I.den * norm * p
    found: list[QLattice] = []
    for c in product(range(p), repeat=4):
        if not any(c):
            continue
        x = tuple(sum(ci * r[k] for ci, r in zip(c, I.rows)) for k in range(4))
        if A.nrd(x) % q:
            continue
        if any(J.contains(x, I.den) for J in found):
            continue
        gens = base + [list(A.mul(x, r)) for r in O.rows]
        found.append(QLattice.from_gens(gens, den))
    if len(found) != p + 1:
        raise ConsistencyError(f"expected {p + 1} neighbours at p={p}, found {len(found)}")
    return found


def reduce_ideal(A: QuatAlgebra, J: QLattice, norm: int) -> tuple[QLattice, int]:
    """Replace J by the isomorphic integral ideal conj(x) J / nrd(J), x of minimal norm in J."""
    G = ideal_norm_gram(A, J, norm)
    gr, _ = lll_gram(G)
    top = min(gr[i][i] for i in range(4))
    best = min(enumerate_short(G, top))
    value, coords = best
    x = tuple(sum(ci * r[k] for ci, r in zip(coords, J.rows)) for k in range(4))
    xc = A.conj(x)
    gens = [A.mul(xc, r) for r in J.rows]
    return QLattice.from_gens(gens, J.den * J.den * norm), value // 2


@dataclass
class IdealClass:
    ideal: QLattice
    norm: int
    left_order: QLattice
    unit_order: int
    gram: tuple[tuple[int, ...], ...]

    @property
    def gram_key(self) -> tuple[int, ...]:
        return tuple(upper_triangle(self.gram))


@dataclass
class IdealClassSet:
    """Right-ideal classes of an Eichler order; ``left_order`` of each class is its attached order."""

    order: QuatOrder
    classes: list[IdealClass] = field(default_factory=list)
    aux_prime: int = 0

    @property
    def delta(self) -> int:
        return self.order.delta

    @property
    def level(self) -> int:
        return self.order.level

    def __len__(self) -> int:
        return len(self.classes)

    @property
    def unit_orders(self) -> list[int]:
        return [c.unit_order for c in self.classes]

    def mass(self) -> Fraction:
        return mass(self)

    def class_orders(self) -> list[QuatOrder]:
        return [QuatOrder(self.order.algebra, c.left_order, self.level) for c in self.classes]

    def find(self, I: QLattice, norm: int) -> int:
        """Index of the class of the right ideal I."""
        A = self.order.algebra
        key = CanonicalForm(ideal_norm_gram(A, I, norm)).gram
        for idx, c in enumerate(self.classes):
            if c.gram == key and ideals_isomorphic(A, c.ideal, c.norm, I, norm):
                return idx
        raise ConsistencyError("ideal not isomorphic to any class representative")

    def to_json(self, full: bool = True) -> dict:
        A = self.order.algebra
        doc = {
            "delta": self.delta,
            "level": self.level,
            "classes": [{"gram": list(c.gram_key), "unit_order": c.unit_order} for c in self.classes],
        }
        if full:
            doc["algebra"] = {"a": A.a, "b": A.b, "ram": list(A.ram)}
            doc["order"] = self.order.lattice.to_json()
            doc["aux_prime"] = self.aux_prime
            for entry, c in zip(doc["classes"], self.classes):
                entry["ideal"] = c.ideal.to_json()
                entry["norm"] = c.norm
                entry["left_order"] = c.left_order.to_json()
        return doc

    @classmethod
    def from_json(cls, doc) -> "IdealClassSet":
        from .lattice import from_upper_triangle

        alg = doc["algebra"]
        A = QuatAlgebra(alg["a"], alg["b"], tuple(alg["ram"]))
        order = QuatOrder(A, QLattice.from_json(doc["order"]), doc["level"])
        classes = [
            IdealClass(
                QLattice.from_json(c["ideal"]),
                c["norm"],
                QLattice.from_json(c["left_order"]),
                c["unit_order"],
                from_upper_triangle(c["gram"], 4),
            )
            for c in doc["classes"]
        ]
        return cls(order, classes, doc.get("aux_prime", 0))


def auxiliary_prime(delta: int, level: int, skip: int = 0) -> int:
    """The (skip+1)-th smallest prime not dividing delta * level."""
    p = 2
    found = 0
    while True:
        if (delta * level) % p:
            if found == skip:
                return p
            found += 1
        p = nextprime(p)


def right_ideal_class_set(O: QuatOrder, p: int | None = None, check_mass: bool = True) -> IdealClassSet:
    """Breadth-first p-neighbour search for the right-ideal classes of an Eichler order."""
    A = O.algebra
    if p is None:
        p = auxiliary_prime(O.delta, O.level)
    if not isprime(p) or (O.delta * O.level) % p == 0:
        raise InputError(f"auxiliary prime {p} must be a prime not dividing {O.delta * O.level}")
    classes: list[IdealClass] = []
    buckets: dict[tuple, list[int]] = {}
    queue: deque[int] = deque()

    def add(I: QLattice, n: int) -> None:
        key = CanonicalForm(ideal_norm_gram(A, I, n)).gram
        for idx in buckets.get(key, ()):
            c = classes[idx]
            if ideals_isomorphic(A, c.ideal, c.norm, I, n):
                return
        lo = left_order(A, I, n)
        units = unit_count(A, lo)
        if units % 2:
            raise ConsistencyError("odd unit count")
        buckets.setdefault(key, []).append(len(classes))
        classes.append(IdealClass(I, n, lo, units // 2, key))
        queue.append(len(classes) - 1)

    add(O.lattice, 1)
    while queue:
        c = classes[queue.popleft()]
        for J in p_neighbours(O, c.ideal, c.norm, p):
            add(*reduce_ideal(A, J, c.norm * p))

    order = sorted(range(len(classes)), key=lambda i: (classes[i].gram_key, i))
    S = IdealClassSet(O, [classes[i] for i in order], p)
    if check_mass:
        expected = eichler_mass(O.delta, O.level)
        got = mass(S)
        if got != expected:
            raise ConsistencyError(
                f"mass check failed for (delta={O.delta}, level={O.level}): sum 1/w = {got}, expected {expected}"
            )
    return S


def mass(S: IdealClassSet) -> Fraction:
    return sum((Fraction(1, c.unit_order) for c in S.classes), Fraction(0))


@lru_cache(maxsize=None)
def class_set(delta: int, level: int = 1) -> IdealClassSet:
    """Memoised class set of the standard Eichler order of (delta, level)."""
    return right_ideal_class_set(order_of(delta, level))
