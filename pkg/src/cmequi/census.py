"""Special-fibre census: divisor classification, curve genus, Eichler class numbers and dual graphs."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, prod

from sympy import factorint, isprime

from .errors import ConsistencyError, InputError
from .grosslattice import class_gross_lattices, theta_table
from .quadorders import class_numbers_bruteforce, factor_discriminant, is_fundamental, kronecker
from .quatarith import (
    QLattice,
    QuatOrder,
    _eichler_generator,
    algebra_of_disc,
    eichler_mass,
    eichler_order,
    lattice_product,
    left_order,
    maximal_order,
    phi_disc,
    psi_level,
    right_ideal_class_set,
)

DIVISOR_KINDS = ("ordinary", "supersingular", "superspecial", "smooth-supersingular")


def _squarefree_factors(n: int, what: str) -> list[int]:
    if n < 1:
        raise InputError(f"{what} must be positive, got {n}")
    f = factorint(n)
    if any(e > 1 for e in f.values()):
        raise InputError(f"{what} {n} is not squarefree")
    return sorted(f)


def _check_pair(delta: int, level: int, definite: bool) -> tuple[list[int], list[int]]:
    ps = _squarefree_factors(delta, "discriminant")
    qs = _squarefree_factors(level, "level")
    if gcd(delta, level) != 1:
        raise InputError(f"level {level} is not coprime to discriminant {delta}")
    if definite and len(ps) % 2 == 0:
        raise InputError(f"definite discriminant {delta} needs an odd number of prime factors")
    if not definite and (len(ps) % 2 or delta == 1):
        raise InputError(f"indefinite discriminant {delta} needs a positive even number of prime factors")
    return ps, qs


def classify_divisor(delta: int, level: int, p: int, D: int) -> str:
    if not isprime(p):
        raise InputError(f"{p} is not prime")
    if not is_fundamental(D):
        raise InputError(f"{D} is not a negative fundamental discriminant")
    _check_pair(delta, level, definite=False)
    k = kronecker(D, p)
    if delta % p == 0:
        if k == 1:
            raise InputError(f"p={p} ramifies in the algebra but splits in Q(sqrt({D})): no CM points")
        return "superspecial" if k == 0 else "smooth-supersingular"
    return "ordinary" if k == 1 else "supersingular"


def _elliptic(ps, qs, D: int) -> int:
    return prod(1 - kronecker(D, p) for p in ps) * prod(1 + kronecker(D, q) for q in qs)


def shimura_genus(delta: int, level: int = 1) -> int:
    """1 + phi psi / 12 - e2/4 - e3/3 for the Shimura curve of (delta, level)."""
    ps, qs = _check_pair(delta, level, definite=False)
    e2, e3 = _elliptic(ps, qs, -4), _elliptic(ps, qs, -3)
    g = 1 + Fraction(phi_disc(delta)) * psi_level(level) / 12 - Fraction(e2, 4) - Fraction(e3, 3)
    if g.denominator != 1 or g < 0:
        raise ConsistencyError(f"genus formula gave {g} for ({delta}, {level})")
    return int(g)


def supersingular_count(p: int, g: int) -> int | None:
    """(p - 1)(g - 1); None when g < 2 (formula not applicable)."""
    if not isprime(p):
        raise InputError(f"{p} is not prime")
    if g < 2:
        return None
    return (p - 1) * (g - 1)


def eichler_class_number(delta: int, level: int = 1, verify: bool = False) -> int:
    """phi psi / 12 + e2/4 + e3/3; with ``verify`` compared against the ideal-class enumeration."""
    ps, qs = _check_pair(delta, level, definite=True)
    e2, e3 = _elliptic(ps, qs, -4), _elliptic(ps, qs, -3)
    h = eichler_mass(delta, level) + Fraction(e2, 4) + Fraction(e3, 3)
    if h.denominator != 1:
        raise ConsistencyError(f"class number formula gave {h} for ({delta}, {level})")
    h = int(h)
    if verify:
        from .quatarith import class_set

        n = len(class_set(delta, level))
        if n != h:
            raise ConsistencyError(f"class number formula {h} != enumeration {n} for ({delta}, {level})")
    return h


def superspecial_count(delta: int, p: int, level: int = 1) -> int:
    if delta % p or not isprime(p):
        raise InputError(f"p={p} must be a prime dividing {delta}")
    _check_pair(delta, level, definite=False)
    return eichler_class_number(delta // p, level * p)


# ---------------------------------------------------------------------------
# dual graph


@dataclass
class DualGraph:
    delta: int
    p: int
    level: int
    left: list[tuple[int, int]]
    right: list[tuple[int, int]]
    edges: list[tuple[int, int, tuple[int, int]]] = field(default_factory=list)

    @property
    def n_vertices(self) -> int:
        return len(self.left) + len(self.right)

    def components(self) -> int:
        parent = list(range(self.n_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        off = len(self.left)
        for _, _, (u, v) in self.edges:
            parent[find(u)] = find(off + v)
        return len({find(x) for x in range(self.n_vertices)})

    @property
    def betti(self) -> int:
        return len(self.edges) - self.n_vertices + self.components()

    def edge_list(self) -> str:
        lines = [f"# families: L = level-{self.level} classes, R = second level-{self.level} family; "
                 f"edges = level-{self.level * self.p} classes (delta={self.delta}, p={self.p})"]
        lines += [f"L{u} R{v}" for _, _, (u, v) in self.edges]
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "p": self.p,
            "level": self.level,
            "left": [{"class": c, "unit_order": w} for c, w in self.left],
            "right": [{"class": c, "unit_order": w} for c, w in self.right],
            "edges": [{"class": c, "unit_order": w, "ends": [f"L{u}", f"R{v}"]} for c, w, (u, v) in self.edges],
            "betti": self.betti,
            "components": self.components(),
        }


def dual_graph(delta: int, p: int, level: int = 1, check: bool = True) -> DualGraph:
    """Bipartite graph of the degenerate fibre at p | delta.

    Vertices are right-ideal classes of two level-N Eichler orders E, E' of the
    definite algebra of discriminant delta/p with E cap E' of level Np; edges
    are classes of that level-Np order, attached to [I E] and [I E'].
    """
    if not isprime(p) or delta % p:
        raise InputError(f"p={p} must be a prime dividing {delta}")
    _check_pair(delta, level, definite=False)
    dd = delta // p
    A = algebra_of_disc(dd)
    O = maximal_order(A)
    x = _eichler_generator(O, level * p)
    E = eichler_order(O, level, x) if level > 1 else O
    Ep = eichler_order(O, level * p, x)
    # second branch: left order of the norm-p ideal pE + xE
    den = E.den * E.den
    gens = [[p * E.den * v for v in r] for r in E.rows] + [list(A.mul(x, r)) for r in E.rows]
    J = QLattice.from_gens(gens, den)
    E2 = QuatOrder(A, left_order(A, J, p), level)
    if E2.discriminant() != dd * level or not E2.lattice.contains_lattice(Ep.lattice):
        raise ConsistencyError("second vertex order is not a level-N Eichler order containing the edge order")
    S1 = right_ideal_class_set(E)
    S2 = right_ideal_class_set(E2)
    Se = right_ideal_class_set(Ep)
    g = DualGraph(delta, p, level, [(i, w) for i, w in enumerate(S1.unit_orders)],
                  [(i, w) for i, w in enumerate(S2.unit_orders)])
    for k, c in enumerate(Se.classes):
        u = S1.find(lattice_product(A, c.ideal, E.lattice), c.norm)
        v = S2.find(lattice_product(A, c.ideal, E2.lattice), c.norm)
        g.edges.append((k, c.unit_order, (u, v)))
    if check:
        genus = shimura_genus(delta, level)
        if g.betti != genus:
            raise ConsistencyError(f"dual graph b1={g.betti} but genus({delta},{level})={genus}")
    return g


# ---------------------------------------------------------------------------
# ratio experiment


@dataclass
class RatioRow:
    d: int
    cls: int
    rstar: int
    h: int

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.rstar, self.h)


def p_fundamental_discriminants(p: int, lo: int, hi: int) -> list[int]:
    """Negative discriminants d with lo <= |d| <= hi whose conductor is prime to p."""
    return [-n for n in range(max(lo, 3), hi + 1) if (-n) % 4 in (0, 1) and factor_discriminant(-n)[1] % p]


def ratio_experiment(delta: int, level: int, d_range, p: int | None = None, S=None) -> list[RatioRow]:
    """r*(Q_s, |d|) / h(d) for every class s and p-fundamental d in range, sorted by |d| then s."""
    if p is None:
        ps = sorted(factorint(delta))
        if len(ps) != 1:
            raise InputError("reduction prime p is required when the discriminant is not prime")
        p = ps[0]
    if delta % p:
        raise InputError(f"p={p} must divide {delta}")
    lo, hi = d_range
    if lo < 1 or hi < lo:
        raise InputError("range must be positive and increasing")
    from .quatarith import class_set

    S = S if S is not None else class_set(delta, level)
    tabs = [theta_table(L, hi)[1] for L in class_gross_lattices(S)]
    ds = p_fundamental_discriminants(p, lo, hi)
    hs = class_numbers_bruteforce(ds)
    return [RatioRow(d, s, t[-d], h) for d, h in zip(ds, hs) for s, t in enumerate(tabs)]


def window_max_ratios(rows: list[RatioRow], windows, cls: int | None = None) -> list[Fraction | None]:
    out = []
    for a, b in windows:
        vals = [r.ratio for r in rows if a <= -r.d < b and (cls is None or r.cls == cls)]
        out.append(max(vals) if vals else None)
    return out


def ratio_csv(rows: list[RatioRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["d", "class", "r_star", "h", "ratio"])
    for r in rows:
        w.writerow([r.d, r.cls, r.rstar, r.h, str(r.ratio)])
    return buf.getvalue()
