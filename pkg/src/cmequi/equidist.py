"""Optimal-embedding counts, reduction measures and the equidistribution experiments.

Embedding counts come from primitive representation numbers of Gross
lattices: an optimal embedding of O_{D,c} into R_i is fixed by the image of
sqrt(Dc^2), a primitive vector of norm |D|c^2, and R_i^x acts by conjugation
with stabiliser O_{D,c}^x / {+-1}.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction

from sympy import factorint, isprime

from .errors import ConsistencyError, InputError
from .grosslattice import TernaryLattice, class_gross_lattices, primitive_rep_number, theta_table
from .lattice import enumerate_short
from .quadorders import (
    class_number_formula,
    fundamental_discriminants,
    is_fundamental,
    kronecker,
    unit_count,
)
from .quatarith import IdealClassSet, QuatOrder, class_set


@dataclass(frozen=True)
class WeightedMeasure:
    support: tuple
    weights: tuple[Fraction, ...]
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.support) != len(self.weights):
            raise InputError("support and weights differ in length")
        if any(w < 0 for w in self.weights):
            raise InputError("weights must be nonnegative")

    @property
    def total(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    @property
    def is_probability(self) -> bool:
        return self.total == 1

    def normalized(self) -> "WeightedMeasure":
        t = self.total
        if t == 0:
            raise InputError("cannot normalize the zero measure")
        return WeightedMeasure(self.support, tuple(w / t for w in self.weights), self.flags)

    def to_json(self) -> dict:
        return {
            "support": list(self.support),
            "weights": [str(w) for w in self.weights],
            "flags": list(self.flags),
        }


@dataclass(frozen=True)
class EmbeddingCount:
    D: int
    c: int
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def to_json(self) -> dict:
        return {"D": self.D, "c": self.c, "counts": list(self.counts), "total": self.total}


def _check_order(D: int, c: int) -> None:
    if not is_fundamental(D):
        raise InputError(f"{D} is not a negative fundamental discriminant")
    if c < 1:
        raise InputError(f"conductor must be positive, got {c}")


def embedding_counts_from_reps(rstar, unit_orders, D: int, c: int) -> EmbeddingCount:
    """count_i = r*_i u_{D,c} / (2 w_i), asserted integral."""
    u = unit_count(D, c)
    counts = []
    for r, w in zip(rstar, unit_orders):
        q, rem = divmod(r * u, 2 * w)
        if rem:
            raise ConsistencyError(f"embedding count {r}*{u}/(2*{w}) is not integral for D={D}, c={c}")
        counts.append(q)
    return EmbeddingCount(D, c, tuple(counts))


def embedding_number(S: IdealClassSet, gross: list[TernaryLattice], D: int, c: int) -> EmbeddingCount:
    """Optimal embeddings of O_{D,c} into each class order, modulo conjugation by its units."""
    _check_order(D, c)
    n = -D * c * c
    rstar = [primitive_rep_number(L, n) for L in gross]
    return embedding_counts_from_reps(rstar, S.unit_orders, D, c)


def bruteforce_embeddings(R: QuatOrder, d: int) -> int:
    """Optimal embeddings of the quadratic order of discriminant d into R, up to R^x-conjugacy.

    Independent of Gross lattices: enumerates x in R with trd(x) = e and
    nrd(x) = (e - d)/4 (e = d mod 2), keeps those generating an optimal
    suborder, and counts orbits under conjugation by the units of R.
    """
    A = R.algebra
    e = d % 2
    n = (e - d) // 4
    den = R.den
    G = R.gram()
    units = [tuple(sum(c * r[k] for c, r in zip(x, R.rows)) for k in range(4))
             for v, x in enumerate_short(G, 2) if v == 2]
    elems = []
    for v, x in enumerate_short(G, 2 * n):
        if v != 2 * n:
            continue
        y = tuple(sum(c * r[k] for c, r in zip(x, R.rows)) for k in range(4))
        if 2 * y[0] != e * den:
            continue
        elems.append(y)

    def optimal(y):
        # sqrt(d) = 2y - e; a larger order would contain (e' + sqrt(d)/q) / 2
        s = tuple(2 * t for t in y)
        s = (s[0] - e * den,) + s[1:]
        for q in factorint(abs(d)):
            if d % (q * q) or (d // (q * q)) % 4 not in (0, 1):
                continue
            e2 = (d // (q * q)) % 2
            z = (e2 * den * q + s[0], s[1], s[2], s[3])
            if R.contains(z, 2 * q * den):
                return False
        return True

    elems = [y for y in elems if optimal(y)]
    seen = set()
    orbits = 0
    dd = den * den
    for y in elems:
        if y in seen:
            continue
        orbits += 1
        for u in units:
            # u y u^{-1} = u y conj(u) / nrd(u), nrd(u) = 1
            z = A.mul(A.mul(u, y), A.conj(u))
            seen.add(tuple(t // dd for t in z))
    return orbits


# ---------------------------------------------------------------------------
# measures


def mu_Dc(E: EmbeddingCount, omega_n: int, eps: int, h: int | None = None, labels=None) -> WeightedMeasure:
    """h_i / (2^{omega + eps} h(O_{D,c})), left unnormalized and flagged when the mass is not 1."""
    if eps not in (0, 1):
        raise InputError("eps must be 0 or 1")
    if h is None:
        h = class_number_formula(E.D, E.c)
    scale = 2 ** (omega_n + eps) * h
    weights = tuple(Fraction(x, scale) for x in E.counts)
    labels = tuple(labels) if labels is not None else tuple(range(len(weights)))
    flags = []
    total = sum(weights, Fraction(0))
    if E.total == 0:
        flags.append("empty")
    elif total != 1:
        flags.append(f"mass={total}")
    return WeightedMeasure(labels, weights, tuple(flags))


def mu_canonical(unit_orders, labels=None) -> WeightedMeasure:
    """Weights proportional to 1/w_i."""
    if isinstance(unit_orders, IdealClassSet):
        unit_orders = unit_orders.unit_orders
    unit_orders = list(unit_orders)
    if not unit_orders:
        raise InputError("empty class set")
    inv = [Fraction(1, w) for w in unit_orders]
    t = sum(inv, Fraction(0))
    labels = tuple(labels) if labels is not None else tuple(range(len(inv)))
    return WeightedMeasure(labels, tuple(x / t for x in inv))


def tv_distance(m1: WeightedMeasure, m2: WeightedMeasure) -> Fraction:
    if tuple(m1.support) != tuple(m2.support):
        raise InputError("measures live on different supports")
    return sum((abs(a - b) for a, b in zip(m1.weights, m2.weights)), Fraction(0)) / 2


# ---------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class Locus:
    """Which class set houses the reduction of CM points at p, and the measure constants."""

    delta: int
    level: int
    p: int
    kind: str  # "supersingular" or "superspecial"
    omega: int
    eps: int


def locus(delta: int, level: int, p: int) -> Locus:
    """Classify the reduction configuration of a definite (delta, level) at p.

    p | delta: supersingular points of the curve of discriminant delta/p
    (eps = 1); p | level: superspecial points of the curve of discriminant
    delta*p and level level/p (eps = 0).
    """
    if not isprime(p):
        raise InputError(f"{p} is not prime")
    if delta % p == 0:
        return Locus(delta, level, p, "supersingular", len(factorint(level)), 1)
    if level % p == 0:
        return Locus(delta, level, p, "superspecial", len(factorint(level // p)), 0)
    raise InputError(f"p={p} divides neither the discriminant {delta} nor the level {level}")


def admissible(loc: Locus, D: int, c: int) -> bool:
    """Reduction and coprimality conditions under which the measure formula applies."""
    p = loc.p
    k = kronecker(D, p)
    if loc.kind == "supersingular" and k == 1:
        return False
    if loc.kind == "superspecial" and k != 0:
        return False
    for q in factorint(loc.delta):
        if q != p and kronecker(D, q) == 1:
            return False
    curve_level = loc.level if loc.kind == "supersingular" else loc.level // p
    for q in factorint(curve_level):
        if kronecker(D, q) == -1:
            return False
    return math.gcd(c, p * loc.level * loc.delta) == 1


@dataclass
class ExperimentRow:
    D: int
    c: int
    absnorm: int
    measure: WeightedMeasure
    tv: Fraction


@dataclass
class Experiment:
    delta: int
    level: int
    p: int
    nclasses: int
    rows: list[ExperimentRow] = field(default_factory=list)
    diagnostic: str = ""

    def header(self) -> list[str]:
        return ["D", "c", "absnorm"] + [f"w{i}" for i in range(self.nclasses)] + ["tv", "mass"]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        for r in self.rows:
            w.writerow([r.D, r.c, r.absnorm] + [str(x) for x in r.measure.weights] + [format_tv(r.tv), str(r.measure.total)])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "delta": self.delta,
            "level": self.level,
            "p": self.p,
            "columns": self.header(),
            "rows": [
                [r.D, r.c, r.absnorm] + [str(x) for x in r.measure.weights] + [format_tv(r.tv), str(r.measure.total)]
                for r in self.rows
            ],
        }
        if self.diagnostic:
            doc["diagnostic"] = self.diagnostic
        return json.dumps(doc, indent=1) + "\n"


def format_tv(x: Fraction) -> str:
    return format(float(x), ".12g")


def primitive_tables(gross: list[TernaryLattice], bound: int, jobs: int = 1) -> list[list[int]]:
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as ex:
            tabs = list(ex.map(theta_table, gross, [bound] * len(gross)))
    else:
        tabs = [theta_table(L, bound) for L in gross]
    return [t[1] for t in tabs]


def convergence_experiment(delta: int, level: int, p: int, d_range, c_range=(1, 1), jobs: int = 1, S=None) -> Experiment:
    """One row per admissible (D, c), sorted by |D| c^2, with the TV distance to the canonical measure."""
    loc = locus(delta, level, p)
    lo, hi = d_range
    c_lo, c_hi = c_range
    if lo < 1 or hi < lo or c_lo < 1 or c_hi < c_lo:
        raise InputError("ranges must be positive and increasing")
    S = S if S is not None else class_set(delta, level)
    gross = class_gross_lattices(S)
    pairs = [(D, c) for D in fundamental_discriminants(lo, hi) for c in range(c_lo, c_hi + 1) if admissible(loc, D, c)]
    exp = Experiment(delta, level, p, len(S))
    if not pairs:
        exp.diagnostic = "no admissible (D, c) in range"
        return exp
    bound = max(-D * c * c for D, c in pairs)
    tables = primitive_tables(gross, bound, jobs)
    target = mu_canonical(S)
    for D, c in sorted(pairs, key=lambda t: (-t[0] * t[1] ** 2, -t[0], t[1])):
        n = -D * c * c
        E = embedding_counts_from_reps([t[n] for t in tables], S.unit_orders, D, c)
        mu = mu_Dc(E, loc.omega, loc.eps)
        tv = tv_distance(mu.normalized(), target) if E.total else Fraction(1)
        exp.rows.append(ExperimentRow(D, c, n, mu, tv))
    return exp


def window_medians(exp: Experiment, windows) -> list[Fraction | None]:
    """Median TV over rows with |D| in each half-open window [a, b)."""
    out = []
    for a, b in windows:
        vals = sorted(r.tv for r in exp.rows if a <= -r.D < b)
        out.append(statistics.median(vals) if vals else None)
    return out


DOUBLING_WINDOWS = ((250, 500), (500, 1000), (1000, 2000), (2000, 4000))


@dataclass
class SlopeFit:
    cls: int
    slope: float | None
    points: int
    note: str = ""


def deviation_slope(delta: int, level: int, d_range, min_points: int = 8, S=None) -> list[SlopeFit]:
    """Fitted exponent of |r*(Q_i, |D|) - r*(gen, |D|)| against |D|, per genus class."""
    from .genus import genus_enumerate, mass_averaged_theta

    S = S if S is not None else class_set(delta, level)
    gross = class_gross_lattices(S)
    G = genus_enumerate(gross[0])
    if len(G) < 2:
        return [SlopeFit(0, None, 0, "single-class genus: deviation identically 0")]
    lo, hi = d_range
    avg = mass_averaged_theta(G, "genus", hi, primitive=True)
    Ds = fundamental_discriminants(lo, hi)
    fits = []
    for i in range(len(G)):
        rs = G.theta(i, hi)[1]
        xs, ys = [], []
        for D in Ds:
            n = -D
            if avg[n] == 0:
                continue
            dev = abs(rs[n] - avg[n])
            if dev:
                xs.append(math.log(n))
                ys.append(math.log(dev))
        if len(xs) < min_points:
            fits.append(SlopeFit(i, None, len(xs), "insufficient data"))
            continue
        slope, _ = statistics.linear_regression(xs, ys)
        fits.append(SlopeFit(i, slope, len(xs)))
    return fits


def smooth_locus_measure(delta: int, p: int, level: int = 1) -> WeightedMeasure:
    """Canonical measure on dual-graph vertices: 1/w of each vertex order, normalized over both families."""
    from .census import dual_graph

    if delta % p:
        raise InputError(f"p={p} does not divide {delta}")
    g = dual_graph(delta, p, level)
    labels = [f"L{i}" for i in range(len(g.left))] + [f"R{i}" for i in range(len(g.right))]
    ws = [w for _, w in g.left] + [w for _, w in g.right]
    return mu_canonical(ws, labels)
