"""Command-line front end.

Every parameter is an option so that a JSON config file (``--config``) can
supply any of them; explicit flags win. Exit status: 0 ok, 1 invalid input,
2 internal consistency failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .errors import ConsistencyError, InputError

CACHE_VERSION = 1
CACHE_ENV = "CMEQUI_CACHE_DIR"


# ---------------------------------------------------------------------------
# cache


class Cache:
    """Content-addressed JSON store, one file per key, replaced atomically."""

    def __init__(self, root: str | None):
        self.root = Path(root) if root else None

    def _path(self, key: dict) -> Path:
        blob = json.dumps({"v": CACHE_VERSION, **key}, sort_keys=True).encode()
        return self.root / f"{hashlib.sha256(blob).hexdigest()}.json"

    def get(self, key: dict):
        if self.root is None:
            return None
        path = self._path(key)
        try:
            doc = json.loads(path.read_text())
        except (OSError, ValueError):
            return None
        if doc.get("version") != CACHE_VERSION or doc.get("key") != key:
            return None
        return doc["data"]

    def put(self, key: dict, data) -> None:
        if self.root is None:
            return
        self.root.mkdir(parents=True, exist_ok=True)
        path = self._path(key)
        fd, tmp = tempfile.mkstemp(dir=self.root, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump({"version": CACHE_VERSION, "key": key, "data": data}, fh, sort_keys=True)
        os.replace(tmp, path)


def load_class_set(delta: int, level: int, cache: Cache):
    from .quatarith import IdealClassSet, order_of, right_ideal_class_set

    key = {"kind": "classset", "delta": delta, "level": level}
    doc = cache.get(key)
    if doc is not None:
        return IdealClassSet.from_json(doc)
    S = right_ideal_class_set(order_of(delta, level))
    cache.put(key, S.to_json())
    return S


# ---------------------------------------------------------------------------
# commands


def _dump(doc) -> str:
    return json.dumps(doc, indent=1) + "\n"


def _need(args, *names):
    for n in names:
        if getattr(args, n, None) is None:
            raise InputError(f"missing required parameter --{n.replace('_', '-')}")


def _level(args) -> int:
    return 1 if args.level is None else args.level


def _validate_definite(delta: int, level: int) -> None:
    from .census import _check_pair

    _check_pair(delta, level, definite=True)


def cmd_classset(args, cache):
    _need(args, "delta")
    _validate_definite(args.delta, _level(args))
    S = load_class_set(args.delta, _level(args), cache)
    doc = S.to_json()
    doc["mass"] = str(S.mass())
    return _dump(doc)


def _class_lattices(args, cache):
    from .grosslattice import class_gross_lattices

    _need(args, "delta")
    _validate_definite(args.delta, _level(args))
    S = load_class_set(args.delta, _level(args), cache)
    return S, class_gross_lattices(S)


def cmd_gross(args, cache):
    S, gross = _class_lattices(args, cache)
    rows = [{"class": i, "unit_order": w, **L.to_json()} for i, (L, w) in enumerate(zip(gross, S.unit_orders))]
    return _dump({"delta": S.delta, "level": S.level, "lattices": rows})


def _pmap(fn, items, jobs: int):
    if jobs > 1 and len(items) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as ex:
            return list(ex.map(fn, *zip(*items)))
    return [fn(*it) for it in items]


def cmd_theta(args, cache):
    from .grosslattice import theta_csv, theta_table

    _need(args, "bound")
    if args.bound < 1:
        raise InputError("--bound must be >= 1")
    S, gross = _class_lattices(args, cache)
    if args.out:
        tables = _pmap(theta_table, [(L, args.bound) for L in gross], args.jobs)
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        for i, (r, rs) in enumerate(tables):
            (outdir / f"theta_{S.delta}_{S.level}_{i}.csv").write_text(theta_csv(r, rs))
        return None
    i = args.cls or 0
    if not 0 <= i < len(gross):
        raise InputError(f"--class must be in [0, {len(gross)})")
    return theta_csv(*theta_table(gross[i], args.bound))


def cmd_genus(args, cache):
    from .genus import genus_enumerate, spinor_partition

    S, gross = _class_lattices(args, cache)
    i = args.cls or 0
    if not 0 <= i < len(gross):
        raise InputError(f"--class must be in [0, {len(gross)})")
    G = genus_enumerate(gross[i])
    doc = G.to_json()
    doc["primes"] = list(G.primes)
    doc["spinor_partition_second_prime"] = spinor_partition(G, G.primes[1])
    return _dump(doc)


def cmd_embed(args, cache):
    from .equidist import embedding_number
    from .grosslattice import class_gross_lattices

    _need(args, "D")
    S, gross = _class_lattices(args, cache)
    E = embedding_number(S, gross, args.D, args.c or 1)
    doc = E.to_json()
    doc.update({"delta": S.delta, "level": S.level, "unit_orders": S.unit_orders})
    return _dump(doc)


def _range(lo, hi, name):
    if lo is None or hi is None:
        raise InputError(f"missing --{name}-min/--{name}-max")
    if lo < 1 or hi < lo:
        raise InputError(f"--{name}-min/--{name}-max must satisfy 1 <= min <= max")
    return lo, hi


def cmd_equidist(args, cache):
    from .equidist import convergence_experiment

    _need(args, "delta", "p")
    _validate_definite(args.delta, _level(args))
    S = load_class_set(args.delta, _level(args), cache)
    exp = convergence_experiment(
        args.delta, _level(args), args.p,
        _range(args.d_min, args.d_max, "d"),
        (args.c_min or 1, args.c_max or 1),
        jobs=args.jobs, S=S,
    )
    if exp.diagnostic:
        print(f"cmequi: {exp.diagnostic}", file=sys.stderr)
    return exp.to_json() if args.format == "json" else exp.to_csv()


def cmd_census(args, cache):
    from . import census

    what = args.what
    level = _level(args)
    if what == "genus":
        _need(args, "delta")
        return f"{census.shimura_genus(args.delta, level)}\n"
    if what == "ss":
        _need(args, "p", "g")
        n = census.supersingular_count(args.p, args.g)
        return "inapplicable\n" if n is None else f"{n}\n"
    if what == "ssp":
        _need(args, "delta", "p")
        return f"{census.superspecial_count(args.delta, args.p, level)}\n"
    if what == "classno":
        _need(args, "delta")
        return f"{census.eichler_class_number(args.delta, level, verify=args.verify)}\n"
    if what == "dualgraph":
        _need(args, "delta", "p")
        g = census.dual_graph(args.delta, args.p, level)
        return g.edge_list() if args.format == "edges" else _dump(g.to_json())
    if what == "ratio":
        _need(args, "delta")
        _validate_definite(args.delta, level)
        S = load_class_set(args.delta, level, cache)
        rows = census.ratio_experiment(args.delta, level, _range(args.d_min, args.d_max, "d"), args.p, S=S)
        if args.format == "json":
            return _dump({"columns": ["d", "class", "r_star", "h", "ratio"],
                          "rows": [[r.d, r.cls, r.rstar, r.h, str(r.ratio)] for r in rows]})
        return census.ratio_csv(rows)
    raise InputError(f"unknown census table {what!r}")


COMMANDS = {
    "classset": cmd_classset,
    "gross": cmd_gross,
    "theta": cmd_theta,
    "genus": cmd_genus,
    "embed": cmd_embed,
    "equidist": cmd_equidist,
    "census": cmd_census,
}


# ---------------------------------------------------------------------------
# argument handling


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", type=int, help="discriminant of the quaternion algebra")
    p.add_argument("--level", type=int, help="Eichler level N (default 1)")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--config", help="JSON file with default values for any option")
    p.add_argument("--cache-dir", dest="cache_dir", help=f"class-set cache directory (or ${CACHE_ENV})")
    p.add_argument("--jobs", type=int, help="worker processes (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cmequi", description="Exact CM-point equidistribution computations.")
    parser.add_argument("--version", action="version", version=f"cmequi {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("classset", help="right-ideal classes of the Eichler order (JSON)")
    _common(p)
    p = sub.add_parser("gross", help="Gross lattice Gram and determinant per class (JSON)")
    _common(p)
    p = sub.add_parser("theta", help="theta coefficients r, r* of a class Gross lattice (CSV)")
    _common(p)
    p.add_argument("--bound", type=int)
    p.add_argument("--class", dest="cls", type=int, help="class index (default 0); ignored with --out")
    p = sub.add_parser("genus", help="genus and spinor partition of a class Gross lattice (JSON)")
    _common(p)
    p.add_argument("--class", dest="cls", type=int)
    p = sub.add_parser("embed", help="optimal embedding counts per class (JSON)")
    _common(p)
    p.add_argument("-D", "--D", dest="D", type=int, help="fundamental discriminant D < 0")
    p.add_argument("-c", "--c", dest="c", type=int, help="conductor (default 1)")
    p = sub.add_parser("equidist", help="convergence experiment (CSV or JSON)")
    _common(p)
    p.add_argument("--p", type=int, help="reduction prime")
    p.add_argument("--d-min", dest="d_min", type=int)
    p.add_argument("--d-max", dest="d_max", type=int)
    p.add_argument("--c-min", dest="c_min", type=int)
    p.add_argument("--c-max", dest="c_max", type=int)
    p.add_argument("--format", choices=["csv", "json"])
    p = sub.add_parser("census", help="special-fibre tables")
    p.add_argument("what", choices=["genus", "ss", "ssp", "classno", "dualgraph", "ratio"])
    _common(p)
    p.add_argument("--p", type=int)
    p.add_argument("--g", type=int, help="curve genus (for ss)")
    p.add_argument("--d-min", dest="d_min", type=int)
    p.add_argument("--d-max", dest="d_max", type=int)
    p.add_argument("--format", choices=["csv", "json", "edges"])
    p.add_argument("--verify", action="store_true", help="compare the class number with enumeration")
    return parser


def _merge_config(args) -> None:
    if not args.config:
        return
    try:
        conf = json.loads(Path(args.config).read_text())
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(conf, dict):
        raise InputError("config must be a JSON object")
    for k, v in conf.items():
        k = k.replace("-", "_")
        if k == "class":
            k = "cls"
        if k in ("command", "what", "config"):
            continue
        if not hasattr(args, k):
            raise InputError(f"unknown config key {k!r}")
        if getattr(args, k) in (None, False):
            setattr(args, k, v)


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config(args)
        args.jobs = 1 if args.jobs is None else args.jobs
        if args.jobs < 1:
            raise InputError("--jobs must be >= 1")
        if getattr(args, "format", None) is None:
            args.format = "csv" if args.command in ("equidist", "census") else None
        cache = Cache(args.cache_dir or os.environ.get(CACHE_ENV))
        out = COMMANDS[args.command](args, cache)
    except InputError as exc:
        print(f"cmequi: input error: {exc}", file=sys.stderr)
        return 1
    except ConsistencyError as exc:
        print(f"cmequi: consistency failure: {exc}", file=sys.stderr)
        return 2
    if out is None:
        return 0
    if args.out:
        Path(args.out).write_text(out)
    else:
        sys.stdout.write(out)
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
