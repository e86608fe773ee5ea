"""Command-line front end.

Every subcommand prints one JSON object per line (CSV for the sweep
subcommands ``tail`` and ``constant`` on request). Each record embeds the run
configuration, minus the thread count, and the tool version, so that two runs
with the same configuration produce byte-identical output when ``--no-timing``
is given.

Exit codes: 0 ok, 1 usage, 2 precondition violated, 3 internal inconsistency
(including a failed ``verify`` suite), 4 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

from . import __version__
from .counting import THREADS_ENV, ResourceBudgetError, default_threads
from .expsums import InconsistencyError

EXIT_OK, EXIT_USAGE, EXIT_PRECONDITION, EXIT_INCONSISTENT, EXIT_RESOURCE = 0, 1, 2, 3, 4
SWEEP_COMMANDS = {"tail", "constant"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    subcommand: str
    params: dict[str, Any] = field(default_factory=dict)
    threads: int = 1
    seed: int = 0
    format: str = "json"
    cache: str | None = None
    timing: bool = True

    def record(self) -> dict[str, Any]:
        # threads and timing never change results, so they stay out of the record
        out = asdict(self)
        del out["threads"], out["timing"]
        return out


def _int_list(text: str, n: int | None = 4) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} comma-separated integers, got {text!r}")
    return vals


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="squarefulsum", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"squarefulsum {__version__}")
    p.add_argument("--threads", type=int, default=None, help=f"worker threads (default: ${THREADS_ENV} or CPU count)")
    p.add_argument("--seed", type=int, default=0, help="seed for Monte Carlo runs")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--cache", default=None, help="squareful-table cache file")
    p.add_argument("--no-timing", dest="timing", action="store_false", help="omit wall-clock fields")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    s = sub.add_parser("squareful", help="enumerate squareful integers up to B")
    s.add_argument("--max", dest="B", type=int, required=True)

    s = sub.add_parser("count", help="N(B), N(D, B) or N_k(B)")
    s.add_argument("--max", dest="B", type=int, required=True)
    s.add_argument("--ymax", dest="D", type=int, default=None)
    s.add_argument("--keep-thin", action="store_true")
    s.add_argument("--k", type=int, choices=(3, 4), default=4)
    s.add_argument("--naive", action="store_true")
    s.add_argument("--non-primitive", action="store_true", help="naive path: drop the gcd condition")

    s = sub.add_parser("tail", help="M(B, D): solutions with |Y| >= D")
    s.add_argument("--max", dest="B", type=int, required=True)
    s.add_argument("--ymin", dest="D", required=True, help="one value or a comma-separated sweep")

    s = sub.add_parser("boxes", help="N(X, Y) box counts")
    s.add_argument("--x", dest="X", required=True)
    s.add_argument("--y", dest="Y", required=True)

    s = sub.add_parser("quadric", help="N_a(B) with its main-term prediction")
    s.add_argument("--a", required=True)
    s.add_argument("--max", dest="B", type=int, required=True)

    s = sub.add_parser("series", help="singular series of a diagonal form")
    s.add_argument("--a", required=True)
    s.add_argument("--method", choices=("euler", "hybrid", "qsum"), default="hybrid")
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--cutoff", type=int, default=100_000)

    s = sub.add_parser("density", help="local density sigma_p(y) or M_N(y, p)")
    s.add_argument("--y", required=True)
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--level", type=int, default=None)

    s = sub.add_parser("sigma-inf", help="singular integral for a sign pattern")
    s.add_argument("--signs", required=True)
    s.add_argument("--method", choices=("reduction-quadrature", "monte-carlo-extrapolation"), default="reduction-quadrature")
    s.add_argument("--tol", type=float, default=1e-8)

    s = sub.add_parser("constant", help="leading constant c(D)")
    s.add_argument("--ymax", dest="D", type=int, required=True)
    s.add_argument("--tol", type=float, default=1e-8)

    s = sub.add_parser("compare", help="N(B) against c(D) B")
    s.add_argument("--max", dest="B", type=int, required=True)
    s.add_argument("--ymax", dest="D", type=int, required=True)
    s.add_argument("--log", default=None, help="append the row to this JSON-lines file")

    s = sub.add_parser("verify", help="identity checks")
    s.add_argument("--suite", choices=("inclusion-exclusion", "multiplicativity", "inner-sum", "fibre"), required=True)
    s.add_argument("--max", dest="B", type=int, default=10)
    s.add_argument("--ymax", dest="D", type=int, default=10)
    s.add_argument("--a", default="1,1,1,-1")
    s.add_argument("--variant", choices=("literal", "corrected"), default="literal")
    return p


# ---------------------------------------------------------------------------
# subcommands; each returns (result dict or list of rows, ok flag)


def _cmd_squareful(args, cfg):
    from .squareful import count_formula, table_for

    t = table_for(args.B, cfg.cache)
    return {"count": len(t), "formula": count_formula(args.B), "largest": int(t.z[-1]) if len(t) else None}, True


def _cmd_count(args, cfg):
    from .counting import count_N, count_Nk_naive

    if args.naive or args.k == 3:
        if args.D is not None:
            raise ValueError("--ymax is only supported by the meet-in-the-middle path")
        r = count_Nk_naive(args.B, args.k, primitive=not args.non_primitive, remove_thin=not args.keep_thin)
    else:
        if args.non_primitive:
            raise ValueError("--non-primitive needs --naive")
        r = count_N(args.B, args.D, remove_thin=not args.keep_thin, threads=cfg.threads)
    return r.record(cfg.timing), True


def _cmd_tail(args, cfg):
    from .counting import tail_profile

    Ds = _int_list(args.D, None)
    prof = tail_profile(args.B, Ds, cfg.threads)
    rows = [{"B": args.B, "D": D, "count": prof[D]} for D in Ds]
    return rows if len(rows) > 1 else rows[0], True


def _cmd_boxes(args, cfg):
    from .counting import count_NXY

    return count_NXY(_int_list(args.X), _int_list(args.Y)).record(cfg.timing), True


def _cmd_quadric(args, cfg):
    from .constant import quadric_prediction
    from .counting import count_quadric

    a = _int_list(args.a)
    r = count_quadric(a, args.B).record(cfg.timing)
    A = math.prod(a)
    if A > 0 and math.isqrt(A) ** 2 == A:
        r["prediction"] = None  # the main term carries an extra log B for square A
    else:
        pred = quadric_prediction(a, args.B)
        r["prediction"] = pred
        r["ratio"] = r["count"] / pred if pred else None
    return r, True


def _cmd_series(args, cfg):
    from .expsums import singular_series

    est = singular_series(_int_list(args.a), args.method, args.tol, args.cutoff)
    return asdict(est), True


def _cmd_density(args, cfg):
    from .localdens import M_count, N_count, local_density

    y = _int_list(args.y)
    if args.level is not None:
        return {"M": M_count(y, args.p, args.level), "N": N_count((1, 1, 1, 1), y, args.p, args.level)}, True
    d = local_density(y, args.p)
    return {
        "p": d.p,
        "y": list(d.y),
        "N_stable": d.N_stable,
        "value": str(d.value),
        "float": float(d.value),
        "levels": [str(v) for v in d.levels],
    }, True


def _cmd_sigma_inf(args, cfg):
    from .archimedean import sigma_infinity

    r = sigma_infinity(args.signs, args.tol, args.method, seed=cfg.seed, threads=cfg.threads)
    return asdict(r), True


def _cmd_constant(args, cfg):
    from .constant import leading_constant

    c = leading_constant(args.D, args.tol, cfg.threads)
    if cfg.format == "csv":
        return [{"D": args.D, "shell": k, "mass": v} for k, v in c.shells.items()], True
    out = asdict(c)
    out.pop("shells")
    return out, True


def _cmd_compare(args, cfg):
    from .constant import compare_empirical

    return asdict(compare_empirical(args.B, args.D, cfg.threads, args.log)), True


def _inner_sum_ys(D: int) -> list[tuple[int, ...]]:
    from .arith import is_square
    from .constant import positive_y_vectors

    seen = set()
    for yabs in positive_y_vectors(D):
        for eps in itertools.product((1, -1), repeat=4):
            y = tuple(sorted(e * v for e, v in zip(eps, yabs)))
            if not is_square(math.prod(y)):
                seen.add(y)
    return sorted(seen)


def verify_inner_sum(D: int, variant: str = "literal", tol: float = 1e-3) -> dict[str, Any]:
    from .localdens import euler_product_density, inner_sum

    worst, worst_y = 0.0, None
    ys = _inner_sum_ys(D)
    for y in ys:
        diff = abs(inner_sum(y, variant=variant).value - euler_product_density(y).value)
        if diff > worst:
            worst, worst_y = diff, list(y)
    return {"D": D, "variant": variant, "vectors": len(ys), "max_diff": worst, "worst_y": worst_y, "ok": worst <= tol}


def verify_multiplicativity(a: Sequence[int], qmax: int, tol: float = 1e-8) -> dict[str, Any]:
    from .expsums import S_q_dft

    S = {q: S_q_dft(a, q).value.real for q in range(1, qmax * qmax + 1)}
    worst, pairs = 0.0, 0
    for q1 in range(1, qmax + 1):
        for q2 in range(1, qmax + 1):
            if math.gcd(q1, q2) != 1:
                continue
            pairs += 1
            x, y = S[q1 * q2], S[q1] * S[q2]
            if round(x) == 0 and round(y) == 0:
                continue
            worst = max(worst, abs(x - y) / max(abs(x), abs(y)))
    return {"a": list(a), "qmax": qmax, "pairs": pairs, "max_rel_err": worst, "ok": worst <= tol}


def _cmd_verify(args, cfg):
    from .counting import count_N, fibre_sum, verify_inclusion_exclusion

    if args.suite == "inclusion-exclusion":
        r = verify_inclusion_exclusion(args.B, args.D, args.variant)
        return r, r["equal"]
    if args.suite == "multiplicativity":
        r = verify_multiplicativity(_int_list(args.a), args.B)
        return r, r["ok"]
    if args.suite == "inner-sum":
        r = verify_inner_sum(args.D, args.variant)
        return r, r["ok"]
    fs = fibre_sum(args.B)
    lhs = 16 * count_N(args.B, threads=cfg.threads).count
    return {"B": args.B, "lhs": lhs, "rhs": fs["sum"], "fibres": fs["fibres"], "equal": lhs == fs["sum"]}, lhs == fs["sum"]


COMMANDS = {
    "squareful": _cmd_squareful,
    "count": _cmd_count,
    "tail": _cmd_tail,
    "boxes": _cmd_boxes,
    "quadric": _cmd_quadric,
    "series": _cmd_series,
    "density": _cmd_density,
    "sigma-inf": _cmd_sigma_inf,
    "constant": _cmd_constant,
    "compare": _cmd_compare,
    "verify": _cmd_verify,
}

_GLOBAL = {"threads", "seed", "format", "cache", "timing", "verbose", "subcommand"}


def _emit(result, cfg: RunConfig, out) -> None:
    head = {"config": cfg.record(), "tool": "squarefulsum", "version": __version__}
    if cfg.format == "csv":
        rows = result if isinstance(result, list) else [result]
        buf = io.StringIO()
        cols = list(rows[0].keys())
        w = csv.DictWriter(buf, fieldnames=cols + ["version", "config"], lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({**r, "version": __version__, "config": json.dumps(cfg.record(), sort_keys=True)})
        out.write(buf.getvalue())
        return
    rows = result if isinstance(result, list) else [result]
    for r in rows:
        out.write(json.dumps(_jsonable({**head, "result": r}), sort_keys=True) + "\n")


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.format == "csv" and args.subcommand not in SWEEP_COMMANDS:
            raise UsageError(f"--format csv is only available for {', '.join(sorted(SWEEP_COMMANDS))}")
        threads = args.threads if args.threads is not None else default_threads()
        if threads < 1:
            raise UsageError("--threads must be positive")
    except UsageError as exc:
        print(f"squarefulsum: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    params = {k: v for k, v in vars(args).items() if k not in _GLOBAL}
    cfg = RunConfig(args.subcommand, params, threads, args.seed, args.format, args.cache, args.timing)
    try:
        result, ok = COMMANDS[args.subcommand](args, cfg)
    except UsageError as exc:
        print(f"squarefulsum: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceBudgetError as exc:
        print(f"squarefulsum: resource budget: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (InconsistencyError, ArithmeticError) as exc:
        print(f"squarefulsum: internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except (ValueError, OverflowError) as exc:
        print(f"squarefulsum: precondition: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    _emit(result, cfg, out)
    return EXIT_OK if ok else EXIT_INCONSISTENT


if __name__ == "__main__":
    sys.exit(main())
