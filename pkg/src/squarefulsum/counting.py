"""Exact counters for squareful quadruples summing to zero and the related
quadric, box and fibre counts.

The fast path is a meet-in-the-middle scan: every unordered pair of signed
squareful values is stored once with its sum, sorted, and each pair with a
non-positive sum is matched against pairs further along the sorted index whose
sum cancels it.  Ordered tuples are recovered by multiplicity weights, so the
counting unit is always the ordered 4-vector.
"""

from __future__ import annotations

import itertools
import json
import math
import os
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .arith import is_square, is_squarefree, is_squareful
from .squareful import SquarefulTable, enumerate_squareful, squarefree_flags

NAIVE_MAX_B = 100_000
FAST_MAX_B = 10**8
BOX_MAX_STEPS = 10**10
DEFAULT_MEMORY_BUDGET = 4 << 30
THREADS_ENV = "SQUAREFULSUM_THREADS"
MEMORY_ENV = "SQUAREFULSUM_MEMORY_BUDGET"


class ResourceBudgetError(RuntimeError):
    """A query would exceed the configured memory or step budget."""


@dataclass
class CountResult:
    op: str
    params: dict[str, Any]
    count: int
    algorithm: str
    seconds: float = 0.0
    extra: dict[str, Any] = field(default_factory=dict)

    def record(self, timing: bool = True) -> dict[str, Any]:
        out = {"op": self.op, "params": self.params, "count": int(self.count), "algorithm": self.algorithm}
        if timing:
            out["seconds"] = round(self.seconds, 6)
        out.update(self.extra)
        return out

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.record(timing), sort_keys=True)


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _memory_budget() -> int:
    env = os.environ.get(MEMORY_ENV)
    return int(env) if env else DEFAULT_MEMORY_BUDGET


# ---------------------------------------------------------------------------
# pair-sum index


@dataclass(frozen=True)
class PairSumIndex:
    """Unordered pairs (i3 <= i4) of signed table values, sorted by sum."""

    z: np.ndarray
    y: np.ndarray
    x: np.ndarray
    s: np.ndarray
    i3: np.ndarray
    i4: np.ndarray

    def __len__(self) -> int:
        return len(self.s)

    @property
    def mult(self) -> np.ndarray:
        """Number of ordered pairs each record stands for."""
        return np.where(self.i3 == self.i4, 1, 2)


def _signed_arrays(table: SquarefulTable):
    return table.signed()


def estimate_pair_bytes(n_values: int) -> int:
    pairs = n_values * (n_values + 1) // 2
    # sum int64 + two int32 indices, plus argsort scratch
    return pairs * (8 + 4 + 4 + 8)


def build_pair_index(table: SquarefulTable) -> PairSumIndex:
    z, y, x = _signed_arrays(table)
    n = len(z)
    need = estimate_pair_bytes(n)
    if need > _memory_budget():
        raise ResourceBudgetError(
            f"pair index for B={table.B} needs ~{need / 2**30:.1f} GiB, over the budget "
            f"({_memory_budget() / 2**30:.1f} GiB; set {MEMORY_ENV} to raise it)"
        )
    i3 = np.concatenate([np.full(n - i, i, dtype=np.int32) for i in range(n)])
    i4 = np.concatenate([np.arange(i, n, dtype=np.int32) for i in range(n)])
    s = z[i3] + z[i4]
    order = np.argsort(s, kind="stable")
    return PairSumIndex(z, y, x, s[order], i3[order], i4[order])


# ---------------------------------------------------------------------------
# meet-in-the-middle scan


def _match_chunk(idx: PairSumIndex, start: int, stop: int):
    """Matched (outer, inner) record positions for outer positions in [start, stop).

    Only inner positions q >= outer position p are returned; the swapped
    halves are accounted for by the returned weight.
    """
    p = np.arange(start, stop, dtype=np.int64)
    target = -idx.s[start:stop]
    lo = np.searchsorted(idx.s, target, side="left")
    hi = np.searchsorted(idx.s, target, side="right")
    lo = np.maximum(lo, p)
    cnt = np.maximum(hi - lo, 0)
    total = int(cnt.sum())
    if total == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty
    rep = np.repeat(np.arange(len(p)), cnt)
    offs = np.cumsum(cnt) - cnt
    q = lo[rep] + (np.arange(total) - offs[rep])
    outer = p[rep]
    mult = idx.mult
    w = mult[outer] * mult[q] * np.where(q > outer, 2, 1)
    return outer, q, w


def _tuple_columns(idx: PairSumIndex, outer: np.ndarray, inner: np.ndarray):
    cols = (idx.i3[outer], idx.i4[outer], idx.i3[inner], idx.i4[inner])
    return [c.astype(np.int64) for c in cols]


def _is_square_array(v: np.ndarray) -> np.ndarray:
    # float sqrt is a guess only; the re-multiplication decides
    pos = v >= 0
    r = np.rint(np.sqrt(np.where(pos, v, 0).astype(np.float64))).astype(np.int64)
    return pos & (r * r == v)


def _chunk_bounds(idx: PairSumIndex, chunk: int) -> list[tuple[int, int]]:
    # outer pairs with positive sum never match a later record
    stop = int(np.searchsorted(idx.s, 0, side="right"))
    return [(a, min(a + chunk, stop)) for a in range(0, stop, chunk)]


def _profile_chunk(idx: PairSumIndex, bounds: tuple[int, int]) -> dict[tuple[int, bool], int]:
    outer, inner, w = _match_chunk(idx, *bounds)
    if len(w) == 0:
        return {}
    c = _tuple_columns(idx, outer, inner)
    g = np.gcd.reduce([np.abs(idx.z[k]) for k in c])
    prim = g == 1
    if not prim.any():
        return {}
    Y = idx.y[c[0]] * idx.y[c[1]] * idx.y[c[2]] * idx.y[c[3]]
    Y, w = Y[prim], w[prim]
    key = np.abs(Y) * 2 + _is_square_array(Y)
    uniq, inv = np.unique(key, return_inverse=True)
    tot = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(tot, inv, w)
    return {(int(k) >> 1, bool(k & 1)): int(t) for k, t in zip(uniq, tot)}


def _run_chunks(fn, idx: PairSumIndex, threads: int | None, chunk: int):
    bounds = _chunk_bounds(idx, chunk)
    threads = threads or default_threads()
    if threads <= 1 or len(bounds) <= 1:
        return [fn(idx, b) for b in bounds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda b: fn(idx, b), bounds))


_PROFILE_CACHE: dict[int, dict[tuple[int, bool], int]] = {}


def solution_profile(B: int, threads: int | None = None, chunk: int = 1 << 16, table: SquarefulTable | None = None):
    """Weighted counts of primitive solutions keyed by (|Y|, thin).

    Every N(B), N(D, B) and M(B, D) query is a sum over this profile.
    """
    if B < 1 or B > FAST_MAX_B:
        raise ValueError(f"B must lie in [1, {FAST_MAX_B}]")
    if B in _PROFILE_CACHE:
        return _PROFILE_CACHE[B]
    table = table or enumerate_squareful(B)
    idx = build_pair_index(table)
    merged: dict[tuple[int, bool], int] = {}
    for part in _run_chunks(_profile_chunk, idx, threads, chunk):
        for k, v in part.items():
            merged[k] = merged.get(k, 0) + v
    prof = dict(sorted(merged.items()))
    _PROFILE_CACHE[B] = prof
    return prof


def clear_cache() -> None:
    _PROFILE_CACHE.clear()


def _timed(op, params, algorithm, fn):
    t0 = time.perf_counter()
    n = fn()
    return CountResult(op, params, int(n), algorithm, time.perf_counter() - t0)


def count_N(B: int, D: int | None = None, remove_thin: bool = True, threads: int | None = None) -> CountResult:
    """Primitive ordered squareful quadruples with zero sum and |z_i| <= B.

    ``D`` adds the constraint |Y| <= D on the product of the squarefree parts.
    """

    def run():
        prof = solution_profile(B, threads)
        return sum(
            v for (absY, thin), v in prof.items() if (D is None or absY <= D) and not (remove_thin and thin)
        )

    return _timed("count", {"B": B, "D": D, "remove_thin": remove_thin}, "meet-in-the-middle", run)


def count_M(B: int, D: int, threads: int | None = None) -> CountResult:
    """Primitive solutions with |Y| >= D; thin solutions are kept."""

    def run():
        prof = solution_profile(B, threads)
        return sum(v for (absY, _), v in prof.items() if absY >= D)

    return _timed("tail", {"B": B, "D": D}, "meet-in-the-middle", run)


def tail_profile(B: int, Ds: Sequence[int], threads: int | None = None) -> dict[int, int]:
    prof = solution_profile(B, threads)
    return {D: sum(v for (absY, _), v in prof.items() if absY >= D) for D in Ds}


# ---------------------------------------------------------------------------
# explicit solutions (small B)


def _expand_ordered(c: list[np.ndarray], outer, inner) -> np.ndarray:
    a, b, cc, d = c
    rows = [np.stack([a, b, cc, d], axis=1)]
    m = a != b
    rows.append(np.stack([b, a, cc, d], axis=1)[m])
    m2 = cc != d
    rows.append(np.stack([a, b, d, cc], axis=1)[m2])
    rows.append(np.stack([b, a, d, cc], axis=1)[m & m2])
    base = np.concatenate(rows)
    swap_mask = np.concatenate([inner > outer, (inner > outer)[m], (inner > outer)[m2], (inner > outer)[m & m2]])
    swapped = base[swap_mask][:, [2, 3, 0, 1]]
    return np.concatenate([base, swapped])


def enumerate_solutions(B: int, k: int = 4) -> dict[str, np.ndarray]:
    """All ordered solutions (primitive or not) for small B, with y and x parts.

    Returns arrays ``z``, ``y``, ``x`` of shape (n, 4) sorted lexicographically.
    """
    if k != 4:
        raise ValueError("only k = 4 has an explicit enumerator")
    if B > NAIVE_MAX_B:
        raise ResourceBudgetError(f"explicit enumeration is limited to B <= {NAIVE_MAX_B}")
    idx = build_pair_index(enumerate_squareful(B))
    parts = []
    for b in _chunk_bounds(idx, 1 << 16):
        outer, inner, _ = _match_chunk(idx, *b)
        if len(outer):
            parts.append(_expand_ordered(_tuple_columns(idx, outer, inner), outer, inner))
    cols = np.concatenate(parts) if parts else np.zeros((0, 4), dtype=np.int64)
    z = idx.z[cols]
    order = np.lexsort(z.T[::-1])
    cols = cols[order]
    return {"z": idx.z[cols], "y": idx.y[cols], "x": idx.x[cols]}


# ---------------------------------------------------------------------------
# naive oracle


def _squareful_lookup(B: int) -> np.ndarray:
    """lookup[B + v] is true iff v is a nonzero squareful integer, |v| <= B."""
    pos = np.array([False] + [is_squareful(n) for n in range(1, B + 1)])
    return np.concatenate([pos[:0:-1], [False], pos[1:]])


def count_Nk_naive(B: int, k: int = 4, primitive: bool = True, remove_thin: bool = False) -> CountResult:
    """Direct scan over the first k-1 coordinates; the last one is solved for."""
    if k not in (3, 4):
        raise ValueError("k must be 3 or 4")
    if B > NAIVE_MAX_B:
        raise ResourceBudgetError(f"naive path is limited to B <= {NAIVE_MAX_B}; use the meet-in-the-middle count")

    def run():
        look = _squareful_lookup(B)
        vals = np.flatnonzero(look) - B
        found = []
        if k == 3:
            z1, z2 = np.meshgrid(vals, vals, indexing="ij")
            z3 = -(z1 + z2)
            ok = (np.abs(z3) <= B) & look[np.clip(z3 + B, 0, 2 * B)]
            found.append(np.stack([z1[ok], z2[ok], z3[ok]], axis=1))
        else:
            z2, z3 = np.meshgrid(vals, vals, indexing="ij")
            z2, z3 = z2.ravel(), z3.ravel()
            for z1 in vals:
                z4 = -(z1 + z2 + z3)
                ok = (np.abs(z4) <= B) & look[np.clip(z4 + B, 0, 2 * B)]
                if ok.any():
                    n = int(ok.sum())
                    found.append(np.stack([np.full(n, z1), z2[ok], z3[ok], z4[ok]], axis=1))
        sols = np.concatenate(found) if found else np.zeros((0, k), dtype=np.int64)
        keep = np.ones(len(sols), dtype=bool)
        if primitive:
            keep &= np.gcd.reduce(np.abs(sols), axis=1) == 1
        if remove_thin:
            keep &= ~np.array([is_square(math.prod(int(v) for v in row)) for row in sols], dtype=bool)
        return int(keep.sum())

    params = {"B": B, "k": k, "primitive": primitive, "remove_thin": remove_thin}
    return _timed("count", params, "naive", run)


# ---------------------------------------------------------------------------
# quadrics, boxes, fibres


def _zero_sum_count(values: Sequence[np.ndarray]) -> int:
    """Number of (v1, .., v4), v_i drawn from values[i] with multiplicity, summing to 0."""
    left = (values[0][:, None] + values[1][None, :]).ravel()
    right = -(values[2][:, None] + values[3][None, :]).ravel()
    lu, lc = np.unique(left, return_counts=True)
    ru, rc = np.unique(right, return_counts=True)
    common, li, ri = np.intersect1d(lu, ru, assume_unique=True, return_indices=True)
    return int(np.dot(lc[li].astype(object), rc[ri].astype(object))) if len(common) else 0


def _zero_sum_solutions(values: Sequence[np.ndarray]) -> np.ndarray:
    """Index 4-tuples (i1, .., i4) into values[k] with zero sum, ordered lexicographically."""
    n0, n1, n2, n3 = (len(v) for v in values)
    left = (values[0][:, None] + values[1][None, :]).ravel()
    right = (values[2][:, None] + values[3][None, :]).ravel()
    order = np.argsort(right, kind="stable")
    rs = right[order]
    lo = np.searchsorted(rs, -left, side="left")
    hi = np.searchsorted(rs, -left, side="right")
    cnt = hi - lo
    total = int(cnt.sum())
    if total == 0:
        return np.zeros((0, 4), dtype=np.int64)
    rep = np.repeat(np.arange(len(left)), cnt)
    offs = np.cumsum(cnt) - cnt
    r = order[lo[rep] + (np.arange(total) - offs[rep])]
    return np.stack([rep // n1, rep % n1, r // n3, r % n3], axis=1)


def _signed_range(m: int) -> np.ndarray:
    r = np.arange(1, m + 1, dtype=np.int64)
    return np.concatenate([-r[::-1], r])


def count_quadric(a: Sequence[int], B: int) -> CountResult:
    """x in (Z != 0)^4 with sum a_i x_i^2 = 0 and |a_i x_i^2| <= B."""
    a = [int(v) for v in a]
    if len(a) != 4 or 0 in a or B < 1:
        raise ValueError("need four nonzero coefficients and B >= 1")

    def run():
        xs = [_signed_range(math.isqrt(B // abs(ai))) for ai in a]
        if any(len(v) == 0 for v in xs):
            return 0
        return _zero_sum_count([ai * v * v for ai, v in zip(a, xs)])

    return _timed("quadric", {"a": a, "B": B}, "pair-sum", run)


def quadric_solutions(a: Sequence[int], bounds: Sequence[int]) -> np.ndarray:
    """Explicit x in (Z != 0)^4 with |x_i| <= bounds[i] and sum a_i x_i^2 = 0."""
    xs = [_signed_range(int(m)) for m in bounds]
    if any(len(v) == 0 for v in xs):
        return np.zeros((0, 4), dtype=np.int64)
    idx = _zero_sum_solutions([int(ai) * v * v for ai, v in zip(a, xs)])
    return np.stack([xs[k][idx[:, k]] for k in range(4)], axis=1)


def fibre_count(y: Sequence[int], B: int, positive: bool = False) -> CountResult:
    """N_y(B): x with sum y_i^3 x_i^2 = 0, gcd(x_i y_i) = 1, |y_i^3 x_i^2| <= B.

    ``positive`` restricts to x in N^4 (the positive-orthant convention).
    """
    y = [int(v) for v in y]
    if len(y) != 4 or any(v == 0 or not is_squarefree(v) for v in y):
        raise ValueError("y must be four nonzero squarefree integers")

    def run():
        if all(v > 0 for v in y) or all(v < 0 for v in y):
            return 0
        bounds = [math.isqrt(B // abs(v) ** 3) for v in y]
        sols = quadric_solutions([v**3 for v in y], bounds)
        if positive:
            sols = sols[(sols > 0).all(axis=1)]
        if len(sols) == 0:
            return 0
        g = np.gcd.reduce(np.abs(sols * np.array(y)), axis=1)
        return int((g == 1).sum())

    return _timed("fibre", {"y": y, "B": B, "positive": positive}, "pair-sum", run)


def fibre_count_divisible(y: Sequence[int], B: int, s: Sequence[int], s0: int, positive: bool = True) -> int:
    """N_y(B; s, s0): x with s_i | x_i, s0 | x_i, sum y_i^3 x_i^2 = 0, |y_i^3 x_i^2| <= B (no gcd)."""
    y = [int(v) for v in y]
    bounds = [math.isqrt(B // abs(v) ** 3) for v in y]
    sols = quadric_solutions([v**3 for v in y], bounds)
    if positive:
        sols = sols[(sols > 0).all(axis=1)]
    step = np.array([si * s0 for si in s])
    return int(((sols % step) == 0).all(axis=1).sum())


def fibre_sum(B: int, positive: bool = False) -> dict[str, Any]:
    """Sum of N_y(B) over squarefree y with |y_i|^3 <= B and Y not a square.

    Each primitive non-thin solution z corresponds to one y and 16 sign
    choices of x, so the signed sum equals 16 N(B) (N(B) with ``positive``).
    """
    m = 1
    while (m + 1) ** 3 <= B:
        m += 1
    pos = [int(v) for v in squarefree_values(m) if v]
    vals = [-v for v in reversed(pos)] + pos
    total = 0
    fibres = 0
    for y in itertools.product(vals, repeat=4):
        if is_square(math.prod(y)):
            continue
        n = fibre_count(y, B, positive).count
        if n:
            fibres += 1
            total += n
    return {"B": B, "positive": positive, "sum": total, "fibres": fibres}


def squarefree_values(m: int) -> np.ndarray:
    flags = squarefree_flags(m)
    return np.flatnonzero(flags)


def count_NXY(X: Sequence[int], Y: Sequence[int]) -> CountResult:
    """N(X, Y): pairs x, y in (Z != 0)^4, y_i squarefree, |x_i| <= X_i, |y_i| <= Y_i, sum x_i^2 y_i^3 = 0."""
    X = [int(v) for v in X]
    Y = [int(v) for v in Y]
    if len(X) != 4 or len(Y) != 4 or min(X + Y) < 1:
        raise ValueError("X and Y need four positive bounds")
    sizes = [2 * Xi * 2 * len(squarefree_values(Yi)) for Xi, Yi in zip(X, Y)]
    if math.prod(sizes) > BOX_MAX_STEPS:
        raise ResourceBudgetError(f"box search of {math.prod(sizes):.3g} steps exceeds {BOX_MAX_STEPS:.0e}")

    def run():
        vals = []
        for Xi, Yi in zip(X, Y):
            ys = squarefree_values(Yi)
            ys = np.concatenate([-ys, ys]).astype(np.int64)
            xs = np.arange(1, Xi + 1, dtype=np.int64)
            # each |x| value comes with both signs
            v = (ys[:, None] ** 3 * xs[None, :] ** 2).ravel()
            vals.append(np.concatenate([v, v]))
        return _zero_sum_count(vals)

    return _timed("boxes", {"X": X, "Y": Y}, "pair-sum", run)


# ---------------------------------------------------------------------------
# sieve sets and the inclusion-exclusion identity


def _surviving(sol: dict[str, np.ndarray], D: int) -> dict[str, np.ndarray]:
    Y = np.prod(sol["y"], axis=1)
    keep = (np.abs(Y) <= D) & ~_is_square_array(Y)
    return {k: v[keep] for k, v in sol.items()}


def count_script_N(B: int, D: int, r: Sequence[int], s: Sequence[int], s0: int) -> CountResult:
    """#{z squareful, sum 0, |z| <= B, |Y| <= D, Y non-square, r | y, s | x, s0 | x}."""

    def run():
        sol = _surviving(enumerate_solutions(B), D)
        ok = ((np.abs(sol["y"]) % np.array(r)) == 0).all(axis=1)
        ok &= ((sol["x"] % (np.array(s) * s0)) == 0).all(axis=1)
        return int(ok.sum())

    params = {"B": B, "D": D, "r": list(r), "s": list(s), "s0": s0}
    return _timed("script_N", params, "explicit", run)


def _gcd_patterns(sol: dict[str, np.ndarray]) -> Counter:
    """Group solutions by the primes of gcd(z) and the (p | y_i, p | x_i) pattern at each."""
    from .arith import _factor_abs

    ay = np.abs(sol["y"])
    x = sol["x"]
    g = np.gcd.reduce(np.abs(sol["z"]), axis=1) if len(x) else np.zeros(0, dtype=np.int64)
    groups: Counter = Counter()
    groups[()] += int(np.count_nonzero(g == 1))
    for i in np.flatnonzero(g > 1):
        key = []
        for p, _ in _factor_abs(int(g[i])):
            key.append((p, tuple(int(v % p == 0) for v in ay[i]), tuple(int(v % p == 0) for v in x[i])))
        groups[tuple(key)] += 1
    return groups


def verify_inclusion_exclusion(B: int, D: int, variant: str = "literal") -> dict[str, Any]:
    """Both sides of the omega-weighted sieve identity for N(D, B).

    The right side is sum omega(r, s, s0) #N(B; r, s, s0) over all terms with
    nonzero weight. A nonzero weight at p forces p to divide every z_i, so each
    solution lies in the sets N(B; r, s, s0) whose primes divide gcd(z) and
    whose per-prime patterns divide its (y, x) pattern; the counts #N are
    accumulated from solutions grouped by that pattern.
    """
    from .localdens import local_options, omega

    lhs = count_N(B, D, remove_thin=True).count
    sol = _surviving(enumerate_solutions(B), D)
    counts: Counter = Counter()
    for key, c in _gcd_patterns(sol).items():
        per_prime = [[(p, o) for o in local_options(yd, xd, variant)] for p, yd, xd in key]
        for combo in itertools.product(*per_prime):
            r, s, s0 = [1, 1, 1, 1], [1, 1, 1, 1], 1
            for p, (rb, sb, tb, _) in combo:
                r = [v * (p if b else 1) for v, b in zip(r, rb)]
                s = [v * (p if b else 1) for v, b in zip(s, sb)]
                s0 *= p if tb else 1
            counts[(tuple(r), tuple(s), s0)] += c
    rhs = sum(omega(r, s, s0, variant) * c for (r, s, s0), c in counts.items())
    return {
        "B": B,
        "D": D,
        "variant": variant,
        "lhs": int(lhs),
        "rhs": int(rhs),
        "equal": int(lhs) == int(rhs),
        "terms": len(counts),
    }
