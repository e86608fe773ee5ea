"""The leading constant c(D) of N(B) ~ c B, assembled from sign-class
singular integrals and Euler products of local densities, and its
comparison with exact counts.

    c(D) = (1/16) sum_eps sigma_inf(eps) sum_y |Y|^(-3/2) prod_p sigma_p(y),

with y running over vectors of nonzero squarefree integers with sgn y_i = eps_i,
|Y| <= D and Y not a square.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from .arith import is_square
from .archimedean import sigma_infinity
from .counting import count_N
from .expsums import singular_series
from .localdens import _canonical, euler_product_density
from .squareful import squarefree_flags


@dataclass
class ConstantEstimate:
    D: int
    value: float
    per_eps: dict[str, float]
    tail_note: dict
    error_bound: float = 0.0
    shells: dict[int, float] = field(default_factory=dict)


@dataclass
class Comparison:
    B: int
    D: int
    observed: int
    predicted: float
    ratio: float


def _sign_str(eps: Sequence[int]) -> str:
    return "".join("+" if e > 0 else "-" for e in eps)


def positive_y_vectors(D: int) -> list[tuple[int, int, int, int]]:
    """Ordered 4-tuples of positive squarefree integers with product <= D."""
    if D < 1:
        return []
    sf = [v for v in range(1, D + 1) if squarefree_flags(D)[v]]
    out = []

    def rec(prefix, prod):
        if len(prefix) == 4:
            out.append(tuple(prefix))
            return
        for v in sf:
            if prod * v > D:
                break
            rec(prefix + [v], prod * v)

    rec([], 1)
    return out


def quadric_prediction(a: Sequence[int], B: float, tol: float = 1e-10) -> float:
    """G_a sigma_inf(sgn a) B / sqrt|A|, the main term for N_a(B)."""
    A = math.prod(int(v) for v in a)
    s = sigma_infinity(a, tol).value
    if s == 0.0:
        return 0.0
    return singular_series(a, "hybrid", tol).value * s * B / math.sqrt(abs(A))


def leading_constant(D: int, tol: float = 1e-8, threads: int | None = None) -> ConstantEstimate:
    """c(D) with per-sign-class contributions and the mass of the last dyadic shell.

    Densities are shared across permutations and global sign flips of y; the
    tolerance is split evenly between densities and singular integrals.
    """
    if D < 0:
        raise ValueError("D must be nonnegative")
    sig = {}
    for eps in itertools.product((1, -1), repeat=4):
        sig[eps] = sigma_infinity(eps, tol / 2)
    base = positive_y_vectors(D)
    keys = {}
    for yabs in base:
        Yabs = math.prod(yabs)
        for eps in itertools.product((1, -1), repeat=4):
            if sig[eps].value == 0.0:
                continue
            y = tuple(e * v for e, v in zip(eps, yabs))
            Y = math.prod(y)
            if is_square(Y):
                continue
            keys.setdefault(_canonical(y), []).append((eps, Yabs))
    ordered = sorted(keys)
    with ThreadPoolExecutor(max_workers=threads) as ex:
        dens = list(ex.map(lambda k: euler_product_density(k, tol / 2), ordered))
    per_eps: dict[str, float] = {}
    shells: dict[int, float] = {}
    total = 0.0
    err = 0.0
    for k, d in zip(ordered, dens):
        for eps, Yabs in keys[k]:
            term = sig[eps].value * d.value / Yabs**1.5 / 16
            per_eps[_sign_str(eps)] = per_eps.get(_sign_str(eps), 0.0) + term
            shells[Yabs] = shells.get(Yabs, 0.0) + term
            err += (sig[eps].error_estimate * d.value + sig[eps].value * d.tail_bound) / Yabs**1.5 / 16
    # fixed summation order for reproducibility
    total = math.fsum(shells[k] for k in sorted(shells))
    last = math.fsum(v for k, v in shells.items() if k > D // 2)
    tail = {
        "shape": "E_1(D) = O(D^(-1/4 + eps))",
        "last_dyadic_shell": [D // 2 + 1, D],
        "last_shell_mass": last,
    }
    per_eps = {k: per_eps[k] for k in sorted(per_eps)}
    return ConstantEstimate(D, total, per_eps, tail, err, {k: shells[k] for k in sorted(shells)})


def compare_empirical(
    B: int, D: int, threads: int | None = None, log_path: str | Path | None = None, tol: float = 1e-8
) -> Comparison:
    """Exact N(B) against c(D) B; appends a JSON row to ``log_path`` if given."""
    observed = count_N(B, threads=threads).count
    c = leading_constant(D, tol, threads).value
    predicted = c * B
    ratio = observed / predicted if predicted else math.inf
    row = Comparison(B, D, int(observed), predicted, ratio)
    if log_path is not None:
        with open(log_path, "a") as fh:
            fh.write(json.dumps(asdict(row), sort_keys=True) + "\n")
    return row
