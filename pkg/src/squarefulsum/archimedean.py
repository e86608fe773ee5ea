"""The singular integral sigma_inf(eps): the real density of the quadric
G(x) = sum eps_i x_i^2 = 0 in the box [-1, 1]^4,

    sigma_inf = lim_{delta -> 0} vol{x : |G(x)| <= delta} / (2 delta).

Solving G = 0 for x_4 gives the coarea form: the integral over (x1, x2, x3)
of T^(-1/2) on 0 < T <= 1, where T = -eps_4 (eps_1 x1^2 + eps_2 x2^2 + eps_3 x3^2)
is the root x_4^2 (two roots, each weighted 1 / (2|x_4|)). The x3-integral
has a closed form, so the 1/|x_4| singularity never meets the quadrature;
what is left is a 2-D integral with at most a logarithmic singularity, which
adaptive quadrature handles with explicit breakpoints.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

METHODS = ("reduction-quadrature", "monte-carlo-extrapolation")


@dataclass
class SigmaInfResult:
    eps: tuple[int, int, int, int]
    value: float
    error_estimate: float
    method: str
    details: dict = field(default_factory=dict)


def parse_signs(signs) -> tuple[int, int, int, int]:
    """Accept '+++-', a sequence of +-1, or a sequence of nonzero coefficients."""
    if isinstance(signs, str):
        if len(signs) != 4 or set(signs) - {"+", "-"}:
            raise ValueError("sign pattern must be four characters from '+-'")
        return tuple(1 if c == "+" else -1 for c in signs)
    out = tuple(int(v) for v in signs)
    if len(out) != 4 or 0 in out:
        raise ValueError("sign pattern must have four nonzero entries")
    return tuple(1 if v > 0 else -1 for v in out)


def _inner_x3(alpha: float, gamma: int) -> float:
    """Integral over t in [-1, 1] of (alpha + gamma t^2)^(-1/2) on 0 < alpha + gamma t^2 <= 1."""
    if gamma == 1:
        lo2, hi2 = max(0.0, -alpha), min(1.0, 1.0 - alpha)
        if hi2 <= lo2:
            return 0.0
        lo, hi = math.sqrt(lo2), math.sqrt(hi2)
        # antiderivative log(t + sqrt(t^2 + alpha))
        f_hi = math.log(hi + math.sqrt(max(hi * hi + alpha, 0.0)))
        if alpha > 0:
            f_lo = 0.5 * math.log(alpha)
        elif alpha < 0:
            f_lo = math.log(lo)
        else:
            return math.inf
        return 2.0 * (f_hi - f_lo)
    if alpha <= 0:
        return 0.0
    lo2, hi2 = max(0.0, alpha - 1.0), min(1.0, alpha)
    if hi2 <= lo2:
        return 0.0
    r = math.sqrt(alpha)
    # antiderivative arcsin(t / sqrt(alpha))
    return 2.0 * (math.asin(min(1.0, math.sqrt(hi2) / r)) - math.asin(min(1.0, math.sqrt(lo2) / r)))


def _breaks(c_fixed: float, fixed2: float, c_var: float) -> list[float]:
    """Points v in (0, 1) where c_fixed * fixed2 + c_var * v^2 crosses -1, 0 or 1."""
    pts = []
    for level in (-1.0, 0.0, 1.0):
        v2 = (level - c_fixed * fixed2) / c_var
        if 0.0 < v2 < 1.0:
            pts.append(math.sqrt(v2))
    return sorted(set(pts))


def _quadrature(eps: tuple[int, ...], tol: float) -> tuple[float, float, dict]:
    e1, e2, e3, e4 = eps
    c1, c2, gamma = -e4 * e1, -e4 * e2, -e4 * e3
    err_total = 0.0
    evals = 0

    def inner(x1: float) -> float:
        nonlocal err_total, evals
        a1 = c1 * x1 * x1
        pts = _breaks(c1, x1 * x1, c2)
        val, err = integrate.quad(
            lambda x2: _inner_x3(a1 + c2 * x2 * x2, gamma),
            0.0,
            1.0,
            points=pts or None,
            epsabs=tol / 20,
            epsrel=tol / 20,
            limit=400,
        )
        err_total = max(err_total, err)
        evals += 1
        return val

    # the x1-values where an inner breakpoint hits x2 = 0 or x2 = 1
    outer_pts = set()
    for base in (0.0, c2):
        outer_pts.update(_breaks(base, 1.0, c1))
    val, err = integrate.quad(
        inner, 0.0, 1.0, points=sorted(outer_pts) or None, epsabs=tol / 4, epsrel=tol / 4, limit=400
    )
    # four quadrants in (x1, x2); the x3 symmetry is inside _inner_x3
    return 4.0 * val, 4.0 * (err + err_total), {"inner_evaluations": evals}


def _mc_batch(eps: np.ndarray, deltas: np.ndarray, n: int, seed: np.random.SeedSequence) -> np.ndarray:
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(n, 4))
    g = np.abs((x * x) @ eps)
    return np.array([np.count_nonzero(g <= d) for d in deltas], dtype=np.int64)


def _monte_carlo(eps, seed: int, samples: int, threads: int | None, deltas=(0.08, 0.04, 0.02)):
    deltas = np.asarray(deltas, dtype=float)
    batch = 1 << 19
    n_batches = max(1, samples // batch)
    seeds = np.random.SeedSequence(seed).spawn(n_batches)
    e = np.asarray(eps, dtype=float)
    with ThreadPoolExecutor(max_workers=threads or min(8, n_batches)) as ex:
        hits = list(ex.map(lambda s: _mc_batch(e, deltas, batch, s), seeds))
    hits = np.array(hits)  # deterministic order: one row per spawned seed
    total = n_batches * batch
    frac = hits.sum(axis=0) / total
    f = 16.0 * frac / (2 * deltas)
    se = 16.0 * np.sqrt(frac * (1 - frac) / total) / (2 * deltas)
    # halving sequence, bias linear in delta: two Richardson levels
    r1 = 2 * f[1:] - f[:-1]
    r1_se = np.sqrt(4 * se[1:] ** 2 + se[:-1] ** 2)
    r2 = (4 * r1[1] - r1[0]) / 3
    r2_se = math.sqrt((4 * r1_se[1]) ** 2 + r1_se[0] ** 2) / 3
    err = 3 * r2_se + abs(r2 - r1[1])
    return float(r2), float(err), {"deltas": deltas.tolist(), "raw": f.tolist(), "samples": total}


def sigma_infinity(
    eps,
    tol: float = 1e-8,
    method: str = "reduction-quadrature",
    seed: int = 0,
    samples: int = 1 << 23,
    threads: int | None = None,
) -> SigmaInfResult:
    if tol <= 0:
        raise ValueError("tol must be positive")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    eps = parse_signs(eps)
    if abs(sum(eps)) == 4:
        return SigmaInfResult(eps, 0.0, 0.0, method, {"definite": True})
    if method == "reduction-quadrature":
        val, err, det = _quadrature(eps, tol)
        return SigmaInfResult(eps, max(val, 0.0), err, method, det)
    val, err, det = _monte_carlo(eps, seed, samples, threads)
    return SigmaInfResult(eps, val, err, method, det)


def sigma_22_oracle() -> float:
    """Independent 1-D formula for the (2, 2) sign class."""
    a, _ = integrate.quad(lambda t: (math.pi - 4 * math.acos(1 / math.sqrt(t))) ** 2, 1.0, 2.0, epsabs=1e-13)
    return math.pi**2 + a
