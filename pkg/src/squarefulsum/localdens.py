"""The sieve weight omega, counts of solutions of sum y_i^3 m_i^2 = 0 modulo
prime powers, stabilized p-adic densities, and the two sides of the identity
expressing the omega-weighted singular-series sum as an Euler product.

Densities are exact ``Fraction`` values; floats appear only when factors are
assembled into a product.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .arith import _factor_abs, is_square, is_squarefree, jacobi
from .expsums import InconsistencyError, S_pp_exact, SeriesEstimate, good_prime_product, singular_series

log = logging.getLogger(__name__)

HIST_MAX_Q = 6000  # exact histogram convolution costs about q^2 / 2
MAX_LEVEL = 24


@dataclass(frozen=True)
class OmegaArg:
    r: tuple[int, int, int, int]
    s: tuple[int, int, int, int]
    s0: int = 1

    def __post_init__(self):
        if len(self.r) != 4 or len(self.s) != 4 or min(*self.r, *self.s, self.s0) < 1:
            raise ValueError("r and s are positive 4-vectors and s0 is positive")


@dataclass(frozen=True)
class LocalDensity:
    p: int
    y: tuple[int, ...]
    N_stable: int
    value: Fraction
    levels: tuple[Fraction, ...] = field(default=(), compare=False)

    def __float__(self) -> float:
        return float(self.value)


# ---------------------------------------------------------------------------
# omega


OMEGA_VARIANTS = ("literal", "corrected")


def omega_local(rb: Sequence[int], sb: Sequence[int], t: int, variant: str = "literal") -> int:
    """Weight contributed by one prime p, from the 0/1 patterns of p | r_i, p | s_i, p | s0.

    ``literal`` follows the six rules verbatim. ``corrected`` differs only when
    p | s0: there it uses -(-1)^#{i : p | r_i} for every r-pattern, which is
    the per-prime Moebius expansion of "p divides every z_i"; the verbatim rule
    gives 0 for 1 <= #{i : p | r_i} <= 3 and so does not cancel on solutions
    where p divides every x_i but only some y_i.
    """
    if variant not in OMEGA_VARIANTS:
        raise ValueError(f"unknown omega variant {variant!r}")
    nr, ns = sum(rb), sum(sb)
    if ns == 4:
        return 0  # gcd(s_1, ..., s_4) > 1
    if t:
        if ns:
            return 0  # gcd(s0, s_i) > 1
        if variant == "corrected":
            return -1 if nr % 2 == 0 else 1
        # mu(p) * omega(r^[p], 1, 1)
        return -1 if nr == 0 else (1 if nr == 4 else 0)
    k = nr + ns
    if k == 0:
        return 1
    if any(a + b == 0 for a, b in zip(rb, sb)):
        return 0
    if not 4 <= k <= 7:
        # cannot happen once the global rules hold; surfaced rather than extended
        raise InconsistencyError(f"omega rule 6 violated: k={k} for r-pattern {tuple(rb)}, s-pattern {tuple(sb)}")
    return -1 if k % 2 == 0 else 1


def omega(r, s=None, s0: int | None = None, variant: str = "literal") -> int:
    """The sieve weight omega(r, s, s0) in {-1, 0, 1}.

    Accepts an ``OmegaArg`` or the three components directly.
    """
    if isinstance(r, OmegaArg):
        arg = r
    else:
        arg = OmegaArg(tuple(int(v) for v in r), tuple(int(v) for v in s), int(s0 if s0 is not None else 1))
    r, s, s0 = arg.r, arg.s, arg.s0
    if any(not is_squarefree(v) for v in (*r, *s, s0)):
        return 0
    out = 1
    for p, _ in _factor_abs(math.prod(r) * math.prod(s) * s0):
        rb = [int(v % p == 0) for v in r]
        sb = [int(v % p == 0) for v in s]
        out *= omega_local(rb, sb, int(s0 % p == 0), variant)
        if out == 0:
            return 0
    return out


def local_options(ydiv: Sequence[int], xdiv: Sequence[int], variant: str = "literal"):
    """Per-prime patterns (r-bits, s-bits, s0-bit) dividing (p, y), (p, x) with nonzero weight."""
    out = []
    r_choices = [(0, 1) if d else (0,) for d in ydiv]
    s_choices = [(0, 1) if d else (0,) for d in xdiv]
    for t in ((0, 1) if all(xdiv) else (0,)):
        for rb in itertools.product(*r_choices):
            for sb in itertools.product(*s_choices):
                w = omega_local(rb, sb, t, variant)
                if w:
                    out.append((rb, sb, t, w))
    return out


def omega_prime_cancellation(p: int = 2, variant: str = "literal") -> dict[tuple[int, ...], int]:
    """Sum of omega over every (r, s, s0) dividing (p, y), (p, x), (p, x), per divisibility pattern.

    Keys are the 0/1 patterns of (y_1..y_4, x_1..x_4) modulo p. An exact sieve
    gives 0 when p divides every z_i and 1 otherwise.
    """
    out = {}
    for pat in itertools.product((0, 1), repeat=8):
        out[pat] = sum(
            omega([p if b else 1 for b in rb], [p if b else 1 for b in sb], p if t else 1, variant)
            for rb, sb, t, _ in local_options(pat[:4], pat[4:], variant)
        )
    return out


def sieve_target(pattern: Sequence[int]) -> int:
    """1 unless p divides every z_i = y_i^3 x_i^2."""
    return 0 if all(a or b for a, b in zip(pattern[:4], pattern[4:])) else 1


# ---------------------------------------------------------------------------
# counts modulo prime powers


def _check_prime_level(p: int, n: int) -> None:
    if p < 2 or len(_factor_abs(p)) != 1 or _factor_abs(p)[0][1] != 1:
        raise ValueError(f"{p} is not prime")
    if n < 0 or n > MAX_LEVEL:
        raise ValueError(f"unsupported level {n}")


def _square_hist(c: int, q: int) -> np.ndarray:
    m = np.arange(q, dtype=np.int64)
    return np.bincount((c % q) * (m * m % q) % q, minlength=q)


def _cconv(h1: np.ndarray, h2: np.ndarray) -> np.ndarray:
    q = len(h1)
    out = np.zeros(q, dtype=np.int64)
    for v in np.flatnonzero(h1):
        out += h1[v] * np.roll(h2, v)
    return out


def _zero_count_hist(a: Sequence[int], q: int) -> int:
    h = [_square_hist(ai, q) for ai in a]
    left = _cconv(h[0], h[1])
    right = _cconv(h[2], h[3])
    return int(np.dot(left, np.roll(right[::-1], 1)))


def _vp(v: int, p: int) -> int:
    k = 0
    while v % p == 0:
        v //= p
        k += 1
    return k


def _zero_count_gauss(a: Sequence[int], p: int, n: int) -> int:
    """N(p^n) = p^(3n) (1 + sum_{j <= n} p^(-4j) S_{p^j}(0)) in exact arithmetic (odd p)."""
    if p == 2:
        raise ValueError("the Gauss-sum path covers odd p; p = 2 levels are served by histograms")
    a = tuple(int(v) for v in a)
    val = Fraction(p ** (3 * n))
    for j in range(1, n + 1):
        val += Fraction(S_pp_exact(a, p, j) * p ** (3 * n), p ** (4 * j))
    if val.denominator != 1:
        raise InconsistencyError(f"Gauss-sum count {val} is not an integer (a={a}, p^{n})")
    return int(val)


def zero_count(a: Sequence[int], p: int, n: int, method: str = "auto") -> int:
    """#{m mod p^n : sum a_i m_i^2 = 0 mod p^n}."""
    _check_prime_level(p, n)
    if n == 0:
        return 1
    a = [int(v) for v in a]
    if any(v == 0 for v in a):
        raise ValueError("coefficients must be nonzero")
    # a common factor p^c only matters modulo p^(n - c): Z(p^c a, p^n) = p^(4c) Z(a, p^(n - c))
    c = min(min(_vp(v, p) for v in a), n)
    if c and method != "brute":
        return p ** (4 * c) * zero_count([v // p**c for v in a], p, n - c, method)
    q = p**n
    if method == "brute":
        if q**4 > 10**6:
            raise ValueError("literal enumeration limited to p^(4n) <= 1e6")
        m = np.arange(q, dtype=np.int64)
        sq = m * m % q
        tot = (a[0] % q) * sq[:, None, None, None] + (a[1] % q) * sq[None, :, None, None]
        tot = tot + (a[2] % q) * sq[None, None, :, None] + (a[3] % q) * sq[None, None, None, :]
        return int(np.count_nonzero(tot % q == 0))
    if method == "hist" or (method == "auto" and q <= HIST_MAX_Q):
        return _zero_count_hist(a, q)
    return _zero_count_gauss(a, p, n)


def N_count(s: Sequence[int], y: Sequence[int], p: int, n: int, method: str = "auto") -> int:
    """#{m mod p^n : sum s_i^2 y_i^3 m_i^2 = 0 mod p^n}."""
    a = [int(si) ** 2 * int(yi) ** 3 for si, yi in zip(s, y)]
    return zero_count(a, p, n, method)


def M_count(y: Sequence[int], p: int, N: int, method: str = "auto") -> int:
    """#{m mod p^N : sum y_i^3 m_i^2 = 0, p does not divide m_j y_j for some j}; M_0 = 0.

    The excluded part has m_i = p m_i' wherever p does not divide y_i, which
    turns it into a zero count for coefficients p^2 y_i^3 on those coordinates,
    divided by p per substituted coordinate.
    """
    _check_prime_level(p, N)
    if N == 0:
        return 0
    y = [int(v) for v in y]
    full = zero_count([v**3 for v in y], p, N, method)
    unit = [v % p != 0 for v in y]
    bad = zero_count([(p * p if u else 1) * v**3 for u, v in zip(unit, y)], p, N, method)
    return full - bad // p ** sum(unit)


def M_recursion(y: Sequence[int], p: int, N: int) -> int:
    """N_{1,y}(p^N) - p^4 N_{1,y}(p^(N-2)), with N_{1,y}(p^-1) read as p^-4.

    Agrees with ``M_count`` when p does not divide Y.
    """
    one = (1, 1, 1, 1)
    if N == 1:
        return N_count(one, y, p, 1) - 1
    return N_count(one, y, p, N) - p**4 * N_count(one, y, p, N - 2)


# ---------------------------------------------------------------------------
# densities


def _canonical(y: Sequence[int]) -> tuple[int, ...]:
    """Permutation and global-sign invariant key: both leave the zero set unchanged."""
    a = tuple(sorted(int(v) for v in y))
    b = tuple(sorted(-int(v) for v in y))
    return min(a, b)


def _check_y(y: Sequence[int]) -> tuple[int, ...]:
    y = tuple(int(v) for v in y)
    if len(y) != 4 or any(v == 0 or not is_squarefree(v) for v in y):
        raise ValueError("y must be four nonzero squarefree integers")
    return y


def closed_form_density(y: Sequence[int], p: int) -> Fraction:
    """(1 - p^-2)(1 - chi p^-2)/(1 - chi p^-1) with chi = (Y/p), for p not dividing 2Y."""
    Y = math.prod(y)
    if p == 2 or Y % p == 0:
        raise ValueError("closed form needs p odd and coprime to Y")
    chi = jacobi(Y, p)
    P = Fraction(1, p)
    return (1 - P * P) * (1 - chi * P * P) / (1 - chi * P)


@lru_cache(maxsize=1 << 14)
def _local_density_cached(key: tuple[int, ...], p: int, max_level: int) -> LocalDensity:
    n_min = 3 if p == 2 else 1
    levels = []
    for N in range(1, max_level + 1):
        levels.append(Fraction(M_count(key, p, N), p ** (3 * N)))
        if N > n_min and levels[-1] == levels[-2]:
            # a unit coordinate with a unit m gives Hensel lifting: M_{N+1} = p^3 M_N from here on
            return LocalDensity(p, key, N - 1, levels[-2], tuple(levels))
    raise InconsistencyError(f"density at p={p} for y={key} did not stabilize by level {max_level}: {levels}")


def local_density(y: Sequence[int], p: int, tol: float = 1e-12, max_level: int = 8) -> LocalDensity:
    """Stabilized sigma_p(y) = lim M_N(y, p) / p^(3N) as an exact rational.

    Stability is certified: once a coordinate pair (y_j, m_j) is a p-adic unit,
    solutions lift uniquely up to the p^3 free directions for N >= 1 (N >= 3
    at p = 2), so two agreeing consecutive levels fix the limit and the tail
    is exactly zero, below any ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    y = _check_y(y)
    _check_prime_level(p, 1)
    d = _local_density_cached(_canonical(y), p, max_level)
    return LocalDensity(p, y, d.N_stable, d.value, d.levels)


def _bad_primes(Y: int) -> list[int]:
    return sorted({2} | {p for p, _ in _factor_abs(abs(Y))})


def euler_product_density(y: Sequence[int], tol: float = 1e-10, threads: int | None = None) -> SeriesEstimate:
    """prod_p sigma_p(y): exact factors at p | 2Y, the closed form elsewhere.

    Over p not dividing 2Y the product splits into prod (1 - p^-2), which is
    6/pi^2 with the bad primes removed, and the character product evaluated
    through L(1, chi)/L(2, chi).
    """
    y = _check_y(y)
    Y = math.prod(y)
    if is_square(Y):
        raise ValueError("Y must not be a perfect square")
    bad = _bad_primes(Y)
    with ThreadPoolExecutor(max_workers=threads or min(8, len(bad))) as ex:
        dens = list(ex.map(lambda p: local_density(y, p, tol), bad))
    val = 6 / math.pi**2
    for p, d in zip(bad, dens):
        val *= float(d.value) / (1 - p**-2.0)
    good = good_prime_product(Y, "hybrid")
    val *= good.value
    comps = {"local": {p: str(d.value) for p, d in zip(bad, dens)}, "good": good.value}
    return SeriesEstimate(val, good.cutoff, abs(val) * good.tail_bound, "euler-product-density", comps)


def inner_sum(y: Sequence[int], tol: float = 1e-10, variant: str = "literal") -> SeriesEstimate:
    """sum over r | y, s, s0 of omega(r, s, s0) G_{s^2 y^3} / (S s0^2).

    Nonzero weights need every prime of R S to divide each r_i s_i, hence to
    divide Y, so (r, s) and the part of s0 supported on primes of Y are
    enumerated prime by prime. The rest of s0 is summed in closed form:
    sum over squarefree s0 coprime to Y of mu(s0)/s0^2 = (6/pi^2) prod_{p|Y} (1 - p^-2)^-1.
    The scaling by s0^2 is uniform across coordinates, so G does not see s0.
    """
    y = _check_y(y)
    Y = math.prod(y)
    if is_square(Y):
        raise ValueError("Y must not be a perfect square")
    primes = [p for p, _ in _factor_abs(abs(Y))]
    per_prime = []
    for p in primes:
        opts = local_options([int(v % p == 0) for v in y], (1, 1, 1, 1), variant)
        per_prime.append([(p, rb, sb, tb, w) for rb, sb, tb, w in opts])
    s0_rest = 6 / math.pi**2
    for p in primes:
        s0_rest /= 1 - p**-2.0
    total = 0.0
    tail = 0.0
    terms = 0
    cache: dict[tuple[int, ...], SeriesEstimate] = {}
    for combo in itertools.product(*per_prime):
        s = [1, 1, 1, 1]
        w = 1
        scale = 1.0
        for p, rb, sb, tb, ww in combo:
            s = [si * (p if b else 1) for si, b in zip(s, sb)]
            w *= ww
            if tb:
                scale /= p * p
        S = math.prod(s)
        a = tuple(si * si * yi**3 for si, yi in zip(s, y))
        if a not in cache:
            cache[a] = singular_series(a, "hybrid", tol / 4)
        g = cache[a]
        total += w * g.value * scale / S
        tail += g.tail_bound * scale / S
        terms += 1
    total *= s0_rest
    return SeriesEstimate(total, terms, tail * s0_rest, "inner-sum", {"terms": terms, "variant": variant})
