"""Quadratic Gauss sums, the complete sums S_q(c) of a diagonal quaternary
form, their partial sums, and the singular series.

Phases are always reduced modulo q in integers before the exponential is
taken, so each term carries only O(ulp) rounding.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from .arith import (
    _factor_abs,
    euler_phi,
    fundamental_discriminant,
    is_square,
    is_squarefree,
    jacobi,
    kronecker,
    primes_up_to,
    valuation,
)

log = logging.getLogger(__name__)

DIRECT_MAX_Q = 200
TWO_PI = 2.0 * math.pi


class InconsistencyError(ArithmeticError):
    """Two routes to the same quantity disagree beyond tolerance."""


@dataclass
class ExpSumValue:
    q: int
    a: tuple[int, ...]
    c: tuple[int, ...]
    value: complex
    method: str
    exact: int | None = None


@dataclass
class SeriesEstimate:
    value: float
    cutoff: int
    tail_bound: float
    method: str
    components: dict = field(default_factory=dict)


def _coeffs(a) -> tuple[int, int, int, int]:
    a = tuple(int(v) for v in getattr(a, "a", a))
    if len(a) != 4 or 0 in a:
        raise ValueError("need four nonzero coefficients")
    return a


def _e(num: np.ndarray, q: int) -> np.ndarray:
    return np.exp(1j * TWO_PI * (np.mod(num, q) / q))


def gauss_g(m: int, q: int) -> complex:
    """sum_{b mod q} e_q(m b^2) by direct summation."""
    if q < 1:
        raise ValueError("q must be positive")
    b = np.arange(q, dtype=object if q > 3_000_000 else np.int64)
    return complex(_e((m % q) * b * b % q, q).sum())


def _gauss_unit(m: int, p: int, e: int) -> complex:
    """Closed form of g(m, p^e) for p not dividing m, normalized by p^e."""
    if p == 2:
        if e == 1:
            return 0j
        return (1 + 1j ** (m % 4)) * kronecker(2, m) ** e * 2.0 ** (-e / 2)
    q_mod4 = pow(p, e, 4)
    eps = 1 if q_mod4 == 1 else 1j
    return jacobi(m, p) ** e * eps * p ** (-e / 2)


def gauss_normalized(m: int, p: int, e: int) -> complex:
    """g(m, p^e) / p^e from the closed forms."""
    if e == 0:
        return 1.0
    t = valuation(m, p) if m else e
    if t >= e:
        return 1.0
    # g(p^t m', p^e) = p^t g(m', p^(e - t))
    return _gauss_unit(m // p**t, p, e - t)


def _unit_reps(p: int, e: int) -> list[tuple[int, int]]:
    """Representatives k of the unit classes mod p^e that decide every g(k a, p^e), with class sizes."""
    phi = p ** (e - 1) * (p - 1)
    if p == 2:
        mod = 2 ** min(e, 3)
        reps = [k for k in range(1, mod, 2)]
        return [(k, phi // len(reps)) for k in reps]
    # only (k/p) matters for odd p
    n = next(k for k in range(2, p) if jacobi(k, p) == -1) if p > 2 else 1
    return [(1, phi // 2), (n, phi // 2)]


@lru_cache(maxsize=1 << 15)
def s_pp_normalized(a: tuple[int, ...], p: int, e: int) -> float:
    """S_{p^e}(0) / p^(4e) via grouped closed-form Gauss sums."""
    if e == 0:
        return 1.0
    tot = 0j
    for k, w in _unit_reps(p, e):
        prod = 1.0 + 0j
        for ai in a:
            prod *= gauss_normalized(k * ai, p, e)
        tot += w * prod
    return tot.real


def S_pp_exact(a, p: int, j: int) -> int:
    """S_{p^j}(0) as an exact integer for odd p.

    With p^t_i || a_i and f_i = j - t_i > 0, g(k a_i, p^j) = p^t_i (k a_i'/p)^f_i eps_f_i p^(f_i/2)
    (eps_f = 1 if p^f = 1 mod 4, else i); coordinates with t_i >= j give p^j. The
    k-dependence is (k/p)^(sum f_i), so the unit sum vanishes for odd sum f_i.
    """
    if p == 2:
        raise ValueError("exact closed form implemented for odd p only")
    a = _coeffs(a)
    if j == 0:
        return 1
    scale = 1
    fs = []
    sign = 1
    for ai in a:
        t = valuation(ai, p)
        if t >= j:
            scale *= p**j
            continue
        f = j - t
        scale *= p**t
        fs.append(f)
        sign *= jacobi(ai // p**t, p) ** f
    F = sum(fs)
    if F % 2:
        return 0
    n_i = sum(1 for f in fs if pow(p, f, 4) == 3)
    # n_i is even whenever F is even, so prod eps is real
    sign *= -1 if n_i % 4 == 2 else 1
    return euler_phi(p**j) * scale * sign * p ** (F // 2)


def S_q_direct(a, c: Sequence[int], q: int) -> ExpSumValue:
    """S_q(c) summed term by term (the b-sum factors over coordinates)."""
    a = _coeffs(a)
    c = tuple(int(v) for v in c)
    if q > DIRECT_MAX_Q:
        raise ValueError(f"direct path limited to q <= {DIRECT_MAX_Q}")
    b = np.arange(q, dtype=np.int64)
    tot = 0j
    for k in range(1, q + 1):
        if math.gcd(k, q) != 1:
            continue
        prod = 1.0 + 0j
        for ai, ci in zip(a, c):
            prod *= _e((k * ai % q) * b * b + ci * b, q).sum()
        tot += prod
    exact = round(tot.real) if not any(c) else None
    return ExpSumValue(q, a, c, complex(tot), "direct", exact)


def S_q_dft(a, q: int) -> ExpSumValue:
    """S_q(0) from all Gauss sums g(m, q), m mod q, at once (no multiplicativity used).

    g(m, q) = sum_v h(v) e_q(m v) with h(v) = #{b mod q : b^2 = v}, a length-q DFT.
    """
    a = _coeffs(a)
    if q > 10**6:
        raise ValueError("DFT path limited to q <= 1e6")
    b = np.arange(q, dtype=np.int64)
    h = np.bincount(b * b % q, minlength=q).astype(float)
    g = np.fft.ifft(h) * q  # g[m] = sum_v h[v] e(m v / q)
    k = np.array([v for v in range(1, q + 1) if math.gcd(v, q) == 1], dtype=np.int64) % q
    prod = np.ones(len(k), dtype=complex)
    for ai in a:
        prod *= g[(k * (ai % q)) % q]
    val = complex(prod.sum())
    return ExpSumValue(q, a, (0, 0, 0, 0), val, "dft", round(val.real))


def S_q_fast(a, q: int) -> ExpSumValue:
    """S_q(0) as a product over prime powers of grouped Gauss sums."""
    a = _coeffs(a)
    val = 1.0
    for p, e in _factor_abs(q):
        val *= s_pp_normalized(a, p, e) * float(p) ** (4 * e)
    return ExpSumValue(q, a, (0, 0, 0, 0), complex(val), "multiplicative", round(val))


def S_q_closed_form(a, q: int) -> int:
    """(A/q) phi(q) q^2, valid when gcd(q, 2A) = 1."""
    a = _coeffs(a)
    A = math.prod(a)
    if math.gcd(q, 2 * A) != 1:
        raise ValueError("closed form needs gcd(q, 2A) = 1")
    return jacobi(A, q) * euler_phi(q) * q * q


def sigma_partial(a, c: Sequence[int], x: float) -> float:
    """Sum over q <= x of q^-3 S_q(c)."""
    a = _coeffs(a)
    c = tuple(int(v) for v in c)
    n = int(math.floor(x))
    if n < 1:
        return 0.0
    tot = 0.0
    if not any(c):
        for q in range(1, n + 1):
            tot += q * math.prod(s_pp_normalized(a, p, e) for p, e in _factor_abs(q))
        return tot
    if n > DIRECT_MAX_Q:
        raise ValueError("general c is only supported through the direct path")
    for q in range(1, n + 1):
        tot += (S_q_direct(a, c, q).value / q**3).real
    return tot


# ---------------------------------------------------------------------------
# singular series


def bad_prime_factor(a, p: int, tol: float = 1e-12) -> tuple[float, int, float]:
    """1 + sum_j p^-4j S_{p^j}(0), truncated once the certified tail is below tol.

    For j >= max t_i, t_i = v_p(a_i), each normalized Gauss sum has modulus
    at most sqrt(2) p^((t_i - j)/2), and there are phi(p^j) < p^j units k, so
    |p^-4j S_{p^j}| <= c_p p^(v_p(A)/2 - j) with c_p = 4 for p = 2 and 1 otherwise.
    """
    a = _coeffs(a)
    ts = [valuation(ai, p) for ai in a]
    c_p = 4.0 if p == 2 else 1.0
    nu = sum(ts)
    val = 1.0
    j = 0
    while True:
        j += 1
        val += s_pp_normalized(a, p, j)
        if j >= max(ts):
            tail = c_p * p ** (nu / 2 - (j + 1)) / (1 - 1 / p)
            if tail < tol:
                return val, j, tail
        if j > 2000:
            raise InconsistencyError(f"bad-prime factor at p={p} did not converge")


@lru_cache(maxsize=4096)
def _l_values(D: int) -> tuple[float, float]:
    """L(1, chi_D) and L(2, chi_D) for a fundamental discriminant D."""
    m = abs(D)
    k = np.arange(1, m + 1)
    chi = np.array([kronecker(D, int(n)) for n in k], dtype=float)
    if D < 0:
        L1 = -math.pi / m**1.5 * float(np.dot(chi, k))
    else:
        kk = k[:-1]
        L1 = -float(np.dot(chi[:-1], np.log(np.sin(math.pi * kk / m)))) / math.sqrt(m)
    L2 = float(np.dot(chi, hurwitz_zeta(2.0, k / m))) / m**2
    return L1, L2


def check_character(A: int, D: int, n_primes: int = 50) -> None:
    checked = 0
    for p in primes_up_to(10_000):
        if (2 * A) % p == 0:
            continue
        if kronecker(D, p) != jacobi(A, p):
            raise InconsistencyError(f"(D/p) != (A/p) at p={p} for A={A}, D={D}")
        checked += 1
        if checked >= n_primes:
            return


def good_prime_product(A: int, method: str = "hybrid", cutoff: int = 100_000) -> SeriesEstimate:
    """Product over p not dividing 2A of (1 - chi(p)/p^2)/(1 - chi(p)/p), chi(p) = (A/p)."""
    if is_square(A):
        raise ValueError("A must not be a perfect square")
    bad = [p for p, _ in _factor_abs(abs(2 * A))]
    if method in ("hybrid", "L-hybrid"):
        D = fundamental_discriminant(A)
        check_character(A, D)
        L1, L2 = _l_values(D)
        val = L1 / L2
        for p in bad:
            chi = kronecker(D, p)
            val *= (1 - chi / p) / (1 - chi / p**2)
        return SeriesEstimate(val, abs(D), 1e-12 * max(1, abs(D)), "L-hybrid", {"D": D, "L1": L1, "L2": L2})
    if method in ("euler", "euler-product"):
        ps = np.array([p for p in primes_up_to(cutoff) if (2 * A) % p], dtype=np.int64)
        chi = np.array([jacobi(A, int(p)) for p in ps], dtype=float)
        logs = np.log1p(-chi / ps.astype(float) ** 2) - np.log1p(-chi / ps.astype(float))
        run = np.cumsum(logs)
        val = math.exp(run[-1])
        # spread over the last doubling of the cutoff; an estimate, not a bound
        half = run[ps > cutoff // 2]
        tail = float(np.max(np.abs(np.exp(half) - val))) if len(half) else 1.0
        return SeriesEstimate(val, cutoff, tail, "euler-product")
    raise ValueError(f"unknown method {method!r}")


def singular_series(a, method: str = "hybrid", tol: float = 1e-10, cutoff: int = 100_000) -> SeriesEstimate:
    """The singular series as an Euler product: exact local series at p | 2A
    and the character product elsewhere.

    ``method`` picks the good-prime route: ``euler`` (partial product up to
    ``cutoff``), ``hybrid`` (L(1, chi)/L(2, chi) with bad-prime corrections),
    or ``qsum`` (Riesz-smoothed partial sums of q^-4 S_q(0) up to ``cutoff``,
    an oracle only).
    """
    a = _coeffs(a)
    A = math.prod(a)
    if is_square(A):
        raise ValueError("singular series needs A to be a non-square")
    if method in ("qsum", "truncated-q-sum"):
        return truncated_q_sum(a, cutoff)
    bad = {}
    tail = 0.0
    val = 1.0
    for p, _ in _factor_abs(abs(2 * A)):
        f, depth, t = bad_prime_factor(a, p, tol / 10)
        bad[p] = {"factor": f, "depth": depth, "tail": t}
        val *= f
        tail += t
    good = good_prime_product(A, method, cutoff)
    val *= good.value
    comps = {"bad": bad, "good": good.value, "good_method": good.method}
    comps.update(good.components)
    return SeriesEstimate(val, good.cutoff, abs(val) * (tail + good.tail_bound), good.method, comps)


def truncated_q_sum(a, Q: int, order: int = 2) -> SeriesEstimate:
    """sum_{q <= Q} (1 - q/Q)^order q^-4 S_q(0).

    Riesz smoothing tames the oscillation of the conditionally convergent
    raw partial sums; kept as an independent check of the Euler product.
    """
    a = _coeffs(a)
    tot = 0.0
    last = 0.0
    for q in range(1, Q + 1):
        term = math.prod(s_pp_normalized(a, p, e) for p, e in _factor_abs(q))
        tot += (1 - q / Q) ** order * term
        if q == Q // 2:
            last = tot
    return SeriesEstimate(tot, Q, abs(tot - last), "truncated-q-sum")


def magnitude_monitor(a, c: Sequence[int], q: int, factor: float = 16.0) -> bool:
    """Log (never raise) when |S_q(c)| exceeds factor * q^3 prod gcd(q, a_i, c_i)^(1/2)."""
    a = _coeffs(a)
    v = abs(S_q_direct(a, c, q).value)
    bound = factor * q**3 * math.prod(math.gcd(math.gcd(q, ai), ci) for ai, ci in zip(a, c)) ** 0.5
    if v > bound:
        log.warning("|S_%d(%s)| = %.3g exceeds monitor bound %.3g", q, c, v, bound)
        return False
    return True


def series_size_monitor(a, eps: float = 0.1) -> float:
    """Ratio |G_a| / (|A|^eps Delta^(1/4)); logged for trend inspection."""
    from .arith import delta

    a = _coeffs(a)
    G = singular_series(a).value
    ratio = abs(G) / (abs(math.prod(a)) ** eps * delta(a) ** 0.25)
    log.info("singular series monitor a=%s ratio=%.4g", a, ratio)
    return ratio


def rho(r: int) -> int:
    """#{(e1, e2) mod r : e1^3 = e2^3} for squarefree r, multiplicative over primes."""
    if r < 1 or not is_squarefree(r):
        raise ValueError("rho needs a positive squarefree argument")
    out = 1
    for p, _ in _factor_abs(r):
        cubes = np.bincount(np.arange(p, dtype=np.int64) ** 3 % p, minlength=p)
        out *= int(np.dot(cubes, cubes))
    return out
