"""Exact integer kernels: factorization, squarefree/squareful predicates,
quadratic symbols and the gcd-entanglement invariants of coefficient vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

MAX_ABS = (1 << 63) - 1
DUAL_FORM_BITS = 255

_SMALL_PRIMES = [p for p in range(2, 1 << 10) if all(p % d for d in range(2, math.isqrt(p) + 1))]
# deterministic for n < 3.3e24
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def _check_nonzero(n: int, name: str = "n") -> None:
    if n == 0:
        raise ValueError(f"{name} must be nonzero")


@dataclass(frozen=True)
class Factorization:
    n: int
    sign: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = self.sign
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError("factors must have strictly increasing primes and positive exponents")
            last = p
            prod *= p**e
        if prod != self.n:
            raise ValueError("factorization does not reconstruct n")

    def as_dict(self) -> dict[int, int]:
        return dict(self.factors)

    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]


def is_probable_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for every n below 3.3e24."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES[:13]:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while not d & 1:
        d >>= 1
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int) -> int:
    if n % 2 == 0:
        return 2
    # fixed constants keep the search deterministic
    for c in range(1, 200):
        y, m, g, r, q = 2, 128, 1, 1, 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r <<= 1
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ArithmeticError(f"Pollard-Brent failed on {n}")


def _split(n: int, out: dict[int, int]) -> None:
    if n == 1:
        return
    if is_probable_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    r = math.isqrt(n)
    if r * r == n:
        _split(r, out)
        _split(r, out)
        return
    d = _pollard_brent(n)
    _split(d, out)
    _split(n // d, out)


@lru_cache(maxsize=1 << 16)
def _factor_abs(m: int) -> tuple[tuple[int, int], ...]:
    out: dict[int, int] = {}
    for p in _SMALL_PRIMES:
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out[p] = e
    if m > 1:
        _split(m, out)
    return tuple(sorted(out.items()))


def factorize(n: int) -> Factorization:
    _check_nonzero(n)
    if abs(n) > MAX_ABS:
        raise ValueError("|n| must fit in 63 bits")
    return Factorization(n, 1 if n > 0 else -1, _factor_abs(abs(n)))


def is_squarefree(n: int) -> bool:
    _check_nonzero(n)
    return all(e == 1 for _, e in _factor_abs(abs(n)))


def is_squareful(n: int) -> bool:
    """True iff every prime dividing n does so at least twice (so +-1 qualify)."""
    _check_nonzero(n)
    return all(e >= 2 for _, e in _factor_abs(abs(n)))


def sqf(m: int) -> int:
    """Smallest positive r with |m|/r a perfect square."""
    _check_nonzero(m, "m")
    r = 1
    for p, e in _factor_abs(abs(m)):
        if e & 1:
            r *= p
    return r


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def valuation(n: int, p: int) -> int:
    _check_nonzero(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def mobius(n: int) -> int:
    _check_nonzero(n)
    f = _factor_abs(abs(n))
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) & 1 else 1


def euler_phi(n: int) -> int:
    out = n
    for p, _ in _factor_abs(n):
        out -= out // p
    return out


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    import numpy as np

    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve).tolist()


def _jacobi(a: int, n: int) -> int:
    a %= n
    t = 1
    while a:
        while not a & 1:
            a >>= 1
            if n & 7 in (3, 5):
                t = -t
        a, n = n, a
        if a & 3 == 3 and n & 3 == 3:
            t = -t
        a %= n
    return t if n == 1 else 0


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd positive n."""
    if n < 1 or n % 2 == 0:
        raise ValueError("Jacobi symbol needs an odd positive modulus")
    return _jacobi(a, n)


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n): the Jacobi symbol extended to even and negative n."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    t = 1
    if n < 0:
        n = -n
        if a < 0:
            t = -t
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v & 1 and a % 8 in (3, 5):
            t = -t
    return t * _jacobi(a, n)


def fundamental_discriminant(A: int) -> int:
    """Discriminant of Q(sqrt(A)) for non-square A."""
    _check_nonzero(A, "A")
    if is_square(A):
        raise ValueError("A is a perfect square")
    d = sqf(A) * (1 if A > 0 else -1)
    return d if d % 4 == 1 else 4 * d


@dataclass(frozen=True)
class CoeffVector:
    a: tuple[int, int, int, int]
    A: int = field(init=False)
    eps: tuple[int, int, int, int] = field(init=False)
    Delta: int = field(init=False)

    def __post_init__(self):
        a = tuple(int(v) for v in self.a)
        if len(a) != 4:
            raise ValueError("coefficient vector must have four entries")
        if any(v == 0 for v in a):
            raise ValueError("coefficients must be nonzero")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "A", math.prod(a))
        object.__setattr__(self, "eps", tuple(1 if v > 0 else -1 for v in a))
        object.__setattr__(self, "Delta", delta(a))

    def form(self, x: Sequence[int]) -> int:
        return sum(ai * xi * xi for ai, xi in zip(self.a, x))


def _as_coeffs(a) -> tuple[int, ...]:
    if isinstance(a, CoeffVector):
        return a.a
    a = tuple(int(v) for v in a)
    if len(a) != 4:
        raise ValueError("coefficient vector must have four entries")
    if any(v == 0 for v in a):
        raise ValueError("coefficients must be nonzero")
    return a


def delta(a) -> int:
    a = _as_coeffs(a)
    out = 1
    for i in range(4):
        rest = math.prod(a[j] for j in range(4) if j != i)
        out *= math.gcd(a[i], rest)
    return out


def delta_c(a, c: Sequence[int]) -> int:
    a = _as_coeffs(a)
    if len(c) != 4:
        raise ValueError("c must have four entries")
    # math.gcd(x, 0) == |x|
    g = [math.gcd(ai, ci) for ai, ci in zip(a, c)]
    out = 1
    for i in range(4):
        out *= math.gcd(g[i], math.prod(g[j] for j in range(4) if j != i))
    return out


def dual_form(a, c: Sequence[int]) -> int:
    a = _as_coeffs(a)
    A = math.prod(a)
    val = sum((A // a[i]) * c[i] * c[i] for i in range(4))
    if abs(val).bit_length() > DUAL_FORM_BITS:
        raise OverflowError("dual form value exceeds the supported 256-bit width")
    return val
