"""Squareful integers: the y^3 x^2 decomposition, complete tables up to a
bound, the thin-set product test and a small binary cache format.

Cache layout (little-endian)::

    offset 0   4 bytes   magic  b"SQFL"
    offset 4   4 bytes   uint32 format version (currently 1)
    offset 8   8 bytes   uint64 bound B
    offset 16  24*n      records (z: int64, y: int64, x: uint64)

Records hold the positive squareful z <= B in ascending order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .arith import MAX_ABS, is_square, is_squarefree, is_squareful

CACHE_MAGIC = b"SQFL"
CACHE_VERSION = 1
RECORD_DTYPE = np.dtype([("z", "<i8"), ("y", "<i8"), ("x", "<u8")])


@dataclass(frozen=True)
class SquarefulDecomp:
    z: int
    y: int
    x: int

    def __post_init__(self):
        if self.x < 1 or self.y == 0 or self.y**3 * self.x**2 != self.z:
            raise ValueError("z must equal y^3 x^2 with x >= 1")


@dataclass(frozen=True)
class SquarefulTable:
    """Positive squareful values up to B; signed values are the negated view."""

    B: int
    z: np.ndarray
    y: np.ndarray
    x: np.ndarray

    def __len__(self) -> int:
        return len(self.z)

    def entries(self) -> list[SquarefulDecomp]:
        return [SquarefulDecomp(int(z), int(y), int(x)) for z, y, x in zip(self.z, self.y, self.x)]

    def signed(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """All nonzero signed squareful values in [-B, B] with their y and x parts."""
        z = np.concatenate([-self.z[::-1], self.z])
        y = np.concatenate([-self.y[::-1], self.y])
        x = np.concatenate([self.x[::-1], self.x])
        return z, y, x


def decompose(z: int) -> SquarefulDecomp:
    if z == 0 or not is_squareful(z):
        raise ValueError(f"{z} is not a nonzero squareful integer")
    from .arith import _factor_abs

    y = x = 1
    for p, e in _factor_abs(abs(z)):
        if e & 1:
            y *= p
            x *= p ** ((e - 3) // 2)
        else:
            x *= p ** (e // 2)
    return SquarefulDecomp(z, y if z > 0 else -y, x)


def squarefree_flags(n: int) -> np.ndarray:
    """Boolean array f with f[k] true iff k is squarefree, for 0 <= k <= n."""
    flags = np.ones(n + 1, dtype=bool)
    flags[0] = False
    for d in range(2, math.isqrt(n) + 1):
        flags[d * d :: d * d] = False
    return flags


def count_formula(B: int) -> int:
    """Sum over squarefree y with y^3 <= B of floor(sqrt(B / y^3))."""
    total = 0
    y = 1
    while y**3 <= B:
        if is_squarefree(y):
            total += math.isqrt(B // y**3)
        y += 1
    return total


def enumerate_squareful(B: int) -> SquarefulTable:
    if B < 1 or B > MAX_ABS:
        raise ValueError("B must lie in [1, 2^63 - 1]")
    ymax = 1
    while (ymax + 1) ** 3 <= B:
        ymax += 1
    flags = squarefree_flags(ymax)
    zs, ys, xs = [], [], []
    for y in range(1, ymax + 1):
        if not flags[y]:
            continue
        y3 = y**3
        xmax = math.isqrt(B // y3)
        x = np.arange(1, xmax + 1, dtype=np.int64)
        zs.append(y3 * x * x)
        ys.append(np.full(xmax, y, dtype=np.int64))
        xs.append(x)
    z = np.concatenate(zs)
    order = np.argsort(z, kind="stable")
    return SquarefulTable(B, z[order], np.concatenate(ys)[order], np.concatenate(xs)[order])


def thin_test(z: Sequence[int]) -> bool:
    """True iff z1 z2 z3 z4 is a perfect square."""
    if len(z) != 4 or any(v == 0 for v in z):
        raise ValueError("thin_test needs four nonzero integers")
    return is_square(math.prod(int(v) for v in z))


def save_table(table: SquarefulTable, path: str | Path) -> None:
    rec = np.empty(len(table), dtype=RECORD_DTYPE)
    rec["z"], rec["y"], rec["x"] = table.z, table.y, table.x
    header = CACHE_MAGIC + np.array([CACHE_VERSION], "<u4").tobytes() + np.array([table.B], "<u8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(rec.tobytes())


def load_table(path: str | Path) -> SquarefulTable:
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:4] != CACHE_MAGIC:
        raise ValueError(f"{path}: not a squareful table cache")
    version = int(np.frombuffer(raw[4:8], "<u4")[0])
    if version != CACHE_VERSION:
        raise ValueError(f"{path}: unsupported cache version {version}")
    B = int(np.frombuffer(raw[8:16], "<u8")[0])
    if (len(raw) - 16) % RECORD_DTYPE.itemsize:
        raise ValueError(f"{path}: truncated record block")
    rec = np.frombuffer(raw[16:], dtype=RECORD_DTYPE)
    return SquarefulTable(B, rec["z"].astype(np.int64), rec["y"].astype(np.int64), rec["x"].astype(np.int64))


def table_for(B: int, cache: str | Path | None = None) -> SquarefulTable:
    """Table for B, read from (or written to) a cache file when one is given.

    A cached table for a larger bound is truncated rather than rebuilt.
    """
    if cache is not None and Path(cache).exists():
        t = load_table(cache)
        if t.B >= B:
            k = int(np.searchsorted(t.z, B, side="right"))
            return SquarefulTable(B, t.z[:k], t.y[:k], t.x[:k])
    t = enumerate_squareful(B)
    if cache is not None:
        save_table(t, cache)
    return t
