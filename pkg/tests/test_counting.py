import itertools
import math

import numpy as np
import pytest

from squarefulsum import counting
from squarefulsum.arith import is_square, is_squareful


def brute_N(B, D=None, remove_thin=True):
    """Independent oracle: triple loop plus membership test for the fourth value."""
    vals = [z for z in range(1, B + 1) if is_squareful(z)]
    vals = [-v for v in vals] + vals
    vset = set(vals)
    sols = []
    for z1, z2, z3 in itertools.product(vals, repeat=3):
        z4 = -(z1 + z2 + z3)
        if z4 not in vset:
            continue
        z = (z1, z2, z3, z4)
        if math.gcd(*z) != 1:
            continue
        if remove_thin and is_square(math.prod(z)):
            continue
        sols.append(z)
    return sols


@pytest.mark.parametrize("B", [1, 10, 50, 200])
def test_count_matches_brute_oracle(B):
    assert counting.count_N(B).count == len(brute_N(B))
    assert counting.count_N(B, remove_thin=False).count == len(brute_N(B, remove_thin=False))


def test_pinned_small_counts():
    assert counting.count_N(10).count == 24
    assert counting.count_M(10, 1).count == 150
    assert counting.count_M(10, 2).count == 48
    assert counting.count_M(10, 5).count == 0
    assert counting.count_Nk_naive(9, 3).count == 12


@pytest.mark.parametrize("B", [100, 1000])
def test_fast_equals_naive(B):
    assert counting.count_N(B).count == counting.count_Nk_naive(B, 4, remove_thin=True).count


def test_threads_do_not_change_counts():
    a = counting.count_N(3000, threads=1).count
    b = counting.count_N(3000, threads=4).count
    assert a == b


def test_tail_profile_nonincreasing_and_consistent():
    Ds = [1, 2, 4, 8, 16]
    prof = counting.tail_profile(2000, Ds)
    vals = [prof[D] for D in Ds]
    assert vals == sorted(vals, reverse=True)
    assert prof[4] == counting.count_M(2000, 4).count


def test_truncated_count_plus_tail():
    # the tail keeps thin solutions, so it complements the truncated count with thin kept
    B, D = 500, 6
    n = counting.count_N(B, remove_thin=False).count
    assert counting.count_N(B, D, remove_thin=False).count + counting.count_M(B, D + 1).count == n
    assert counting.count_M(B, 1).count == n
    # |y_i|^3 <= B, so |Y| <= B^(4/3)
    assert counting.count_M(B, B + 1).count > 0
    assert counting.count_M(B, int(B ** (4 / 3)) + 1).count == 0


def test_enumerate_solutions_are_solutions():
    sol = counting.enumerate_solutions(100)
    z = sol["z"]
    assert np.all(z.sum(axis=1) == 0)
    assert np.all(sol["y"] ** 3 * sol["x"] ** 2 == z)
    # enumerate_solutions keeps non-primitive solutions
    g = np.gcd.reduce(np.abs(z), axis=1)
    assert int((g == 1).sum()) == len(brute_N(100, remove_thin=False))
    assert len({tuple(r) for r in z.tolist()}) == len(z)


def test_quadric_count_brute():
    a = (1, 1, 1, -2)
    B = 60
    m = [math.isqrt(B // abs(v)) for v in a]
    rng = [[x for x in range(-k, k + 1) if x] for k in m]
    want = sum(1 for x in itertools.product(*rng) if sum(ai * xi * xi for ai, xi in zip(a, x)) == 0)
    assert counting.count_quadric(a, B).count == want


def test_fibre_identity_small():
    fs = counting.fibre_sum(10)
    assert fs["sum"] == 384 == 16 * counting.count_N(10).count


def test_fibre_count_definite_is_zero():
    assert counting.fibre_count((1, 1, 1, 1), 1000).count == 0


def test_boxes_brute():
    X, Y = (2, 2, 2, 2), (2, 1, 2, 1)
    axes = []
    for Xi, Yi in zip(X, Y):
        axes.append([yv**3 * xv * xv for yv in range(-Yi, Yi + 1) if yv for xv in range(-Xi, Xi + 1) if xv])
    want = sum(1 for t in itertools.product(*axes) if sum(t) == 0)
    assert counting.count_NXY(X, Y).count == want


def test_inclusion_exclusion_corrected_weight():
    r = counting.verify_inclusion_exclusion(100, 5, "corrected")
    assert r["equal"] and r["lhs"] == r["rhs"]


def test_budget_errors():
    with pytest.raises(counting.ResourceBudgetError):
        counting.count_Nk_naive(counting.NAIVE_MAX_B + 1)
    with pytest.raises(counting.ResourceBudgetError):
        counting.count_NXY((10**4,) * 4, (100,) * 4)
    with pytest.raises(ValueError):
        counting.count_N(0)


def test_record_without_timing():
    r = counting.count_N(10).record(timing=False)
    assert "seconds" not in r and r["count"] == 24
