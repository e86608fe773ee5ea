import numpy as np
import pytest
from hypothesis import given, strategies as st

from squarefulsum import arith, squareful


@pytest.mark.parametrize("B", [1, 8, 100, 1000, 12345])
def test_enumeration_matches_predicate_and_formula(B):
    t = squareful.enumerate_squareful(B)
    brute = [z for z in range(1, B + 1) if arith.is_squareful(z)]
    assert t.z.tolist() == brute
    assert squareful.count_formula(B) == len(brute)
    assert np.all(t.y**3 * t.x**2 == t.z)


@given(st.integers(min_value=1, max_value=10**12))
def test_decompose_round_trip(n):
    z = n * n * (n % 7 + 1) ** 3
    d = squareful.decompose(z)
    assert arith.is_squarefree(d.y)
    assert d.y**3 * d.x**2 == z
    assert squareful.decompose(-z).y == -d.y


def test_decompose_rejects_non_squareful():
    with pytest.raises(ValueError):
        squareful.decompose(12)


def test_signed_view_is_symmetric():
    z, y, x = squareful.enumerate_squareful(50).signed()
    assert np.array_equal(z, -z[::-1])
    assert np.all(np.sign(y) == np.sign(z))


def test_thin_test():
    assert squareful.thin_test((1, 1, 8, 8))
    assert not squareful.thin_test((1, 1, 1, -8))


def test_cache_round_trip(tmp_cache):
    t = squareful.table_for(5000, tmp_cache)
    assert tmp_cache.exists()
    small = squareful.table_for(1000, tmp_cache)
    assert small.z.tolist() == squareful.enumerate_squareful(1000).z.tolist()
    loaded = squareful.load_table(tmp_cache)
    assert loaded.B == 5000 and len(loaded) == len(t)


def test_bad_cache(tmp_path):
    p = tmp_path / "junk"
    p.write_bytes(b"nope")
    with pytest.raises(ValueError):
        squareful.load_table(p)
