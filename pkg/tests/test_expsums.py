import cmath
import itertools
import math

import pytest

from squarefulsum import expsums

FORMS = [(1, 1, 1, -1), (1, 1, 1, -2), (1, 2, 3, -5), (2, 2, 3, -3), (9, 1, 1, -3)]


def brute_S(a, q, c=(0, 0, 0, 0)):
    """Unfactored quadruple sum over b mod q; only usable for tiny q."""
    tot = 0j
    for k in range(1, q + 1):
        if math.gcd(k, q) != 1:
            continue
        for b in itertools.product(range(q), repeat=4):
            F = sum(ai * bi * bi for ai, bi in zip(a, b))
            tot += cmath.exp(2j * math.pi * (k * F + sum(ci * bi for ci, bi in zip(c, b))) / q)
    return tot


@pytest.mark.parametrize("q", [1, 2, 3, 4, 5, 6, 8, 9])
def test_direct_matches_unfactored_sum(q):
    a = (1, 2, 3, -5)
    assert abs(expsums.S_q_direct(a, (0, 0, 0, 0), q).value - brute_S(a, q)) < 1e-6 * q**5
    c = (1, 0, 2, 1)
    assert abs(expsums.S_q_direct(a, c, q).value - brute_S(a, q, c)) < 1e-6 * q**5


@pytest.mark.parametrize("a", FORMS)
def test_fast_dft_direct_agree(a):
    for q in range(1, 121):
        d = expsums.S_q_direct(a, (0, 0, 0, 0), q).exact
        assert expsums.S_q_dft(a, q).exact == d
        assert expsums.S_q_fast(a, q).exact == d


@pytest.mark.parametrize("a", FORMS)
def test_exact_prime_power_values(a):
    for p in (3, 5, 7):
        for j in range(1, 4):
            if p**j > 400:
                continue
            assert expsums.S_pp_exact(a, p, j) == expsums.S_q_dft(a, p**j).exact


@pytest.mark.parametrize("m,q", [(1, 1), (1, 4), (3, 8), (5, 16), (2, 9), (6, 27), (1, 25), (7, 49), (3, 125), (1, 2)])
def test_gauss_closed_form(m, q):
    p = min(d for d in range(2, q + 1) if q % d == 0) if q > 1 else 2
    e = round(math.log(q, p)) if q > 1 else 0
    assert abs(expsums.gauss_normalized(m, p, e) * q - expsums.gauss_g(m, q)) < 1e-9 * q


def test_closed_form_good_moduli():
    a = (1, 1, 1, -2)
    for q in range(1, 200, 2):
        if math.gcd(q, 2) == 1:
            assert expsums.S_q_closed_form(a, q) == expsums.S_q_fast(a, q).exact
    with pytest.raises(ValueError):
        expsums.S_q_closed_form(a, 4)


def test_singular_series_methods_agree():
    a = (1, 1, 1, -1)
    h = expsums.singular_series(a, "hybrid")
    e = expsums.singular_series(a, "euler", cutoff=100_000)
    assert abs(h.components["good"] - (math.pi / 4) / 0.9159655941772190) < 1e-9
    # the truncated product is conditionally convergent; its reported tail covers the gap
    assert abs(h.value - e.value) <= e.tail_bound + h.tail_bound
    assert abs(h.value - e.value) < 1e-3
    qs = expsums.singular_series(a, "qsum", cutoff=4000)
    assert abs(qs.value - h.value) < 2e-2


def test_bad_prime_factor_against_partial_sums():
    # at p | 2A the local factor is a finite-depth sum plus a certified tail
    a = (1, 2, 3, -5)
    for p in (2, 3, 5):
        f, depth, tail = expsums.bad_prime_factor(a, p, 1e-12)
        direct = 1 + sum(expsums.S_q_dft(a, p**j).exact / p ** (4 * j) for j in range(1, 8 if p < 5 else 5))
        assert abs(f - direct) < 1e-3 and tail < 1e-11


def test_square_A_rejected():
    with pytest.raises(ValueError):
        expsums.singular_series((1, 1, 1, 1))


def test_check_character_accepts_kronecker():
    expsums.check_character(-2, -8)


def test_rho_values():
    assert expsums.rho(1) == 1
    assert expsums.rho(2) == 2 and expsums.rho(3) == 3 and expsums.rho(7) == 19
    assert expsums.rho(21) == 3 * 19
    with pytest.raises(ValueError):
        expsums.rho(4)


def test_monitors_only_report():
    assert expsums.magnitude_monitor((1, 1, 1, -1), (0, 0, 0, 0), 5) in (True, False)
    assert expsums.series_size_monitor((1, 1, 1, -2)) > 0


def test_sigma_partial_zero_frequency():
    a = (1, 1, 1, -1)
    want = sum(expsums.S_q_dft(a, q).exact / q**3 for q in range(1, 31))
    assert abs(expsums.sigma_partial(a, (0, 0, 0, 0), 30) - want) < 1e-6 * abs(want)
