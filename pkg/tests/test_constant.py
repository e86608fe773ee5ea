import math


from squarefulsum import constant
from squarefulsum.expsums import singular_series
from squarefulsum.localdens import euler_product_density


def test_positive_y_vectors():
    v = constant.positive_y_vectors(6)
    assert all(math.prod(t) <= 6 for t in v)
    assert (1, 2, 3, 1) in v and (1, 1, 1, 4) not in v
    assert constant.positive_y_vectors(0) == []


def test_c1_is_pi_times_singular_series():
    # the D = 1 shell is y = (+-1)^4 with an odd number of minus signs
    c = constant.leading_constant(1)
    S1 = euler_product_density((1, 1, 1, -1)).value
    assert abs(c.value - math.pi * S1) < 1e-8
    assert abs(c.value - 1.6376161) < 1e-7
    assert len(c.per_eps) == 8


def test_constant_monotone_in_D():
    vals = [constant.leading_constant(D).value for D in (1, 5, 10, 20)]
    assert vals == sorted(vals)


def test_shell_masses_sum_to_total():
    c = constant.leading_constant(20)
    assert abs(math.fsum(c.shells.values()) - c.value) < 1e-12
    assert c.tail_note["last_dyadic_shell"] == [11, 20]


def test_density_product_is_primitive_singular_series():
    # sigma_2 = 3/4 and the 2-adic series factor is 1; primitivity costs prod_p (1 - p^-2)
    d = euler_product_density((1, 1, 1, -1))
    assert d.components["local"][2] == "3/4"
    want = 6 / math.pi**2 * singular_series((1, 1, 1, -1)).value
    assert abs(d.value - want) < 1e-12


def test_quadric_prediction_positive():
    p = constant.quadric_prediction((1, 1, 1, -2), 1000)
    assert p > 0
    assert constant.quadric_prediction((1, 1, 1, 1), 1000) == 0.0


def test_compare_logs(tmp_path):
    log = tmp_path / "cmp.jsonl"
    r = constant.compare_empirical(1000, 5, log_path=log)
    assert r.observed > 0 and r.predicted > 0
    assert log.read_text().count("\n") == 1
