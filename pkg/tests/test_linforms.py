import math
from fractions import Fraction

import pytest

from kfibrep.linforms import (
    LOG2,
    LOG9,
    LOG10,
    C,
    MatveevInstance,
    R,
    c_k,
    c_k_closed_form,
    height_bounds,
    height_rational,
    log_n_cap_holds,
    log_square_implication_holds,
    matveev_exponent,
    matveev_log_coefficient,
    matveev_prefactor,
    ml_bound_for_k,
    n_below_two_power,
    solve_x_below_c_log_power,
    stage_bounds_large_k,
    stage_bounds_small_k,
    strict_below,
    strict_int_bound,
)


def test_prefactor_against_float():
    for t, dL in [(3, 1), (3, 4), (2, 7)]:
        ref = 1.4 * 30 ** (t + 3) * t**4.5 * dL**2 * (1 + math.log(dL))
        assert math.isclose(float(matveev_prefactor(t, dL).upper), ref, rel_tol=1e-12)


def test_rational_form_coefficient():
    inst = MatveevInstance(3, 1, 3, [LOG9, LOG10, LOG2])
    coeff = matveev_log_coefficient(inst)
    ref = 2 * 1.4 * 30**6 * 3**4.5 * math.log(9) * math.log(10) * math.log(2)
    assert math.isclose(float(coeff.upper), ref, rel_tol=1e-12)
    assert coeff.upper <= Fraction("1.1e12")
    with pytest.raises(ValueError):
        matveev_log_coefficient(MatveevInstance(3, 1, 2, [LOG9, LOG10, LOG2]))


def test_matveev_instance_validation_and_admissibility():
    with pytest.raises(ValueError):
        MatveevInstance(1, 1, 3, [1])
    with pytest.raises(ValueError):
        MatveevInstance(2, 1, 3, [1, 2, 3])
    inst = MatveevInstance(3, 1, 10, [C("2.2"), C("2.31"), C("0.7")])
    assert inst.admissible([LOG9, LOG10, LOG2], [LOG9, LOG10, LOG2])
    # equal balls cannot certify A >= h, so the check stays conservative
    assert not MatveevInstance(3, 1, 10, [LOG9, LOG10, LOG2]).admissible([LOG9, LOG10, LOG2], [0, 0, 0])
    assert not inst.admissible([LOG10, LOG10, LOG2], [0, 0, 0])


def test_exponent_grows_with_D():
    inst = lambda D: MatveevInstance(3, 2, D, [1, 2, 3])
    assert matveev_exponent(inst(10)).upper < matveev_exponent(inst(11)).lower


@pytest.mark.parametrize("k", [4, 10, 100])
def test_c_k_matches_closed_form(k):
    cert = c_k(k)
    ref = c_k_closed_form(k)
    assert ref / 1.05 <= float(cert.upper) <= 1.05 * ref
    assert math.isclose(float(cert.upper), ref, rel_tol=1e-9)


def test_heights():
    assert height_rational(Fraction(-7, 3)).contains(Fraction(0)) is False
    assert float(height_rational(Fraction(7, 3))) == pytest.approx(math.log(7))
    hb = height_bounds(10, 5, 3, 7)
    assert float(hb.scaled_coefficient) == pytest.approx(4 * math.log(10))
    with pytest.raises(ValueError):
        height_bounds(3, 1, 1, 1)


def test_integer_bounds():
    assert strict_int_bound(R(5)) == 4
    assert strict_int_bound(R(Fraction(9, 2))) == 4
    assert strict_below("1.5e282") == 15 * 10**281 - 1
    assert C("3.7e12").upper == Fraction(37 * 10**11)


def test_fixed_point_solver():
    X = solve_x_below_c_log_power(R(100), 1)
    # oracle: iterate in floating point
    x = 3.0
    for _ in range(100):
        x = 100 * math.log(x)
    assert x <= float(X.upper) <= x + 1
    assert log_square_implication_holds(R(10**6))


def test_small_k_chain_holds_everywhere_sampled():
    for k in (4, 5, 17, 100, 333, 500):
        b = stage_bounds_small_k(k)
        assert b.holds, [s.record() for s in b.stages if not s.holds]
        assert b.M_first >= b.M_second > 0
    assert stage_bounds_small_k(4).M_first == 30199497984610599220879451219895766
    with pytest.raises(ValueError):
        stage_bounds_small_k(3)


def test_large_k_chain():
    stages = {s.name: s for s in stage_bounds_large_k()}
    assert all(s.holds for s in stages.values())
    assert stages["ml_abs"].value == 15 * 10**281 - 1
    assert float(stages["k_abs"].derived.upper) == pytest.approx(3.512e30, rel=1e-3)
    assert min(s.slack for s in stages.values()) > 1


def test_large_k_side_conditions():
    assert log_n_cap_holds(333)
    assert n_below_two_power(501)
    assert not n_below_two_power(100)
    assert ml_bound_for_k(1940).upper < Fraction("1.6e59")
    assert ml_bound_for_k(1950).upper < Fraction("1.6e59")
