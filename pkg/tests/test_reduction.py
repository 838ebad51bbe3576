from fractions import Fraction

import mpmath
import pytest

from kfibrep.realnum import CertifiedReal, Computable, log_ratio
from kfibrep.reduction import (
    CFCache,
    ContinuedFraction,
    EpsilonNonpositive,
    Inconclusive,
    ReducedBound,
    ReductionInstance,
    cf_expand,
    certified_quotients,
    dujella_petho,
    first_convergent_beyond,
    integer_shift_in_log2_base,
    legendre_exponent_bound,
    legendre_lower,
    reduce_many,
    two_five_exponents,
)

M_282 = 15 * 10**281


@pytest.fixture(scope="module")
def theta_cf():
    return ContinuedFraction(log_ratio(10, 2, "theta"), 2048).extend(600)


def mp_quotients(value_fn, count, dps=1500):
    """Oracle: floating continued fraction at very high precision."""
    with mpmath.workdps(dps):
        x = value_fn()
        out = []
        for _ in range(count):
            a = int(mpmath.floor(x))
            out.append(a)
            x = 1 / (x - a)
        return out


def test_certified_quotients_of_rationals():
    assert certified_quotients(Fraction(355, 113), Fraction(355, 113)) == [3, 7, 16]
    # an interval straddling 3 cannot certify anything
    assert certified_quotients(Fraction(29, 10), Fraction(31, 10)) == []


def test_theta_quotients_match_mpmath(theta_cf):
    oracle = mp_quotients(lambda: mpmath.log(10) / mpmath.log(2), 400)
    assert theta_cf.quotients[:400] == oracle
    assert theta_cf.quotients[:4] == [3, 3, 9, 2]
    assert theta_cf.quotients[135] == 5393


def test_convergent_identities(theta_cf):
    p, q = theta_cf.p, theta_cf.q
    assert (p[0], q[0]) == (3, 1)
    for i in range(1, 300):
        assert p[i] * q[i - 1] - p[i - 1] * q[i] == (-1) ** (i - 1)


def test_golden_ratio_expansion():
    phi = Computable("phi", lambda b: (CertifiedReal(5, b).sqrt() + 1) / 2)
    assert ContinuedFraction(phi, 256).extend(40).quotients[:40] == [1] * 40


def test_fixed_ball_stops_cleanly():
    cf = ContinuedFraction(CertifiedReal(2, 128).sqrt())
    assert cf.quotients[0] == 1 and set(cf.quotients[1:]) == {2}
    with pytest.raises(Exception):
        cf.extend(len(cf) + 50)


def test_first_convergent_and_legendre(theta_cf):
    i, _, q = first_convergent_beyond(theta_cf, M_282)
    assert i == 571 and theta_cf.q[570] <= M_282 < q
    leg = legendre_lower(theta_cf, M_282)
    assert (leg.N, leg.a_M, leg.index_of_max, leg.denom_factor) == (570, 5393, 135, 5395)
    assert first_convergent_beyond(theta_cf, 0)[0] == 0
    assert 38 * leg.denom_factor * M_282 < 31 * 10**286


def test_legendre_exponent_bound_value(theta_cf):
    lam = legendre_exponent_bound(38, 5395, M_282, CertifiedReal(2, 512))
    assert 955 < lam.lower and lam.upper < Fraction(95502, 100)


def _lambda_instance(d1, M):
    gamma = log_ratio(10, 2, "theta")
    mu = Computable(f"mu{d1}", lambda b: CertifiedReal(Fraction(d1, 9), b + 16).log()
                    / CertifiedReal(2, b + 16).log() + 2)
    return ReductionInstance(gamma, mu, 38, 2, M, label=f"d1={d1}")


def test_dujella_petho_reduces_and_fails_where_expected(theta_cf):
    out = dujella_petho(_lambda_instance(5, M_282), theta_cf)
    assert isinstance(out, ReducedBound)
    assert 900 < out.w_bound.lower and out.w_bound.upper < 950
    assert out.w_survivor == out.w_max - 1
    bad = dujella_petho(_lambda_instance(9, M_282), theta_cf, max_extra=4)
    assert isinstance(bad, EpsilonNonpositive) and len(bad.q_tried) == 5
    assert bad.record()["outcome"] == "epsilon_nonpositive"


def test_inconclusive_when_precision_is_capped(theta_cf):
    # an enclosure that never tightens leaves the sign of epsilon open forever
    wide = CertifiedReal.from_interval(Fraction(2, 5), Fraction(3, 5), 64)
    inst = ReductionInstance(log_ratio(10, 2, "theta"), Computable("wide", lambda b: wide), 1, 2, 10)
    out = dujella_petho(inst, theta_cf, max_bits=256)
    assert isinstance(out, Inconclusive) and "undecided" in out.reason


def test_reduce_many_agrees_with_single_reductions(theta_cf):
    M = 10**40
    res = reduce_many(theta_cf.source, lambda d1, b: _lambda_instance(d1, M).mu.at(b),
                      range(1, 9), 38, Computable("2", lambda b: CertifiedReal(2, b)), M,
                      cf=theta_cf)
    singles = {d1: dujella_petho(_lambda_instance(d1, M), theta_cf) for d1 in range(1, 9)}
    worst = max(singles.values(), key=lambda o: o.w_bound.upper)
    assert res.ok and res.count == 8
    assert abs(float(res.worst.w_bound.upper) - float(worst.w_bound.upper)) < 1e-9


def test_reduction_instance_validation():
    g = log_ratio(10, 2)
    with pytest.raises(ValueError):
        ReductionInstance(g, g, 0, 2, 10)
    with pytest.raises(ValueError):
        ReductionInstance(g, g, 1, 1, 10)
    with pytest.raises(ValueError):
        ReductionInstance(g, g, 1, 2, 0)


def test_two_five_exponents_and_shift():
    assert two_five_exponents(Fraction(80)) == (4, 1)
    assert two_five_exponents(Fraction(5, 8)) == (-3, 1)
    assert two_five_exponents(Fraction(3)) is None
    # N = 4*10 - (4 - 9) = 45, N/9 = 5: mu = 2 + log 5/log 2 = 1 + theta
    assert integer_shift_in_log2_base(2, Fraction(45, 9)) == (1, 1)
    assert integer_shift_in_log2_base(2, Fraction(999, 9)) is None
    assert integer_shift_in_log2_base(2, Fraction(9 * 10**5, 9)) == (2, 5)


def test_cf_cache_round_trip(tmp_path, theta_cf):
    cache = CFCache(tmp_path)
    src = log_ratio(10, 2, "theta")
    cf = cache.get(src, 10**50)
    again = cache.load(src)
    assert again.quotients == cf.quotients and again.q == cf.q
    assert cf.quotients == theta_cf.quotients[: len(cf)]


def test_cf_expand_count():
    assert len(cf_expand(log_ratio(3, 2), 30)) >= 30
