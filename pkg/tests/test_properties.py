"""Property suites: fuzzed round trips, convergent quality, reduction soundness."""
import math
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from kfibrep.kfib import TwoBlockDecomposition, digit_runs, kfib, two_block_decompose
from kfibrep.linforms import MatveevInstance, matveev_exponent
from kfibrep.realnum import CertifiedReal, Computable, dominant_root, log_ratio
from kfibrep.reduction import (
    ContinuedFraction,
    ReducedBound,
    ReductionInstance,
    dujella_petho,
    legendre_lower,
)

FUZZ_CASES = 100_000
PROP = settings(max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])

decompositions = st.builds(TwoBlockDecomposition, st.integers(1, 9), st.integers(0, 9),
                           st.integers(1, 40), st.integers(1, 40))


# -- two-block recognition ------------------------------------------------------

def test_two_block_round_trip_fuzz():
    rng = random.Random(20240601)
    for _ in range(FUZZ_CASES):
        d = TwoBlockDecomposition(rng.randint(1, 9), rng.randint(0, 9),
                                  rng.randint(1, 30), rng.randint(1, 30))
        found = two_block_decompose(d.value)
        assert d in found
        assert all(t.value == d.value for t in found)


@PROP
@given(decompositions)
def test_two_block_value_matches_digits(d):
    assert str(d.value) == d.digits()
    assert 9 * d.value == d.d1 * 10 ** (d.m + d.ell) - (d.d1 - d.d2) * 10**d.ell - d.d2


@PROP
@given(st.integers(10, 10**30))
def test_two_block_empty_iff_three_runs(n):
    found = two_block_decompose(n)
    assert (not found) == (len(digit_runs(str(n))) >= 3)
    assert all(t.value == n for t in found)


@PROP
@given(st.integers(2, 40), st.integers(2, 200))
def test_kfib_recurrence_and_growth(k, n):
    window = [kfib(k, i) for i in range(n - k, n)]
    assert kfib(k, n) == sum(window)
    if n <= k + 1:
        assert kfib(k, n) == 2 ** (n - 2)
    else:
        assert kfib(k, n) < 2 ** (n - 2)


# -- continued fractions ---------------------------------------------------------

GAMMAS = {
    "log10/log2": log_ratio(10, 2),
    "log3/log2": log_ratio(3, 2),
    "log alpha_5 / log 10": Computable("la5", lambda b: dominant_root(5, b + 16).alpha.log()
                                       / CertifiedReal(10, b + 16).log()),
    "log 10 / log alpha_37": Computable("la37", lambda b: CertifiedReal(10, b + 16).log()
                                        / dominant_root(37, b + 16).alpha.log()),
}


@pytest.mark.parametrize("name", sorted(GAMMAS))
def test_convergent_quality(name):
    gamma = GAMMAS[name]
    cf = ContinuedFraction(gamma, 1024).extend(120)
    g = gamma.at(4096)
    for i in range(len(cf) - 1):
        p, q, q_next = cf.p[i], cf.q[i], cf.q[i + 1]
        err = abs(g - Fraction(p, q))
        assert err.upper < Fraction(1, q * q_next)
        # and convergents are never too good either
        assert err.lower > Fraction(1, q * (q + q_next)) * Fraction(99, 100)


# -- reduction soundness -----------------------------------------------------------

def _exhaustive_min(gamma_mp, mu_mp, M):
    best = None
    for r in range(1, M + 1):
        x = r * gamma_mp + mu_mp
        v = abs(x - mpmath.nint(x))
        best = v if best is None or v < best else best
    return best


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 9), st.integers(0, 9), st.sampled_from([200, 1000, 3000]))
def test_dujella_petho_sampled_falsification(d1, d2, M):
    """No r <= M may beat the reduced bound, checked exhaustively for small M."""
    num, den = d1 * 10 + d2 + 1, 9
    gamma = log_ratio(10, 2)
    mu = Computable(f"mu{num}", lambda b: CertifiedReal(Fraction(num, den), b + 16).log()
                    / CertifiedReal(2, b + 16).log())
    out = dujella_petho(ReductionInstance(gamma, mu, 38, 2, M))
    assume(isinstance(out, ReducedBound))
    with mpmath.workdps(60):
        g = mpmath.log(10) / mpmath.log(2)
        m = mpmath.log(mpmath.mpf(num) / den) / mpmath.log(2)
        smallest = _exhaustive_min(g, m, M)
        threshold = 38 * mpmath.mpf(2) ** (-mpmath.mpf(float(out.w_bound.upper)))
        assert smallest >= threshold * (1 - mpmath.mpf(10) ** -12)


def test_dujella_petho_random_falsification_large_M():
    """Random r up to 1e40, plus the convergent denominators, against the bound."""
    M = 10**40
    gamma = log_ratio(10, 2)
    mu = Computable("mu5", lambda b: CertifiedReal(Fraction(5, 9), b + 16).log()
                    / CertifiedReal(2, b + 16).log() + 2)
    cf = ContinuedFraction(gamma, 1024)
    out = dujella_petho(ReductionInstance(gamma, mu, 38, 2, M), cf)
    assert isinstance(out, ReducedBound)
    rng = random.Random(7)
    rs = [rng.randint(1, M) for _ in range(3000)] + [q for q in cf.q if q <= M]
    rs += [q + s for q in cf.q if q <= M for s in (-2, -1, 1, 2) if 0 < q + s <= M]
    with mpmath.workdps(120):
        g = mpmath.log(10) / mpmath.log(2)
        m = 2 + mpmath.log(mpmath.mpf(5) / 9) / mpmath.log(2)
        threshold = 38 * mpmath.mpf(2) ** (-mpmath.mpf(float(out.w_bound.upper)))
        for r in rs:
            x = r * g + m
            assert abs(x - mpmath.nint(x)) >= threshold


def test_legendre_soundness_random():
    M = 15 * 10**281
    cf = ContinuedFraction(log_ratio(10, 2), 2048).extend_beyond(M)
    leg = legendre_lower(cf, M)
    rng = random.Random(11)
    xs = [rng.randint(1, M - 1) for _ in range(10_000)]
    xs += [q for q in cf.q if q < M]
    with mpmath.workdps(620):
        g = mpmath.log(10) / mpmath.log(2)
        for x in xs:
            v = abs(x * g - mpmath.nint(x * g))
            assert v * (leg.denom_factor * x) > 1


# -- interval arithmetic -------------------------------------------------------------

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@PROP
@given(finite, finite)
def test_double_precision_containment(a, b):
    fa, fb = Fraction(a), Fraction(b)
    x, y = CertifiedReal(a, 64), CertifiedReal(b, 64)
    assert (x + y).contains(fa + fb)
    assert (x - y).contains(fa - fb)
    assert (x * y).contains(fa * fb)
    if b != 0:
        assert (x / y).contains(fa / fb)
    if a > 0:
        with mpmath.workdps(60):
            ref = mpmath.log(mpmath.mpf(a))
            lo, hi = (CertifiedReal(a, 64).log().lower, CertifiedReal(a, 64).log().upper)
            assert mpmath.mpf(lo.numerator) / lo.denominator <= ref <= mpmath.mpf(hi.numerator) / hi.denominator


@PROP
@given(st.fractions(min_value=Fraction(1, 1000), max_value=Fraction(1000)), st.integers(32, 256))
def test_monotone_refinement(x, bits):
    coarse = CertifiedReal(x, bits).log()
    fine = CertifiedReal(x, 2 * bits).log()
    assert fine.radius <= coarse.radius
    assert coarse.overlaps(fine)
    both = coarse.refine(fine)
    assert both.radius <= min(fine.radius, coarse.radius)
    assert both.overlaps(coarse) and both.overlaps(fine)


@PROP
@given(st.lists(st.fractions(min_value=Fraction(1, 4), max_value=Fraction(100)), min_size=3, max_size=3),
       st.integers(3, 10**9), st.integers(0, 2), st.fractions(min_value=0, max_value=5))
def test_matveev_monotone(As, D, which, bump):
    assume(bump > 0)
    base = MatveevInstance(3, 2, D, As)
    bigger_A = list(As)
    bigger_A[which] += bump
    assert matveev_exponent(base).upper <= matveev_exponent(MatveevInstance(3, 2, D, bigger_A)).upper
    assert matveev_exponent(base).upper <= matveev_exponent(MatveevInstance(3, 2, D + 1, As)).upper
    assert (matveev_exponent(base).upper
            <= matveev_exponent(MatveevInstance(3, 3, D, As)).upper)


def test_fuzz_case_count_is_as_stated():
    assert FUZZ_CASES >= 10**5
    assert math.isfinite(FUZZ_CASES)
