"""Matveev-type lower bounds and the explicit bound chain they feed.

Every quantity is computed as a ball and reported through its upper
endpoint, so a bound that is printed here can only be too large, never
too small.  Each ``StageBound`` pairs a closed-form claim (a constant the
argument asserts) with the value this module derives for it from earlier
claims; a stage holds when the derived value does not exceed the claim.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .realnum import DEFAULT_BITS, CertifiedReal, UndecidedComparison

BITS = DEFAULT_BITS


def R(x) -> CertifiedReal:
    return CertifiedReal(Fraction(x), BITS)


def log(x) -> CertifiedReal:
    return x.log() if isinstance(x, CertifiedReal) else R(x).log()


LOG2, LOG3, LOG6, LOG9, LOG10 = (log(v) for v in (2, 3, 6, 9, 10))


@dataclass
class MatveevInstance:
    """``|eta_1^b_1 ... eta_t^b_t - 1|`` with ``D = max |b_i|`` in a field of degree ``dL``."""

    t: int
    dL: int
    D: int
    A: Sequence[CertifiedReal]
    label: str = ""

    def __post_init__(self):
        if self.t < 2:
            raise ValueError("need t >= 2")
        if self.dL < 1:
            raise ValueError("field degree must be >= 1")
        if len(self.A) != self.t:
            raise ValueError(f"expected {self.t} values of A, got {len(self.A)}")
        self.A = [a if isinstance(a, CertifiedReal) else R(a) for a in self.A]
        if not all(a.certainly_positive() for a in self.A):
            raise ValueError("every A_i must be positive")

    def admissible(self, heights: Sequence, abs_logs: Sequence) -> bool:
        """Check ``A_i >= max(dL h(eta_i), |log eta_i|, 0.16)`` for all i."""
        for a, h, lg in zip(self.A, heights, abs_logs):
            need = [_ball(h) * self.dL, _ball(lg), R(Fraction(16, 100))]
            if any(a.lower < b.upper for b in need):
                return False
        return True


def _ball(x) -> CertifiedReal:
    return x if isinstance(x, CertifiedReal) else R(x)


def matveev_prefactor(t: int, dL: int) -> CertifiedReal:
    """``1.4 * 30^(t+3) * t^4.5 * dL^2 * (1 + log dL)``."""
    t_pow = R(t) ** 4 * R(t).sqrt()
    return R("1.4") * R(30) ** (t + 3) * t_pow * R(dL) ** 2 * (log(dL) + 1)


def matveev_exponent(inst: MatveevInstance) -> CertifiedReal:
    """``E`` such that ``log |Lambda| > -E`` whenever Lambda is nonzero."""
    e = matveev_prefactor(inst.t, inst.dL) * (log(inst.D) + 1)
    for a in inst.A:
        e = e * a
    return e


def matveev_log_coefficient(inst: MatveevInstance) -> CertifiedReal:
    """Coefficient of ``log D`` after ``1 + log D <= 2 log D`` (valid for D >= 3)."""
    if inst.D < 3:
        raise ValueError("1 + log D <= 2 log D needs D >= 3")
    e = matveev_prefactor(inst.t, inst.dL) * 2
    for a in inst.A:
        e = e * a
    return e


# -- heights ---------------------------------------------------------------------

def height_rational(x: Fraction) -> CertifiedReal:
    x = Fraction(x)
    if x == 0:
        raise ValueError("height of zero is undefined here")
    return log(max(abs(x.numerator), x.denominator))


@dataclass(frozen=True)
class HeightBounds:
    scaled_coefficient: CertifiedReal    # majorant for h(9 f_k(alpha) / d1)
    shifted_coefficient: CertifiedReal   # majorant for h((d1 10^m - (d1-d2)) / (9 f_k(alpha)))
    rational: CertifiedReal              # majorant for h((d1 10^m - (d1-d2)) / 9)


def height_bounds(k: int, m: int, d1: int, d2: int) -> HeightBounds:
    """Majorants for the first logarithm in each of the three applications.

    ``h(f_k(alpha)) < 2 log k`` is taken as known.
    """
    if k < 4:
        raise ValueError("the majorant 4 log k needs k >= 4")
    logk = log(k)
    scaled = LOG9 + 2 * logk
    if not scaled < 4 * logk:
        raise ArithmeticError("log 9 + 2 log k >= 4 log k")
    num = d1 * 10**m - (d1 - d2)
    shifted = LOG9 + 2 * logk + log(num)
    if not shifted < 4 * logk + (m + 1) * LOG10:
        raise ArithmeticError("shifted height exceeds 4 log k + log 10^(m+1)")
    rational = height_rational(Fraction(num, 9))
    if not rational <= LOG9 + (m + 1) * LOG10:
        raise ArithmeticError("rational height exceeds log 9 + log 10^(m+1)")
    return HeightBounds(4 * logk, 4 * logk + (m + 1) * LOG10, LOG9 + (m + 1) * LOG10)


# -- stage bookkeeping -----------------------------------------------------------

@dataclass
class StageBound:
    """One link of the bound chain.

    ``claimed`` is the constant asserted for this link, ``derived`` what
    this module obtains for it from the links before, and ``value`` the
    integer ceiling of the claim where the link bounds an integer quantity.
    """

    name: str
    formula: str
    inputs: dict
    claimed: CertifiedReal
    derived: CertifiedReal
    value: int | None = None
    notes: str = ""

    @property
    def holds(self) -> bool:
        return self.derived.upper <= self.claimed.lower

    @property
    def slack(self) -> float:
        """``claimed / derived``; above 1 means the claim has room to spare."""
        return float(self.claimed.midpoint / self.derived.upper)

    def record(self) -> dict:
        return {
            "name": self.name,
            "formula": self.formula,
            "inputs": {k: _jsonable(v) for k, v in self.inputs.items()},
            "claimed": _sci(self.claimed.upper),
            "derived": _sci(self.derived.upper),
            "value": None if self.value is None else str(self.value),
            "holds": self.holds,
            "notes": self.notes,
        }


def _jsonable(v):
    if isinstance(v, CertifiedReal):
        return _sci(v.upper)
    if isinstance(v, Fraction):
        return _sci(v)
    if isinstance(v, int) and abs(v) > 2**53:
        return str(v)
    return v


def _sci(x) -> str:
    x = Fraction(x)
    return f"{float(x):.6e}" if abs(x) < Fraction(10) ** 300 else _big_sci(x)


def _big_sci(x: Fraction) -> str:
    n = math.ceil(x)
    s = str(n)
    return f"{s[0]}.{s[1:7]}e+{len(s) - 1}"


def ceil_upper(x: CertifiedReal) -> int:
    return math.ceil(x.upper)


def strict_int_bound(x: CertifiedReal) -> int:
    """Largest integer that can be strictly below ``x``."""
    return math.ceil(x.upper) - 1


def strict_below(text: str) -> int:
    """Largest integer strictly below the exact decimal ``text``."""
    return math.ceil(Fraction(text)) - 1


def C(text: str) -> CertifiedReal:
    """A decimal constant such as ``"3.7e12"``, exactly."""
    return R(Fraction(text))


# -- solving transcendental inequalities -------------------------------------------

def solve_x_below_c_log_power(c: CertifiedReal, power: int, start: Fraction = Fraction(3)) -> CertifiedReal:
    """Smallest ``X`` (found by fixed point) with ``x < c log^power x  =>  x < X``.

    Iterates ``x <- c log(x)^power`` upward, then certifies that
    ``X >= c log^power X`` and that ``x - c log^power x`` increases beyond X.
    """
    x = R(start)
    for _ in range(200):
        nxt = c * log(x) ** power
        if abs(float(nxt.upper) - float(x.upper)) <= 1e-12 * float(x.upper):
            break
        x = R(nxt.upper)
    X = R(math.ceil(x.upper * (1 + Fraction(1, 10**9))))
    if not X >= c * log(X) ** power:
        raise ArithmeticError("fixed point failed verification")
    # derivative of x - c log^p x is 1 - c p log^(p-1)(x) / x, positive at X
    if not R(1) > c * power * log(X) ** (power - 1) / X:
        raise ArithmeticError("x - c log^p x is not increasing at the fixed point")
    return X


def log_square_implication_holds(Cval: CertifiedReal) -> bool:
    """``y / log^2 y < C  =>  y < 4 C log^2 C`` for the given ``C >= 100``.

    y / log^2 y increases for ``y > e^2`` and ``Y = 4 C log^2 C`` exceeds
    ``e^2``, so it suffices that ``Y / log^2 Y >= C``.
    """
    if not Cval >= 100:
        raise ValueError("needs C >= 100")
    Y = 4 * Cval * log(Cval) ** 2
    return bool(Y / log(Y) ** 2 >= Cval)


# -- bounds for 4 <= k <= 500 ---------------------------------------------------

def _k_terms(k: int):
    logk = log(k)
    return logk, R(k) ** 8 * logk**5


FIRST_FORM_PREFACTOR = "1.4*30^6*3^4.5"


def c_k(k: int) -> CertifiedReal:
    """Exponent coefficient for the form with eta = 9 f_k(alpha)/d1, alpha, 10."""
    logk = log(k)
    return matveev_prefactor(3, k) * (4 * k * logk) * LOG2 * (k * LOG10)


def c_k_closed_form(k: int) -> float:
    """The same constant in plain floating point."""
    lk = math.log(k)
    return 1.4 * 30**6 * 3**4.5 * k**2 * (1 + lk) * (4 * k * lk) * math.log(2) * (k * math.log(10))


@dataclass
class SmallKBounds:
    k: int
    stages: list[StageBound] = field(default_factory=list)

    def __getitem__(self, name: str) -> StageBound:
        for s in self.stages:
            if s.name == name:
                return s
        raise KeyError(name)

    @property
    def n_bound(self) -> int:
        return self["n_bound"].value

    @property
    def ml_bound(self) -> int:
        return self["ml_bound"].value

    @property
    def M_first(self) -> int:
        """Reduction cap for the exponent of alpha: floor of the n bound."""
        return math.floor(self["n_bound"].claimed.upper)

    @property
    def M_second(self) -> int:
        return math.floor(self["ml_bound"].claimed.upper)

    @property
    def holds(self) -> bool:
        return all(s.holds for s in self.stages)


def stage_bounds_small_k(k: int) -> SmallKBounds:
    """The bound chain for a fixed ``k >= 4`` with ``n >= k + 2``."""
    if k < 4:
        raise ValueError("the chain needs k >= 4")
    logk, k8log5 = _k_terms(k)
    k4log2 = R(k) ** 4 * logk**2
    n_min = k + 2
    log_n_min = log(n_min)
    out = SmallKBounds(k)
    inputs = {"k": k}

    # m log 10 < c_k (1 + log n) + log 11 <= 2 c_k log n + log 11,
    # and 1 + log k <= 2 log k inside c_k
    ck = c_k(k)
    ck_majorant = matveev_prefactor(3, 1) * R(k) ** 2 * 2 * logk * 4 * k * logk * LOG2 * k * LOG10
    assert ck.upper <= ck_majorant.upper
    coeff_m = (2 * ck_majorant + log(11) / log_n_min) / k4log2
    out.stages.append(StageBound(
        "m_log10_coefficient", "m log 10 < K k^4 log^2 k log n", inputs, C("3.7e12"), coeff_m,
        notes=f"c_k = {ck.render(6)}"))

    # h(eta_1) < 4 log k + (m + 1) log 10 < K' k^4 log^2 k log n
    coeff_h = C("3.7e12") + (4 * logk + LOG10) / (k4log2 * log_n_min)
    out.stages.append(StageBound(
        "height_shifted", "h(eta_1) < K' k^4 log^2 k log n", inputs, C("3.8e12"), coeff_h))

    # second application: A_1 = 3.8e12 k^5 log^2 k log n, (1+log k), (1+log n) both doubled
    coeff_E = matveev_prefactor(3, 1) * 2 * 2 * C("3.8e12") * LOG2 * LOG10
    out.stages.append(StageBound(
        "second_form_exponent", "log|Lambda| > -K'' k^8 log^3 k log^2 n", inputs,
        C("3.5e24"), coeff_E))

    # n log alpha < 3.5e24 k^8 log^3 k log^2 n + log 6, alpha > 2(1 - 2^-k)
    log_alpha_low = log(2 * (1 - Fraction(1, 2**k)))
    k8log3 = R(k) ** 8 * logk**3
    coeff_n = (C("3.5e24") + LOG6 / (k8log3 * log_n_min**2)) / log_alpha_low
    out.stages.append(StageBound(
        "n_over_log2_coefficient", "n / log^2 n < K''' k^8 log^3 k", inputs, C("6e24"), coeff_n))

    Cval = C("6e24") * k8log3
    if not log_square_implication_holds(Cval):
        raise ArithmeticError("y/log^2 y implication failed")
    n_derived = 4 * Cval * log(Cval) ** 2
    n_claim = C("9e28") * k8log5
    out.stages.append(StageBound(
        "n_bound", "n < 9e28 k^8 log^5 k", inputs, n_claim, n_derived,
        value=strict_int_bound(n_claim), notes="from y/log^2 y < C => y < 4 C log^2 C"))

    # m + ell < (n - 2) log 2 / log 10 + 1
    ml_derived = (n_claim - 2) * LOG2 / LOG10 + 1
    ml_claim = C("3e28") * k8log5
    out.stages.append(StageBound(
        "ml_bound", "m + ell < 3e28 k^8 log^5 k", inputs, ml_claim, ml_derived,
        value=strict_int_bound(ml_claim)))
    return out


# -- bounds for k > 500 ---------------------------------------------------------

def _chain_value(k: CertifiedReal, const: str) -> CertifiedReal:
    logk = log(k)
    return C(const) * k**8 * logk**5


def log_n_cap_holds(k0: int = 333) -> bool:
    """``log(9e28 k^8 log^5 k) <= 21 log k`` for all ``k >= k0``.

    The left side grows like ``(8 + 5/log k) / k``, slower than ``21 / k``,
    so the check at ``k0`` covers everything above it.
    """
    k = R(k0)
    return bool(log(_chain_value(k, "9e28")) <= 21 * log(k))


def n_below_two_power(k: int | Fraction) -> bool:
    """``9e28 k^8 log^5 k < 2^(k/2)``, compared through logarithms."""
    kk = R(k)
    return bool(log(_chain_value(kk, "9e28")) < kk / 2 * LOG2)


def stage_bounds_large_k() -> list[StageBound]:
    """The chain for ``k > 500`` ending in absolute bounds on k, m + ell and n."""
    stages: list[StageBound] = []
    n_min = 502
    log_n_min = log(n_min)
    if not log_n_cap_holds(333):
        raise ArithmeticError("log(9e28 k^8 log^5 k) <= 21 log k fails at k = 333")

    rational = MatveevInstance(3, 1, 3, [LOG9, LOG10, LOG2], label="two-power rational form")
    coeff = matveev_log_coefficient(rational)
    stages.append(StageBound("rational_form_exponent", "log|Lambda_1| > -K log n", {},
                             C("1.1e12"), coeff))

    # lambda log 2 < 1.1e12 log n + log 13
    lam = (C("1.1e12") + log(13) / log_n_min) / LOG2
    stages.append(StageBound("lambda_coefficient", "lambda < K log n", {}, C("1.6e12"), lam))

    # lambda = k/2: k < 3.2e12 log n < 3.2e12 * 21 log k
    k_coeff = 2 * C("1.6e12") * 21
    stages.append(StageBound("k_half_coefficient", "k < K log k", {}, C("7e13"), k_coeff))
    K1 = solve_x_below_c_log_power(C("7e13"), 1, start=Fraction(3))
    stages.append(StageBound("k_half", "k < 3e15", {}, C("3e15"), K1, value=strict_below("3e15")))
    k1 = C("3e15")
    stages.append(StageBound("k_half_ml", "m + ell < 2e160", {"k": "3e15"}, C("2e160"),
                             _chain_value(k1, "3e28")))
    stages.append(StageBound("k_half_n", "n < 4e160", {"k": "3e15"}, C("4e160"),
                             _chain_value(k1, "9e28")))

    # lambda = theta m: m < 1.6e12 log n / theta
    m_coeff = C("1.6e12") * LOG2 / LOG10
    stages.append(StageBound("m_coefficient", "m < K log n", {}, C("4.9e11"), m_coeff))
    h_coeff = C("4.9e11") * LOG10 + (LOG9 + LOG10) / log_n_min
    stages.append(StageBound("rational_height", "h(eta_1) < K log n", {}, C("1.2e12"), h_coeff))
    shifted = MatveevInstance(3, 1, 3, [C("1.2e12"), LOG10, LOG2], label="shifted rational form")
    # A_1 carries one factor log n and (1 + log n) <= 2 log n gives the other
    e_coeff = matveev_log_coefficient(shifted)
    stages.append(StageBound("shifted_form_exponent", "log|Lambda_2| > -K log^2 n", {},
                             C("5.5e23"), e_coeff))
    # (k/2) log 2 < 5.5e23 log^2 n + log 3, log n < 21 log k
    kk_coeff = (C("5.5e23") * 441 + LOG3 / log_n_min**2) * 2 / LOG2
    stages.append(StageBound("k_theta_coefficient", "k < K log^2 k", {}, C("7.1e26"), kk_coeff))
    K2 = solve_x_below_c_log_power(C("7.1e26"), 2, start=Fraction(3))
    stages.append(StageBound("k_abs", "k < 3.6e30", {}, C("3.6e30"), K2,
                             value=strict_below("3.6e30")))
    k2 = C("3.6e30")
    stages.append(StageBound("ml_abs", "m + ell < 1.5e282", {"k": "3.6e30"}, C("1.5e282"),
                             _chain_value(k2, "3e28"), value=strict_below("1.5e282")))
    stages.append(StageBound("n_abs", "n < 4.5e282", {"k": "3.6e30"}, C("4.5e282"),
                             _chain_value(k2, "9e28"), value=strict_below("4.5e282")))
    return stages


def ml_bound_for_k(k_max: int) -> CertifiedReal:
    """``3e28 k^8 log^5 k`` at the given k."""
    return _chain_value(R(k_max), "3e28")


__all__ = [
    "MatveevInstance", "matveev_exponent", "matveev_log_coefficient", "matveev_prefactor",
    "height_rational", "height_bounds", "HeightBounds", "StageBound", "SmallKBounds",
    "stage_bounds_small_k", "stage_bounds_large_k", "solve_x_below_c_log_power",
    "log_square_implication_holds", "strict_below", "log_n_cap_holds", "n_below_two_power", "c_k",
    "c_k_closed_form", "ml_bound_for_k", "UndecidedComparison",
]
