"""Certified real arithmetic and the dominant root of the k-Fibonacci polynomial.

Balls come from ``flint.arb``; this module adds the comparison discipline
(never answer an undecidable comparison), precision escalation, and the
handful of quantities the reductions need: the dominant root ``alpha`` of
``x^k - x^(k-1) - ... - 1``, the coefficient ``f_k(alpha)``, and the two
approximation errors of F_n^(k).
"""
from __future__ import annotations

import functools
import math
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from flint import arb, arf, ctx, fmpq, fmpz

from .kfib import kfib

DEFAULT_BITS = 512
MAX_BITS = 65536


class UndecidedComparison(ArithmeticError):
    """The enclosing balls overlap, so the comparison cannot be decided."""


class PrecisionExhausted(ArithmeticError):
    pass


@contextmanager
def working_precision(bits: int):
    saved = ctx.prec
    ctx.prec = max(int(bits), 16)
    try:
        yield
    finally:
        ctx.prec = saved


def _arf_to_fraction(x) -> Fraction:
    man, exp = x.man_exp()
    man, exp = int(man), int(exp)
    return Fraction(man << exp) if exp >= 0 else Fraction(man, 1 << -exp)


def _to_arb(x) -> arb:
    if isinstance(x, CertifiedReal):
        return x.ball
    if isinstance(x, arb):
        return x
    if isinstance(x, Fraction):
        return arb(fmpq(x.numerator, x.denominator))
    if isinstance(x, int):
        return arb(fmpz(x))
    if isinstance(x, float):
        return arb(x)
    if isinstance(x, str):
        return _to_arb(Fraction(x))
    raise TypeError(f"cannot make a ball from {type(x).__name__}")


class CertifiedReal:
    """A real number known to lie in ``[midpoint - radius, midpoint + radius]``.

    Arithmetic runs at the larger precision of the operands. Ordering
    comparisons return a definite answer or raise ``UndecidedComparison``.
    """

    __slots__ = ("ball", "precision")

    def __init__(self, value, precision: int | None = None):
        precision = int(precision or ctx.prec)
        with working_precision(precision):
            self.ball = _to_arb(value) if not isinstance(value, arb) else value
            if not isinstance(value, (arb, CertifiedReal)):
                self.ball = +self.ball
        self.precision = precision

    @classmethod
    def from_interval(cls, lo: Fraction, hi: Fraction, precision: int) -> "CertifiedReal":
        lo, hi = Fraction(lo), Fraction(hi)
        if lo > hi:
            raise ValueError("empty interval")
        with working_precision(precision):
            a, b = arb(fmpq(lo.numerator, lo.denominator)), arb(fmpq(hi.numerator, hi.denominator))
            return cls(a.union(b), precision)

    # -- inspection -------------------------------------------------------
    @property
    def midpoint(self) -> Fraction:
        return _arf_to_fraction(self.ball.mid())

    @property
    def radius(self) -> Fraction:
        return _arf_to_fraction(self.ball.rad())

    @property
    def lower(self) -> Fraction:
        return self.midpoint - self.radius

    @property
    def upper(self) -> Fraction:
        return self.midpoint + self.radius

    def contains(self, x) -> bool:
        x = Fraction(x) if not isinstance(x, CertifiedReal) else x
        if isinstance(x, CertifiedReal):
            return self.lower <= x.lower and x.upper <= self.upper
        return self.lower <= x <= self.upper

    def overlaps(self, other) -> bool:
        o = other if isinstance(other, CertifiedReal) else CertifiedReal(other, self.precision)
        return not (self.upper < o.lower or o.upper < self.lower)

    def refine(self, other: "CertifiedReal") -> "CertifiedReal":
        """Intersection of two enclosures of the same number."""
        lo, hi = max(self.lower, other.lower), min(self.upper, other.upper)
        if lo > hi:
            raise ValueError("enclosures are disjoint; they cannot bound the same number")
        both = CertifiedReal.from_interval(lo, hi, max(self.precision, other.precision) + 32)
        return min((both, self, other), key=lambda c: c.radius)

    def __float__(self) -> float:
        return float(self.ball)

    def __repr__(self) -> str:
        return f"CertifiedReal({self.render()})"

    def render(self, digits: int = 20) -> str:
        """Decimal midpoint with an explicit ``±radius`` suffix."""
        mid = self.midpoint
        rad = self.radius
        mid_s = _sci(mid, digits)
        # the printed midpoint is rounded, so its rounding error joins the radius
        err = abs(Fraction(mid_s.replace("e", "E")) - mid) if mid else Fraction(0)
        return f"{mid_s}±{_sci(rad + err, 3, up=True)}"

    __str__ = render

    # -- arithmetic -------------------------------------------------------
    def _binary(self, other, op):
        if isinstance(other, CertifiedReal):
            prec = max(self.precision, other.precision)
        else:
            prec = self.precision
        with working_precision(prec):
            return CertifiedReal(op(self.ball, _to_arb(other)), prec)

    def __add__(self, o): return self._binary(o, lambda a, b: a + b)
    def __radd__(self, o): return self._binary(o, lambda a, b: b + a)
    def __sub__(self, o): return self._binary(o, lambda a, b: a - b)
    def __rsub__(self, o): return self._binary(o, lambda a, b: b - a)
    def __mul__(self, o): return self._binary(o, lambda a, b: a * b)
    def __rmul__(self, o): return self._binary(o, lambda a, b: b * a)

    def __truediv__(self, o):
        if isinstance(o, CertifiedReal) and o.ball.contains(0):
            raise UndecidedComparison("division by a ball containing zero")
        return self._binary(o, lambda a, b: a / b)

    def __rtruediv__(self, o):
        if self.ball.contains(0):
            raise UndecidedComparison("division by a ball containing zero")
        return self._binary(o, lambda a, b: b / a)

    def __neg__(self):
        return CertifiedReal(-self.ball, self.precision)

    def __abs__(self):
        with working_precision(self.precision):
            return CertifiedReal(abs(self.ball), self.precision)

    def __pow__(self, e: int):
        with working_precision(self.precision):
            return CertifiedReal(self.ball ** e, self.precision)

    def _unary(self, name):
        with working_precision(self.precision):
            return CertifiedReal(getattr(self.ball, name)(), self.precision)

    def log(self) -> "CertifiedReal":
        if not self.certainly_positive():
            raise UndecidedComparison("log of a ball not certainly positive")
        return self._unary("log")

    def exp(self): return self._unary("exp")
    def sqrt(self): return self._unary("sqrt")

    # -- comparisons ------------------------------------------------------
    def _cmp(self, other) -> int:
        o = other.ball if isinstance(other, CertifiedReal) else _to_arb(other)
        with working_precision(max(self.precision, getattr(other, "precision", 0))):
            if self.ball < o:
                return -1
            if self.ball > o:
                return 1
            if self.ball.is_exact() and o.is_exact() and self.ball == o:
                return 0
        raise UndecidedComparison(f"cannot order {self.render(8)} against {other}")

    def __lt__(self, o): return self._cmp(o) < 0
    def __le__(self, o): return self._cmp(o) <= 0
    def __gt__(self, o): return self._cmp(o) > 0
    def __ge__(self, o): return self._cmp(o) >= 0

    def certainly_positive(self) -> bool:
        return self.lower > 0

    def certainly_negative(self) -> bool:
        return self.upper < 0

    def floor_upper(self) -> int:
        """Largest integer <= the upper endpoint."""
        return math.floor(self.upper)

    def ceil_upper(self) -> int:
        return math.ceil(self.upper)

    def distance_to_integer(self) -> "CertifiedReal":
        """Enclosure of ``||x||``, the distance from x to the nearest integer."""
        lo, hi = self.lower, self.upper
        # ||.|| is 1-Lipschitz with slopes +-1, so the min and max over [lo, hi]
        # are attained at endpoints, integers, or half-integers.
        cands = [_dist(lo), _dist(hi)]
        if math.floor(lo) != math.floor(hi) or lo == math.floor(lo):
            cands.append(Fraction(0))
        if math.floor(lo - Fraction(1, 2)) != math.floor(hi - Fraction(1, 2)):
            cands.append(Fraction(1, 2))
        return CertifiedReal.from_interval(min(cands), max(cands), self.precision)


def _dist(x: Fraction) -> Fraction:
    return abs(x - round(x))


def _sci(x: Fraction, digits: int, up: bool = False) -> str:
    if x == 0:
        return "0"
    sign = "-" if x < 0 else ""
    x = abs(x)
    e = math.floor(math.log10(x.numerator) - math.log10(x.denominator))
    scaled = x / Fraction(10) ** (e - digits + 1)
    mant = math.ceil(scaled) if up else round(scaled)
    if mant >= 10**digits:
        mant, e = -(-mant // 10) if up else mant // 10, e + 1
    s = str(mant)
    body = s[0] + ("." + s[1:].rstrip("0") if s[1:].rstrip("0") else "")
    return f"{sign}{body}e{e}"


def with_escalation(fn: Callable[[int], object], start: int = DEFAULT_BITS,
                    limit: int = MAX_BITS):
    """Call ``fn(bits)``, doubling ``bits`` whenever it raises UndecidedComparison."""
    bits = start
    while True:
        try:
            return fn(bits)
        except UndecidedComparison as exc:
            if bits >= limit:
                raise PrecisionExhausted(f"undecided at {bits} bits: {exc}") from exc
            bits = min(2 * bits, limit)


class Computable:
    """A named real that can be enclosed at any requested precision."""

    def __init__(self, name: str, fn: Callable[[int], CertifiedReal]):
        self.name = name
        self._fn = fn
        self._cache: dict[int, CertifiedReal] = {}

    def at(self, bits: int) -> CertifiedReal:
        if bits not in self._cache:
            with working_precision(bits):
                val = self._fn(bits)
            self._cache[bits] = val
        return self._cache[bits]

    def __repr__(self):
        return f"Computable({self.name!r})"


def log_ratio(num: int | Fraction, den: int | Fraction, name: str | None = None) -> Computable:
    """``log(num) / log(den)`` for positive rationals."""
    def fn(bits):
        a = CertifiedReal(Fraction(num), bits + 16).log()
        b = CertifiedReal(Fraction(den), bits + 16).log()
        return a / b
    return Computable(name or f"log({num})/log({den})", fn)


# -- the characteristic polynomial ------------------------------------------

def psi(k: int, x: CertifiedReal) -> CertifiedReal:
    """Evaluate ``x^k - x^(k-1) - ... - x - 1`` on a ball."""
    one = CertifiedReal(1, x.precision)
    near_one = (abs(x - 1)).upper < Fraction(1, 8)
    if near_one:
        acc = one
        for _ in range(k - 1):
            acc = acc * x - 1
        return acc * x - 1
    return (x ** (k + 1) - 2 * x**k + 1) / (x - one)


def _g(k: int, x: CertifiedReal) -> CertifiedReal:
    # (x - 1) * psi_k(x); same sign as psi_k for x > 1.
    return x**k * (x - 2) + 1


@dataclass(frozen=True)
class DominantRoot:
    k: int
    alpha: CertifiedReal
    fk_alpha: CertifiedReal

    @property
    def precision(self) -> int:
        return self.alpha.precision


def fk(k: int, x: CertifiedReal) -> CertifiedReal:
    return (x - 1) / ((x - 2) * (k + 1) + 2)


@functools.lru_cache(maxsize=4096)
def dominant_root(k: int, target_precision: int = DEFAULT_BITS) -> DominantRoot:
    """Certify the root of Psi_k in ``(2(1 - 2^-k), 2)`` to radius <= 2^-target."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    work = target_precision + k + 64
    lo = 2 * (1 - Fraction(1, 2**k))
    hi = Fraction(2)

    def sign_at(x: Fraction, bits: int) -> int:
        v = _g(k, CertifiedReal(x, bits))
        if v.certainly_positive():
            return 1
        if v.certainly_negative():
            return -1
        raise UndecidedComparison(f"sign of Psi_{k} at {float(x)}")

    if not (sign_at(lo, work) < 0 < sign_at(hi, work)):
        raise ArithmeticError(f"Psi_{k} does not change sign on the expected bracket")

    # bisection until Newton is safely inside the basin
    for _ in range(24):
        mid = (lo + hi) / 2
        if sign_at(mid, work) < 0:
            lo = mid
        else:
            hi = mid
    # Newton with midpoint truncation; accuracy doubles per step
    x = (lo + hi) / 2
    schedule = []
    bits = work
    while bits > 48:
        schedule.append(bits)
        bits //= 2
    schedule = schedule[::-1] + [work, work]
    for bits in schedule:
        with working_precision(bits + 64):
            xb = arb(fmpq(x.numerator, x.denominator))
            gx = xb**k * (xb - 2) + 1
            dg = xb ** (k - 1) * ((k + 1) * xb - 2 * k)
            xb = xb - gx / dg
            x = _arf_to_fraction(xb.mid())
            x = Fraction(round(x * 2 ** (bits + 32)), 2 ** (bits + 32))
    rad = Fraction(1, 2 ** (target_precision + 1))
    a, b = x - rad, x + rad

    def verify(bits):
        if not (sign_at(a, bits) < 0 < sign_at(b, bits)):
            raise ArithmeticError(f"Newton iterate for k={k} failed verification")
        return True

    with_escalation(verify, start=work)
    # the bracket itself was verified above, so clip the ball to it
    a, b = max(a, 2 * (1 - Fraction(1, 2**k))), min(b, Fraction(2))
    alpha = CertifiedReal.from_interval(a, b, work)
    f = fk(k, alpha)
    try:
        above_half = f > Fraction(1, 2)
    except UndecidedComparison:
        # f_k(alpha) - 1/2 is about k 2^-(k+1); retry with a tighter root
        finer = max(2 * target_precision, k + 64)
        if finer > MAX_BITS:
            raise PrecisionExhausted(f"cannot separate f_k(alpha) from 1/2 for k={k}")
        above_half = dominant_root(k, finer).fk_alpha > Fraction(1, 2)
    if not above_half:
        raise ArithmeticError(f"f_k(alpha) <= 1/2 for k={k}")
    return DominantRoot(k, alpha, f)


def alpha_computable(k: int) -> Computable:
    return Computable(f"alpha({k})", lambda bits: dominant_root(k, bits).alpha)


def dd_error(k: int, n: int, precision: int | None = None) -> CertifiedReal:
    """``F_n^(k) - f_k(alpha) alpha^(n-1)`` as a certified real."""
    if k < 2 or n < 1:
        raise ValueError("need k >= 2 and n >= 1")
    bits = precision or max(DEFAULT_BITS, n + 128)
    root = dominant_root(k, bits)
    return CertifiedReal(kfib(k, n), root.precision) - root.fk_alpha * root.alpha ** (n - 1)


def zeta_expansion(k: int, n: int, precision: int = DEFAULT_BITS) -> CertifiedReal:
    """``F_n^(k) / 2^(n-2) - 1``, defined for ``2 <= n < 2^(k/2)``."""
    if n < 2:
        raise ValueError("the power-of-two expansion starts at n = 2")
    if n * n >= 2**k:
        raise ValueError(f"n = {n} is not below 2^(k/2) for k = {k}")
    exact = Fraction(kfib(k, n), 2 ** (n - 2)) - 1
    return CertifiedReal(exact, precision)


def zeta_bound(k: int, precision: int = DEFAULT_BITS) -> CertifiedReal:
    """``2 / 2^(k/2)``."""
    two = CertifiedReal(2, precision)
    return two / (two.sqrt() ** k)
