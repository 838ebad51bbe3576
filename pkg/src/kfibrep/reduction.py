"""Continued fractions of certified reals, the Dujella–Pethő reduction and the Legendre bound.

Partial quotients are certified by expanding both endpoints of an
enclosure in exact rational arithmetic and keeping the common prefix.
Every quotient emitted is therefore the true one for every number in the
enclosure, independent of the precision used to obtain it.
"""
from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

from flint import arb

from .realnum import (
    DEFAULT_BITS,
    MAX_BITS,
    CertifiedReal,
    Computable,
    PrecisionExhausted,
    working_precision,
)

log = logging.getLogger(__name__)

MAX_EXTRA_CONVERGENTS = 32


def certified_quotients(lo: Fraction, hi: Fraction) -> list[int]:
    """Partial quotients shared by every real in ``[lo, hi]``."""
    out = []
    while True:
        a, b = math.floor(lo), math.floor(hi)
        if a != b:
            return out
        out.append(a)
        lo, hi = lo - a, hi - a
        if lo == 0:
            # an irrational number strictly above a can still have quotient a,
            # but the next quotient is unbounded: stop here
            return out
        lo, hi = 1 / hi, 1 / lo


class ContinuedFraction:
    """Certified partial quotients ``a_i`` and convergents ``p_i / q_i``.

    Indices follow the usual convention: ``p_0 / q_0 = a_0 / 1``.
    """

    def __init__(self, source: Computable | CertifiedReal, precision: int = DEFAULT_BITS,
                 max_precision: int = MAX_BITS):
        if isinstance(source, CertifiedReal):
            fixed = source
            source = Computable(repr(source), lambda bits: fixed)
            max_precision = fixed.precision
            precision = fixed.precision
        self.source = source
        self.precision = precision
        self.max_precision = max_precision
        self.quotients: list[int] = []
        self.p: list[int] = []
        self.q: list[int] = []
        self._expand_at(precision)

    @property
    def name(self) -> str:
        return self.source.name

    @property
    def convergents(self) -> list[tuple[int, int]]:
        return list(zip(self.p, self.q))

    def _expand_at(self, bits: int) -> None:
        x = self.source.at(bits)
        quots = certified_quotients(x.lower, x.upper)
        if quots[: len(self.quotients)] != self.quotients:
            raise ArithmeticError(f"quotients of {self.name} changed between precisions")
        self.precision = bits
        self._set_quotients(quots)

    def _set_quotients(self, quots: list[int]) -> None:
        for a in quots[len(self.quotients):]:
            if self.p:
                p1, q1 = self.p[-1], self.q[-1]
                p2, q2 = (self.p[-2], self.q[-2]) if len(self.p) > 1 else (1, 0)
            else:
                p1, q1, p2, q2 = 1, 0, 0, 1
            self.p.append(a * p1 + p2)
            self.q.append(a * q1 + q2)
            self.quotients.append(a)

    def extend(self, count: int) -> "ContinuedFraction":
        """Make sure at least ``count`` quotients are certified."""
        while len(self.quotients) < count:
            if self.precision >= self.max_precision:
                raise PrecisionExhausted(
                    f"{self.name}: only {len(self.quotients)} quotients at {self.precision} bits")
            self._expand_at(min(2 * self.precision, self.max_precision))
        return self

    def extend_beyond(self, bound: int) -> "ContinuedFraction":
        """Make sure some certified convergent has ``q_i > bound``."""
        while not self.q or self.q[-1] <= bound:
            need = len(self.quotients) + 1
            self.extend(need)
        return self

    def __len__(self) -> int:
        return len(self.quotients)


def cf_expand(gamma: Computable | CertifiedReal, count: int,
              precision: int = DEFAULT_BITS) -> ContinuedFraction:
    return ContinuedFraction(gamma, precision).extend(count)


def first_convergent_beyond(cf: ContinuedFraction, bound: int) -> tuple[int, int, int]:
    """Least ``i`` with ``q_i > bound``, returned as ``(i, p_i, q_i)``."""
    cf.extend_beyond(bound)
    for i, q in enumerate(cf.q):
        if q > bound:
            return i, cf.p[i], q
    raise AssertionError("unreachable")


# -- Dujella-Petho style reduction ---------------------------------------------

@dataclass(frozen=True)
class ReducedBound:
    """No solution has ``w >= w_bound``; ``w_max`` is its integer ceiling."""

    w_bound: CertifiedReal
    w_max: int
    q_used: int
    index: int
    epsilon: CertifiedReal

    @property
    def w_survivor(self) -> int:
        """Largest integer ``w`` the reduction does not exclude."""
        return self.w_max - 1

    def record(self) -> dict:
        return {"outcome": "reduced", "w_bound": float(self.w_bound.upper),
                "w_max": self.w_max, "q_used": str(self.q_used), "index": self.index,
                "epsilon": self.epsilon.render(12)}


@dataclass(frozen=True)
class EpsilonNonpositive:
    q_tried: tuple[int, ...]
    indices: tuple[int, ...]
    epsilons: tuple[str, ...]

    def record(self) -> dict:
        return {"outcome": "epsilon_nonpositive", "q_used": str(self.q_tried[0]),
                "indices": list(self.indices), "epsilon": list(self.epsilons)}


@dataclass(frozen=True)
class Inconclusive:
    reason: str

    def record(self) -> dict:
        return {"outcome": "inconclusive", "reason": self.reason}


Outcome = ReducedBound | EpsilonNonpositive | Inconclusive


@dataclass
class ReductionInstance:
    """Data for excluding ``0 < |r gamma - s + mu| < A B^-w`` with ``r <= M``."""

    gamma: Computable
    mu: Computable
    A: Fraction
    B: Computable
    M: int
    label: str = ""
    outcome: Outcome | None = field(default=None, compare=False)

    def __post_init__(self):
        self.A = Fraction(self.A)
        if self.A <= 0:
            raise ValueError("A must be positive")
        if self.M < 1:
            raise ValueError("M must be a positive integer")
        if isinstance(self.B, (int, Fraction)):
            b = Fraction(self.B)
            if b <= 1:
                raise ValueError("B must exceed 1")
            self.B = Computable(str(b), lambda bits: CertifiedReal(b, bits))


def _bits_for(q: int) -> int:
    return 2 * q.bit_length() + 64


def epsilon(mu: CertifiedReal, gamma: CertifiedReal, q: int, M: int) -> CertifiedReal:
    """``||mu q|| - M ||gamma q||`` as an enclosure."""
    return (mu * q).distance_to_integer() - (gamma * q).distance_to_integer() * M


def w_bound_from(A: Fraction, q: int, eps: CertifiedReal, B: CertifiedReal) -> CertifiedReal:
    """``log(A q / eps) / log B``."""
    return (CertifiedReal(A * q, eps.precision) / eps).log() / B.log()


def dujella_petho(inst: ReductionInstance, cf: ContinuedFraction | None = None,
                  max_extra: int = MAX_EXTRA_CONVERGENTS,
                  max_bits: int = MAX_BITS) -> Outcome:
    """Walk convergents with ``q > 6M`` until ``epsilon`` is certified positive."""
    if cf is None:
        cf = ContinuedFraction(inst.gamma)
    i0, _, _ = first_convergent_beyond(cf, 6 * inst.M)
    tried, indices, eps_seen = [], [], []
    for i in range(i0, i0 + max_extra + 1):
        cf.extend(i + 1)
        q = cf.q[i]
        bits = _bits_for(q)
        while True:
            mu, gamma = inst.mu.at(bits), inst.gamma.at(bits)
            eps = epsilon(mu, gamma, q, inst.M)
            if eps.certainly_positive() or eps.upper <= 0:
                break
            if bits >= max_bits:
                inst.outcome = Inconclusive(
                    f"sign of epsilon undecided at {bits} bits for q index {i}")
                return inst.outcome
            bits = min(2 * bits, max_bits)
        if eps.certainly_positive():
            B = inst.B.at(bits)
            wb = w_bound_from(inst.A, q, eps, B)
            inst.outcome = ReducedBound(wb, math.ceil(wb.upper), q, i, eps)
            return inst.outcome
        tried.append(q)
        indices.append(i)
        eps_seen.append(eps.render(6))
    inst.outcome = EpsilonNonpositive(tuple(tried), tuple(indices), tuple(eps_seen))
    return inst.outcome


# -- many shifts against one gamma ---------------------------------------------

def _dist_arb(x: arb) -> arb:
    n = (arb(x.mid()) + arb(0.5)).floor()
    return abs(x - n).min(abs(x - n - 1)).min(abs(x - n + 1))


@dataclass
class BatchResult:
    """Aggregate of many reductions sharing gamma, A, B and M."""

    count: int = 0
    worst_key: object = None
    worst: ReducedBound | None = None
    failures: dict = field(default_factory=dict)
    walked: dict = field(default_factory=dict)

    def absorb(self, key, outcome: Outcome) -> None:
        self.count += 1
        if not isinstance(outcome, ReducedBound):
            self.failures[key] = outcome
            return
        if self.worst is None or outcome.w_bound.upper > self.worst.w_bound.upper:
            self.worst_key, self.worst = key, outcome

    @property
    def ok(self) -> bool:
        return not self.failures and self.worst is not None


def reduce_many(gamma: Computable, mu_of: Callable[[object, int], CertifiedReal], keys,
                A: Fraction, B: Computable, M: int, cf: ContinuedFraction | None = None,
                walk: int = MAX_EXTRA_CONVERGENTS, precision: int = DEFAULT_BITS) -> BatchResult:
    """Reduce ``|r gamma - s + mu(key)| < A B^-w`` for every key.

    Keys walk the convergents beyond 6M together on raw balls; at each
    convergent only the smallest certified epsilon matters for the bound.
    Keys still open after ``walk`` extra convergents are handed to
    ``dujella_petho`` so that their failure is diagnosed the usual way.
    """
    if cf is None:
        cf = ContinuedFraction(gamma)
    i0, _, _ = first_convergent_beyond(cf, 6 * M)
    res = BatchResult()
    pending = list(keys)
    for i in range(i0, i0 + walk + 1):
        if not pending:
            break
        cf.extend(i + 1)
        q = cf.q[i]
        bits = max(_bits_for(q), precision)
        g = gamma.at(bits)
        still, min_eps, min_key = [], None, None
        with working_precision(bits):
            dg = _dist_arb(g.ball * q)
            for key in pending:
                eps = _dist_arb(mu_of(key, bits).ball * q) - dg * M
                if eps > 0:
                    res.count += 1
                    if i > i0:
                        res.walked[key] = i
                    if min_eps is None or eps.lower() < min_eps.lower():
                        min_eps, min_key = eps, key
                else:
                    still.append(key)
        pending = still
        if min_eps is not None:
            eps = CertifiedReal(min_eps, bits)
            wb = w_bound_from(Fraction(A), q, eps, B.at(bits))
            cand = ReducedBound(wb, math.ceil(wb.upper), q, i, eps)
            if res.worst is None or cand.w_bound.upper > res.worst.w_bound.upper:
                res.worst_key, res.worst = min_key, cand
    for key in pending:
        inst = ReductionInstance(gamma, Computable(f"mu{key}", lambda b, key=key: mu_of(key, b)),
                                 A, B, M)
        res.absorb(key, dujella_petho(inst, cf, max_extra=walk))
    return res


# -- degenerate shifts ---------------------------------------------------------

def two_five_exponents(x: Fraction) -> tuple[int, int] | None:
    """Return ``(a, b)`` with ``x = 2^a 5^b``, or None if other primes occur."""
    x = Fraction(x)
    if x <= 0:
        return None
    exps = []
    for prime in (2, 5):
        e = 0
        num, den = x.numerator, x.denominator
        while num % prime == 0:
            num //= prime
            e += 1
        while den % prime == 0:
            den //= prime
            e -= 1
        exps.append(e)
        x = Fraction(num, den)
    return tuple(exps) if x == 1 else None


def integer_shift_in_log2_base(c: int, x: Fraction) -> tuple[int, int] | None:
    """Write ``c + log(x)/log 2 = c0 + c1 log(10)/log(2)`` with integers, if possible.

    With ``x = 2^a 5^b`` one gets ``c0 = c + a - b`` and ``c1 = b``.
    """
    e = two_five_exponents(x)
    if e is None:
        return None
    a, b = e
    return c + a - b, b


# -- Legendre-type lower bound ---------------------------------------------------

@dataclass(frozen=True)
class LegendreBound:
    N: int
    a_M: int
    index_of_max: int

    @property
    def denom_factor(self) -> int:
        return self.a_M + 2


def legendre_lower(cf: ContinuedFraction, M: int) -> LegendreBound:
    """For ``0 < x < M``: ``|x gamma - y| > 1 / ((a_M + 2) x)``."""
    if M < 1:
        raise ValueError("M must be positive")
    i, _, _ = first_convergent_beyond(cf, M)
    N = i - 1
    # q_0 = 1 <= M always, so N >= 0
    window = cf.quotients[: N + 2]
    a_M = max(window)
    return LegendreBound(N, a_M, window.index(a_M))


def legendre_exponent_bound(A: Fraction, factor: int, M: int,
                            B: CertifiedReal) -> CertifiedReal:
    """Upper bound on ``w`` from ``1/(factor x) < |x gamma - y| < A B^-w`` and ``x < M``."""
    return CertifiedReal(Fraction(A) * factor * M, B.precision).log() / B.log()


# -- disk cache ------------------------------------------------------------------

class CFCache:
    """Persist certified quotients keyed by the source name and precision."""

    def __init__(self, directory: str | os.PathLike):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)

    def _path(self, name: str) -> Path:
        safe = "".join(c if c.isalnum() or c in "._-" else "_" for c in name)
        return self.dir / f"cf_{safe}.json"

    def load(self, source: Computable) -> ContinuedFraction | None:
        path = self._path(source.name)
        if not path.exists():
            return None
        data = json.loads(path.read_text())
        if data["name"] != source.name:
            return None
        cf = ContinuedFraction.__new__(ContinuedFraction)
        cf.source = source
        cf.precision = data["precision"]
        cf.max_precision = MAX_BITS
        cf.quotients, cf.p, cf.q = [], [], []
        cf._set_quotients([int(a) for a in data["quotients"]])
        return cf

    def store(self, cf: ContinuedFraction) -> Path:
        path = self._path(cf.name)
        path.write_text(json.dumps({"name": cf.name, "precision": cf.precision,
                                    "quotients": [str(a) for a in cf.quotients]}))
        return path

    def get(self, source: Computable, bound: int = 0) -> ContinuedFraction:
        cf = self.load(source)
        if cf is None:
            cf = ContinuedFraction(source)
        have = len(cf)
        cf.extend_beyond(bound)
        if len(cf) != have or not self._path(cf.name).exists():
            self.store(cf)
        return cf
