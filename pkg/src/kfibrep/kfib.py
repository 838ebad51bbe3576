"""Exact k-Fibonacci numbers and two-block repdigit recognition.

The k-Fibonacci sequence is seeded with ``F_i = 0`` for ``i = 2-k, ..., 0``
and ``F_1 = 1``; every later term is the sum of the preceding ``k`` terms.
A number is a concatenation of two repdigits when its decimal string is
``d1`` repeated ``m`` times followed by ``d2`` repeated ``ell`` times.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
from collections import deque
from dataclasses import asdict, dataclass, field
from typing import Iterable, Iterator


def _check_k(k: int) -> None:
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")


class KFibWindow:
    """Sliding window over the k-Fibonacci sequence.

    Holds the last ``k + 1`` terms so that ``F_{n+1} = 2 F_n - F_{n-k}``
    costs two big-integer operations regardless of ``k``.
    """

    def __init__(self, k: int, check: bool = True):
        _check_k(k)
        self.k = k
        self.check = check
        # F_{2-k}, ..., F_2; the doubling step is only valid from n = 2 on.
        self.window: deque[int] = deque([0] * (k - 1) + [1, 1], maxlen=k + 1)
        self.index = 2

    @property
    def value(self) -> int:
        return self.window[-1]

    def advance(self) -> int:
        oldest = self.window[0]
        nxt = 2 * self.window[-1] - oldest
        self.window.append(nxt)
        self.index += 1
        if self.check:
            self._check_growth(self.index, nxt)
        return nxt

    def _check_growth(self, n: int, value: int) -> None:
        if 2 <= n <= self.k + 1:
            if value != 1 << (n - 2):
                raise AssertionError(f"F_{n}^({self.k}) = {value} is not 2^{n - 2}")
        elif n >= self.k + 2 and value.bit_length() > n - 2:
            raise AssertionError(f"F_{n}^({self.k}) = {value} is not below 2^{n - 2}")


def kfib_stream(k: int, start: int = 1, check: bool = True) -> Iterator[tuple[int, int]]:
    """Yield ``(n, F_n^(k))`` for ``n = start, start + 1, ...`` forever."""
    _check_k(k)
    if start < 2 - k:
        raise ValueError(f"index {start} is below the seed range 2-k = {2 - k}")
    for n in range(start, 1):
        yield n, 0
    win = KFibWindow(k, check=check)
    if start <= 1:
        yield 1, 1
    if start <= 2:
        yield 2, 1
    while True:
        value = win.advance()
        if win.index >= start:
            yield win.index, value


def kfib(k: int, n: int) -> int:
    """Return F_n^(k) exactly."""
    _check_k(k)
    if n < 2 - k:
        raise ValueError(f"index {n} is below the seed range 2-k = {2 - k}")
    if n <= 0:
        return 0
    if n <= k + 1:
        return 1 if n == 1 else 1 << (n - 2)
    win = KFibWindow(k, check=False)
    while win.index < n:
        win.advance()
    return win.value


@dataclass(frozen=True, order=True)
class TwoBlockDecomposition:
    d1: int
    d2: int
    m: int
    ell: int

    def __post_init__(self):
        if not 1 <= self.d1 <= 9 or not 0 <= self.d2 <= 9:
            raise ValueError(f"bad digits d1={self.d1}, d2={self.d2}")
        if self.m < 1 or self.ell < 1:
            raise ValueError(f"block lengths must be >= 1, got m={self.m}, ell={self.ell}")

    @property
    def value(self) -> int:
        num = self.d1 * 10 ** (self.m + self.ell) - (self.d1 - self.d2) * 10**self.ell - self.d2
        q, r = divmod(num, 9)
        assert r == 0
        return q

    def digits(self) -> str:
        return str(self.d1) * self.m + str(self.d2) * self.ell


def digit_runs(s: str) -> list[tuple[str, int]]:
    return [(ch, len(list(grp))) for ch, grp in itertools.groupby(s)]


def two_block_decompose(N: int) -> set[TwoBlockDecomposition]:
    """All ways of writing ``N`` as d1...d1 d2...d2 with both blocks nonempty."""
    if N < 10:
        raise ValueError(f"need at least two digits, got {N}")
    runs = digit_runs(str(N))
    if len(runs) == 1:
        (ch, length), = runs
        d = int(ch)
        return {TwoBlockDecomposition(d, d, m, length - m) for m in range(1, length)}
    if len(runs) == 2:
        (c1, m), (c2, ell) = runs
        return {TwoBlockDecomposition(int(c1), int(c2), m, ell)}
    return set()


def canonical_decomposition(N: int) -> TwoBlockDecomposition | None:
    """The decomposition with the longest leading block, or None."""
    found = two_block_decompose(N) if N >= 10 else set()
    return max(found, key=lambda t: t.m) if found else None


@dataclass(frozen=True, order=True)
class Solution:
    k: int
    n: int
    decomposition: TwoBlockDecomposition = field(compare=False)

    def __post_init__(self):
        if self.k < 2 or self.n < 1:
            raise ValueError(f"invalid solution indices k={self.k}, n={self.n}")

    @property
    def value(self) -> int:
        return self.decomposition.value

    def verify(self) -> bool:
        """Recheck the defining identity with exact integers."""
        d = self.decomposition
        lhs = 9 * kfib(self.k, self.n)
        rhs = d.d1 * 10 ** (d.m + d.ell) - (d.d1 - d.d2) * 10**d.ell - d.d2
        return lhs == rhs

    def row(self) -> dict:
        d = self.decomposition
        return {"k": self.k, "n": self.n, "value": self.value,
                "d1": d.d1, "d2": d.d2, "m": d.m, "ell": d.ell}


@dataclass(frozen=True)
class Family:
    """``F_n^(k) = value`` for every ``k >= k_min``."""

    value: int
    n: int
    k_min: int

    def instances(self, k_max: int) -> list[Solution]:
        dec = canonical_decomposition(self.value)
        return [Solution(k, self.n, dec) for k in range(self.k_min, k_max + 1)]


@dataclass
class SmallNResult:
    families: list[Family]
    instances: list[Solution]
    diagnostics: dict


def _two_adic(x: int) -> int:
    return (x & -x).bit_length() - 1


def solve_small_n(k_probe: int = 10) -> SmallNResult:
    """Solve the equation in the range ``2 <= n <= k + 1`` where F_n = 2^(n-2).

    The 2-adic valuation of ``d2`` caps ``ell``; the window that
    ``d1 10^(m+ell) - 9 2^(n-2)`` must lie in caps ``m + ell``; the residual
    digit tuples are then searched exhaustively.
    """
    # d2 = 0 would force 5 | 9 * 2^(n-2); otherwise nu_2(d2) bounds ell.
    ell_bound = max(_two_adic(d2) for d2 in range(1, 10))
    window = [(d1 - d2) * 10**ell + d2
              for d1 in range(1, 10) for d2 in range(10) for ell in range(1, ell_bound + 1)]
    lo, hi = min(window), max(window)
    # The difference is nonzero and divisible by 2^min(m+ell, n-2).
    ml_bound = max(abs(lo), hi).bit_length() - 1

    powers = {}
    for d1 in range(1, 10):
        for d2 in range(10):
            for ell in range(1, ell_bound + 1):
                for m in range(1, ml_bound - ell + 1):
                    v = TwoBlockDecomposition(d1, d2, m, ell).value
                    if v & (v - 1) == 0:
                        powers.setdefault(v, set()).add(TwoBlockDecomposition(d1, d2, m, ell))
    families = []
    for v in sorted(powers):
        n = v.bit_length() + 1
        # 2^(n-2) = F_n^(k) needs n <= k + 1.
        families.append(Family(value=v, n=n, k_min=max(2, n - 1)))
    instances = sorted(s for fam in families for s in fam.instances(k_probe))
    diagnostics = {
        "ell_bound": ell_bound,
        "window": [lo, hi],
        "m_plus_ell_bound": ml_bound,
        "powers_of_two_found": sorted(powers),
    }
    return SmallNResult(families, instances, diagnostics)


def solutions_for_k(k: int, n_max: int, n_min: int = 1) -> list[Solution]:
    out = []
    for n, value in kfib_stream(k, start=max(1, n_min)):
        if n > n_max:
            break
        if value >= 10:
            dec = canonical_decomposition(value)
            if dec is not None:
                out.append(Solution(k, n, dec))
    return out


def enumerate_solutions(k_range: Iterable[int], n_max: int, n_min: int = 1,
                        jobs: int = 1) -> list[Solution]:
    """Brute-force sweep of F_n^(k) for k in ``k_range`` and ``n_min <= n <= n_max``."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    ks = sorted(set(k_range))
    if jobs > 1 and len(ks) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = pool.map(solutions_for_k, ks, itertools.repeat(n_max),
                              itertools.repeat(n_min))
            return [s for chunk in chunks for s in chunk]
    return [s for k in ks for s in solutions_for_k(k, n_max, n_min)]


CSV_FIELDS = ["k", "n", "value", "d1", "d2", "m", "ell"]


def solutions_to_csv(solutions: Iterable[Solution]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for s in solutions:
        w.writerow(s.row())
    return buf.getvalue()


def solutions_from_csv(text: str) -> list[Solution]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        dec = TwoBlockDecomposition(int(row["d1"]), int(row["d2"]), int(row["m"]), int(row["ell"]))
        sol = Solution(int(row["k"]), int(row["n"]), dec)
        if sol.value != int(row["value"]):
            raise ValueError(f"row {row} is inconsistent")
        out.append(sol)
    return out


def solutions_to_json(solutions: Iterable[Solution]) -> str:
    return json.dumps([s.row() for s in solutions], indent=1)


def family_record(fam: Family) -> dict:
    return asdict(fam)
