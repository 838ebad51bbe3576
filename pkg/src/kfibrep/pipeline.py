"""End-to-end orchestration of the bound chain and the final enumeration.

Each stage is a pure function of its inputs.  The ``ProofLedger`` times
it, writes one JSON file per stage into the run directory and, on resume,
reuses a stored stage when its inputs are unchanged.  Stage outputs carry
a list of checks (a derived bound against the constant it must not
exceed); a failed check raises ``MathematicalMismatch`` after the stage
has been written to disk, so the evidence survives the failure.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable

from .kfib import (
    Family,
    Solution,
    enumerate_solutions,
    solutions_to_csv,
    solve_small_n,
)
from .linforms import (
    LOG2,
    LOG10,
    C,
    StageBound,
    ml_bound_for_k,
    stage_bounds_large_k,
    stage_bounds_small_k,
    strict_int_bound,
)
from .realnum import DEFAULT_BITS, CertifiedReal, Computable, dominant_root
from .reduction import (
    BatchResult,
    CFCache,
    ContinuedFraction,
    integer_shift_in_log2_base,
    legendre_exponent_bound,
    legendre_lower,
    reduce_many,
)

log = logging.getLogger(__name__)

KNOWN_SOLUTIONS: list[tuple[int, int, int]] = [
    (2, 7, 13), (2, 8, 21), (2, 9, 34), (2, 10, 55), (2, 11, 89), (2, 12, 144),
    (2, 13, 233), (2, 14, 377), (3, 6, 13), (3, 7, 24), (3, 8, 44), (3, 9, 81),
    (4, 6, 15), (4, 7, 29), (4, 8, 56), (4, 12, 773), (5, 7, 31), (5, 8, 61),
    (6, 8, 63), (7, 13, 2000), (8, 10, 255), (9, 11, 511),
]
KNOWN_FAMILIES: list[Family] = [Family(16, 6, 5), Family(32, 7, 6), Family(64, 8, 7)]

# Constants the chain must reach; a derived value above one of these is a mismatch.
SMALL_K_ROUND1_CAP = 151
SMALL_K_ROUND2_CAP = 501
SMALL_K_M_SWEEP = 150
SMALL_K_N_SWEEP = 500
ROUND_A_M = "1.5e282"
ROUND_B_M = "1.6e59"


class MathematicalMismatch(Exception):
    """A computed bound exceeded the value the argument relies on."""

    def __init__(self, stage: str, failures: list[dict]):
        self.stage = stage
        self.failures = failures
        lines = "; ".join(f"{f['name']}: derived {f['derived']} > claimed {f['claimed']}"
                          for f in failures)
        super().__init__(f"stage {stage}: {lines}")


@dataclass
class RunConfig:
    k_min: int = 4
    k_max: int = 50
    n_max: int = SMALL_K_N_SWEEP
    enum_k_max: int = 500
    precision_bits: int = DEFAULT_BITS
    jobs: int = 1
    out_dir: Path | None = None
    resume: bool = False
    walk: int = 128
    round2: bool = True
    figures: bool = True

    def __post_init__(self):
        if self.out_dir is not None:
            self.out_dir = Path(self.out_dir)
        if not 4 <= self.k_min <= self.k_max <= 500:
            raise ValueError(f"small-k range [{self.k_min}, {self.k_max}] must lie in [4, 500]")
        if self.n_max < 5 or self.enum_k_max < 2:
            raise ValueError("caps must allow n >= 5 and k >= 2")
        if self.jobs < 1 or self.walk < 0 or self.precision_bits < 64:
            raise ValueError("jobs >= 1, walk >= 0 and precision_bits >= 64 required")

    def record(self) -> dict:
        d = asdict(self)
        d["out_dir"] = None if self.out_dir is None else str(self.out_dir)
        return d


# -- ledger ------------------------------------------------------------------------

@dataclass
class StageRecord:
    stage: str
    anchor: str
    inputs: dict
    outputs: dict
    precision_bits: int
    wall_ms: int
    resumed: bool = field(default=False, compare=False)

    def to_json(self) -> dict:
        return {"stage": self.stage, "anchor": self.anchor, "inputs": self.inputs,
                "outputs": self.outputs, "precision_bits": self.precision_bits,
                "wall_ms": self.wall_ms}

    @property
    def failures(self) -> list[dict]:
        return [c for c in self.outputs.get("checks", []) if not c["holds"]]


def _canon(obj) -> str:
    return json.dumps(obj, sort_keys=True, default=str)


class ProofLedger:
    """Ordered stage records, mirrored to ``<out_dir>/stages/<stage>.json``."""

    def __init__(self, out_dir: Path | None = None, resume: bool = False):
        self.out_dir = None if out_dir is None else Path(out_dir)
        self.resume = resume
        self.stages: list[StageRecord] = []
        if self.out_dir is not None:
            (self.out_dir / "stages").mkdir(parents=True, exist_ok=True)

    def __getitem__(self, stage: str) -> StageRecord:
        for rec in self.stages:
            if rec.stage == stage:
                return rec
        raise KeyError(stage)

    def __contains__(self, stage: str) -> bool:
        return any(rec.stage == stage for rec in self.stages)

    def _path(self, stage: str) -> Path | None:
        return None if self.out_dir is None else self.out_dir / "stages" / f"{stage}.json"

    def _load(self, stage: str, inputs: dict) -> StageRecord | None:
        path = self._path(stage)
        if not (self.resume and path is not None and path.exists()):
            return None
        data = json.loads(path.read_text())
        if _canon(data["inputs"]) != _canon(inputs):
            return None
        return StageRecord(**data, resumed=True)

    def run(self, stage: str, anchor: str, inputs: dict, fn: Callable[[], dict],
            precision_bits: int = DEFAULT_BITS) -> dict:
        """Compute (or reload) a stage, persist it, and enforce its checks."""
        inputs = json.loads(_canon(inputs))
        rec = self._load(stage, inputs)
        if rec is None:
            t0 = time.perf_counter()
            outputs = json.loads(_canon(fn()))
            wall = int(round(1000 * (time.perf_counter() - t0)))
            rec = StageRecord(stage, anchor, inputs, outputs, precision_bits, wall)
            path = self._path(stage)
            if path is not None:
                path.write_text(json.dumps(rec.to_json(), indent=1, sort_keys=True) + "\n")
        else:
            log.info("stage %s reloaded from disk", stage)
        self.stages = [r for r in self.stages if r.stage != stage] + [rec]
        if rec.failures:
            raise MathematicalMismatch(stage, rec.failures)
        return rec.outputs

    def stored_shard(self, stage: str, key: str, inputs: dict) -> dict | None:
        if not self.resume or self.out_dir is None:
            return None
        path = self.out_dir / "shards" / stage / f"{key}.json"
        if not path.exists():
            return None
        data = json.loads(path.read_text())
        return data["outputs"] if _canon(data["inputs"]) == _canon(inputs) else None

    def shard(self, stage: str, key: str, inputs: dict, fn: Callable[[], dict]) -> dict:
        """Resumable sub-unit of a stage (one k, for instance)."""
        stored = self.stored_shard(stage, key, inputs)
        if stored is not None:
            return stored
        if self.out_dir is None:
            return json.loads(_canon(fn()))
        path = self.out_dir / "shards" / stage / f"{key}.json"
        inputs = json.loads(_canon(inputs))
        outputs = json.loads(_canon(fn()))
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps({"inputs": inputs, "outputs": outputs}, sort_keys=True))
        return outputs

    def summary_rows(self) -> list[dict]:
        return [{"stage": r.stage, "anchor": r.anchor, "checks": len(r.outputs.get("checks", [])),
                 "failed": len(r.failures), "precision_bits": r.precision_bits,
                 "wall_ms": r.wall_ms, "resumed": r.resumed} for r in self.stages]

    def write_summary(self) -> Path | None:
        if self.out_dir is None:
            return None
        path = self.out_dir / "ledger.csv"
        rows = self.summary_rows()
        with path.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["stage", "anchor", "checks", "failed",
                                               "precision_bits", "wall_ms", "resumed"])
            w.writeheader()
            w.writerows(rows)
        checks = [dict(stage=r.stage, **c) for r in self.stages for c in r.outputs.get("checks", [])]
        with (self.out_dir / "checks.csv").open("w", newline="") as fh:
            fields = ["stage", "name", "formula", "claimed", "derived", "value", "holds", "notes"]
            w = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
            w.writeheader()
            w.writerows(checks)
        return path


def check(name: str, formula: str, claimed, derived, value=None, notes: str = "") -> dict:
    """A ``StageBound`` record for a derived value against its cap."""
    as_real = lambda v: v if isinstance(v, CertifiedReal) else CertifiedReal(Fraction(v), DEFAULT_BITS)
    return StageBound(name, formula, {}, as_real(claimed), as_real(derived),
                      value=value, notes=notes).record()


# -- expected solution set -----------------------------------------------------------

def expected_solutions(k_range: Iterable[int], n_min: int, n_max: int) -> set[tuple[int, int, int]]:
    ks = set(k_range)
    out = {(k, n, v) for k, n, v in KNOWN_SOLUTIONS if k in ks and n_min <= n <= n_max}
    for fam in KNOWN_FAMILIES:
        if n_min <= fam.n <= n_max:
            out |= {(k, fam.n, fam.value) for k in ks if k >= fam.k_min}
    return out


def compare_solutions(found: Iterable[Solution], expected: set) -> dict:
    got = {(s.k, s.n, s.value) for s in found}
    bad = [s for s in found if not s.verify()]
    return {"found": len(got), "expected": len(expected),
            "missing": sorted(expected - got), "extra": sorted(got - expected),
            "identity_failures": [(s.k, s.n) for s in bad]}


def _solution_check(name: str, cmp: dict) -> dict:
    miss, extra, bad = len(cmp["missing"]), len(cmp["extra"]), len(cmp["identity_failures"])
    return {"name": name, "formula": "found solution set equals the expected table",
            "claimed": "0", "derived": str(miss + extra + bad), "value": None,
            "holds": miss + extra + bad == 0,
            "notes": f"missing={cmp['missing'][:10]} extra={cmp['extra'][:10]}"}


# -- small k -------------------------------------------------------------------------

def _root(k: int, bits: int):
    return dominant_root(k, bits + 16)


def _small_k_gammas(k: int):
    g1 = Computable(f"log_alpha{k}_over_log10",
                    lambda b: _root(k, b).alpha.log() / CertifiedReal(10, b + 16).log())
    g2 = Computable(f"log10_over_log_alpha{k}",
                    lambda b: CertifiedReal(10, b + 16).log() / _root(k, b).alpha.log())
    alpha = Computable(f"alpha{k}", lambda b: _root(k, b).alpha)
    return g1, g2, alpha


def _batch_record(res: BatchResult) -> dict:
    return {"reductions": res.count,
            "w_bound": None if res.worst is None else float(res.worst.w_bound.upper),
            "w_bound_exact_upper": None if res.worst is None else str(res.worst.w_bound.upper),
            "worst_key": res.worst_key,
            "worst_index": None if res.worst is None else res.worst.index,
            "walked": len(res.walked),
            "max_walk_index": max(res.walked.values(), default=None),
            "failures": {str(k): v.record() for k, v in res.failures.items()}}


def small_k_round1(k: int, walk: int = 128, precision: int = DEFAULT_BITS) -> dict:
    """``|(n-1) gamma - (m+ell) + mu| < 10 * 10^-m`` with gamma = log alpha / log 10."""
    bounds = stage_bounds_small_k(k)
    M = bounds.M_first
    g1, _, _ = _small_k_gammas(k)

    def mu_of(d1, bits):
        r = _root(k, bits)
        return (r.fk_alpha * Fraction(9, d1)).log() / CertifiedReal(10, bits + 16).log()

    ten = Computable("10", lambda b: CertifiedReal(10, b))
    res = reduce_many(g1, mu_of, range(1, 10), 10, ten, M, walk=walk, precision=precision)
    out = _batch_record(res)
    out.update(k=k, M=str(M), chain=[s.record() for s in bounds.stages])
    return out


def small_k_round2(k: int, m_max: int, walk: int = 128, precision: int = DEFAULT_BITS) -> dict:
    """``|ell gamma - n + mu| < 21 alpha^-n`` with gamma = log 10 / log alpha."""
    M = stage_bounds_small_k(k).M_second
    _, g2, alpha = _small_k_gammas(k)
    cache: dict[int, tuple[CertifiedReal, CertifiedReal]] = {}

    def mu_of(key, bits):
        if bits not in cache:
            r = _root(k, bits)
            cache[bits] = (r.alpha.log(), (r.fk_alpha * 9).log())
        la, L = cache[bits]
        d1, d2, m = key
        N = d1 * 10**m - (d1 - d2)
        return (CertifiedReal(N, bits + 16).log() - L) / la + 1

    keys = [(d1, d2, m) for d1 in range(1, 10) for d2 in range(10) for m in range(1, m_max + 1)]
    res = reduce_many(g2, mu_of, keys, 21, alpha, M, walk=walk, precision=precision)
    out = _batch_record(res)
    out.update(k=k, M=str(M), m_max=m_max)
    return out


def _imap(fn, args: list, jobs: int):
    """Ordered results, yielded as soon as each is available."""
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            yield from pool.map(fn, *zip(*args))
    else:
        for a in args:
            yield fn(*a)


def _per_k(ledger: ProofLedger, stage: str, fn, ks: list[int], extra: tuple, jobs: int) -> list[dict]:
    """Run ``fn(k, *extra)`` for each k; every result is stored as a shard on arrival."""
    results: dict[int, dict] = {}
    todo = []
    for k in ks:
        stored = ledger.stored_shard(stage, f"k{k:04d}", {"k": k, "extra": list(extra)})
        if stored is None:
            todo.append(k)
        else:
            results[k] = stored
    for k, out in zip(todo, _imap(fn, [(k, *extra) for k in todo], jobs)):
        results[k] = ledger.shard(stage, f"k{k:04d}", {"k": k, "extra": list(extra)}, lambda o=out: o)
    return [results[k] for k in ks]


def run_small_k(config: RunConfig, ledger: ProofLedger | None = None) -> ProofLedger:
    ledger = ledger or ProofLedger(config.out_dir, config.resume)
    ks = list(range(config.k_min, config.k_max + 1))

    def chain():
        checks = []
        for k in ks:
            b = stage_bounds_small_k(k)
            checks += [dict(s.record(), name=f"{s.name}[k={k}]") for s in b.stages]
        return {"checks": checks,
                "M_first": {k: str(stage_bounds_small_k(k).M_first) for k in ks},
                "M_second": {k: str(stage_bounds_small_k(k).M_second) for k in ks}}

    ledger.run("small_k_chain", "n < 9e28 k^8 log^5 k and m + ell < 3e28 k^8 log^5 k for n >= k + 2",
               {"k_range": [config.k_min, config.k_max]}, chain)

    def round1():
        rows = _per_k(ledger, "small_k_round1", small_k_round1, ks,
                      (config.walk, config.precision_bits), config.jobs)
        worst = max(rows, key=lambda r: r["w_bound"])
        failures = {r["k"]: r["failures"] for r in rows if r["failures"]}
        m_cap = strict_int_bound(CertifiedReal(Fraction(worst["w_bound_exact_upper"])))
        return {"per_k": [{key: r[key] for key in ("k", "w_bound", "worst_key", "worst_index",
                                                      "walked", "max_walk_index")} for r in rows],
                "max_w_bound": worst["w_bound"], "argmax_k": worst["k"],
                "m_cap_derived": m_cap, "m_sweep": max(m_cap, SMALL_K_M_SWEEP),
                "failures": failures,
                "checks": [check("round1_max", "max log(A q / eps) / log B over k, d1",
                                 SMALL_K_ROUND1_CAP, Fraction(worst["w_bound_exact_upper"]),
                                 notes=f"k={worst['k']} d1={worst['worst_key']}"),
                           {"name": "round1_all_reduced", "formula": "epsilon > 0 for every d1",
                            "claimed": "0", "derived": str(len(failures)), "value": None,
                            "holds": not failures, "notes": ""}]}

    r1 = ledger.run("small_k_round1", "|(n-1) log(alpha)/log 10 - (m+ell) + mu| < 10^(1-m)",
                    {"k_range": [config.k_min, config.k_max], "walk": config.walk,
                     "precision_bits": config.precision_bits}, round1, config.precision_bits)

    n_sweep = config.n_max
    if config.round2:
        m_sweep = r1["m_sweep"]

        def round2():
            rows = _per_k(ledger, "small_k_round2", small_k_round2, ks,
                          (m_sweep, config.walk, config.precision_bits), config.jobs)
            worst = max(rows, key=lambda r: r["w_bound"])
            failures = {r["k"]: r["failures"] for r in rows if r["failures"]}
            n_cap = strict_int_bound(CertifiedReal(Fraction(worst["w_bound_exact_upper"])))
            return {"per_k": [{key: r[key] for key in ("k", "w_bound", "worst_key", "worst_index",
                                                          "walked", "max_walk_index", "reductions")}
                              for r in rows],
                    "max_w_bound": worst["w_bound"], "argmax_k": worst["k"],
                    "n_cap_derived": n_cap, "n_sweep": max(n_cap, SMALL_K_N_SWEEP),
                    "failures": failures,
                    "checks": [check("round2_max", "max log(A q / eps) / log B over k, d1, d2, m",
                                     SMALL_K_ROUND2_CAP, Fraction(worst["w_bound_exact_upper"]),
                                     notes=f"k={worst['k']} key={worst['worst_key']}"),
                               {"name": "round2_all_reduced", "formula": "epsilon > 0 for every key",
                                "claimed": "0", "derived": str(len(failures)), "value": None,
                                "holds": not failures, "notes": ""}]}

        r2 = ledger.run("small_k_round2",
                        "|ell log 10/log(alpha) - n + mu| < 21 alpha^-n",
                        {"k_range": [config.k_min, config.k_max], "walk": config.walk,
                         "m_sweep": m_sweep, "precision_bits": config.precision_bits},
                        round2, config.precision_bits)
        n_sweep = max(r2["n_sweep"], config.n_max)

    def enumerate_stage():
        found = enumerate_solutions(ks, n_sweep, n_min=5, jobs=config.jobs)
        cmp = compare_solutions(found, expected_solutions(ks, 5, n_sweep))
        if ledger.out_dir is not None:
            (ledger.out_dir / "small_k_solutions.csv").write_text(solutions_to_csv(sorted(found)))
        return {"solutions": [s.row() for s in sorted(found)], "comparison": cmp,
                "checks": [_solution_check("small_k_table", cmp)]}

    ledger.run("small_k_enumeration", "F_n^(k) for 5 <= n <= n cap against the table",
               {"k_range": [config.k_min, config.k_max], "n_sweep": n_sweep}, enumerate_stage)
    return ledger


# -- large k -------------------------------------------------------------------------

THETA = LOG10 / LOG2


def log10_over_log2() -> Computable:
    return Computable("log10_over_log2",
                      lambda b: CertifiedReal(10, b + 16).log() / CertifiedReal(2, b + 16).log())


def _const(value) -> Computable:
    v = Fraction(value)
    return Computable(str(v), lambda b: CertifiedReal(v, b))


SQRT2 = Computable("sqrt2", lambda b: CertifiedReal(2, b + 16).sqrt())


def lambda_cases(x: CertifiedReal) -> dict:
    """Consequences of ``lambda = min(k/2, theta m) < x`` for integers k and m."""
    k_max = strict_int_bound(2 * x)
    m_max = strict_int_bound(x / THETA)
    lam_max = max(Fraction(k_max, 2), (THETA * m_max).upper)
    return {"k_max": k_max, "m_max": m_max, "lambda_max": lam_max}


def _lambda_stage(M: int, cf: ContinuedFraction, walk: int, claims: dict,
                  precision: int = DEFAULT_BITS) -> dict:
    """Reduce ``|(m+ell) theta - n + 2 + log(d1/9)/log 2| < 38 2^-lambda``."""
    gamma = cf.source
    routed, plain = {}, []
    for d1 in range(1, 10):
        shift = integer_shift_in_log2_base(2, Fraction(d1, 9))
        if shift is None:
            plain.append(d1)
        else:
            routed[d1] = shift

    def mu_of(d1, bits):
        return (CertifiedReal(Fraction(d1, 9), bits + 16).log()
                / CertifiedReal(2, bits + 16).log()) + 2

    res = reduce_many(gamma, mu_of, plain, 38, _const(2), M, cf=cf, walk=walk,
                      precision=precision)
    if res.failures or res.worst is None:
        raise MathematicalMismatch("lambda", [{"name": "dp", "derived": str(res.failures),
                                               "claimed": "no failures"}])
    x_plain = res.worst.w_bound
    leg = legendre_lower(cf, M)
    x_leg = legendre_exponent_bound(38, leg.denom_factor, M, CertifiedReal(2, x_plain.precision))
    cases_plain = lambda_cases(x_plain)
    x_all = x_plain if x_plain.upper >= x_leg.upper else x_leg
    cases = lambda_cases(x_all)
    checks = [
        check("lambda_reduced", "lambda from reduction, d1 with mu irrational",
              claims["lambda_plain"], cases_plain["lambda_max"],
              notes=f"lambda < {float(x_plain.upper):.4f}, d1={res.worst_key}"),
        check("lambda_all", "lambda over every d1", claims["lambda_all"], cases["lambda_max"],
              notes=f"lambda < {float(x_all.upper):.4f}"),
        check("k_from_half", "lambda = k/2", claims["k_half"], cases["k_max"]),
        check("m_from_theta", "lambda = theta m", claims["m_theta"], cases["m_max"]),
    ]
    return {"M": str(M), "reduced": _batch_record(res), "x_reduced": float(x_plain.upper),
            "legendre": {"d1": sorted(routed), "shift": routed, "N": leg.N, "a_M": leg.a_M,
                         "index_of_max": leg.index_of_max, "factor": leg.denom_factor,
                         "x": float(x_leg.upper)},
            "x_all": float(x_all.upper), "k_max": cases["k_max"], "m_max": cases["m_max"],
            "lambda_max": float(cases["lambda_max"]),
            "m_sweep": max(cases["m_max"], claims["m_theta"]), "checks": checks}


DEGENERATE_BLOCKS = {(1, 1, 0), (1, 1, 9), (1, 2, 0), (1, 3, 9), (1, 4, 0),
                 (1, 7, 9), (1, 8, 0), (1, 4, 9), (1, 5, 0)}


def _blocks_stage(M: int, m_sweep: int, cf: ContinuedFraction, walk: int, claims: dict,
              precision: int = DEFAULT_BITS) -> dict:
    """Reduce ``|ell theta - n + 2 + log(N/9)/log 2| < 9 2^-(k/2)``, N = d1 10^m - (d1 - d2)."""
    gamma = cf.source
    plain, degenerate = [], {}
    for m in range(1, m_sweep + 1):
        for d1 in range(1, 10):
            for d2 in range(10):
                N = d1 * 10**m - (d1 - d2)
                shift = integer_shift_in_log2_base(2, Fraction(N, 9))
                if shift is None:
                    plain.append((d1, d2, m))
                else:
                    degenerate[(m, d1, d2)] = shift

    def mu_of(key, bits):
        d1, d2, m = key
        N = d1 * 10**m - (d1 - d2)
        return (CertifiedReal(Fraction(N, 9), bits + 16).log()
                / CertifiedReal(2, bits + 16).log()) + 2

    res = reduce_many(gamma, mu_of, plain, 9, SQRT2, M, cf=cf, walk=walk,
                      precision=precision)
    if res.failures or res.worst is None:
        raise MathematicalMismatch("blocks", [{"name": "dp", "derived": str(list(res.failures)[:5]),
                                           "claimed": "no failures"}])
    k_plain = res.worst.w_bound
    leg = legendre_lower(cf, M)
    k_leg = legendre_exponent_bound(9, leg.denom_factor, M, CertifiedReal(2, k_plain.precision).sqrt())
    expected = DEGENERATE_BLOCKS | {(m, 9, 9) for m in range(1, m_sweep + 1)}
    deg_ok = set(degenerate) == expected
    checks = [
        check("k_reduced", "k from reduction over non-degenerate (m, d1, d2)",
              claims["k_plain"], strict_int_bound(k_plain),
              notes=f"k < {float(k_plain.upper):.4f} at {res.worst_key}"),
        check("k_degenerate", "k from the Legendre bound for integral shifts",
              claims["k_degenerate"], strict_int_bound(k_leg),
              notes=f"2^(k/2) < 9 * {leg.denom_factor} * M"),
        {"name": "degenerate_list", "formula": "shifts that are integer combinations of 1, theta",
         "claimed": str(len(expected)), "derived": str(len(degenerate)), "value": None,
         "holds": deg_ok, "notes": "" if deg_ok else
         f"unexpected={sorted(set(degenerate) - expected)} missing={sorted(expected - set(degenerate))}"},
    ]
    return {"M": str(M), "m_sweep": m_sweep, "reduced": _batch_record(res),
            "k_reduced_bound": float(k_plain.upper), "k_reduced_max": strict_int_bound(k_plain),
            "degenerate": sorted([*key, *shift] for key, shift in degenerate.items()),
            "legendre": {"N": leg.N, "a_M": leg.a_M, "factor": leg.denom_factor,
                         "k_bound": float(k_leg.upper)},
            "k_degenerate_max": strict_int_bound(k_leg), "checks": checks}


def _cf_for(ledger: ProofLedger, bound: int, precision: int) -> ContinuedFraction:
    gamma = log10_over_log2()
    if ledger.out_dir is not None:
        return CFCache(ledger.out_dir / "cache").get(gamma, bound)
    return ContinuedFraction(gamma, precision).extend_beyond(bound)


def run_large_k(config: RunConfig, ledger: ProofLedger | None = None) -> ProofLedger:
    ledger = ledger or ProofLedger(config.out_dir, config.resume)

    def chain():
        stages = stage_bounds_large_k()
        out = {"checks": [s.record() for s in stages]}
        out["ml_abs"] = str(next(s.value for s in stages if s.name == "ml_abs"))
        return out

    ch = ledger.run("large_k_chain", "absolute bounds on k, m + ell and n for k > 500", {}, chain)
    M_A = int(ch["ml_abs"])
    cf = _cf_for(ledger, 6 * M_A, config.precision_bits)

    lam_a = ledger.run(
        "large_k_round_a_lambda", "|(m+ell) theta - n + mu| < 38 2^-lambda, M = bound on m + ell",
        {"M": str(M_A), "walk": config.walk, "precision_bits": config.precision_bits},
        lambda: _lambda_stage(M_A, cf, config.walk, {"lambda_plain": 950, "lambda_all": 955,
                                                     "k_half": 1910, "m_theta": 290},
                              config.precision_bits),
        precision_bits=max(2 * (6 * M_A).bit_length() + 64, config.precision_bits))

    def legendre_integer_check():
        lhs = 38 * lam_a["legendre"]["factor"] * Fraction(ROUND_A_M)
        cap = Fraction("3.1e287")
        assert M_A < Fraction(ROUND_A_M) and lhs.denominator == 1
        return {"product": str(lhs), "checks": [{
            "name": "two_power_lambda", "formula": "38 * factor * M < 3.1e287",
            "claimed": str(cap.numerator), "derived": str(lhs.numerator), "value": None,
            "holds": lhs < cap,
            "notes": "exact integers"}]}

    ledger.run("large_k_round_a_legendre_product", "2^lambda < 38 (a_M + 2) M",
               {"M": str(M_A), "factor": lam_a["legendre"]["factor"]}, legendre_integer_check)

    blocks_a = ledger.run(
        "large_k_round_a_blocks", "|ell theta - n + mu(m, d1, d2)| < 9 2^-(k/2)",
        {"M": str(M_A), "m_sweep": lam_a["m_sweep"], "walk": config.walk, "precision_bits": config.precision_bits},
        lambda: _blocks_stage(M_A, lam_a["m_sweep"], cf, config.walk,
                          {"k_plain": 1950, "k_degenerate": 1905}, config.precision_bits),
        precision_bits=max(2 * (6 * M_A).bit_length() + 64, config.precision_bits))

    k_a = max(lam_a["k_max"], blocks_a["k_reduced_max"], blocks_a["k_degenerate_max"])

    def shrink():
        ml = ml_bound_for_k(k_a)
        return {"k_max": k_a, "ml_bound": str(math.ceil(ml.upper)),
                "checks": [check("ml_after_round_a", "m + ell < 3e28 k^8 log^5 k",
                                 C(ROUND_B_M), ml, notes=f"k <= {k_a}")]}

    ledger.run("large_k_shrink", "m + ell bound at the reduced k", {"k_max": k_a}, shrink)
    M_B = math.floor(Fraction(ROUND_B_M))
    cf_b = cf  # the same expansion serves the smaller M

    lam_b = ledger.run(
        "large_k_round_b_lambda", "|(m+ell) theta - n + mu| < 38 2^-lambda, M = 1.6e59",
        {"M": str(M_B), "walk": config.walk, "precision_bits": config.precision_bits},
        lambda: _lambda_stage(M_B, cf_b, config.walk, {"lambda_plain": 210, "lambda_all": 210,
                                                       "k_half": 420, "m_theta": 65},
                              config.precision_bits),
        precision_bits=max(2 * (6 * M_B).bit_length() + 64, config.precision_bits))

    blocks_b = ledger.run(
        "large_k_round_b_blocks", "|ell theta - n + mu(m, d1, d2)| < 9 2^-(k/2), M = 1.6e59",
        {"M": str(M_B), "m_sweep": lam_b["m_sweep"], "walk": config.walk, "precision_bits": config.precision_bits},
        lambda: _blocks_stage(M_B, lam_b["m_sweep"], cf_b, config.walk,
                          {"k_plain": 450, "k_degenerate": 450}, config.precision_bits),
        precision_bits=max(2 * (6 * M_B).bit_length() + 64, config.precision_bits))

    def contradiction():
        k_b = max(lam_b["k_max"], blocks_b["k_reduced_max"], blocks_b["k_degenerate_max"])
        return {"k_max": k_b, "checks": [
            check("k_final", "k after the second round", 450, k_b),
            {"name": "contradiction", "formula": "k_max < 501 contradicts k > 500",
             "claimed": "500", "derived": str(k_b), "value": None, "holds": k_b <= 500,
             "notes": ""}]}

    ledger.run("large_k_contradiction", "k <= 450 against k > 500",
               {"k_b": [lam_b["k_max"], blocks_b["k_reduced_max"], blocks_b["k_degenerate_max"]]},
               contradiction)
    return ledger


# -- theorem check -------------------------------------------------------------------

@dataclass
class TheoremReport:
    k_max: int
    n_max: int
    entries: list[dict]
    missing: list
    extra: list
    small_n: dict
    solutions: list[Solution] = field(default_factory=list, repr=False)

    @property
    def ok(self) -> bool:
        return not self.missing and not self.extra and all(e["pass"] for e in self.entries)

    def record(self) -> dict:
        return {"k_max": self.k_max, "n_max": self.n_max, "ok": self.ok,
                "entries": self.entries, "missing": self.missing, "extra": self.extra,
                "small_n": self.small_n}


def verify_theorem(config: RunConfig | None = None, k_max: int | None = None,
                   n_max: int | None = None) -> TheoremReport:
    """Enumerate independently and compare with the table, entry by entry."""
    config = config or RunConfig()
    k_max = config.enum_k_max if k_max is None else k_max
    n_max = config.n_max if n_max is None else n_max
    ks = range(2, k_max + 1)
    small = solve_small_n(k_probe=k_max)
    found = enumerate_solutions(ks, n_max, jobs=config.jobs)
    found_set = {(s.k, s.n, s.value) for s in found}
    small_set = {(s.k, s.n, s.value) for s in small.instances}
    expected = expected_solutions(ks, 1, n_max)
    entries = []
    for k, n, v in KNOWN_SOLUTIONS:
        if k <= k_max and n <= n_max:
            entries.append({"entry": f"F_{n}^({k}) = {v}", "pass": (k, n, v) in found_set})
    for fam in KNOWN_FAMILIES:
        inst = {(k, fam.n, fam.value) for k in ks if k >= fam.k_min}
        entries.append({"entry": f"F_{fam.n}^(k) = {fam.value} for k >= {fam.k_min}",
                        "pass": inst <= found_set and inst <= small_set
                        and any(f == fam for f in small.families)})
    diag = dict(small.diagnostics, families=[asdict(f) for f in small.families])
    return TheoremReport(k_max, n_max, entries, sorted(expected - found_set),
                         sorted(found_set - expected), diag, sorted(found))


def full_proof(config: RunConfig, ledger: ProofLedger | None = None) -> ProofLedger:
    ledger = ledger or ProofLedger(config.out_dir, config.resume)
    ledger.run("verify_theorem", "table of solutions for k <= 500, n <= 500",
               {"k_max": config.enum_k_max, "n_max": config.n_max},
               lambda: theorem_stage(config))
    run_small_k(config, ledger)
    run_large_k(config, ledger)
    ledger.write_summary()
    return ledger


def theorem_stage(config: RunConfig) -> dict:
    rep = verify_theorem(config)
    out = rep.record()
    out["checks"] = [{"name": "theorem_table", "formula": "enumeration equals the table",
                      "claimed": "0", "derived": str(len(rep.missing) + len(rep.extra)),
                      "value": None, "holds": rep.ok,
                      "notes": f"missing={rep.missing[:10]} extra={rep.extra[:10]}"}]
    return out
