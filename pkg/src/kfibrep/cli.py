"""Command line front end.

Exit status: 0 when every computed bound is within its cap and every table
comparison matches, 2 on a mathematical mismatch, 1 on any other error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

from . import pipeline, plotting
from .kfib import enumerate_solutions, family_record, solutions_to_csv, solve_small_n
from .pipeline import MathematicalMismatch, ProofLedger, RunConfig
from .realnum import DEFAULT_BITS

EXIT_OK, EXIT_ERROR, EXIT_MISMATCH = 0, 1, 2


def _k_range(text: str) -> tuple[int, int]:
    for sep in (":", "-", ","):
        if sep in text:
            lo, hi = text.split(sep, 1)
            return int(lo), int(hi)
    k = int(text)
    return k, k


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision-bits", type=int, default=DEFAULT_BITS,
                        help="floor for working precision (default %(default)s)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--out-dir", type=Path, default=None,
                        help="run directory for JSON stages, CSV reports and figures")
    common.add_argument("--resume", action="store_true",
                        help="reuse stored stages and shards whose inputs match")
    common.add_argument("--no-figures", action="store_true", help="skip matplotlib output")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="kfibrep", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("enumerate", parents=[common], help="brute-force search")
    e.add_argument("--k-min", type=int, default=2)
    e.add_argument("--k-max", type=int, default=50)
    e.add_argument("--n-min", type=int, default=1)
    e.add_argument("--n-max", type=int, default=500)

    sub.add_parser("small-n", parents=[common], help="solve the power-of-two range n <= k + 1")

    r = sub.add_parser("reduce-small-k", parents=[common], help="both reduction rounds for 4 <= k <= 500")
    r.add_argument("--k-range", type=_k_range, default=(4, 20), help="e.g. 4:20")
    r.add_argument("--no-round2", action="store_true")
    r.add_argument("--walk", type=int, default=128, help="extra convergents tried per reduction")

    lk = sub.add_parser("reduce-large-k", parents=[common], help="bound chain and reductions for k > 500")
    lk.add_argument("--walk", type=int, default=128)

    v = sub.add_parser("verify-theorem", parents=[common], help="compare enumeration with the table")
    v.add_argument("--k-max", type=int, default=500)
    v.add_argument("--n-max", type=int, default=500)

    f = sub.add_parser("full-proof", parents=[common], help="every stage in order")
    f.add_argument("--full", action="store_true",
                   help="small-k stages over all of [4, 500] (about half an hour on one core)")
    f.add_argument("--k-max", type=int, default=50, help="small-k upper end without --full")
    f.add_argument("--walk", type=int, default=128)
    return p


def _ledger_out(ledger: ProofLedger, figures: bool) -> None:
    ledger.write_summary()
    for rec in ledger.stages:
        ok = "ok" if not rec.failures else "MISMATCH"
        print(f"{rec.stage:36s} {ok:8s} {rec.wall_ms:>8d} ms")
    if not figures or ledger.out_dir is None:
        return
    per_k = {}
    for name, label in (("small_k_round1", "round 1"), ("small_k_round2", "round 2")):
        if name in ledger:
            per_k[label] = ledger[name].outputs["per_k"]
    if per_k:
        plotting.plot_reduction_bounds(per_k, {"round 1": pipeline.SMALL_K_ROUND1_CAP,
                                               "round 2": pipeline.SMALL_K_ROUND2_CAP},
                                       ledger.out_dir / "reduction_bounds.png")
    chain = [c for r in ledger.stages if r.stage.startswith("large_k")
             for c in r.outputs.get("checks", [])]
    if chain:
        plotting.plot_bound_chain(chain, ledger.out_dir / "bound_chain.png")
    if "small_k_enumeration" in ledger:
        from .kfib import solutions_from_csv
        csv_path = ledger.out_dir / "small_k_solutions.csv"
        if csv_path.exists():
            plotting.plot_solutions(solutions_from_csv(csv_path.read_text()),
                                    ledger.out_dir / "small_k_solutions.png")


def _config(args, **kw) -> RunConfig:
    return RunConfig(precision_bits=args.precision_bits, jobs=args.jobs, out_dir=args.out_dir,
                     resume=args.resume, figures=not args.no_figures, **kw)


def cmd_enumerate(args) -> int:
    sols = enumerate_solutions(range(args.k_min, args.k_max + 1), args.n_max, args.n_min, args.jobs)
    text = solutions_to_csv(sols)
    if args.out_dir is None:
        sys.stdout.write(text)
        return EXIT_OK
    args.out_dir.mkdir(parents=True, exist_ok=True)
    (args.out_dir / "solutions.csv").write_text(text)
    if not args.no_figures:
        plotting.plot_solutions(sols, args.out_dir / "solutions.png")
    print(f"{len(sols)} solutions written to {args.out_dir / 'solutions.csv'}")
    return EXIT_OK


def cmd_small_n(args) -> int:
    res = solve_small_n()
    out = {"families": [family_record(f) for f in res.families], "diagnostics": res.diagnostics}
    text = json.dumps(out, indent=1)
    if args.out_dir is not None:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        (args.out_dir / "small_n.json").write_text(text + "\n")
    print(text)
    values = sorted(f.value for f in res.families)
    ok = values == [16, 32, 64] and res.diagnostics["ell_bound"] <= 3 \
        and res.diagnostics["m_plus_ell_bound"] <= 13
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_reduce_small_k(args) -> int:
    lo, hi = args.k_range
    cfg = _config(args, k_min=lo, k_max=hi, walk=args.walk, round2=not args.no_round2)
    ledger = ProofLedger(cfg.out_dir, cfg.resume)
    try:
        pipeline.run_small_k(cfg, ledger)
    finally:
        _ledger_out(ledger, cfg.figures)
    return EXIT_OK


def cmd_reduce_large_k(args) -> int:
    cfg = _config(args, walk=args.walk)
    ledger = ProofLedger(cfg.out_dir, cfg.resume)
    try:
        pipeline.run_large_k(cfg, ledger)
    finally:
        _ledger_out(ledger, cfg.figures)
    return EXIT_OK


def cmd_verify_theorem(args) -> int:
    cfg = _config(args, enum_k_max=args.k_max, n_max=args.n_max)
    rep = pipeline.verify_theorem(cfg)
    for e in rep.entries:
        print(f"{'PASS' if e['pass'] else 'FAIL'}  {e['entry']}")
    for k, n, v in rep.missing:
        print(f"MISSING  F_{n}^({k}) = {v}")
    for k, n, v in rep.extra:
        print(f"EXTRA    F_{n}^({k}) = {v}")
    if args.out_dir is not None:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        (args.out_dir / "theorem.json").write_text(json.dumps(rep.record(), indent=1) + "\n")
        (args.out_dir / "theorem_solutions.csv").write_text(solutions_to_csv(rep.solutions))
        if not args.no_figures:
            plotting.plot_solutions(rep.solutions, args.out_dir / "theorem_solutions.png")
    print("theorem table reproduced" if rep.ok else "theorem table NOT reproduced")
    return EXIT_OK if rep.ok else EXIT_MISMATCH


def cmd_full_proof(args) -> int:
    k_max = 500 if args.full else args.k_max
    if args.full:
        warnings.warn("full small-k sweep: about 6.7 million reductions, expect half an hour or more on one core",
                      RuntimeWarning, stacklevel=1)
    cfg = _config(args, k_min=4, k_max=k_max, walk=args.walk)
    ledger = ProofLedger(cfg.out_dir, cfg.resume)
    try:
        pipeline.full_proof(cfg, ledger)
    finally:
        _ledger_out(ledger, cfg.figures)
    return EXIT_OK


COMMANDS = {
    "enumerate": cmd_enumerate,
    "small-n": cmd_small_n,
    "reduce-small-k": cmd_reduce_small_k,
    "reduce-large-k": cmd_reduce_large_k,
    "verify-theorem": cmd_verify_theorem,
    "full-proof": cmd_full_proof,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except MathematicalMismatch as exc:
        print(f"mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except Exception as exc:  # noqa: BLE001 - any other failure is operational
        logging.getLogger(__name__).debug("operational failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
