"""Figures written next to the CSV reports of a run directory."""
from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .kfib import Solution  # noqa: E402


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_solutions(solutions: Iterable[Solution], path: Path) -> Path:
    """Scatter of (k, n) for every solution, coloured by the number of digits."""
    sols = sorted(solutions)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    if sols:
        ks = [s.k for s in sols]
        ns = [s.n for s in sols]
        digits = [len(str(s.value)) for s in sols]
        sc = ax.scatter(ks, ns, c=digits, cmap="viridis", s=14)
        fig.colorbar(sc, ax=ax, label="decimal digits of F")
        if max(ks) > 30:
            ax.set_xscale("log")
    ax.set_xlabel("k")
    ax.set_ylabel("n")
    ax.set_title("k-Fibonacci numbers that are two concatenated repdigits")
    return _save(fig, path)


def plot_reduction_bounds(per_k: dict[str, list[dict]], caps: dict[str, float], path: Path) -> Path:
    """Reduced exponent bound against k, one line per reduction round."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, rows in per_k.items():
        rows = sorted(rows, key=lambda r: r["k"])
        line, = ax.plot([r["k"] for r in rows], [r["w_bound"] for r in rows], ".-", label=label)
        if label in caps:
            ax.axhline(caps[label], color=line.get_color(), ls="--", lw=0.8)
    ax.set_xlabel("k")
    ax.set_ylabel("reduced bound")
    ax.legend()
    ax.set_title("Exponent bounds after continued-fraction reduction")
    return _save(fig, path)


def _log10_of(text: str) -> float | None:
    if "e" not in text:
        n = int(text)
        return None if n <= 0 else len(text) - 1 + math.log10(int(text[:15]) / 10 ** (min(len(text), 15) - 1))
    mant, _, exp = text.partition("e")
    return None if float(mant) <= 0 else math.log10(float(mant)) + int(exp)


def plot_bound_chain(checks: list[dict], path: Path) -> Path:
    """Claimed and derived values of each link on a log scale."""
    rows = [c for c in checks
            if None not in (_log10_of(c["claimed"]), _log10_of(c["derived"]))]
    names = [c["name"] for c in rows]
    fig, ax = plt.subplots(figsize=(7, 0.3 * len(rows) + 1.5))
    y = range(len(rows))
    ax.barh([i + 0.2 for i in y], [_log10_of(c["claimed"]) for c in rows], height=0.4,
            label="claimed", color="#bbbbbb")
    ax.barh([i - 0.2 for i in y], [_log10_of(c["derived"]) for c in rows], height=0.4,
            label="derived", color=["#2a7" if c["holds"] else "#c33" for c in rows])
    ax.set_yticks(list(y), names)
    ax.invert_yaxis()
    ax.set_xlabel("log10 of bound")
    ax.legend(loc="lower right")
    return _save(fig, path)
