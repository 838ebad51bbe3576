"""k-Fibonacci numbers that are concatenations of two repdigits.

Exact enumeration, certified real arithmetic, linear-form bound chains and
continued-fraction reductions, wired together by ``pipeline`` and ``cli``.
"""
from .kfib import (
    Family,
    KFibWindow,
    Solution,
    TwoBlockDecomposition,
    canonical_decomposition,
    enumerate_solutions,
    kfib,
    kfib_stream,
    solve_small_n,
    two_block_decompose,
)
from .realnum import CertifiedReal, Computable, UndecidedComparison, dominant_root
from .reduction import ContinuedFraction, ReductionInstance, dujella_petho, legendre_lower

__all__ = [
    "Family", "KFibWindow", "Solution", "TwoBlockDecomposition", "canonical_decomposition",
    "enumerate_solutions", "kfib", "kfib_stream", "solve_small_n", "two_block_decompose",
    "CertifiedReal", "Computable", "UndecidedComparison", "dominant_root",
    "ContinuedFraction", "ReductionInstance", "dujella_petho", "legendre_lower",
]
