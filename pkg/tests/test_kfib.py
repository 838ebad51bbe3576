import itertools

import pytest

from kfibrep.kfib import (
    CSV_FIELDS,
    Family,
    KFibWindow,
    Solution,
    TwoBlockDecomposition,
    canonical_decomposition,
    digit_runs,
    enumerate_solutions,
    kfib,
    kfib_stream,
    solutions_for_k,
    solutions_from_csv,
    solutions_to_csv,
    solutions_to_json,
    solve_small_n,
    two_block_decompose,
)


def naive_kfib(k, n):
    """Independent oracle: list-based sum of the previous k terms."""
    seq = {i: 0 for i in range(2 - k, 1)}
    seq[1] = 1
    for i in range(2, n + 1):
        seq[i] = sum(seq[i - j] for j in range(1, k + 1))
    return seq[n]


@pytest.mark.parametrize("k,n,value", [(2, 10, 55), (4, 5, 8), (7, 13, 2000), (9, 11, 511),
                                       (4, 13, 1490), (3, 9, 81), (2, 1, 1), (5, 0, 0)])
def test_known_values(k, n, value):
    assert kfib(k, n) == value


def test_matches_naive_oracle():
    for k in range(2, 12):
        for n in range(2 - k, 60):
            assert kfib(k, n) == naive_kfib(k, n), (k, n)


def test_stream_matches_direct():
    for k in (2, 3, 7, 30):
        got = list(itertools.islice(kfib_stream(k, start=2 - k), 120))
        assert got == [(n, kfib(k, n)) for n in range(2 - k, 2 - k + 120)]


def test_stream_start_offsets():
    assert next(kfib_stream(5, start=9)) == (9, kfib(5, 9))
    assert next(kfib_stream(5, start=2)) == (2, 1)


def test_powers_of_two_regime_and_growth():
    for k in (2, 5, 12):
        win = KFibWindow(k)
        for _ in range(3 * k + 40):
            win.advance()  # growth checks fire inside advance
        assert kfib(k, k + 1) == 2 ** (k - 1)
        assert kfib(k, k + 2) < 2**k


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        kfib(1, 5)
    with pytest.raises(ValueError):
        kfib(4, -3)
    with pytest.raises(ValueError):
        list(itertools.islice(kfib_stream(3, start=-5), 1))


def test_decomposition_value_and_digits():
    d = TwoBlockDecomposition(7, 0, 1, 3)
    assert d.value == 7000 and d.digits() == "7000"
    assert TwoBlockDecomposition(5, 5, 1, 1).value == 55
    with pytest.raises(ValueError):
        TwoBlockDecomposition(0, 1, 1, 1)
    with pytest.raises(ValueError):
        TwoBlockDecomposition(1, 1, 0, 1)


def test_two_block_decompose_cases():
    assert two_block_decompose(2000) == {TwoBlockDecomposition(2, 0, 1, 3)}
    assert two_block_decompose(1490) == set()
    assert two_block_decompose(4444) == {TwoBlockDecomposition(4, 4, m, 4 - m) for m in (1, 2, 3)}
    assert canonical_decomposition(4444) == TwoBlockDecomposition(4, 4, 3, 1)
    assert canonical_decomposition(123) is None
    with pytest.raises(ValueError):
        two_block_decompose(9)


def test_digit_runs():
    assert digit_runs("7770011") == [("7", 3), ("0", 2), ("1", 2)]


def test_small_n_solver():
    res = solve_small_n(k_probe=12)
    assert [f.value for f in res.families] == [16, 32, 64]
    assert [(f.n, f.k_min) for f in res.families] == [(6, 5), (7, 6), (8, 7)]
    assert res.diagnostics["ell_bound"] == 3
    assert res.diagnostics["m_plus_ell_bound"] == 13
    assert res.diagnostics["window"] == [-7991, 9000]
    assert all(s.verify() for s in res.instances)


def test_small_n_exhaustive_oracle():
    # every power of two below 10^13 with two digit runs
    hits = [2**e for e in range(4, 44) if 1 <= len(digit_runs(str(2**e))) <= 2]
    assert hits == [16, 32, 64]


def test_enumeration_tribonacci_and_parallel():
    tri = {s.value for s in solutions_for_k(3, 40)}
    assert tri == {13, 24, 44, 81}
    serial = enumerate_solutions(range(2, 12), 60)
    parallel = enumerate_solutions(range(2, 12), 60, jobs=2)
    assert sorted(serial) == sorted(parallel)
    assert all(s.verify() for s in serial)


def test_no_solution_at_k4_n13():
    assert (4, 13) not in {(s.k, s.n) for s in solutions_for_k(4, 40)}


def test_family_instances():
    fam = Family(32, 7, 6)
    inst = fam.instances(9)
    assert [s.k for s in inst] == [6, 7, 8, 9]
    assert all(s.verify() for s in inst)


def test_serialization_round_trip():
    sols = enumerate_solutions(range(2, 8), 30)
    text = solutions_to_csv(sols)
    assert text.splitlines()[0].split(",") == CSV_FIELDS
    assert solutions_from_csv(text) == sols
    assert '"value": 13' in solutions_to_json(sols[:1])


def test_solution_verify_detects_wrong_index():
    dec = canonical_decomposition(2000)
    assert Solution(7, 13, dec).verify()
    assert not Solution(7, 12, dec).verify()
