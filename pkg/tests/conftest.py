import pytest

from kfibrep.pipeline import ProofLedger, RunConfig, run_large_k, run_small_k


@pytest.fixture(scope="session")
def large_k_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("large_k")
    cfg = RunConfig(out_dir=out)
    return cfg, run_large_k(cfg)


@pytest.fixture(scope="session")
def small_k_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("small_k")
    cfg = RunConfig(k_min=4, k_max=6, out_dir=out)
    return cfg, run_small_k(cfg, ProofLedger(out))


_criteria: dict[int, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    failed = report.failed or (report.when == "call" and report.skipped)
    if report.when == "call" or failed:
        detail = dict(item.user_properties).get("detail", "")
        if failed:
            first = str(report.longrepr).strip().splitlines()
            detail = first[-1][:160] if first else "failed"
        if failed or number not in _criteria:
            status = "FAIL" if failed else "PASS"
            _criteria[number] = f"{status}  criterion {number:2d}: {title}  [{detail}]"


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_criteria):
            terminalreporter.write_line(_criteria[number])
