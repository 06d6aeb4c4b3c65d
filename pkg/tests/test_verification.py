import pytest

from asymcharge.verification import CHECKS, run_suite


def test_full_suite_passes_at_default_order():
    res = run_suite(order=24)
    failed = [c.name for c in res.checks if not c.passed]
    assert failed == []
    assert [c.name for c in res.checks] == list(CHECKS)
    assert sum(c.seconds for c in res.checks) < 120


def test_coarse_grid_is_reported_not_raised():
    # order 6 is too coarse for the integral identities; failures must surface as rows
    res = run_suite(["epsilonV2", "t_independence", "green_constant"], order=6)
    status = {c.name: c.passed for c in res.checks}
    assert status == {"epsilonV2": False, "t_independence": False, "green_constant": True}
    assert not res.passed


def test_tolerance_override_and_rows():
    seen = []
    res = run_suite(["laplacian"], order=12, tolerances={"laplacian": 1e-12}, progress=seen.append)
    assert len(seen) == 1 and not res.passed
    row = res.rows()[0]
    assert row["status"] == "FAIL" and row["tolerance"] == 1e-12


def test_unknown_check():
    with pytest.raises(KeyError):
        run_suite(["nope"])
