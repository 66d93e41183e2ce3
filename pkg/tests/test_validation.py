"""Suite mechanics: ordering, shared tolerances, and infeasibility guards.
The physics of each check is asserted in test_acceptance."""

import pytest

from spincascade.errors import ArgumentError, ToleranceInfeasibleError
from spincascade.validation import ALL_CHECKS, run_all


@pytest.fixture(scope="module")
def results():
    return run_all()


def test_runs_every_check_in_order(results):
    assert [r.number for r in results] == list(range(1, 13))
    assert len({r.name for r in results}) == 12
    assert len(ALL_CHECKS) == 12


def test_results_carry_measurements(results):
    for r in results:
        assert r.expected
        assert isinstance(r.measured, dict) and r.measured


def test_tolerances_validated():
    with pytest.raises(ArgumentError, match="positive"):
        run_all(zero_mode_tol=-1.0)
    with pytest.raises(ToleranceInfeasibleError, match="zero-mode"):
        run_all(zero_mode_tol=1e-16)
    with pytest.raises(ToleranceInfeasibleError, match="flatness"):
        run_all(flatness_tol=1e-12)
