"""The eight acceptance criteria, one test each, pinned tolerances.

Each test prints its own PASS/FAIL line (visible with pytest -s or -rA)
and then asserts the verdict. Two criteria contain clauses that are
unattainable as stated; docs/calibration.md carries the measurements.
They are left as plain failing tests on purpose: an honest red beats a
gamed green, and weakening the thresholds here would hide the finding.
Everything else must stay green.
"""

import pytest

from hamsolve.acceptance import CRITERIA

_BY_NUMBER = {number: (name, func) for number, name, func in CRITERIA}


def run_criterion(number: int) -> bool:
    name, func = _BY_NUMBER[number]
    passed, detail = func()
    print(f"{'PASS' if passed else 'FAIL'} {number} {name}: {detail}")
    return passed


def test_criteria_are_numbered_one_through_eight():
    assert sorted(_BY_NUMBER) == [1, 2, 3, 4, 5, 6, 7, 8]


def test_criterion_1_reduced_method_equivalence():
    assert run_criterion(1)


def test_criterion_2_embedding_endpoints():
    assert run_criterion(2)


def test_criterion_3_path_tracing():
    assert run_criterion(3)


def test_criterion_4_jacobian_fd_agreement():
    assert run_criterion(4)


def test_criterion_5_convergence_control():
    # known red: the residual bound in the second clause is below what
    # any hbar can reach at this truncation order on the long domain
    # (global minimum 2.26e-2 at order 15 vs required 1e-2; the same
    # tuned hbar does reach it near order 21). Measurements and the
    # engine-correctness cross-checks: docs/calibration.md.
    assert run_criterion(5)


def test_criterion_6_exact_recovery():
    # known red: the first clause asks the order-10 fixed-parameter sum
    # on the short Riccati case for 1e-4 sup error, but that series
    # contracts by only (2/pi)^2 per two orders and sits at 6.307e-3;
    # 1e-4 first appears near order 24. See docs/calibration.md.
    assert run_criterion(6)


def test_criterion_7_jet_oracle():
    assert run_criterion(7)


def test_criterion_8_determinism():
    assert run_criterion(8)
