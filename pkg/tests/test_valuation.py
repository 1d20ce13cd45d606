import pytest

from monitor.valuation import check_conservative_valuation, is_delta_stable, valuation_violations


@pytest.fixture
def eventually(f):
    return f("F[0, 5] x >= 3")


def test_conservative_valuation_passes(ramp, f, eventually):
    atom = f("x >= 3")
    theta = {atom: [False, True], eventually: [True, True]}
    assert valuation_violations(ramp, eventually, [0.0, 3.0, 10.0], theta, 0.1) == []
    assert check_conservative_valuation(ramp, eventually, [0.0, 3.0, 10.0], theta, 0.1)


def test_true_claim_on_partly_false_interval(ramp, f, eventually):
    atom = f("x >= 3")
    theta = {atom: [True, True], eventually: [True, True]}
    (violation,) = valuation_violations(ramp, eventually, [0.0, 3.0, 10.0], theta, 0.1)
    assert violation.formula == atom
    assert violation.interval == 1
    assert violation.claimed is True
    assert "false somewhere" in violation.to_text()


def test_false_claim_where_tightened_formula_holds(ramp, f, eventually):
    atom = f("x >= 3")
    theta = {atom: [False, True], eventually: [True, True]}
    (violation,) = valuation_violations(ramp, eventually, [0.0, 5.0, 10.0], theta, 0.1)
    assert violation.interval == 1
    assert violation.claimed is False


def test_false_claim_inside_the_delta_band_is_conservative(ramp, f):
    atom = f("x >= 3")
    # x ≤ 3.05 on [0, 3.05]: atom partly true there, but x ≥ 3.1 nowhere
    assert valuation_violations(ramp, atom, [0.0, 3.05, 10.0], {atom: [False, True]}, 0.1) == []


def test_missing_or_short_valuation(ramp, f, eventually):
    violations = valuation_violations(ramp, eventually, [0.0, 3.0, 10.0], {eventually: [True]}, 0.1)
    assert [v.interval for v in violations] == [0, 0]


def test_tolerance_ignores_tiny_overhangs(ramp, f):
    atom = f("x >= 3")
    gamma = [0.0, 3.0 - 1e-9, 10.0]
    assert valuation_violations(ramp, atom, gamma, {atom: [False, True]}, 0.1) != []
    assert valuation_violations(ramp, atom, gamma, {atom: [False, True]}, 0.1, tolerance=1e-6) == []


def test_delta_stable_partitions(ramp, f):
    atom = f("x >= 3")
    assert is_delta_stable(ramp, atom, [0.0, 3.0, 10.0], 0.1)
    assert is_delta_stable(ramp, atom, [0.0, 3.05, 10.0], 0.1)
    assert not is_delta_stable(ramp, atom, [0.0, 5.0, 10.0], 0.1)
