import math

import pytest

from eigennet.config import parse_config
from eigennet.verifier import (
    FAIL,
    PASS,
    SOFT,
    CheckResult,
    VerificationReport,
    _check,
    Verifier,
    midpoint_grid,
    run_verification,
)


@pytest.fixture(scope="module")
def report():
    return run_verification(seed=0)


def test_report_passes(report):
    assert report.passed, report.format_table()
    assert report.failures == []


def test_stated_energies_are_soft(report):
    by_name = {c.name: c for c in report.checks}
    for case in ("fig1", "fig2", "fig3"):
        check = by_name[f"{case} energy vs stated"]
        assert check.status == SOFT
        assert check.passed


@pytest.mark.parametrize("seed", [1, 2])
def test_same_checks_pass_across_seeds(report, seed):
    assert run_verification(seed=seed).passing_names() == report.passing_names()


def test_uses_configured_network(tiny_config):
    checks = Verifier(tiny_config).check_jets()
    assert all(c.status == PASS for c in checks)
    assert len(checks) == 3


def test_seed_defaults_to_config():
    cfg = parse_config(overrides=["training.seed=9"])
    assert Verifier(cfg).seed == 9
    assert Verifier(cfg, seed=3).seed == 3


def test_fd_spectrum_checks(report):
    names = [c.name for c in report.checks]
    assert any("eigh_tridiagonal" in n for n in names)
    assert any("convergence" in n for n in names)


def test_failure_is_reported():
    bad = CheckResult("broken", FAIL, 1.0, 1e-6)
    good = CheckResult("fine", PASS, 0.0, 1e-6)
    report = VerificationReport([good, bad])
    assert not report.passed
    assert report.failures == [bad]
    assert report.passing_names() == ["fine"]


def test_format_table():
    report = VerificationReport([CheckResult("quadrature", PASS, 1.5e-3, 1e-2, "k=1")])
    lines = report.format_table().splitlines()
    assert lines[0].startswith("check")
    assert "PASS" in lines[1]
    assert "1.5000e-03" in lines[1]
    assert lines[1].endswith("k=1")


def test_non_finite_value_fails():
    assert _check("nan", math.nan, 1.0).status == FAIL
    assert _check("ok", 0.5, 1.0).status == PASS


def test_midpoint_grid():
    grid = midpoint_grid(0.0, 1.0, 4)
    assert list(grid) == pytest.approx([0.125, 0.375, 0.625, 0.875])
