from __future__ import annotations

import pytest

from modules.checks import SUITES, run_all_suites


def test_all_suites_pass_with_small_samples() -> None:
    result = run_all_suites(seed=42, samples=3)
    suites_df = result["suites_df"]

    assert result["passed"] is True
    assert list(suites_df.columns) == ["suite", "check", "samples", "max_violation", "tolerance", "passed", "detail"]
    assert list(dict.fromkeys(suites_df["suite"])) == list(SUITES)


def test_single_sample_passes() -> None:
    result = run_all_suites(seed=7, samples=1, suites=["states", "oracle", "three_tangle", "general_events"])

    assert result["passed"] is True
    assert set(result["suites_df"]["suite"]) == {"states", "oracle", "three_tangle", "general_events"}


def test_suites_are_deterministic_for_a_seed() -> None:
    first = run_all_suites(seed=11, samples=5, suites=["measures", "conservation", "monogamy_symmetry"])
    second = run_all_suites(seed=11, samples=5, suites=["measures", "conservation", "monogamy_symmetry"])

    assert first["suites_df"].equals(second["suites_df"])


def test_corrupted_tolerance_fails() -> None:
    result = run_all_suites(seed=42, samples=2, tolerance_scale=-1.0, suites=["qmath", "trends"])

    assert result["passed"] is False
    assert not result["suites_df"]["passed"].any()
    exact = result["suites_df"].set_index("check").loc["c1r1_peak_at_ln2"]
    assert exact["max_violation"] == 0.0
    assert not exact["passed"]


def test_bad_arguments_raise() -> None:
    with pytest.raises(ValueError):
        run_all_suites(samples=0)
    with pytest.raises(ValueError):
        run_all_suites(suites=["astrology"])


def test_general_events_pair_every_death_with_a_birth() -> None:
    suites_df = run_all_suites(seed=3, samples=40, suites=["general_events"])["suites_df"]
    rows = suites_df.set_index("check")

    assert list(rows.index) == ["matches_closed_form", "esb_follows_esd", "unpaired_esd"]
    assert rows.loc["esb_follows_esd", "samples"] == 40
    assert rows.loc["esb_follows_esd", "max_violation"] <= 1e-6
    assert rows.loc["unpaired_esd", "max_violation"] == 0.0
    assert rows["passed"].all()


def test_reservoir_trend_passes_on_defaults() -> None:
    suites_df = run_all_suites(seed=42, samples=1, suites=["reservoir"])["suites_df"]

    assert suites_df.set_index("check").loc["n_convergence", "passed"]
