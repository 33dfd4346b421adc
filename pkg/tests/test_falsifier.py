import numpy as np
import pytest

from macrophase import bounds as B
from macrophase.errors import ConfigurationError
from macrophase.falsifier import (CENSUS_TOLERANCES, HIST_BINS, FalsifierReport,
                                  bound_sign_census, census_rhs, falsify_triangle,
                                  falsify_uncertainty, sample_random_composite, slack_histogram,
                                  _triangle_slack)


def test_sampling_is_deterministic():
    a = sample_random_composite(42, 3)
    b = sample_random_composite(42, 3)
    np.testing.assert_array_equal(a.frame, b.frame)
    np.testing.assert_array_equal(a.coefficients, b.coefficients)


def test_sampling_normalization():
    for seed in range(20):
        s = sample_random_composite(seed, 2 + seed % 3)
        assert s.total_norm == pytest.approx(1, abs=1e-10)
        u = sample_random_composite(seed, 2, normalized=False)
        assert 0 < u.total_norm <= 2 + 1e-12
        assert not u.normalized


def test_sampling_needs_two_branches():
    with pytest.raises(ConfigurationError):
        sample_random_composite(0, 1)


@pytest.mark.parametrize("study", [falsify_uncertainty, falsify_triangle, bound_sign_census])
def test_trials_must_be_positive(study):
    with pytest.raises(ConfigurationError):
        study(0, 1)


def test_uncertainty_no_violations_both_populations():
    rep = falsify_uncertainty(400, 5)
    assert rep.violations == 0
    assert rep.breakdown["normalized"]["trials"] == rep.breakdown["unnormalized"]["trials"] == 200
    assert sum(rep.histogram) == 400 and len(rep.histogram) == HIST_BINS


def test_triangle_populations_reported_separately():
    rep = falsify_triangle(300, 5)
    assert set(rep.breakdown) == {"structured", "random"}
    assert rep.trials == 600
    for pop in rep.breakdown.values():
        assert pop["evaluated"] + pop["skipped"] == 300
        assert 0 <= pop["violation_rate"] <= 1


def test_triangle_trivial_triples():
    a = np.array([1.0, 0.0, 0.0])
    assert _triangle_slack(a, a, a) == 0
    b, c = np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0])
    assert _triangle_slack(a, b, c) == 1


def test_census_normalized_sign_and_monotone():
    rep = bound_sign_census(500, 9)
    assert rep.violations == 0
    for name in ("eq11", "eq16", "eq24", "eq25"):
        fr = rep.breakdown["normalized"][name]["positive_fraction"]
        assert fr[f"{CENSUS_TOLERANCES[0]:g}"] == 0
    for stats in rep.breakdown["unnormalized"].values():
        fr = [stats["positive_fraction"][f"{t:g}"] for t in CENSUS_TOLERANCES]
        assert all(a >= b for a, b in zip(fr, fr[1:]))
    counts = np.array(rep.breakdown["unnormalized_eq11_map"]["counts"])
    assert counts.sum() == 500


def test_census_substitution_examples():
    rhs = census_rhs(0.75, 0.75, B.OverlapZ(1), 0.0)
    assert rhs["eq11"] == pytest.approx(0.5 / 0.5625)
    assert census_rhs(0.5, 0.5, B.OverlapZ(1), 0.0)["eq11"] == 0.0


def test_reports_replay_bitwise():
    for study in (falsify_uncertainty, falsify_triangle, bound_sign_census):
        assert study(50, 3).to_json() == study(50, 3).to_json()
    assert falsify_uncertainty(50, 3).to_json() != falsify_uncertainty(50, 4).to_json()


def test_histogram_clamps():
    h = slack_histogram([-5.0, 0.0, 5.0])
    assert h[0] == 1 and h[-1] == 1 and sum(h) == 3


def test_report_invariant():
    with pytest.raises(ValueError):
        FalsifierReport("x", 0, 1, 2, 0.0, 0.0, [])
