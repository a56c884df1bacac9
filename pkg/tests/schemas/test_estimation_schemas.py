"""
Tests for the frozen estimation and experiment schemas.
"""

import dataclasses
import math

import numpy as np
import pytest

from src.schemas.estimation import (
    BinomialSweepReport,
    LevelFit,
    MapEstimate,
    NoisySequence,
    PriorConditionReport,
)
from src.schemas.experiment import ExperimentConfig, ExperimentReport, ReportRow, TestSignal
from src.services.errors import InvalidInputError, InvalidParameterError
from src.services.map_core import trunc_geom_prior


class TestPriorSpec:

    def test_read_only(self):
        prior = trunc_geom_prior(n=4, q=0.5, gamma=2.0)
        with pytest.raises(ValueError):
            prior.log_pi[0] = 0.0
        with pytest.raises(dataclasses.FrozenInstanceError):
            prior.gamma = 3.0

    def test_tau_ratio(self):
        assert trunc_geom_prior(n=4, q=0.5, gamma=2.5).tau_squared_ratio == 2.5


class TestNoisySequence:

    def test_copies_input(self):
        y = np.array([1.0, 2.0])
        seq = NoisySequence(y=y, sigma=1.0)
        y[0] = 99.0
        assert seq.y[0] == 1.0
        assert seq.n == 2

    @pytest.mark.parametrize("y", [np.array([]), np.array([1.0, np.nan]), np.ones((2, 2))])
    def test_rejects_bad_vectors(self, y):
        with pytest.raises(InvalidInputError):
            NoisySequence(y=y, sigma=1.0)

    def test_rejects_sigma(self):
        with pytest.raises(InvalidParameterError):
            NoisySequence(y=np.ones(2), sigma=0.0)


def test_map_estimate_support():
    est = MapEstimate(kappa_hat=2, threshold=1.5, mu_hat=np.array([0, 2.0, 0, -1.5]), objective=np.zeros(5))
    np.testing.assert_array_equal(est.support, [1, 3])


def test_sweep_report_tolerance():
    report = BinomialSweepReport(n_max=10, pairs_checked=45, lower_slack=-1e-12, upper_slack=0.5, refined_slack=0.1)
    assert report.holds(1e-9)
    assert not report.holds(0.0)


def test_prior_condition_report():
    assert PriorConditionReport(True, True, True).all_hold
    assert not PriorConditionReport(True, False, True).all_hold


class TestLevelFit:

    def test_as_dict_writes_null_threshold(self):
        fit = LevelFit(j=4, q_hat=0.5, gamma_hat=2.0, kappa_hat=1, profile_loglik=-3.0, size=16)
        payload = fit.as_dict()
        assert payload["threshold"] is None
        assert payload["level"] == 4
        assert payload["kappa_hat"] == 0

    @pytest.mark.parametrize("kwargs", [
        dict(q_hat=0.0, gamma_hat=1.0, kappa_hat=0),
        dict(q_hat=0.5, gamma_hat=-1.0, kappa_hat=0),
        dict(q_hat=0.5, gamma_hat=1.0, kappa_hat=-1),
    ])
    def test_validation(self, kwargs):
        with pytest.raises(InvalidParameterError):
            LevelFit(j=None, profile_loglik=0.0, **kwargs)


class TestExperimentSchemas:

    def test_signal_grid(self):
        signal = TestSignal(name="x", samples=np.zeros(4))
        np.testing.assert_allclose(signal.grid, [0.25, 0.5, 0.75, 1.0])

    def test_config_to_dict(self):
        config = ExperimentConfig(signals=["wave"])
        data = config.to_dict()
        assert data["signals"] == ["wave"]
        assert data["replications"] == 100
        assert data["filter"] == "coif3"

    def test_report_records_carry_schema_version(self):
        report = ExperimentReport(rows=[ReportRow("wave", 3.0, "map-global", 0.1, 1.0, 5.0, 2, 0)])
        record = report.records()[0]
        assert record["schema_version"] == 1
        assert list(record) == list(ExperimentReport.COLUMNS)
        assert report.group("wave", 3.0) == report.rows
        assert report.group("wave", 5.0) == []
