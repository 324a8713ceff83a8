import numpy as np
import pytest

from conftest import make_series

from trendflag import (
    FlagResult,
    ForecastDistribution,
    ModelSpec,
    Side,
    StateSpaceMatrices,
    TendencyResult,
    TimeSeries,
    UnsupportedOrderError,
)
from trendflag.errors import ZeroJointProbabilityWarning


class TestTimeSeries:
    def test_years_must_be_consecutive(self):
        with pytest.raises(ValueError, match="consecutive"):
            TimeSeries("x", np.array([2000, 2002]), np.array([1.0, 2.0]))

    def test_infinite_values_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            TimeSeries("x", np.array([2000, 2001]), np.array([1.0, np.inf]))

    def test_nan_is_a_missing_value(self):
        series = make_series([1.0, np.nan, 3.0])
        assert series.n_observed == 2
        assert series.observed.tolist() == [True, False, True]

    def test_from_pairs_sorts_fills_and_trims(self):
        series = TimeSeries.from_pairs(
            "x", [2005, 2001, 2003], [np.nan, 1.0, 3.0]
        )
        assert series.epochs.tolist() == [2001, 2002, 2003]
        assert series.values[0] == 1.0
        assert np.isnan(series.values[1])
        assert series.values[2] == 3.0

    def test_from_pairs_rejects_duplicate_years(self):
        with pytest.raises(ValueError, match="duplicate year"):
            TimeSeries.from_pairs("x", [2000, 2000], [1.0, 2.0])

    def test_window_and_up_to(self):
        series = make_series([1.0, 2.0, 3.0, 4.0], start=2000)
        assert series.window(2001, 2002).values.tolist() == [2.0, 3.0]
        assert series.up_to(2001).epochs.tolist() == [2000, 2001]


class TestModelSpec:
    def test_burn_in_defaults_to_order(self):
        assert ModelSpec(order=1).burn_in == 1
        assert ModelSpec(order=2).burn_in == 2
        assert ModelSpec(order=2, likelihood_burn_in=0).burn_in == 0

    def test_order_validated(self):
        with pytest.raises(UnsupportedOrderError):
            ModelSpec(order=3)

    def test_grid_validated(self):
        with pytest.raises(ValueError):
            ModelSpec(q_ratio_grid=(0.0, 0.5, 0.01))
        with pytest.raises(ValueError):
            ModelSpec(q_ratio_grid=(0.5, 0.05, 0.01))
        with pytest.raises(ValueError):
            ModelSpec(q_ratio_grid=(0.05, 0.5, 0.0))

    def test_default_grid_has_46_points_with_both_ends(self):
        ratios = ModelSpec().ratios()
        assert ratios.size == 46
        assert ratios[0] == pytest.approx(0.05)
        assert ratios[-1] == pytest.approx(0.50)

    def test_single_point_grid(self):
        assert ModelSpec(q_ratio_grid=(0.3, 0.3, 0.1)).ratios().tolist() == [0.3]


class TestStateSpaceMatrices:
    def test_rejects_wrong_entries(self):
        with pytest.raises(ValueError):
            StateSpaceMatrices(1, np.array([[2.0]]), np.array([[1.0]]), np.array([[1.0]]))
        with pytest.raises(ValueError):
            StateSpaceMatrices(
                2,
                np.array([[2.0, -1.0], [1.0, 0.0]]),
                np.array([[1.0], [0.0]]),
                np.array([[1.0, 1.0]]),
            )

    def test_rejects_unsupported_order(self):
        with pytest.raises(UnsupportedOrderError):
            StateSpaceMatrices(3, np.eye(3), np.zeros((3, 1)), np.zeros((1, 3)))


class TestForecastDistribution:
    def test_needs_at_least_one_horizon(self):
        with pytest.raises(ValueError):
            ForecastDistribution(2016, np.array([]), np.array([]))

    def test_rejects_negative_variance(self):
        with pytest.raises(ValueError):
            ForecastDistribution(2016, np.array([1.0]), np.array([-0.5]))

    def test_epochs_run_from_base(self):
        fd = ForecastDistribution(2016, np.array([1.0, 2.0]), np.array([1.0, 2.0]))
        assert fd.epochs.tolist() == [2017, 2018]
        assert fd.horizon == 2


class TestFlagResult:
    def _flag(self, **kw):
        base = dict(
            epoch=2017, observed=1.0, mean=0.0, sd=1.0, z=1.0, side=Side.ABOVE,
            outside_levels=(), p_analytic=0.16, p_mc=0.16,
        )
        base.update(kw)
        return FlagResult(**base)

    def test_side_must_match_z(self):
        with pytest.raises(ValueError):
            self._flag(z=-1.0, side=Side.ABOVE)

    def test_probability_range(self):
        with pytest.raises(ValueError):
            self._flag(p_analytic=1.5)


class TestTendencyResult:
    def test_joint_bounded_by_smallest_per_year(self):
        with pytest.raises(ValueError):
            TendencyResult((0.2, 0.4), 0.3, True, 10, 10, 0)

    def test_zero_joint_warns(self):
        with pytest.warns(ZeroJointProbabilityWarning):
            TendencyResult((0.1, 0.0), 0.0, True, 10, 10, 0)

    def test_valid_result(self):
        result = TendencyResult((0.2, 0.4), 0.08, True, 10, 10, 0)
        assert result.joint_probability == 0.08
