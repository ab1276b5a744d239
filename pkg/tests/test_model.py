"""Validation and closed-form evaluation of the economic primitives."""

import math

import numpy as np
import pytest

import chainsolve as cs


class TestMakeModel:
    def test_figure1_parameterization_is_valid(self):
        model = cs.make_model(
            {"cost": {"family": "exp_affine", "a": 10}, "delta": 10,
             "g": {"family": "linear", "beta": 50}}
        )
        assert model.delta == 10
        assert model.cost_ceiling == pytest.approx(math.exp(10) - 1)

    def test_delta_below_one_rejected(self):
        with pytest.raises(cs.ParameterOutOfRangeError):
            cs.make_model(
                {"cost": {"family": "exp_affine", "a": 1}, "delta": 0.9,
                 "g": {"family": "linear", "beta": 1}}
            )

    def test_power_family_warns_on_flat_origin(self):
        with pytest.warns(cs.ZeroOriginSlopeWarning):
            model = cs.make_model(
                {"cost": {"family": "power", "theta": 1.2}, "delta": 1.05,
                 "g": {"family": "power", "beta": 0.0005, "gamma": 1.5}}
            )
        assert model.cost_ceiling == 1.0
        assert model.origin_slope == 1e-12  # floor substitution

    def test_exp_square_warns_on_flat_origin(self):
        with pytest.warns(cs.ZeroOriginSlopeWarning):
            cs.model_from("exp_square", None, 1.1, "linear", 0.01)

    def test_unknown_families_rejected(self):
        with pytest.raises(cs.UnknownFamilyError):
            cs.model_from("cubic", None, 2.0, "linear", 1.0)
        with pytest.raises(cs.UnknownFamilyError):
            cs.model_from("exp_affine", 1.0, 2.0, "quadratic", 1.0)

    def test_parameter_ranges(self):
        with pytest.raises(cs.ParameterOutOfRangeError):
            cs.model_from("exp_affine", -1.0, 2.0, "linear", 1.0)
        with pytest.raises(cs.ParameterOutOfRangeError):
            cs.model_from("exp_affine", 1.0, 2.0, "linear", 0.0)
        with pytest.raises(cs.ParameterOutOfRangeError):
            cs.model_from("exp_affine", 1.0, 2.0, "power", 1.0, gamma=0.5)
        with pytest.raises(cs.ParameterOutOfRangeError):
            cs.model_from("exp_affine", None, 2.0, "linear", 1.0)

    def test_nonconvex_power_rejected(self):
        # theta <= 1 breaks strict convexity; the offending point is reported
        with pytest.raises(cs.AssumptionViolatedError) as err:
            cs.model_from("power", 0.8, 2.0, "linear", 1.0)
        assert err.value.grid_point is not None

    def test_linear_power_rejected(self):
        with pytest.raises(cs.AssumptionViolatedError):
            cs.model_from("power", 1.0, 2.0, "linear", 1.0)


class TestEvalCost:
    def test_zero_at_origin(self, fig1_model):
        assert cs.eval_cost(fig1_model, 0.0) == 0.0

    def test_exp_affine_closed_form(self, fig1_model):
        assert cs.eval_cost(fig1_model, 1.0) == pytest.approx(math.exp(10) - 1, rel=1e-15)

    def test_power_at_one(self, fig4a_model):
        assert cs.eval_cost(fig4a_model, 1.0) == 1.0

    def test_poly_and_exp_plus_square(self):
        m4 = cs.model_from("poly_affine", None, 1.1, "linear", 0.01)
        m5 = cs.model_from("exp_plus_square", None, 1.1, "linear", 0.05)
        assert cs.eval_cost(m4, 0.5) == pytest.approx(0.75)
        assert cs.eval_cost(m5, 1.0) == pytest.approx(math.e, rel=1e-15)

    def test_domain_errors(self, fig1_model):
        with pytest.raises(cs.DomainError):
            cs.eval_cost(fig1_model, -0.1)
        with pytest.raises(cs.DomainError):
            cs.eval_cost(fig1_model, 1.1)

    def test_strictly_increasing_on_grid(self, fig1_model, fig4a_model):
        xs = np.linspace(0.0, 1.0, 1000)
        for model in (fig1_model, fig4a_model):
            cx = cs.eval_cost(model, xs)
            assert np.all(np.diff(cx) > 0)

    def test_midpoint_convexity(self, fig4a_model):
        rng = np.random.default_rng(7)
        x = rng.uniform(0.0, 1.0, 300)
        y = rng.uniform(0.0, 1.0, 300)
        keep = np.abs(x - y) > 1e-3
        x, y = x[keep], y[keep]
        mid = cs.eval_cost(fig4a_model, (x + y) / 2)
        avg = (cs.eval_cost(fig4a_model, x) + cs.eval_cost(fig4a_model, y)) / 2
        assert np.all(mid < avg + 1e-12)

    def test_derivative_matches_finite_differences(self, small_model):
        xs = np.linspace(0.1, 0.9, 17)
        h = 1e-7
        fd = (cs.eval_cost(small_model, xs + h) - cs.eval_cost(small_model, xs - h)) / (2 * h)
        assert cs.eval_cost_derivative(small_model, xs) == pytest.approx(fd, rel=1e-6)


class TestEvalG:
    def test_zero_at_one_partner(self, fig1_model):
        assert cs.eval_g(fig1_model, 1) == 0.0

    def test_linear_closed_form(self, fig1_model):
        assert cs.eval_g(fig1_model, 3) == 100.0

    def test_power_closed_form(self, fig4a_model):
        assert cs.eval_g(fig4a_model, 5) == pytest.approx(0.0005 * 4**1.5, rel=1e-15)

    def test_domain_error(self, fig1_model):
        with pytest.raises(cs.DomainError):
            cs.eval_g(fig1_model, 0)

    def test_strictly_increasing_to_ten_thousand(self, fig1_model, fig4a_model):
        k = np.arange(1, 10_001)
        for model in (fig1_model, fig4a_model):
            g = cs.eval_g(model, k)
            assert np.all(np.diff(g) > 0)


def test_describe_round_trips(fig4a_model):
    block = fig4a_model.describe()
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", cs.ZeroOriginSlopeWarning)
        again = cs.make_model(block)
    assert again == fig4a_model
