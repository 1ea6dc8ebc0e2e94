import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mitbench.errors import FitFailureError, InvalidInputError
from mitbench.mitigation import FitSpec, extrapolate
from mitbench.oracles import richardson_coefficients


def test_linear_two_points():
    fit = extrapolate([(1, 0.8), (3, 0.6)], "linear")
    assert fit.params[1] == pytest.approx(-0.1)
    assert fit.extrapolated == pytest.approx(0.9)


def test_richardson_weights():
    fit = extrapolate([(1, 0.3), (3, 0.2), (5, 0.1)], "richardson")
    assert fit.params == pytest.approx((15 / 8, -5 / 4, 3 / 8), abs=1e-12)
    assert fit.extrapolated == pytest.approx(15 / 8 * 0.3 - 5 / 4 * 0.2 + 3 / 8 * 0.1)


def test_exponential_two_level_closed_form():
    g, v = 0.9, 0.5
    fit = extrapolate([(1, g * v), (3, g**3 * v)], "exponential")
    closed = (g * v) ** (3 / 2) * (g**3 * v) ** (-1 / 2)
    assert fit.extrapolated == pytest.approx(v, abs=1e-9)
    assert fit.extrapolated == pytest.approx(closed, abs=1e-12)


def test_exponential_negative_values():
    fit = extrapolate([(lam, -0.7 * math.exp(-0.1 * lam)) for lam in (1, 3, 5)], "exponential")
    assert fit.extrapolated == pytest.approx(-0.7, abs=1e-12)
    assert fit.params[1] == pytest.approx(0.1)


def test_mixed_signs_fall_back_to_linear():
    fit = extrapolate([(1, 0.1), (3, -0.05), (5, -0.2)], "exponential")
    assert fit.model == "linear"
    assert fit.info["fallback"] == "linear"


def test_exponential_with_offset():
    pts = [(lam, 0.6 * math.exp(-0.2 * lam) + 0.1) for lam in (1, 3, 5, 7, 9)]
    fit = extrapolate(pts, "exponential", offset=True)
    assert fit.extrapolated == pytest.approx(0.7, abs=1e-8)
    assert fit.params == pytest.approx((0.6, 0.2, 0.1), abs=1e-8)


def test_poly_exponential():
    pts = [(lam, 0.8 * math.exp(-0.1 * lam - 0.01 * lam * lam)) for lam in (1, 3, 5, 7)]
    fit = extrapolate(pts, "poly_exponential(2)")
    assert fit.extrapolated == pytest.approx(0.8, abs=1e-10)


def test_poly_exponential_offset():
    pts = [(lam, 0.5 * math.exp(-0.1 * lam - 0.02 * lam * lam) + 0.05) for lam in (1, 3, 5, 7, 9)]
    fit = extrapolate(pts, "poly_exponential", order=2, offset=True)
    assert fit.extrapolated == pytest.approx(0.55, abs=1e-6)


def test_weighting_prefers_precise_points():
    pts = [(1, 1.0, 1e-6), (3, 0.8, 1e-6), (5, 10.0, 1e6)]
    fit = extrapolate(pts, "linear")
    assert fit.info["weighted"]
    assert fit.extrapolated == pytest.approx(1.1, abs=1e-4)


def test_linear_variance_propagation():
    pts = [(1, 0.8, 0.01), (3, 0.6, 0.01)]
    fit = extrapolate(pts, "linear")
    # value at 0 is 1.5·y1 − 0.5·y3
    assert fit.info["extrapolated_variance"] == pytest.approx((1.5**2 + 0.5**2) * 0.01)


@pytest.mark.parametrize(
    "points, model",
    [
        ([(1, 0.5), (1, 0.4)], "linear"),
        ([(1, 0.5)], "linear"),
        ([(1, 0.5), (3, 0.4)], "polynomial(2)"),
        ([(1, float("nan")), (3, 0.4)], "linear"),
        ([(1, 0.5, -1.0), (3, 0.4, 0.1)], "linear"),
    ],
)
def test_invalid_points(points, model):
    with pytest.raises(InvalidInputError):
        extrapolate(points, model)


def test_nonconvergent_fit_carries_diagnostics():
    # a few LM steps cannot settle on a flat-then-jump series
    pts = [(1, 1.0), (3, 1.0), (5, 1.0), (7, -50.0)]
    try:
        fit = extrapolate(pts, "exponential", offset=True)
    except FitFailureError as exc:
        assert exc.diagnostics
    else:
        assert math.isfinite(fit.extrapolated)


@pytest.mark.parametrize(
    "text, spec",
    [
        ("linear", FitSpec("linear")),
        ("polynomial(3)", FitSpec("polynomial", 3)),
        (" poly_exponential ( 2 ) ", FitSpec("poly_exponential", 2)),
    ],
)
def test_fitspec_parse(text, spec):
    assert FitSpec.parse(text) == spec


@pytest.mark.parametrize("args", [("cubic",), ("polynomial",), ("linear", 2), ("linear", None, True)])
def test_fitspec_rejects(args):
    with pytest.raises(InvalidInputError):
        FitSpec(*args)


@given(st.integers(1, 3), st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_polynomial_data_recovered(order, coeffs):
    lams = [1, 3, 5, 7][: order + 1]
    pts = [(lam, sum(c * lam**k for k, c in enumerate(coeffs[: order + 1]))) for lam in lams]
    assert extrapolate(pts, "richardson").extrapolated == pytest.approx(coeffs[0], abs=1e-10)
    assert extrapolate(pts, FitSpec("polynomial", order)).extrapolated == pytest.approx(coeffs[0], abs=1e-9)


@given(st.lists(st.floats(0.1, 20), min_size=2, max_size=5, unique=True))
def test_richardson_matches_oracle(alphas):
    if min(abs(a - b) for i, a in enumerate(alphas) for b in alphas[i + 1:]) < 0.05:
        return
    fit = extrapolate([(a, 0.0) for a in alphas], "richardson")
    assert np.allclose(fit.params, richardson_coefficients(alphas), rtol=1e-8, atol=1e-8)
