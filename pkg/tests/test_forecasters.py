"""The four model variants and their prediction intervals."""

import numpy as np
import pytest

from mortfpca.components import FULL_RANK, ComponentRule
from mortfpca.errors import AlphaOutOfRange, EmptyBundle
from mortfpca.forecasters import (
    MODELS,
    CoherentResult,
    ForecastSurface,
    IndependentResult,
    ProductRatioResult,
    WmfpcaResult,
    fit_coherent,
    fit_model,
    fit_product_ratio,
    in_sample_reconstruction,
    predict_interval,
)
from mortfpca.smoothing import ResidualField
from mortfpca.ufpca import geometric_weights

RULE = ComponentRule(threshold=0.9)
Z_95 = 1.959963984540054


@pytest.fixture(scope="module")
def results(small_truth):
    """One fitted result per model on the noise-free bundle."""
    return {
        model: fit_model(small_truth, model, h=3, kappa=0.5, rule=RULE)
        for model in MODELS
    }


def test_fit_model_dispatch(results, small_truth):
    assert isinstance(results["independent"], IndependentResult)
    assert isinstance(results["wmfpca"], WmfpcaResult)
    assert isinstance(results["coherent"], CoherentResult)
    assert isinstance(results["product_ratio"], ProductRatioResult)
    for result in results.values():
        assert result.population_ids == small_truth.population_ids
        assert result.horizon == 3
        assert np.array_equal(result.train_years, small_truth.years)
    # the independent and product-ratio baselines never weight years
    np.testing.assert_allclose(results["independent"].weights.weights, 1.0 / 18)
    np.testing.assert_allclose(results["product_ratio"].weights.weights, 1.0 / 18)
    np.testing.assert_allclose(
        results["wmfpca"].weights.weights, geometric_weights(0.5, 18).weights
    )


def test_fit_model_validation(small_truth):
    with pytest.raises(ValueError):
        fit_model(small_truth, "lee_carter")
    with pytest.raises(ValueError):
        fit_model(small_truth, "wmfpca", h=0, kappa=0.5)
    with pytest.raises(EmptyBundle):
        fit_model([], "independent")


def test_kappa_none_means_uniform_weights(small_truth):
    result = fit_model(small_truth, "wmfpca", h=1, kappa=None, rule=RULE)
    np.testing.assert_allclose(result.weights.weights, 1.0 / 18)


@pytest.mark.parametrize("model", MODELS)
def test_interval_variance_assembly(results, model, small_truth):
    result = results[model]
    surfaces = predict_interval(result, residuals=None, alpha=0.05)
    assert len(surfaces) == small_truth.n_populations

    # residuals=None leaves exactly the score-forecast variance terms
    if model == "independent":
        terms = [[(result.score_forecasts[i], result.fits[i].eigenfunctions)]
                 for i in range(2)]
        bases = [result.fits[i].mean_fn for i in range(2)]
    elif model == "wmfpca":
        terms = [[(result.score_forecasts, result.fit.multi_eigenfunctions[i])]
                 for i in range(2)]
        bases = [result.fit.per_pop_fits[i].mean_fn for i in range(2)]
    elif model == "coherent":
        terms = [
            [
                (result.common_forecasts, result.fit.common_fit.eigenfunctions),
                (result.deviation_forecasts,
                 result.fit.deviation_fit.multi_eigenfunctions[i]),
            ]
            for i in range(2)
        ]
        bases = [result.fit.total_mean + result.fit.deviation_means[i]
                 for i in range(2)]
    else:
        terms = [
            [
                (result.product_forecasts, result.product_fit.eigenfunctions),
                (result.ratio_forecasts[i], result.ratio_fits[i].eigenfunctions),
            ]
            for i in range(2)
        ]
        bases = [result.product_fit.mean_fn + result.ratio_fits[i].mean_fn
                 for i in range(2)]

    for i, surface in enumerate(surfaces):
        mean = np.tile(bases[i], (3, 1))
        variance = np.zeros_like(mean)
        for forecasts, ef in terms[i]:
            s_mean = np.column_stack([f.mean for f in forecasts])
            s_var = np.column_stack([f.variance for f in forecasts])
            mean = mean + s_mean @ ef
            variance = variance + s_var @ ef**2
        np.testing.assert_allclose(surface.mean, mean, atol=1e-10)
        np.testing.assert_allclose(surface.variance, variance, atol=1e-10)
        np.testing.assert_allclose(
            surface.lower, mean - Z_95 * np.sqrt(variance), atol=1e-10
        )
        np.testing.assert_allclose(
            surface.upper, mean + Z_95 * np.sqrt(variance), atol=1e-10
        )


def test_residual_fields_add_mean_and_observation_variance(results, small_truth):
    result = results["wmfpca"]
    n_ages = small_truth.ages.size
    sigma = np.full((18, n_ages), 0.2)
    residuals = [
        ResidualField(sigma=sigma, sigma_avg=np.full(n_ages, 0.3)) for _ in range(2)
    ]
    bare = predict_interval(result, residuals=None)
    rich = predict_interval(result, residuals)
    w = result.weights.weights
    extra = float(w @ w) * 0.2**2 + 0.3**2
    np.testing.assert_allclose(rich[0].variance - bare[0].variance, extra, rtol=1e-10)
    np.testing.assert_allclose(rich[0].mean, bare[0].mean, atol=1e-12)


def test_horizon_years_continue_training_years(results, small_truth):
    surfaces = predict_interval(results["independent"])
    expected = small_truth.years[-1] + 1 + np.arange(3)
    np.testing.assert_array_equal(surfaces[0].horizon_years, expected)


def test_alpha_controls_width(results):
    wide = predict_interval(results["independent"], alpha=0.05)[0]
    narrow = predict_interval(results["independent"], alpha=0.2)[0]
    assert np.all(narrow.upper - narrow.lower < wide.upper - wide.lower + 1e-15)
    assert np.all(wide.lower <= wide.mean) and np.all(wide.mean <= wide.upper)
    for alpha in (0.0, 1.0, -0.5):
        with pytest.raises(AlphaOutOfRange):
            predict_interval(results["independent"], alpha=alpha)


@pytest.mark.parametrize("model", MODELS)
def test_full_rank_in_sample_reconstruction(model, small_truth):
    # the noise-free curves have rank-3 structure, so full-rank fits are
    # small and reconstruction must return the training data
    result = fit_model(small_truth, model, h=1, kappa=0.5, rule=FULL_RANK)
    recons = in_sample_reconstruction(result)
    for surface, recon in zip(small_truth, recons):
        np.testing.assert_allclose(recon, surface.log_rates, atol=1e-8)


def test_in_sample_reconstruction_rejects_unknown_result():
    with pytest.raises(TypeError):
        in_sample_reconstruction(object())


def test_coherent_identical_populations_forecast_no_gap(small_truth):
    curves = small_truth[0].log_rates
    result = fit_coherent([curves, curves.copy()], kappa=0.4, rule=RULE, h=30)
    surfaces = predict_interval(result)
    gap = surfaces[0].mean - surfaces[1].mean
    assert np.max(np.abs(gap)) < 1e-6
    for mean in result.fit.deviation_means:
        pass  # identical populations share one deviation mean
    np.testing.assert_allclose(
        result.fit.deviation_means[0], result.fit.deviation_means[1], atol=1e-9
    )


def test_product_ratio_ratios_cancel_across_populations(small_truth):
    result = fit_product_ratio(small_truth, rule=FULL_RANK, h=1)
    np.testing.assert_allclose(
        result.ratio_fits[0].mean_fn + result.ratio_fits[1].mean_fn, 0.0, atol=1e-12
    )


def test_forecast_surface_validation():
    years = np.array([2001, 2002])
    good = dict(
        population_id="pop",
        horizon_years=years,
        mean=np.zeros((2, 3)),
        variance=np.zeros((2, 3)),
        lower=np.zeros((2, 3)),
        upper=np.zeros((2, 3)),
    )
    ForecastSurface(**good)
    with pytest.raises(ValueError):
        ForecastSurface(**{**good, "variance": np.full((2, 3), -1.0)})
    with pytest.raises(ValueError):
        ForecastSurface(**{**good, "upper": np.zeros((2, 2))})
    with pytest.raises(ValueError):
        ForecastSurface(**{**good, "mean": np.zeros((3, 3))})
