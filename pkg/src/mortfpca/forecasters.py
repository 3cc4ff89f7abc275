"""Forecasting models for multi-population log-mortality surfaces.

Four variants share one pipeline shape: decompose smoothed annual curves
into principal components, model each score series with an automatically
chosen ARIMA, and recombine.

``independent``
    One unweighted FPCA per population, all scores nonstationary.  Fast
    baseline; population forecasts may diverge without bound.
``wmfpca``
    A single weighted multivariate FPCA across populations with shared
    scores, all nonstationary.
``coherent``
    A weighted FPCA of the cross-population average curve (nonstationary
    scores) plus a weighted multivariate FPCA of the deviations from its
    reconstruction (stationary scores).  Stationary deviations keep
    population gaps bounded at long horizons.
``product_ratio``
    Unweighted FPCA of the average log curve (nonstationary) and of each
    population's log ratio to it (stationary).  The classical coherent
    baseline.

Prediction intervals combine three variance pieces per age: the variance of
the estimated weighted mean, the score forecast variances mapped through
squared eigenfunctions, and the smoothing residual scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .components import ComponentRule
from .errors import AlphaOutOfRange, EmptyBundle
from .mfpca import MfpcaFit, fit_mfpca, reconstruct_all_mfpca, _extract_curves
from .smoothing import ResidualField
from .tsmodels import ScoreForecast, fit_auto, forecast
from .ufpca import (
    FpcaFit,
    WeightScheme,
    fit_ufpca,
    geometric_weights,
    reconstruct_all,
    uniform_weights,
)

MODELS = ("independent", "wmfpca", "coherent", "product_ratio")


@dataclass(eq=False)
class ForecastSurface:
    """Forecast means, variances and interval bounds for one population."""

    population_id: str
    horizon_years: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.horizon_years = np.asarray(self.horizon_years, dtype=int)
        for name in ("mean", "variance", "lower", "upper"):
            arr = np.asarray(getattr(self, name), dtype=float)
            setattr(self, name, arr)
            if arr.shape[0] != self.horizon_years.size or arr.shape != self.mean.shape:
                raise ValueError(f"{name} shape {arr.shape} inconsistent")
        if np.any(self.variance < 0):
            raise ValueError("variance must be non-negative")


@dataclass(eq=False)
class CoherentFit:
    """Pieces of the coherent decomposition.

    ``total_mean`` is the weighted mean of the cross-population average
    curve; ``deviation_means`` hold each population's weighted mean
    deviation from the reconstructed average trend.
    """

    total_mean: np.ndarray
    common_fit: FpcaFit
    deviation_means: list
    deviation_fit: MfpcaFit


@dataclass(eq=False)
class IndependentResult:
    population_ids: list
    train_years: np.ndarray
    horizon: int
    weights: WeightScheme
    fits: list
    score_forecasts: list  # per population, list of ScoreForecast


@dataclass(eq=False)
class WmfpcaResult:
    population_ids: list
    train_years: np.ndarray
    horizon: int
    weights: WeightScheme
    fit: MfpcaFit
    score_forecasts: list  # shared components


@dataclass(eq=False)
class CoherentResult:
    population_ids: list
    train_years: np.ndarray
    horizon: int
    weights: WeightScheme
    fit: CoherentFit
    common_forecasts: list
    deviation_forecasts: list


@dataclass(eq=False)
class ProductRatioResult:
    population_ids: list
    train_years: np.ndarray
    horizon: int
    weights: WeightScheme
    product_fit: FpcaFit
    ratio_fits: list
    product_forecasts: list
    ratio_forecasts: list  # per population


def _bundle_parts(bundle):
    curves = _extract_curves(bundle)
    if not curves:
        raise EmptyBundle("no populations to fit")
    if hasattr(bundle, "population_ids"):
        ids = list(bundle.population_ids)
        years = np.asarray(bundle.years)
    else:
        ids = [f"pop{i}" for i in range(len(curves))]
        years = np.arange(curves[0].shape[0])
    return curves, ids, years


def _forecast_scores(scores: np.ndarray, mode: str, h: int):
    out = []
    for series in scores.T:
        spec = fit_auto(series, mode=mode)
        out.append(forecast(spec, series, h))
    return out


def _check_horizon(h: int):
    if h < 1:
        raise ValueError(f"horizon must be >= 1, got {h}")


def fit_independent(bundle, rule: ComponentRule | None = None, h: int = 20,
                    weights: WeightScheme | None = None) -> IndependentResult:
    """Per-population FPCA with nonstationary score models.

    Unweighted unless an explicit :class:`WeightScheme` is supplied.
    """
    _check_horizon(h)
    curves, ids, years = _bundle_parts(bundle)
    if weights is None:
        weights = uniform_weights(curves[0].shape[0])
    fits = [fit_ufpca(c, weights, rule) for c in curves]
    score_forecasts = [
        _forecast_scores(f.scores, "nonstationary", h) for f in fits
    ]
    return IndependentResult(ids, years, h, weights, fits, score_forecasts)


def fit_wmfpca(bundle, kappa: float | None, rule: ComponentRule | None = None,
               h: int = 20, weight_power: float = 1.0) -> WmfpcaResult:
    """Weighted multivariate FPCA with nonstationary shared score models.

    ``kappa`` is the geometric decay rate of the year weights; ``None``
    falls back to uniform weights.
    """
    _check_horizon(h)
    curves, ids, years = _bundle_parts(bundle)
    n_years = curves[0].shape[0]
    weights = geometric_weights(kappa, n_years) if kappa is not None else uniform_weights(n_years)
    fit = fit_mfpca(curves, weights, rule, weight_power)
    score_forecasts = _forecast_scores(fit.shared_scores, "nonstationary", h)
    return WmfpcaResult(ids, years, h, weights, fit, score_forecasts)


def fit_coherent(bundle, kappa: float | None, rule: ComponentRule | None = None,
                 h: int = 20, weight_power: float = 1.0) -> CoherentResult:
    """Average-trend FPCA plus stationary multivariate FPCA of deviations.

    The average curve's scores get nonstationary models; the deviation
    scores are constrained to stationary models, so any two populations'
    forecast gap converges as the horizon grows.
    """
    _check_horizon(h)
    curves, ids, years = _bundle_parts(bundle)
    n_years = curves[0].shape[0]
    weights = geometric_weights(kappa, n_years) if kappa is not None else uniform_weights(n_years)

    average_curve = np.mean(curves, axis=0)
    common_fit = fit_ufpca(average_curve, weights, rule, weight_power)
    trend = reconstruct_all(common_fit)
    deviations = [c - trend for c in curves]
    deviation_fit = fit_mfpca(deviations, weights, rule, weight_power)

    fit = CoherentFit(
        total_mean=common_fit.mean_fn,
        common_fit=common_fit,
        deviation_means=[f.mean_fn for f in deviation_fit.per_pop_fits],
        deviation_fit=deviation_fit,
    )
    common_forecasts = _forecast_scores(common_fit.scores, "nonstationary", h)
    deviation_forecasts = _forecast_scores(deviation_fit.shared_scores, "stationary", h)
    return CoherentResult(ids, years, h, weights, fit, common_forecasts, deviation_forecasts)


def fit_product_ratio(bundle, rule: ComponentRule | None = None, h: int = 20) -> ProductRatioResult:
    """Unweighted decomposition into average log curve and log ratios.

    On the rate scale the average log curve is the log geometric-mean rate
    and each ratio is the population's log relative risk against it; their
    sum reproduces the population exactly.  Ratio scores use stationary
    models.
    """
    _check_horizon(h)
    curves, ids, years = _bundle_parts(bundle)
    weights = uniform_weights(curves[0].shape[0])
    average_curve = np.mean(curves, axis=0)
    ratios = [c - average_curve for c in curves]
    product_fit = fit_ufpca(average_curve, weights, rule)
    ratio_fits = [fit_ufpca(r, weights, rule) for r in ratios]
    product_forecasts = _forecast_scores(product_fit.scores, "nonstationary", h)
    ratio_forecasts = [
        _forecast_scores(f.scores, "stationary", h) for f in ratio_fits
    ]
    return ProductRatioResult(
        ids, years, h, weights, product_fit, ratio_fits, product_forecasts, ratio_forecasts
    )


def fit_model(bundle, model: str, h: int = 20, kappa: float | None = None,
              rule: ComponentRule | None = None, weight_power: float = 1.0):
    """Dispatch to one of the four model variants by name."""
    if model == "independent":
        return fit_independent(bundle, rule, h)
    if model == "wmfpca":
        return fit_wmfpca(bundle, kappa, rule, h, weight_power)
    if model == "coherent":
        return fit_coherent(bundle, kappa, rule, h, weight_power)
    if model == "product_ratio":
        return fit_product_ratio(bundle, rule, h)
    raise ValueError(f"unknown model {model!r}; choose from {MODELS}")


# ---------------------------------------------------------------------------
# assembly of forecast surfaces


def _stack(forecasts, h):
    """Score forecast means and variances as h x N matrices."""
    if not forecasts:
        return np.zeros((h, 0)), np.zeros((h, 0))
    mean = np.column_stack([sf.mean for sf in forecasts])
    var = np.column_stack([sf.variance for sf in forecasts])
    return mean, var


def _terms_for(result, i: int):
    """Base mean curve and (score forecasts, eigenfunctions) term pairs."""
    if isinstance(result, IndependentResult):
        fit = result.fits[i]
        return fit.mean_fn, [(result.score_forecasts[i], fit.eigenfunctions)]
    if isinstance(result, WmfpcaResult):
        fit = result.fit
        return (
            fit.per_pop_fits[i].mean_fn,
            [(result.score_forecasts, fit.multi_eigenfunctions[i])],
        )
    if isinstance(result, CoherentResult):
        fit = result.fit
        base = fit.total_mean + fit.deviation_means[i]
        return base, [
            (result.common_forecasts, fit.common_fit.eigenfunctions),
            (result.deviation_forecasts, fit.deviation_fit.multi_eigenfunctions[i]),
        ]
    if isinstance(result, ProductRatioResult):
        base = result.product_fit.mean_fn + result.ratio_fits[i].mean_fn
        return base, [
            (result.product_forecasts, result.product_fit.eigenfunctions),
            (result.ratio_forecasts[i], result.ratio_fits[i].eigenfunctions),
        ]
    raise TypeError(f"unsupported result type {type(result).__name__}")


def mean_variance(weights: WeightScheme, residuals: ResidualField | None, n_ages: int) -> np.ndarray:
    """Variance of the weighted mean curve: sum_t w_t^2 sigma_t(x)^2."""
    if residuals is None:
        return np.zeros(n_ages)
    return (weights.weights**2) @ (residuals.sigma**2)


def predict_interval(result, residuals=None, alpha: float = 0.05):
    """Forecast surfaces with pointwise normal prediction intervals.

    Parameters
    ----------
    result : one of the fit_* results
    residuals : list of ResidualField or None
        Smoothing residuals per population; ``None`` drops the mean and
        observational variance contributions.
    alpha : float
        Two-sided miss probability; 0.05 gives 95% intervals.
    """
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRange(f"alpha must lie in (0, 1), got {alpha}")
    h = result.horizon
    z = norm.ppf(1.0 - alpha / 2.0)
    horizon_years = result.train_years[-1] + 1 + np.arange(h)

    surfaces = []
    for i, pid in enumerate(result.population_ids):
        base, terms = _terms_for(result, i)
        n_ages = base.size
        res_i = residuals[i] if residuals is not None else None
        mean = np.tile(base, (h, 1))
        variance = np.tile(mean_variance(result.weights, res_i, n_ages), (h, 1))
        if res_i is not None:
            variance += res_i.sigma_avg**2
        for forecasts, eigenfunctions in terms:
            s_mean, s_var = _stack(forecasts, h)
            mean = mean + s_mean @ eigenfunctions
            variance = variance + s_var @ eigenfunctions**2
        half = z * np.sqrt(variance)
        surfaces.append(
            ForecastSurface(
                population_id=pid,
                horizon_years=horizon_years,
                mean=mean,
                variance=variance,
                lower=mean - half,
                upper=mean + half,
            )
        )
    return surfaces


def in_sample_reconstruction(result):
    """Training-period reconstructions per population (T x J matrices)."""
    if isinstance(result, IndependentResult):
        return [reconstruct_all(f) for f in result.fits]
    if isinstance(result, WmfpcaResult):
        return [
            reconstruct_all_mfpca(result.fit, i)
            for i in range(result.fit.n_populations)
        ]
    if isinstance(result, CoherentResult):
        trend = reconstruct_all(result.fit.common_fit)
        return [
            trend + reconstruct_all_mfpca(result.fit.deviation_fit, i)
            for i in range(result.fit.deviation_fit.n_populations)
        ]
    if isinstance(result, ProductRatioResult):
        avg = reconstruct_all(result.product_fit)
        return [avg + reconstruct_all(f) for f in result.ratio_fits]
    raise TypeError(f"unsupported result type {type(result).__name__}")
