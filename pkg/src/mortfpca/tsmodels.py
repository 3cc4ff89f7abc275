"""Automatic ARIMA fitting for principal component score series.

Small, fully deterministic grid search: orders p, q in {0, 1, 2} and, in
nonstationary mode, d in {0, 1, 2}.  Parameters maximize the Gaussian
conditional-sum-of-squares likelihood via Nelder-Mead.  Every cell
conditions on the first ``N_COND`` values of its differenced series and
additionally burns 2 - d leading residuals, so the likelihood sample size
is identical across the whole grid and AIC values are comparable.  Model
choice is by AIC with k = p + q + 1 plus one for a drift term.

``drift`` is the constant of the d-times differenced model: the process
mean when d = 0 and the linear trend slope when d = 1.  Drift is never
offered for d = 2.

Every cell must have AR roots (stationarity of the differenced model; unit
roots belong in d) and MA roots (invertibility, without which the
conditional likelihood degenerates) of modulus > 1.001; violating cells
are rejected, which in particular stops an over-differenced model from
undoing its differencing with a unit MA root.  Stationary mode further
restricts the grid to d = 0 so forecasts stay mean-reverting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter

from .errors import NonFiniteInput, OptimFailed, SeriesTooShort

#: largest AR and MA order in the search grid
MAX_ORDER = 2
#: largest differencing order in the search grid
MAX_D = 2
#: values conditioned on at the start of every differenced series
N_COND = MAX_ORDER
#: minimum observations accepted by the automatic search
MIN_OBS = 10
#: AR and MA roots must exceed this modulus
ROOT_MARGIN = 1.001

MODES = ("nonstationary", "stationary")


@dataclass(eq=False)
class ArimaSpec:
    """One fitted ARIMA(p, d, q) model, possibly with drift."""

    p: int
    d: int
    q: int
    include_drift: bool
    ar: np.ndarray
    ma: np.ndarray
    drift: float
    innovation_var: float
    loglik: float
    aic: float
    mode: str = "nonstationary"
    fallback: bool = False

    @property
    def order(self):
        return (self.p, self.d, self.q)

    @property
    def n_params(self) -> int:
        return self.p + self.q + 1 + (1 if self.include_drift else 0)


@dataclass(eq=False)
class ScoreForecast:
    """Forecast path of one score series: means and variances per step."""

    mean: np.ndarray
    variance: np.ndarray
    spec: ArimaSpec

    @property
    def horizon(self) -> int:
        return self.mean.size


def _css_residuals(w: np.ndarray, ar, ma, c: float) -> np.ndarray:
    """Conditional residuals e_t for t >= N_COND, zeros assumed before that."""
    z = w - c
    n = z.size
    rhs = z[N_COND:].copy()
    for i, phi in enumerate(ar, start=1):
        rhs -= phi * z[N_COND - i : n - i]
    if len(ma):
        rhs = lfilter([1.0], np.concatenate(([1.0], np.asarray(ma, float))), rhs)
    return rhs


def _roots_ok(tail) -> bool:
    """True when every root of 1 + t_1 z + ... + t_k z^k has modulus > ROOT_MARGIN."""
    tail = np.trim_zeros(np.asarray(tail, float), "b")
    if tail.size == 0:
        return True
    poly = np.concatenate(([1.0], tail))[::-1]
    return bool(np.all(np.abs(np.roots(poly)) > ROOT_MARGIN))


def _start_values(w: np.ndarray, p: int, q: int, include_drift: bool) -> np.ndarray:
    c0 = float(np.mean(w)) if include_drift else 0.0
    z = w - c0
    ar0 = np.zeros(p)
    if p and z.size > p + 1:
        target = z[p:]
        lags = np.column_stack([z[p - i : z.size - i] for i in range(1, p + 1)])
        try:
            ar0 = np.linalg.lstsq(lags, target, rcond=None)[0]
        except np.linalg.LinAlgError:
            ar0 = np.zeros(p)
        ar0 = np.clip(np.nan_to_num(ar0), -0.95, 0.95)
    parts = [ar0, np.zeros(q)]
    if include_drift:
        parts.append([c0])
    return np.concatenate(parts) if parts else np.empty(0)


def _fit_cell(w: np.ndarray, p: int, d: int, q: int, include_drift: bool, mode: str) -> ArimaSpec:
    """CSS fit of one grid cell on the already d-differenced series ``w``."""
    # burning 2 - d extra residuals gives every d the same likelihood sample
    burn = MAX_D - d
    n_eff = w.size - N_COND - burn
    k = p + q + 1 + (1 if include_drift else 0)
    if n_eff < k + 2:
        raise OptimFailed(f"cell ({p},{d},{q}) needs more observations")

    def objective(x):
        ar = x[:p]
        ma = x[p : p + q]
        c = x[p + q] if include_drift else 0.0
        e = _css_residuals(w, ar, ma, c)[burn:]
        sse = float(e @ e)
        if not math.isfinite(sse):
            return 1e12
        return n_eff * math.log(max(sse / n_eff, 1e-300))

    n_free = p + q + (1 if include_drift else 0)
    if n_free == 0:
        x = np.empty(0)
    else:
        res = minimize(
            objective,
            _start_values(w, p, q, include_drift),
            method="Nelder-Mead",
            options={"xatol": 1e-8, "fatol": 1e-8, "maxfev": 2000},
        )
        x = res.x
        if not (np.all(np.isfinite(x)) and math.isfinite(res.fun)):
            raise OptimFailed(f"simplex search failed for cell ({p},{d},{q})")

    ar = x[:p].copy()
    ma = x[p : p + q].copy()
    c = float(x[p + q]) if include_drift else 0.0
    if not _roots_ok(-ar):
        raise OptimFailed(f"cell ({p},{d},{q}) violates the AR stationarity margin")
    if not _roots_ok(ma):
        raise OptimFailed(f"cell ({p},{d},{q}) violates the MA invertibility margin")
    e = _css_residuals(w, ar, ma, c)[burn:]
    sse = float(e @ e)
    if not math.isfinite(sse) or sse < 0:
        raise OptimFailed(f"non-finite residuals for cell ({p},{d},{q})")
    sigma2 = max(sse / n_eff, 1e-300)
    loglik = -0.5 * n_eff * (math.log(2 * math.pi) + math.log(sigma2) + 1.0)
    return ArimaSpec(
        p=p,
        d=d,
        q=q,
        include_drift=include_drift,
        ar=ar,
        ma=ma,
        drift=c,
        innovation_var=sigma2,
        loglik=loglik,
        aic=2.0 * k - 2.0 * loglik,
        mode=mode,
    )


def _validate_series(series) -> np.ndarray:
    series = np.asarray(series, dtype=float)
    if series.ndim != 1:
        raise ValueError("series must be 1-d")
    if not np.all(np.isfinite(series)):
        raise NonFiniteInput("series contains non-finite values")
    return series


def fit_spec(
    series,
    order,
    include_drift: bool = False,
    mode: str = "nonstationary",
) -> ArimaSpec:
    """Fit a single fixed-order cell; raises OptimFailed when unusable."""
    series = _validate_series(series)
    p, d, q = order
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if not (0 <= p <= MAX_ORDER and 0 <= q <= MAX_ORDER and 0 <= d <= 2):
        raise ValueError(f"order {order} outside the supported grid")
    if mode == "stationary" and d != 0:
        raise ValueError("stationary mode requires d = 0")
    if include_drift and d > 1:
        raise ValueError("drift is only defined for d <= 1")
    if series.size < MIN_OBS:
        raise SeriesTooShort(f"need at least {MIN_OBS} observations, got {series.size}")
    w = np.diff(series, d) if d else series
    return _fit_cell(w, p, d, q, include_drift, mode)


def _fallback_spec(series: np.ndarray, mode: str) -> ArimaSpec:
    """Random walk with drift (nonstationary) or mean-level white noise."""
    d = 1 if mode == "nonstationary" else 0
    w = np.diff(series, d) if d else series
    burn = MAX_D - d
    n_eff = w.size - N_COND - burn
    c = float(np.mean(w[N_COND + burn :]))
    e = w[N_COND + burn :] - c
    sigma2 = max(float(e @ e) / n_eff, 1e-300)
    loglik = -0.5 * n_eff * (math.log(2 * math.pi) + math.log(sigma2) + 1.0)
    k = 2
    return ArimaSpec(
        p=0,
        d=d,
        q=0,
        include_drift=True,
        ar=np.empty(0),
        ma=np.empty(0),
        drift=c,
        innovation_var=sigma2,
        loglik=loglik,
        aic=2.0 * k - 2.0 * loglik,
        mode=mode,
        fallback=True,
    )


def fit_auto(series, mode: str = "nonstationary") -> ArimaSpec:
    """Minimum-AIC ARIMA over the order grid.

    Nonstationary mode searches d in {0, 1, 2} with drift offered for
    d <= 1; stationary mode fixes d = 0.  Cells whose optimization fails or
    whose roots land on or inside the margin are skipped; if every cell
    fails the fallback model is returned with ``fallback=True``.
    """
    series = _validate_series(series)
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if series.size < MIN_OBS:
        raise SeriesTooShort(f"need at least {MIN_OBS} observations, got {series.size}")

    d_values = (0, 1, 2) if mode == "nonstationary" else (0,)
    best = None
    for d in d_values:
        w = np.diff(series, d) if d else series
        for p in range(MAX_ORDER + 1):
            for q in range(MAX_ORDER + 1):
                drift_options = (False, True) if d <= 1 else (False,)
                for include_drift in drift_options:
                    try:
                        spec = _fit_cell(w, p, d, q, include_drift, mode)
                    except OptimFailed:
                        continue
                    if best is None or spec.aic < best.aic:
                        best = spec
    if best is None:
        return _fallback_spec(series, mode)
    return best


def psi_weights(spec: ArimaSpec, n_weights: int) -> np.ndarray:
    """Moving-average representation weights psi_0 .. psi_{n-1}.

    Derived from phi(B) (1 - B)^d psi(B) = theta(B); forecast error
    variance at lead h is sigma^2 times the sum of the first h squared
    weights.
    """
    phi_full = np.concatenate(([1.0], -spec.ar))
    for _ in range(spec.d):
        phi_full = np.convolve(phi_full, [1.0, -1.0])
    a = -phi_full[1:]
    psi = np.zeros(max(n_weights, 1))
    psi[0] = 1.0
    for j in range(1, n_weights):
        val = spec.ma[j - 1] if j - 1 < spec.ma.size else 0.0
        for i in range(1, min(j, a.size) + 1):
            val += a[i - 1] * psi[j - i]
        psi[j] = val
    return psi[:n_weights]


def forecast(spec: ArimaSpec, series, h: int) -> ScoreForecast:
    """Mean and variance paths h steps ahead from the end of ``series``."""
    series = _validate_series(series)
    if h < 1:
        raise ValueError(f"horizon must be >= 1, got {h}")
    if series.size <= spec.d + N_COND:
        raise SeriesTooShort("series shorter than the conditioning window")

    c = spec.drift if spec.include_drift else 0.0
    w = np.diff(series, spec.d) if spec.d else series
    z = w - c
    n = z.size
    resid = np.zeros(n)
    resid[N_COND:] = _css_residuals(w, spec.ar, spec.ma, c)

    zext = np.concatenate([z, np.zeros(h)])
    for step in range(h):
        t = n + step
        val = 0.0
        for i, phi in enumerate(spec.ar, start=1):
            val += phi * zext[t - i]
        for j, theta in enumerate(spec.ma, start=1):
            if t - j < n:
                val += theta * resid[t - j]
        zext[t] = val
    w_hat = zext[n:] + c

    mean = w_hat
    if spec.d:
        levels = [series]
        for _ in range(spec.d):
            levels.append(np.diff(levels[-1]))
        for depth in range(spec.d, 0, -1):
            mean = levels[depth - 1][-1] + np.cumsum(mean)

    psi = psi_weights(spec, h)
    variance = spec.innovation_var * np.cumsum(psi**2)
    return ScoreForecast(mean=mean, variance=variance, spec=spec)


def unconditional_mean(spec: ArimaSpec) -> float:
    """Long-run forecast level of a d = 0 model: drift if present, else 0."""
    if spec.d != 0:
        raise ValueError("unconditional mean is only defined for d = 0 models")
    return spec.drift if spec.include_drift else 0.0
