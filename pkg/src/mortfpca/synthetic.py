"""Synthetic multi-population mortality surfaces for demos and tests.

Real HMD extracts require registration, so the package ships a generator
that mimics the familiar structure of national period mortality: an infant
mortality spike, a young-adult excess hump, exponential old-age growth, a
shared declining time trend, and a male-female gap.  Populations share the
trend; an optional divergent mode gives each population its own drift so
that coherence-breaking behaviour can be exercised deliberately.
"""

from __future__ import annotations

import numpy as np

from .hmd import MortalitySurface, SurfaceBundle


def baseline_curve(ages: np.ndarray) -> np.ndarray:
    """Static log-mortality age profile with realistic shape."""
    x = np.asarray(ages, dtype=float)
    infant = 3.4 * np.exp(-x / 1.5)
    hump = 0.45 * np.exp(-0.5 * ((x - 20.0) / 7.0) ** 2)
    senescent = 0.075 * np.maximum(x - 25.0, 0.0)
    return -6.9 + infant + hump + senescent


def trend_loading(ages: np.ndarray) -> np.ndarray:
    """Improvement loading, strongest at young ages, unit mean."""
    x = np.asarray(ages, dtype=float)
    raw = 1.7 - 1.1 * x / 100.0
    return raw / raw.mean()


def sex_offset(ages: np.ndarray) -> np.ndarray:
    """Male excess log mortality: a base gap plus a young-adult bulge."""
    x = np.asarray(ages, dtype=float)
    return 0.22 + 0.5 * np.exp(-0.5 * ((x - 22.0) / 9.0) ** 2) - 0.1 * x / 100.0


def noise_scale(ages: np.ndarray, base: float) -> np.ndarray:
    """Observation noise rises at both ends of the age range."""
    x = np.asarray(ages, dtype=float)
    return base * (1.0 + 1.3 * np.exp(-x / 8.0) + 0.9 * np.exp((x - 100.0) / 12.0))


def synthetic_bundle(
    seed: int = 0,
    n_years: int = 50,
    start_year: int = 1947,
    max_age: int = 100,
    noise_sd: float = 0.04,
    divergent: bool = False,
    trend_per_year: float = -0.02,
    populations=("female", "male"),
    return_truth: bool = False,
):
    """Generate an observed log-mortality bundle.

    Parameters
    ----------
    divergent : bool
        When True each population's deviation from the average follows its
        own random walk with population-specific drift, so gaps widen
        without bound.  When False deviations are stationary AR(1) noise
        around the fixed sex offset and populations stay coherent.
    return_truth : bool
        Also return the noise-free surfaces.

    Returns
    -------
    SurfaceBundle or (SurfaceBundle, SurfaceBundle)
    """
    rng = np.random.default_rng(seed)
    ages = np.arange(max_age + 1)
    years = start_year + np.arange(n_years)
    base = baseline_curve(ages)
    loading = trend_loading(ages)
    offset = sex_offset(ages)

    # shared period effect: near-linear decline with mild level noise
    k = np.arange(n_years) + np.cumsum(rng.normal(0.0, 0.3, n_years))

    half = {"female": -0.5, "male": 0.5}
    sigma = noise_scale(ages, noise_sd)
    gap_loading = np.abs(np.sin(np.pi * ages / 100.0)) + 0.3
    gap_loading = gap_loading / np.sqrt(gap_loading @ gap_loading)

    truth, observed = [], []
    for p, name in enumerate(populations):
        side = half.get(name, (p - (len(populations) - 1) / 2.0))
        curves = base + side * offset + np.outer(k * trend_per_year, loading)
        if divergent:
            drift = 0.035 * (1.0 if p % 2 else -1.0)
            walk = np.cumsum(drift + rng.normal(0.0, 0.05, n_years))
            curves = curves + np.outer(walk, gap_loading) * 3.0
        else:
            dev = np.zeros(n_years)
            for t in range(1, n_years):
                dev[t] = 0.6 * dev[t - 1] + rng.normal(0.0, 0.05)
            curves = curves + np.outer(dev, gap_loading)
        noisy = curves + rng.normal(0.0, 1.0, curves.shape) * sigma
        truth.append(
            MortalitySurface(name, years, ages, curves, kind="smoothed")
        )
        observed.append(MortalitySurface(name, years, ages, noisy))

    obs_bundle = SurfaceBundle(observed)
    if return_truth:
        return obs_bundle, SurfaceBundle(truth)
    return obs_bundle


def hmd_text_from_bundle(bundle: SurfaceBundle, title: str = "Synthetic, Death rates (period 1x1)") -> str:
    """Format a female+male bundle as Mx_1x1 text, deriving the total column.

    The total population's rate at each cell is the arithmetic mean of the
    female and male rates, which keeps the file self-consistent without
    needing exposure counts.
    """
    ids = bundle.population_ids
    try:
        female = bundle[ids.index("female")]
        male = bundle[ids.index("male")]
    except ValueError as exc:
        raise ValueError("bundle must contain populations 'female' and 'male'") from exc

    lines = [title, "  ".join(("Year", "Age", "Female", "Male", "Total"))]
    f_rates = np.exp(female.log_rates)
    m_rates = np.exp(male.log_rates)
    t_rates = 0.5 * (f_rates + m_rates)
    for t, year in enumerate(bundle.years):
        for j, age in enumerate(bundle.ages):
            lines.append(
                f"{year}  {age:>4}  {f_rates[t, j]:.6f}  {m_rates[t, j]:.6f}  {t_rates[t, j]:.6f}"
            )
    return "\n".join(lines) + "\n"
