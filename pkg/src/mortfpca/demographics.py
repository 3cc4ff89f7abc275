"""Demographic summaries derived from log-mortality curves.

Period life tables use the standard single-age construction: death
probabilities q_x = m_x / (1 + 0.5 m_x) assuming deaths fall on average at
mid-year, a radix of one, and a final open age whose remaining life
expectancy is the reciprocal of its death rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteInput, ShapeMismatch


@dataclass(eq=False)
class LifeTable:
    """Single-year life table columns for ages 0..omega."""

    ages: np.ndarray
    death_rate: np.ndarray       # m_x
    death_prob: np.ndarray       # q_x
    survivors: np.ndarray        # l_x, radix 1.0
    person_years: np.ndarray     # L_x
    life_expectancy: np.ndarray  # e_x

    @property
    def e0(self) -> float:
        return float(self.life_expectancy[0])


def life_expectancy(log_rates_row) -> LifeTable:
    """Build a period life table from one year's log death rates.

    The input covers contiguous single ages starting at 0; the last age is
    treated as the open group.
    """
    log_m = np.asarray(log_rates_row, dtype=float)
    if log_m.ndim != 1 or log_m.size < 2:
        raise ValueError("expected a 1-d curve over at least two ages")
    if not np.all(np.isfinite(log_m)):
        raise NonFiniteInput("log rates must be finite")

    m = np.exp(log_m)
    n = m.size
    q = m / (1.0 + 0.5 * m)
    q = np.minimum(q, 1.0)
    q[-1] = 1.0

    survivors = np.empty(n)
    survivors[0] = 1.0
    survivors[1:] = np.cumprod(1.0 - q[:-1])
    deaths = survivors * q

    person_years = np.empty(n)
    person_years[:-1] = survivors[1:] + 0.5 * deaths[:-1]
    person_years[-1] = survivors[-1] / m[-1]

    remaining = np.cumsum(person_years[::-1])[::-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        expectancy = np.where(survivors > 0, remaining / np.where(survivors > 0, survivors, 1.0), 0.0)

    return LifeTable(
        ages=np.arange(n),
        death_rate=m,
        death_prob=q,
        survivors=survivors,
        person_years=person_years,
        life_expectancy=expectancy,
    )


def sex_ratio(male_log_rates, female_log_rates) -> np.ndarray:
    """Elementwise male-to-female rate ratio exp(log m_M - log m_F)."""
    male = np.asarray(male_log_rates, dtype=float)
    female = np.asarray(female_log_rates, dtype=float)
    if male.shape != female.shape:
        raise ShapeMismatch(f"male shape {male.shape} != female shape {female.shape}")
    if not (np.all(np.isfinite(male)) and np.all(np.isfinite(female))):
        raise NonFiniteInput("log rates must be finite")
    return np.exp(male - female)
