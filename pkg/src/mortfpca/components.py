"""Component-count selection shared by the univariate and joint decompositions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ComponentRule:
    """How many principal components to keep.

    ``threshold`` keeps the smallest leading set whose cumulative share of
    total variance reaches the given proportion.  ``override``, when set,
    wins and requests a fixed count (capped at the number of available
    components).
    """

    threshold: float = 0.9
    override: int | None = None

    def __post_init__(self):
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError(f"threshold must lie in (0, 1], got {self.threshold}")
        if self.override is not None and self.override < 1:
            raise ValueError(f"override must be a positive count, got {self.override}")


#: Keep every component the data supports.
FULL_RANK = ComponentRule(threshold=1.0)


def select_ncomp(eigenvalues, rule: ComponentRule) -> int:
    """Number of components retained under ``rule``.

    Parameters
    ----------
    eigenvalues : array_like
        Non-increasing, non-negative variances, one per component.
    rule : ComponentRule
        Selection rule.

    Returns
    -------
    int
        Smallest N with cumulative share >= ``rule.threshold``, or
        ``rule.override`` capped at ``len(eigenvalues)``.  All-zero input
        yields 0.
    """
    vals = np.asarray(eigenvalues, dtype=float)
    if vals.ndim != 1:
        raise ValueError("eigenvalues must be a 1-d array")
    if vals.size and (np.any(vals < 0) or np.any(np.diff(vals) > 1e-12 * max(vals[0], 1.0))):
        raise ValueError("eigenvalues must be non-increasing and non-negative")
    total = vals.sum()
    if vals.size == 0 or total <= 0.0:
        return 0
    if rule.override is not None:
        return min(rule.override, vals.size)
    if rule.threshold >= 1.0:
        # keep every nonzero component; a share search would drop trailing
        # components whose share rounds below machine precision even though
        # they still carry signal
        return int(np.sum(vals > 0.0))
    shares = np.cumsum(vals) / total
    # tolerate cumsum rounding a hair below an exactly-attained threshold
    n = int(np.searchsorted(shares, rule.threshold - 1e-12)) + 1
    return min(n, vals.size)
