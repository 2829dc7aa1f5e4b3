"""Probability-weighted moments of an outcome distribution."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from gambit_lab.constants import SIGMA_EPSILON
from gambit_lab.errors import EmptyRowsError

if TYPE_CHECKING:
    from collections.abc import Sequence


@dataclass(frozen=True)
class Moments:
    """Weighted mean, standard deviation and skewness.

    Attributes:
        mean: Sum of p * x.
        sigma: Square root of sum of p * (x - mean) ** 2.
        skewness: Sum of p * ((x - mean) / sigma) ** 3, or 0 when sigma is 0.
    """

    mean: float
    sigma: float
    skewness: float


def weighted_moments(probabilities: Sequence[float], values: Sequence[float]) -> Moments:
    """Compute weighted moments with the weights taken literally.

    Weights are not rescaled: raw sub-unit probabilities give the literal
    sums. A standard deviation at or below ``SIGMA_EPSILON`` is reported as 0
    and the skewness is then defined as 0.

    Args:
        probabilities: Non-negative weights.
        values: Outcomes, same length as ``probabilities``.

    Returns:
        The moments.

    Raises:
        EmptyRowsError: If there are no outcomes.
        ValueError: If the lengths differ or a weight is negative.
    """
    p = np.asarray(probabilities, dtype=np.float64)
    x = np.asarray(values, dtype=np.float64)
    if p.size == 0:
        msg = "Cannot compute moments of an empty distribution"
        raise EmptyRowsError(msg)
    if p.shape != x.shape:
        msg = f"Got {p.size} probabilities for {x.size} values"
        raise ValueError(msg)
    if np.any(p < 0):
        msg = f"Probabilities must be non-negative, got {p.tolist()}"
        raise ValueError(msg)

    mean = float(np.dot(p, x))
    deviations = x - mean
    sigma = float(np.sqrt(np.dot(p, deviations**2)))
    if sigma <= SIGMA_EPSILON:
        return Moments(mean, 0.0, 0.0)
    skewness = float(np.dot(p, (deviations / sigma) ** 3))
    return Moments(mean, sigma, skewness)
