"""Scalar Gaussian messages in precision form.

A message is stored as ``(weight, wmean)`` with ``weight = 1/variance`` and
``wmean = weight * mean``. Both stay finite for the two awkward cases that
show up in iterative equalization: the non-informative message (infinite
variance, ``weight == 0``) and corrective messages with negative weight.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

WEIGHT_CAP = 1e12

_clamp_lock = threading.Lock()
_clamp_events = 0


class NonInformativeError(ValueError):
    """Raised when mean/variance are requested from a zero-weight message."""


def clamp_events() -> int:
    """Number of weight clamps performed since import."""
    return _clamp_events


def _note_clamp() -> None:
    global _clamp_events
    with _clamp_lock:
        _clamp_events += 1


@dataclass(frozen=True)
class GaussianMessage:
    """Scalar Gaussian message ``exp(-weight x**2 / 2 + wmean x)``.

    Weights larger than ``WEIGHT_CAP`` in magnitude are clamped on
    construction; the mean is preserved and :func:`clamp_events` is bumped.
    """

    weight: float
    wmean: float

    def __post_init__(self):
        w = float(self.weight)
        xi = float(self.wmean)
        if not (math.isfinite(w) and math.isfinite(xi)):
            raise ValueError(f"non-finite message parameters ({w!r}, {xi!r})")
        if w == 0.0 and xi != 0.0:
            raise ValueError("zero-weight message must have zero wmean")
        if abs(w) > WEIGHT_CAP:
            scale = WEIGHT_CAP / abs(w)
            w *= scale
            xi *= scale
            _note_clamp()
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "wmean", xi)

    @property
    def is_informative(self) -> bool:
        return self.weight != 0.0

    @property
    def is_improper(self) -> bool:
        """True for zero or negative weight (not a normalizable density)."""
        return self.weight <= 0.0

    def __mul__(self, other: GaussianMessage) -> GaussianMessage:
        return multiply(self, other)

    def __truediv__(self, other: GaussianMessage) -> GaussianMessage:
        return divide(self, other)


NON_INFORMATIVE = GaussianMessage(0.0, 0.0)


def make_from_mean_var(mean: float, variance: float) -> GaussianMessage:
    if not (math.isfinite(mean) and math.isfinite(variance)):
        raise ValueError(f"non-finite mean/variance ({mean!r}, {variance!r})")
    if variance <= 0.0:
        raise ValueError(f"variance must be positive, got {variance!r}")
    return GaussianMessage(1.0 / variance, mean / variance)


def multiply(a: GaussianMessage, b: GaussianMessage) -> GaussianMessage:
    """Product of two messages: precisions and weighted means add."""
    return GaussianMessage(a.weight + b.weight, a.wmean + b.wmean)


def divide(product: GaussianMessage, divisor: GaussianMessage) -> GaussianMessage:
    """Quotient of two messages; the result may have weight <= 0."""
    return GaussianMessage(product.weight - divisor.weight, product.wmean - divisor.wmean)


def mean_var(g: GaussianMessage) -> tuple[float, float]:
    """Return ``(mean, variance)``; the variance is negative when the weight is."""
    if g.weight == 0.0:
        raise NonInformativeError("non-informative message has no mean/variance")
    return g.wmean / g.weight, 1.0 / g.weight


@dataclass(frozen=True)
class GaussianVec:
    """Multivariate Gaussian state estimate in mean/covariance form."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"cov shape {cov.shape} does not match mean size {mean.size}")
        scale = max(np.abs(cov).max(), 1.0)
        if np.abs(cov - cov.T).max() > 1e-12 * scale:
            raise ValueError("covariance is not symmetric")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class TrueMoments:
    """Mean and variance of a normalized two-point function on {+1, -1}."""

    mean: float
    variance: float

    def __post_init__(self):
        if not -1.0 <= self.mean <= 1.0:
            raise ValueError(f"mean {self.mean!r} outside [-1, 1]")
        if abs(self.variance - (1.0 - self.mean**2)) > 1e-12:
            raise ValueError("variance must equal 1 - mean**2")


@dataclass(frozen=True)
class GaussianMessages:
    """A sequence of scalar messages held as two parallel arrays.

    This is the bulk counterpart of :class:`GaussianMessage` used by the
    equalizers; no weight cap is applied here.
    """

    weight: np.ndarray
    wmean: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=float)
        xi = np.asarray(self.wmean, dtype=float)
        if w.shape != xi.shape or w.ndim != 1:
            raise ValueError("weight and wmean must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(xi))):
            raise ValueError("non-finite message parameters")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "wmean", xi)

    @classmethod
    def non_informative(cls, n: int) -> GaussianMessages:
        return cls(np.zeros(n), np.zeros(n))

    @classmethod
    def from_mean_var(cls, mean, variance) -> GaussianMessages:
        mean = np.asarray(mean, dtype=float)
        variance = np.asarray(variance, dtype=float)
        if np.any(variance <= 0):
            raise ValueError("variances must be positive")
        return cls(1.0 / variance, mean / variance)

    def __len__(self) -> int:
        return self.weight.size

    def __getitem__(self, k: int) -> GaussianMessage:
        return GaussianMessage(self.weight[k], self.wmean[k])

    def mean_var(self) -> tuple[np.ndarray, np.ndarray]:
        if np.any(self.weight == 0):
            raise NonInformativeError("sequence contains non-informative messages")
        return self.wmean / self.weight, 1.0 / self.weight
