"""Right-censored responses and the Kaplan-Meier product-limit estimator."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = ["SurvivalResponse", "KmCurve", "km_survival", "censoring_rate"]

# above this size the product is accumulated in floating point
_EXACT_MAX_N = 5000


@dataclass(frozen=True)
class SurvivalResponse:
    """Observed times ``y = min(T, C)`` and event indicators ``delta = 1(T <= C)``."""

    y: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.float64)
        delta = np.asarray(self.delta)
        if y.ndim != 1 or delta.ndim != 1:
            raise ValueError("y and delta must be one-dimensional")
        if y.shape != delta.shape:
            raise ValueError(f"length mismatch: y has {y.shape[0]}, delta has {delta.shape[0]}")
        if y.shape[0] < 2:
            raise ValueError("need at least two observations")
        if not np.all(np.isfinite(y)) or np.any(y <= 0):
            raise ValueError("observed times must be finite and strictly positive")
        if not np.all((delta == 0) | (delta == 1)):
            raise ValueError("status must be 0/1")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "delta", delta.astype(np.int8))

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @classmethod
    def from_array(cls, y) -> "SurvivalResponse":
        """Build from an (n, 2) array of ``[time, event]`` rows or a record array.

        Record arrays follow the scikit-survival layout: one boolean field
        for the event and one float field for the time.
        """
        if isinstance(y, SurvivalResponse):
            return y
        arr = np.asarray(y)
        if arr.dtype.names:
            names = arr.dtype.names
            if len(names) != 2:
                raise ValueError("structured response needs exactly two fields")
            first, second = arr[names[0]], arr[names[1]]
            if first.dtype == bool:
                return cls(second, first.astype(np.int8))
            return cls(first, second)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("response must have shape (n, 2): [time, event]")
        return cls(arr[:, 0], arr[:, 1])


@dataclass(frozen=True)
class KmCurve:
    """Product-limit survival estimate.

    ``values[i]`` is the estimate at the observed time ``times[i]`` (same
    order as the input response). Calling the curve evaluates the
    right-continuous step function at arbitrary times.
    """

    times: np.ndarray
    values: np.ndarray
    _knots: np.ndarray = field(repr=False)
    _levels: np.ndarray = field(repr=False)

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        idx = np.searchsorted(self._knots, t, side="right")
        return np.concatenate(([1.0], self._levels))[idx]


def km_survival(resp: SurvivalResponse) -> KmCurve:
    """Kaplan-Meier estimate evaluated at every observed time.

    At tied times, events are counted before censorings, so a subject
    censored at t is still in the risk set of events at t. Factors are
    multiplied as exact rationals, so the no-censoring case reproduces
    ``(n - k) / n`` exactly.
    """
    if not isinstance(resp, SurvivalResponse):
        resp = SurvivalResponse.from_array(resp)
    y, delta = resp.y, resp.delta
    if not np.any(delta == 1):
        raise ValueError("no events: the Kaplan-Meier estimate is degenerate")
    knots, inverse = np.unique(y, return_inverse=True)
    n = y.shape[0]
    events = np.bincount(inverse, weights=delta, minlength=knots.size).astype(np.int64)
    counts = np.bincount(inverse, minlength=knots.size)
    at_risk = n - np.concatenate(([0], np.cumsum(counts)[:-1]))

    if n <= _EXACT_MAX_N:
        levels = np.empty(knots.size)
        s = Fraction(1)
        for k in range(knots.size):
            if events[k]:
                s *= Fraction(int(at_risk[k] - events[k]), int(at_risk[k]))
            levels[k] = float(s)
    else:
        levels = np.cumprod(1.0 - events / at_risk)
    return KmCurve(times=y, values=levels[inverse], _knots=knots, _levels=levels)


def censoring_rate(resp) -> float:
    """Fraction of censored observations."""
    delta = resp.delta if isinstance(resp, SurvivalResponse) else np.asarray(resp)
    if delta.size == 0:
        raise ValueError("empty response")
    return float(np.mean(1 - delta))
