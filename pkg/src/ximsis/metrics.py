"""Screening evaluation criteria and a censored concordance statistic."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .survival import SurvivalResponse

__all__ = [
    "ReplicationRecord",
    "ExperimentReport",
    "QUANTILE_LEVELS",
    "min_model_size",
    "quantile",
    "selection_proportions",
    "summarize",
    "concordance",
]

QUANTILE_LEVELS = (0.05, 0.25, 0.50, 0.75, 0.95)


@dataclass(frozen=True)
class ReplicationRecord:
    """Feature ranking from one replication (0-based indices)."""

    omega_order: np.ndarray
    active_set: tuple

    def __post_init__(self):
        order = np.asarray(self.omega_order, dtype=np.int64)
        active = tuple(int(a) for a in self.active_set)
        if not active:
            raise ValueError("active set must be nonempty")
        p = order.shape[0]
        if any(a < 0 or a >= p for a in active):
            raise ValueError("active index outside 0..p-1")
        object.__setattr__(self, "omega_order", order)
        object.__setattr__(self, "active_set", active)


@dataclass(frozen=True)
class ExperimentReport:
    """Aggregate over replications for one screening variant and model size."""

    variant: str
    d: int
    s_quantiles: tuple
    iqr: float
    p_j: tuple
    p_a: float
    active_set: tuple
    n_reps: int
    realized_cr: float = float("nan")
    seconds_per_rep: float = float("nan")

    @property
    def median(self) -> float:
        return self.s_quantiles[QUANTILE_LEVELS.index(0.5)]


def min_model_size(rec: ReplicationRecord) -> int:
    """Largest 1-based position of an active feature in the ranking."""
    order = rec.omega_order
    positions = np.empty(order.shape[0], dtype=np.int64)
    positions[order] = np.arange(1, order.shape[0] + 1)
    if np.unique(order).shape[0] != order.shape[0]:
        raise ValueError("omega_order is not a permutation")
    return int(positions[list(rec.active_set)].max())


def quantile(values, q: float) -> float:
    """Inverse-ECDF (type 1) quantile: the ceil(q * N)-th order statistic."""
    x = np.sort(np.asarray(values, dtype=np.float64))
    if x.size == 0:
        raise ValueError("empty sample")
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    k = max(1, math.ceil(q * x.size - 1e-12))
    return float(x[k - 1])


def _check_records(records):
    if not records:
        raise ValueError("no replication records")
    active = records[0].active_set
    for rec in records:
        if rec.active_set != active:
            raise ValueError("inconsistent active sets across records")
    return active


def selection_proportions(records, d: int):
    """Per-feature and all-active selection frequencies within the top d.

    Returns ``(p_j, p_a)`` with ``p_j`` ordered like the active set.
    """
    active = _check_records(records)
    if d < 1:
        raise ValueError("model size d must be >= 1")
    hits = np.zeros(len(active))
    all_hits = 0
    for rec in records:
        top = np.zeros(rec.omega_order.shape[0], dtype=bool)
        top[rec.omega_order[:d]] = True
        chosen = top[list(active)]
        hits += chosen
        all_hits += bool(chosen.all())
    n = len(records)
    return hits / n, all_hits / n


def summarize(records, d: int, variant: str = "", **diagnostics) -> ExperimentReport:
    active = _check_records(records)
    sizes = [min_model_size(r) for r in records]
    qs = tuple(quantile(sizes, q) for q in QUANTILE_LEVELS)
    p_j, p_a = selection_proportions(records, d)
    return ExperimentReport(
        variant=variant,
        d=int(d),
        s_quantiles=qs,
        iqr=qs[3] - qs[1],
        p_j=tuple(float(v) for v in p_j),
        p_a=float(p_a),
        active_set=active,
        n_reps=len(records),
        **diagnostics,
    )


def concordance(risk, resp) -> float:
    """Harrell's C over comparable pairs.

    A pair (i, j) is comparable when y_i < y_j and subject i had an event;
    it is concordant when risk_i > risk_j, and tied risks count one half.
    """
    resp = SurvivalResponse.from_array(resp)
    risk = np.asarray(risk, dtype=np.float64)
    if risk.shape != resp.y.shape:
        raise ValueError("risk must have one score per subject")
    y, delta = resp.y, resp.delta
    order = np.argsort(y, kind="stable")
    y_sorted, risk_sorted = y[order], risk[order]
    concordant = 0.0
    comparable = 0
    for i in np.flatnonzero(delta[order] == 1):
        later = risk_sorted[np.searchsorted(y_sorted, y_sorted[i], side="right"):]
        comparable += later.size
        concordant += np.count_nonzero(risk_sorted[i] > later) + 0.5 * np.count_nonzero(risk_sorted[i] == later)
    if comparable == 0:
        raise ValueError("no comparable pairs")
    return concordant / comparable
