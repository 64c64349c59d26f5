"""Marginal screening of censored survival data by the symmetrized xi statistic.

For feature k the utility is

    omega_k = max(xi(F_k(X_k), S(T)), xi(S(T), F_k(X_k)))

with F_k the empirical CDF of the feature and S the Kaplan-Meier estimate
evaluated at the observed times. Only ranks enter xi, so F_k(X_k) is
replaced by the ranks of X_k and S(T) by the tie-broken ranks of the
Kaplan-Meier values themselves.

The S values are ranked as they are, so early failures get high ranks.
xi_{n,M} is not symmetric under reversing one argument: the samples at
the top of the U-ordering have no right neighbours and are paired with
themselves. That boundary term is of order M / n, so it favours features
positively associated with S, i.e. features that shorten survival.
"""

from __future__ import annotations

import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .rank_core import (
    inverse_permutation,
    normalize_seed,
    sum_min_sorted,
    tie_broken_ranks,
    xi_from_sum,
)
from .survival import SurvivalResponse, km_survival

__all__ = [
    "MRule",
    "TopD",
    "Threshold",
    "ScreeningConfig",
    "ScreeningResult",
    "ResponseRanks",
    "omega_hat",
    "screen",
    "screen_ranked",
    "prepare_response",
    "default_model_sizes",
    "default_workers",
]

logger = logging.getLogger(__name__)

WORKERS_ENV = "XIMSIS_WORKERS"


def default_workers() -> int:
    value = os.environ.get(WORKERS_ENV)
    if value:
        return max(1, int(value))
    return 1


@dataclass(frozen=True)
class MRule:
    """How the neighbour count M is chosen from the sample size.

    kind is one of ``"fixed"`` (M = value), ``"auto"`` (M = round(value * sqrt(n)))
    or ``"sqrt"`` (M = floor(sqrt(n)) + value). The result is clipped to [1, n].
    """

    kind: str = "auto"
    value: float = 1.0

    def __post_init__(self):
        if self.kind not in ("fixed", "auto", "sqrt"):
            raise ValueError(f"unknown M rule {self.kind!r}")
        if self.kind == "fixed" and (int(self.value) != self.value or self.value < 1):
            raise ValueError("invalid neighbor count")
        if self.kind == "auto" and not self.value > 0:
            raise ValueError("auto multiplier must be positive")

    @classmethod
    def parse(cls, text) -> "MRule":
        """Parse ``auto:C``, ``fixed:M``, ``sqrt:K`` (or ``sqrt``, ``sqrt-1``, ``sqrt+1``)."""
        if isinstance(text, MRule):
            return text
        if isinstance(text, (int, np.integer)):
            return cls("fixed", int(text))
        text = str(text).strip()
        if text.startswith("sqrt") and ":" not in text:
            offset = text[4:]
            return cls("sqrt", int(offset) if offset else 0)
        kind, _, value = text.partition(":")
        if kind == "fixed":
            return cls("fixed", int(value))
        if kind == "auto":
            return cls("auto", float(value) if value else 1.0)
        if kind == "sqrt":
            return cls("sqrt", int(value) if value else 0)
        raise ValueError(f"cannot parse M rule {text!r}")

    def resolve(self, n: int) -> int:
        if self.kind == "fixed":
            M = int(self.value)
        elif self.kind == "auto":
            M = max(1, math.floor(self.value * math.sqrt(n) + 0.5))
        else:
            M = math.isqrt(n) + int(self.value)
        return int(min(max(M, 1), n))

    def __str__(self) -> str:
        if self.kind == "sqrt":
            return "sqrt" if self.value == 0 else f"sqrt{int(self.value):+d}"
        if self.kind == "fixed":
            return f"fixed:{int(self.value)}"
        return f"auto:{self.value:g}"


@dataclass(frozen=True)
class TopD:
    d: int


@dataclass(frozen=True)
class Threshold:
    gamma: float


@dataclass(frozen=True)
class ScreeningConfig:
    m_rule: MRule = field(default_factory=MRule)
    selection: TopD | Threshold | None = None
    tie_seed: int = 0
    workers: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "m_rule", MRule.parse(self.m_rule))
        object.__setattr__(self, "tie_seed", normalize_seed(self.tie_seed))


@dataclass(frozen=True)
class ScreeningResult:
    """Per-feature utilities and the selected index set (0-based)."""

    omega: np.ndarray
    order: np.ndarray
    selected: np.ndarray
    M_used: int
    constant_columns: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __eq__(self, other):
        if not isinstance(other, ScreeningResult):
            return NotImplemented
        return (
            self.M_used == other.M_used
            and np.array_equal(self.omega, other.omega)
            and np.array_equal(self.order, other.order)
            and np.array_equal(self.selected, other.selected)
            and np.array_equal(self.constant_columns, other.constant_columns)
        )

    __hash__ = None


@dataclass(frozen=True)
class ResponseRanks:
    """Tie-broken ranks of the Kaplan-Meier values, shared by all features."""

    ranks: np.ndarray
    order: np.ndarray
    seed: int
    degenerate: bool


def default_model_sizes(n: int) -> tuple[int, int]:
    """``(ceil(n / ln n), n - 1)``."""
    if n < 3:
        raise ValueError("need n >= 3")
    return math.ceil(n / math.log(n)), n - 1


def prepare_response(resp, tie_seed: int) -> ResponseRanks:
    resp = SurvivalResponse.from_array(resp)
    seed = normalize_seed(tie_seed)
    s_hat = km_survival(resp).values
    ranks = tie_broken_ranks(s_hat, seed)
    degenerate = bool(np.all(s_hat == s_hat[0]))
    return ResponseRanks(ranks, inverse_permutation(ranks), seed, degenerate)


def _column_ranks(rows: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    """Ranks of each row of a (features, n) array; only tied rows consume their seed."""
    p, n = rows.shape
    order = np.argsort(rows, axis=1, kind="stable")
    sorted_vals = np.take_along_axis(rows, order, axis=1)
    tied = np.any(sorted_vals[:, 1:] == sorted_vals[:, :-1], axis=1)
    ranks = np.empty((p, n), dtype=np.int64)
    np.put_along_axis(ranks, order, np.arange(1, n + 1, dtype=np.int64)[None, :], axis=1)
    for k in np.flatnonzero(tied):
        ranks[k] = tie_broken_ranks(rows[k], int(seeds[k]))
    return ranks


def _omega_block(block, seeds, response: ResponseRanks, Ms):
    rows = np.ascontiguousarray(block.T)
    n = rows.shape[1]
    constant = np.all(rows == rows[:, :1], axis=1)
    x_ranks = _column_ranks(rows, seeds)
    # features as U, Kaplan-Meier ranks as V
    x_order = np.empty_like(x_ranks)
    np.put_along_axis(x_order, x_ranks - 1, np.arange(n, dtype=np.int64)[None, :], axis=1)
    r_forward = response.ranks[x_order]
    # Kaplan-Meier ranks as U, features as V
    r_backward = x_ranks[:, response.order]
    out = np.empty((len(Ms), rows.shape[0]))
    for j, M in enumerate(Ms):
        forward = xi_from_sum(sum_min_sorted(r_forward, M), n, M)
        backward = xi_from_sum(sum_min_sorted(r_backward, M), n, M)
        out[j] = np.maximum(forward, backward)
    out[:, constant] = 0.0
    if response.degenerate:
        out[:] = 0.0
    return out, constant


def _check_matrix(X, n_expected=None) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError("X must be a 2-d matrix")
    if X.shape[1] < 1:
        raise ValueError("X must have at least one column")
    if n_expected is not None and X.shape[0] != n_expected:
        raise ValueError(f"dimension mismatch: X has {X.shape[0]} rows, response has {n_expected}")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains NaN or infinite entries; impute first")
    return X


def screen_ranked(X, response: ResponseRanks, Ms, workers: int | None = None, block_size: int = 256):
    """omega for every column of X and every M in ``Ms``.

    Returns an array of shape (len(Ms), p) and the indices of constant
    columns. Column k tie-breaks with seed ``response.seed ^ k``, so the
    result does not depend on how columns are split across workers.
    """
    X = _check_matrix(X, response.ranks.shape[0])
    n, p = X.shape
    Ms = [int(M) for M in Ms]
    for M in Ms:
        if not 1 <= M <= n:
            raise ValueError(f"invalid neighbor count: M={M} with n={n}")
    seeds = np.bitwise_xor(np.uint64(response.seed), np.arange(p, dtype=np.uint64))
    starts = range(0, p, block_size)

    def run(start):
        stop = min(start + block_size, p)
        return _omega_block(X[:, start:stop], seeds[start:stop], response, Ms)

    workers = workers or default_workers()
    if workers > 1 and p > block_size:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    omega = np.concatenate([part[0] for part in parts], axis=1)
    constant = np.flatnonzero(np.concatenate([part[1] for part in parts]))
    return omega, constant


def omega_hat(xk, resp, M: int, tie_seed: int = 0, response_seed: int | None = None) -> float:
    """Symmetrized xi between one feature and the Kaplan-Meier curve.

    ``tie_seed`` breaks ties within the feature; ``response_seed`` (default
    ``tie_seed``) breaks ties among the Kaplan-Meier values. A constant
    feature gets 0 and a warning.
    """
    resp = SurvivalResponse.from_array(resp)
    xk = np.asarray(xk, dtype=np.float64)
    if xk.ndim != 1:
        raise ValueError("xk must be one-dimensional")
    response = prepare_response(resp, tie_seed if response_seed is None else response_seed)
    seed = normalize_seed(tie_seed)
    X = _check_matrix(xk[:, None], resp.n)
    if not 1 <= M <= resp.n:
        raise ValueError(f"invalid neighbor count: M={M} with n={resp.n}")
    omega, constant = _omega_block(X, np.array([seed], dtype=np.uint64), response, [int(M)])
    if constant.size and constant[0]:
        warnings.warn("constant feature: omega set to 0", RuntimeWarning, stacklevel=2)
    return float(omega[0, 0])


def rank_features(omega: np.ndarray) -> np.ndarray:
    """Indices sorted by omega descending, equal values by ascending index."""
    idx = np.arange(omega.shape[0])
    return np.lexsort((idx, -omega))


def select(omega: np.ndarray, order: np.ndarray, selection) -> np.ndarray:
    p = omega.shape[0]
    if selection is None:
        return order.copy()
    if isinstance(selection, TopD):
        d = int(selection.d)
        if d < 1 or d > p:
            warnings.warn(f"model size {d} outside [1, {p}]; using {p}", RuntimeWarning, stacklevel=3)
            d = p
        return order[:d].copy()
    if isinstance(selection, Threshold):
        keep = omega[order] >= selection.gamma
        return order[keep].copy()
    raise TypeError(f"unknown selection rule {selection!r}")


def screen(X, resp, cfg: ScreeningConfig | None = None) -> ScreeningResult:
    """Score every column of ``X`` and apply the configured selection rule.

    Parameters
    ----------
    X : array-like of shape (n, p)
        Complete covariate matrix.
    resp : SurvivalResponse or array-like of shape (n, 2)
    cfg : ScreeningConfig, optional
        Defaults to M = round(sqrt(n)), no truncation, seed 0.
    """
    cfg = cfg or ScreeningConfig()
    resp = SurvivalResponse.from_array(resp)
    M = cfg.m_rule.resolve(resp.n)
    response = prepare_response(resp, cfg.tie_seed)
    if response.degenerate:
        warnings.warn("Kaplan-Meier values are constant; all omega set to 0", RuntimeWarning, stacklevel=2)
    omega, constant = screen_ranked(X, response, [M], workers=cfg.workers)
    omega = omega[0]
    if constant.size:
        warnings.warn(f"{constant.size} constant feature(s); omega set to 0", RuntimeWarning, stacklevel=2)
    order = rank_features(omega)
    return ScreeningResult(
        omega=omega,
        order=order,
        selected=select(omega, order, cfg.selection),
        M_used=M,
        constant_columns=constant,
    )
