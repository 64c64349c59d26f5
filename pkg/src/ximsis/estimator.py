"""scikit-learn selector interface to the screening procedure."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .screening import MRule, ScreeningConfig, Threshold, TopD, default_model_sizes, screen
from .survival import SurvivalResponse

__all__ = ["XimSisScreener", "make_survival_target"]


def make_survival_target(time, event) -> np.ndarray:
    """Record array with fields ``event`` (bool) and ``time`` (float)."""
    time = np.asarray(time, dtype=np.float64)
    out = np.empty(time.shape[0], dtype=[("event", bool), ("time", np.float64)])
    out["event"] = np.asarray(event).astype(bool)
    out["time"] = time
    return out


class XimSisScreener(SelectorMixin, BaseEstimator):
    """Keep the features with the largest symmetrized xi against survival.

    Parameters
    ----------
    m_rule : str or int, default="auto:1"
        Neighbour count rule: ``"auto:C"`` (round(C sqrt(n))), ``"fixed:M"``,
        ``"sqrt-1"``/``"sqrt"``/``"sqrt+1"`` or an integer.
    n_features_to_select : int, optional
        Keep this many top-ranked features. Defaults to ceil(n / ln n).
        Ignored when ``threshold`` is set.
    threshold : float, optional
        Keep every feature with omega >= threshold.
    tie_seed : int, default=0
    n_jobs : int, optional
        Worker threads across column blocks.

    Attributes
    ----------
    omega_ : ndarray of shape (n_features,)
    ranking_ : ndarray of shape (n_features,)
        Column indices by decreasing omega.
    M_ : int
    result_ : ScreeningResult
    """

    def __init__(self, m_rule="auto:1", n_features_to_select=None, threshold=None, tie_seed=0, n_jobs=None):
        self.m_rule = m_rule
        self.n_features_to_select = n_features_to_select
        self.threshold = threshold
        self.tie_seed = tie_seed
        self.n_jobs = n_jobs

    def fit(self, X, y):
        """Score every column of X against the censored response y.

        ``y`` is a record array from :func:`make_survival_target`, an (n, 2)
        array of ``[time, event]`` rows, or a ``SurvivalResponse``.
        """
        X = check_array(X, dtype=np.float64)
        resp = SurvivalResponse.from_array(y)
        if resp.n != X.shape[0]:
            raise ValueError(f"dimension mismatch: X has {X.shape[0]} rows, y has {resp.n}")
        if self.threshold is not None:
            selection = Threshold(float(self.threshold))
        else:
            d = self.n_features_to_select
            if d is None:
                d = default_model_sizes(resp.n)[0] if resp.n >= 3 else X.shape[1]
            selection = TopD(int(d))
        cfg = ScreeningConfig(MRule.parse(self.m_rule), selection, self.tie_seed, self.n_jobs)
        self.result_ = screen(X, resp, cfg)
        self.omega_ = self.result_.omega
        self.ranking_ = self.result_.order
        self.M_ = self.result_.M_used
        self.n_features_in_ = X.shape[1]
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "result_")
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[self.result_.selected] = True
        return mask
