"""Weighted K-nearest-neighbour imputation of missing feature values."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

__all__ = ["knn_impute", "WeightedKNNImputer"]


def _row_distances(row, row_mask, donors, donor_mask):
    """RMS difference over coordinates observed in both rows; inf if none shared."""
    shared = donor_mask & row_mask
    counts = shared.sum(axis=1)
    diff = np.where(shared, donors - np.where(row_mask, row, 0.0), 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        dist = np.sqrt((diff**2).sum(axis=1) / counts)
    dist[counts == 0] = np.inf
    return dist


def _impute(X, donors, K):
    X = np.array(X, dtype=np.float64)
    donors = np.asarray(donors, dtype=np.float64)
    observed = ~np.isnan(X)
    donor_observed = ~np.isnan(donors)
    donor_filled = np.where(donor_observed, donors, 0.0)
    out = X.copy()
    for i in np.flatnonzero(~observed.all(axis=1)):
        if not observed[i].any():
            raise ValueError(f"row {i} has no observed features")
        dist = _row_distances(X[i], observed[i], donor_filled, donor_observed)
        for k in np.flatnonzero(~observed[i]):
            candidates = np.flatnonzero(donor_observed[:, k] & np.isfinite(dist))
            if candidates.size == 0:
                raise ValueError(f"no neighbour with feature observed for cell ({i}, {k})")
            # stable: equal distances keep ascending row order
            nearest = candidates[np.argsort(dist[candidates], kind="stable")[:K]]
            d = dist[nearest]
            values = donors[nearest, k]
            if np.any(d == 0.0):
                out[i, k] = values[d == 0.0].mean()
            else:
                w = 1.0 / d
                out[i, k] = np.dot(w, values) / w.sum()
    return out


def knn_impute(X, K: int = 15) -> np.ndarray:
    """Fill NaN cells from the K nearest rows that observe the feature.

    Distance between two rows is the root-mean-square difference over the
    features observed in both; neighbours are averaged with weights
    1 / distance, and neighbours at distance zero are averaged alone.
    Deterministic; complete input is returned unchanged.

    Parameters
    ----------
    X : array-like of shape (n, p)
        Feature matrix with NaN marking missing cells.
    K : int
        Number of neighbours.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be a 2-d matrix")
    return _impute(X, X, int(K))


class WeightedKNNImputer(TransformerMixin, BaseEstimator):
    """Transformer wrapper around :func:`knn_impute`.

    Neighbours are drawn from the rows seen in ``fit``.

    Parameters
    ----------
    n_neighbors : int, default=15
    """

    def __init__(self, n_neighbors=15):
        self.n_neighbors = n_neighbors

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_all_finite="allow-nan")
        if self.n_neighbors < 1:
            raise ValueError("n_neighbors must be >= 1")
        self.fit_X_ = X
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "fit_X_")
        X = check_array(X, dtype=np.float64, ensure_all_finite="allow-nan")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return _impute(X, self.fit_X_, int(self.n_neighbors))
