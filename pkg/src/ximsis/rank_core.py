"""Rank machinery and the M-nearest-neighbour revision of Chatterjee's xi.

All indices are 0-based. Ranks are 1-based integers (a permutation of 1..n
once ties have been broken by a seeded uniform permutation).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "RankedColumn",
    "NeighborTable",
    "XiDecomposition",
    "rank_vector",
    "right_neighbors",
    "xi_nm",
    "xi_decompose",
    "sum_min_sorted",
    "xi_from_sum",
]

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class RankedColumn:
    """Tie-broken integer ranks of one column.

    Attributes
    ----------
    ranks : ndarray of int64, shape (n,)
        Permutation of 1..n.
    tie_seed : int
        Seed of the uniform permutation used to order tied values.
    """

    ranks: np.ndarray
    tie_seed: int

    def __len__(self) -> int:
        return len(self.ranks)


@dataclass(frozen=True)
class NeighborTable:
    """Right nearest neighbours in the U-ordering.

    ``indices[i, m - 1]`` is the index of the sample whose U-rank is the
    m-th above that of sample i, or i itself when fewer than m samples
    rank above it.
    """

    indices: np.ndarray
    M: int


@dataclass(frozen=True)
class XiDecomposition:
    q_nm: float
    u_n: float
    xi_nm: float
    n: int
    m_neighbors: int

    def reconstruct(self) -> float:
        """xi recomputed from ``q_nm / u_n`` through the linear relation."""
        n, M = self.n, self.m_neighbors
        denom = 4 * n + M + 1
        return 4 * (n - 1) / denom * (self.q_nm / self.u_n) - 2 * (M - 1) / denom


def normalize_seed(seed) -> int:
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    return seed & _SEED_MASK


def _as_vector(values, name: str = "values") -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size == 0:
        raise ValueError("empty column")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    return arr


def has_ties(values: np.ndarray) -> bool:
    s = np.sort(values)
    return bool(np.any(s[1:] == s[:-1]))


def tie_broken_ranks(values: np.ndarray, seed: int) -> np.ndarray:
    """Ranks 1..n; ties ordered by a permutation drawn from ``seed``."""
    n = values.shape[0]
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    if np.any(sorted_vals[1:] == sorted_vals[:-1]):
        keys = np.random.default_rng(seed).permutation(n)
        order = np.lexsort((keys, values))
    ranks = np.empty(n, dtype=np.int64)
    ranks[order] = np.arange(1, n + 1, dtype=np.int64)
    return ranks


def rank_vector(values, tie_seed: int = 0) -> RankedColumn:
    """Rank ``values`` as R_i = #{j : V_j <= V_i} after random tie breaking.

    Distinct values are ranked independently of the seed; tied values are
    ordered by a uniform random permutation drawn from ``tie_seed``.

    Examples
    --------
    >>> rank_vector([3.1, 1.2, 2.7]).ranks
    array([3, 1, 2])
    """
    arr = _as_vector(values)
    seed = normalize_seed(tie_seed)
    return RankedColumn(tie_broken_ranks(arr, seed), seed)


def _check_neighbor_count(M, n: int) -> int:
    if int(M) != M or not 1 <= M <= n:
        raise ValueError(f"invalid neighbor count: M={M} with n={n}")
    return int(M)


def inverse_permutation(ranks: np.ndarray) -> np.ndarray:
    """Index of the sample holding rank r at position r - 1."""
    order = np.empty_like(ranks)
    order[ranks - 1] = np.arange(ranks.shape[0], dtype=ranks.dtype)
    return order


def right_neighbors(u_ranks: RankedColumn, M: int) -> NeighborTable:
    ranks = np.asarray(u_ranks.ranks, dtype=np.int64)
    n = ranks.shape[0]
    M = _check_neighbor_count(M, n)
    order = inverse_permutation(ranks)
    pos = ranks - 1
    self_idx = np.arange(n, dtype=np.int64)
    table = np.empty((n, M), dtype=np.int64)
    for m in range(1, M + 1):
        target = pos + m
        inside = target < n
        table[:, m - 1] = np.where(inside, order[np.minimum(target, n - 1)], self_idx)
    return NeighborTable(table, M)


def sum_min_sorted(r: np.ndarray, M: int) -> np.ndarray:
    """Sum over i and m of min(r[i], r[i + m]), with r[i] used past the end.

    ``r`` holds V-ranks arranged in increasing U order along its last
    axis; leading axes index features. Returns int64 totals.
    """
    r = np.asarray(r)
    if r.shape[-1] < 2**31:
        r = r.astype(np.int32, copy=False)
    total = np.zeros(r.shape[:-1], dtype=np.int64)
    for m in range(1, M + 1):
        total += np.minimum(r[..., :-m], r[..., m:]).sum(axis=-1, dtype=np.int64)
        total += r[..., -m:].sum(axis=-1, dtype=np.int64)
    return total


def xi_from_sum(sum_min, n: int, M: int):
    """Map the integer neighbour-min total to xi_{n,M}.

    Evaluated as one division of exact integers, so the result is the
    correctly rounded value of the rational expression.
    """
    # xi = -2 + 24 S / ((n + 1)(4nM + M(M + 1)))
    base = 4 * n * M + M * (M + 1)
    denom = (n + 1) * base
    num = 24 * np.asarray(sum_min, dtype=np.int64) - 2 * denom
    out = num / denom
    return float(out) if np.ndim(out) == 0 else out


def _check_pair(u, v, M):
    u = _as_vector(u, "u")
    v = _as_vector(v, "v")
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape[0]} != {v.shape[0]}")
    n = u.shape[0]
    if n < 2:
        raise ValueError("degenerate sample: need n >= 2")
    if np.all(v == v[0]):
        raise ValueError("constant column: xi is undefined for constant v")
    return u, v, _check_neighbor_count(M, n)


def xi_nm(u, v, M: int, tie_seed: int = 0) -> float:
    """Revised Chatterjee rank correlation of v on u with M right neighbours.

    Parameters
    ----------
    u, v : array-like of shape (n,)
        Paired samples; neighbours are taken in the u-ordering.
    M : int
        Number of right nearest neighbours, ``1 <= M <= n``.
    tie_seed : int
        Seed for breaking ties in u and v.

    Returns
    -------
    float
    """
    u, v, M = _check_pair(u, v, M)
    seed = normalize_seed(tie_seed)
    n = u.shape[0]
    ru = tie_broken_ranks(u, seed)
    rv = tie_broken_ranks(v, seed)
    r_sorted = rv[inverse_permutation(ru)]
    return xi_from_sum(sum_min_sorted(r_sorted, M), n, M)


def xi_decompose(u, v, M: int, tie_seed: int = 0) -> XiDecomposition:
    """Q_{n,M}, U_n and xi_{n,M} computed from empirical CDFs of v.

    Q and U are built from F_n(V_i) = R_i / n and G_n(V_i) = (n - R_i + 1) / n
    over an explicit neighbour table, independently of :func:`xi_nm`.
    """
    u, v, M = _check_pair(u, v, M)
    seed = normalize_seed(tie_seed)
    n = u.shape[0]
    ru = RankedColumn(tie_broken_ranks(u, seed), seed)
    rv = tie_broken_ranks(v, seed)
    table = right_neighbors(ru, M).indices
    # exact rationals: F_n = R / n, G_n = (n - R + 1) / n
    min_total = int(np.minimum(rv[:, None], rv[table]).sum())
    g_num = n - rv + 1
    q = Fraction(min_total, n * n * M) - Fraction(int((g_num**2).sum()), n**3)
    u_n = Fraction(int((g_num * (rv - 1)).sum()), n**3)
    return XiDecomposition(
        q_nm=float(q),
        u_n=float(u_n),
        xi_nm=xi_nm(u, v, M, seed),
        n=n,
        m_neighbors=M,
    )
