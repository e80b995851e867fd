""" Likelihood statistics of the edge model

For an edge observed over tau = t - k steps after a hypothesized change at
k, with x firings among them, the log-likelihood ratio of p1 against p0 is

    U = (c0 - c1) x + tau c1,   c0 = log(p1 / p0),  c1 = log((1 - p1) / (1 - p0))

Every statistic here is evaluated from windowed counts x = C_t - C_k kept by
EdgeCountWindow; nothing rescans snapshots.
"""

from dataclasses import dataclass, field
import logging
from typing import NamedTuple

import numpy as np

from . import settings
from .exceptions import InvalidConfigException, WindowRangeException
from .models.scenario import GraphSnapshot
from .models.validation import check_probability
from .utils import clique_edge_indices, edge_index, n_pairs

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LlrParams():
    p0: float
    p1: float
    c0: float = field(init=False)
    c1: float = field(init=False)

    def __post_init__(self):
        check_probability('p0', self.p0)
        check_probability('p1', self.p1)
        if self.p1 <= self.p0:
            raise InvalidConfigException('p1', 'must be > p0 ({}), got {}'.format(self.p0, self.p1))
        object.__setattr__(self, 'c0', float(np.log(self.p1) - np.log(self.p0)))
        object.__setattr__(self, 'c1', float(np.log1p(-self.p1) - np.log1p(-self.p0)))

    @property
    def slope(self):
        """c0 - c1, the weight of one firing"""
        return self.c0 - self.c1


class P1Estimate(NamedTuple):
    value: float
    raw: float


class EdgeCountWindow():
    """ cumulative per-edge counts C_t = sum_{m <= t} X_m over the last m1 + 1 times

    With m1 None every cumulative row since t = 0 is kept. Single writer:
    queries may run concurrently between pushes.
    """

    def __init__(self, n_nodes, m1=None):
        self.n_nodes = n_nodes
        self.m1 = m1
        self.t = 0
        capacity = m1 + 1 if m1 is not None else 64
        self._rows = np.zeros((capacity, n_pairs(n_nodes)), dtype=np.int64)

    def _slot(self, k):
        if self.m1 is None:
            return k
        return k % self._rows.shape[0]

    def push(self, snapshot):
        """appends the snapshot (or its edge indicator array) as time t + 1"""

        if isinstance(snapshot, GraphSnapshot):
            indicators = snapshot.indicators
        else:
            indicators = np.asarray(snapshot, dtype=bool)
        current = self._rows[self._slot(self.t)]
        if self.m1 is None and self.t + 1 >= self._rows.shape[0]:
            grown = np.zeros((2 * self._rows.shape[0], self._rows.shape[1]), dtype=np.int64)
            grown[:self._rows.shape[0]] = self._rows
            self._rows = grown
            current = self._rows[self.t]
        self._rows[self._slot(self.t + 1)] = current + indicators
        self.t += 1

    @property
    def oldest(self):
        """the earliest k still answerable"""
        if self.m1 is None:
            return 0
        return max(0, self.t - self.m1)

    def _check(self, k):
        if not self.oldest <= k <= self.t:
            raise WindowRangeException('k={} outside retained window [{}, {}]'.format(k, self.oldest, self.t))

    def windowed_counts(self, k):
        """C_t - C_k for every edge"""
        self._check(k)
        return self._rows[self._slot(self.t)] - self._rows[self._slot(k)]

    def windowed_count(self, i, j, k):
        return int(self.windowed_counts(k)[edge_index(i, j, self.n_nodes)])

    def counts_matrix(self, ks):
        """ returns a (len(ks), n_pairs) array whose row r is C_t - C_{ks[r]} """

        ks = np.asarray(ks, dtype=np.intp)
        if len(ks) and (ks.min() < self.oldest or ks.max() > self.t):
            raise WindowRangeException('k range [{}, {}] outside [{}, {}]'.format(ks.min(), ks.max(), self.oldest, self.t))
        slots = ks if self.m1 is None else ks % self._rows.shape[0]
        return self._rows[self._slot(self.t)] - self._rows[slots]

    def admissible(self, m0, m1):
        """ the hypothesized changepoints t - m1 <= k <= t - m0 (k >= 0), newest first """

        lowest = 0 if m1 is None else max(0, self.t - m1)
        lowest = max(lowest, self.oldest)
        return np.arange(self.t - m0, lowest - 1, -1, dtype=np.intp)


def known_llr(x, n_obs, params):
    """log-LR of x firings among n_obs Bernoulli observations at known p1"""
    return params.slope * x + n_obs * params.c1


def mle_from_counts(x, n_obs, p0, epsilon=None):
    """ (clamped, raw) MLE of p1 from x firings among n_obs observations

    the estimate is clamped to [p0, 1 - epsilon]: the alternative is one
    sided and log(1 - p1) must stay finite
    """

    epsilon = settings.MLE_EPSILON if epsilon is None else epsilon
    x = np.asarray(x, dtype=float)
    n_obs = np.asarray(n_obs, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        raw = np.where(n_obs > 0, x / np.where(n_obs > 0, n_obs, 1), np.nan)
    return np.clip(raw, p0, 1 - epsilon), raw


def plugin_llr(x, n_obs, p0, epsilon=None):
    """ log-LR with the clamped MLE plugged in for p1; zero where n_obs is zero """

    x = np.asarray(x, dtype=float)
    n_obs = np.asarray(n_obs, dtype=float)
    p1, _ = mle_from_counts(x, n_obs, p0, epsilon)
    p1 = np.where(n_obs > 0, p1, p0)
    c0 = np.log(p1) - np.log(p0)
    c1 = np.log1p(-p1) - np.log1p(-p0)
    return x * c0 + (n_obs - x) * c1


def edge_statistics(counts, taus, params):
    """U for a (K, P) count matrix with the K window lengths in taus"""
    taus = np.asarray(taus, dtype=float)
    return params.slope * counts + (taus * params.c1)[:, None]


def plugin_edge_statistics(counts, taus, p0, epsilon=None):
    """ U per edge with one MLE of p1 per row, pooled over every edge of the row """

    counts = np.asarray(counts, dtype=float)
    taus = np.asarray(taus, dtype=float)
    p1, _ = mle_from_counts(counts.sum(axis=1), taus * counts.shape[1], p0, epsilon)
    p1 = np.where(taus > 0, p1, p0)
    c0 = np.log(p1) - np.log(p0)
    c1 = np.log1p(-p1) - np.log1p(-p0)
    return (c0 - c1)[:, None] * counts + (taus * c1)[:, None]


def soft_threshold_h(x, alpha):
    """ h(x) = log(1 - alpha + alpha e^x), without overflow for large x """

    if not 0 < alpha <= 1:
        raise InvalidConfigException('alpha', 'must lie in (0, 1], got {}'.format(alpha))
    x = np.asarray(x, dtype=float)
    if alpha == 1:
        return x if x.ndim else float(x)

    with np.errstate(over='ignore'):
        small = np.log1p(alpha * np.expm1(np.minimum(x, 0)))
        large = np.maximum(x, 0) + np.log(alpha) + np.log1p((1 - alpha) * np.exp(-np.maximum(x, 0)) / alpha)
    result = np.where(x > 0, large, small)
    return result if result.ndim else float(result)


def _clique(window, nodes):
    nodes = sorted(set(nodes))
    if len(nodes) < 2:
        raise ValueError('node set needs at least 2 nodes, got {}'.format(nodes))
    return clique_edge_indices(nodes, window.n_nodes)


def u_stat(window, params, edge, k):
    """U_{k,t} of one edge"""
    count = window.windowed_count(edge[0], edge[1], k)
    return float(known_llr(count, window.t - k, params))


def community_llr(window, params, nodes, k):
    """sum of U over the clique edges of nodes"""
    indices = _clique(window, nodes)
    x = window.windowed_counts(k)[indices].sum()
    return float(known_llr(x, (window.t - k) * len(indices), params))


def mle_p1(window, nodes, k, p0, epsilon=None):
    """ MLE of p1 over the clique of nodes after k, with its unclamped value """

    if k == window.t:
        raise WindowRangeException('zero-length window at k = t = {}'.format(k))
    indices = _clique(window, nodes)
    x = window.windowed_counts(k)[indices].sum()
    value, raw = mle_from_counts(x, (window.t - k) * len(indices), p0, epsilon)
    return P1Estimate(float(value), float(raw))


def mixture_stat(window, params, nodes, k, alpha):
    """sum of h(U) over the pairs inside nodes"""
    indices = _clique(window, nodes)
    counts = window.windowed_counts(k)[indices]
    return float(np.sum(soft_threshold_h(known_llr(counts, window.t - k, params), alpha)))
