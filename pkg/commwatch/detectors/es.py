""" Exhaustive search over every node subset of size s

The statistic is the largest community log-LR over all C(N, s) subsets and
all admissible changepoints. With p1 known, m0 = 0 and an unbounded window,
the maximum over changepoints of each subset follows the CUSUM recursion

    W_S <- max(W_S + sum_{(i,j) in S} U_{t,t+1}, 0)

which is what es_cusum_step runs. W_S is carried as the integer pair
(firings, observations) since the last reset, so its value is computed
with exactly the arithmetic es_step applies to the same window.
"""

import numpy as np

from .detector import BaseDetector
from ..exceptions import InvalidConfigException
from ..statistics import known_llr, plugin_llr
from ..utils import subset_incidence


class Detector(BaseDetector):

    def __init__(self, config, n_nodes, use_cusum=None):
        super().__init__(config, n_nodes)
        s = self.config.s
        self.subsets, incidence = subset_incidence(n_nodes, s)
        self._incidence = incidence.T.astype(np.int64)
        self.edges_per_subset = s * (s - 1) // 2

        self.use_cusum = self.config.cusum_eligible if use_cusum is None else use_cusum
        if self.use_cusum and not self.config.cusum_eligible:
            raise InvalidConfigException('method', 'the CUSUM recursion needs p1 known, m0 = 0 and m1 null')
        self._cusum_x = np.zeros(len(self.subsets), dtype=np.int64)
        self._cusum_n = np.zeros(len(self.subsets), dtype=np.int64)
        self._cusum_k = np.zeros(len(self.subsets), dtype=np.int64)

        self.logger.debug('ES over {} subsets of size {} ({})'.format(
            len(self.subsets), s, 'cusum' if self.use_cusum else 'windowed'))

    def step(self, snapshot):
        if self.use_cusum:
            return self.es_cusum_step(snapshot)
        return self.es_step(snapshot)

    def es_step(self, snapshot):
        return self.windowed_step(snapshot)

    def _statistic(self, ks):
        counts = self.window.counts_matrix(ks)
        firings = counts @ self._incidence
        n_obs = (self.t - ks)[:, None] * self.edges_per_subset
        if self.params is not None:
            values = known_llr(firings, n_obs, self.params)
        else:
            values = plugin_llr(firings, n_obs, self.config.p0)
        self.pair_evaluations += values.size * self.edges_per_subset

        # subset-major, newest k first: the first maximum is the smallest
        # subset in lexicographic order at its most recent changepoint
        flat = int(np.argmax(values.T))
        subset, row = divmod(flat, len(ks))
        return values[row, subset], ks[row], self.subsets[subset]

    def es_cusum_step(self, snapshot):
        if not self.config.cusum_eligible:
            raise InvalidConfigException('p1', 'no recursive form of the ES statistic without p1 known, m0 = 0, m1 null')
        self._check_snapshot(snapshot)
        self.t += 1

        fired = snapshot.indicators.astype(np.int64) @ self._incidence
        x = self._cusum_x + fired
        n = self._cusum_n + self.edges_per_subset
        values = known_llr(x, n, self.params)
        keep = values > 0
        self._cusum_x = np.where(keep, x, 0)
        self._cusum_n = np.where(keep, n, 0)
        self._cusum_k = np.where(keep, self._cusum_k, self.t)
        values = np.where(keep, values, 0.0)
        self.pair_evaluations += len(self.subsets) * self.edges_per_subset

        best = int(np.argmax(values))
        return self._report(values[best], self._cusum_k[best], self.subsets[best])
