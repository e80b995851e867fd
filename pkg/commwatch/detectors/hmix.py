""" Hierarchical mixture method

For every admissible changepoint k, start from the full node set and keep
dropping the node whose removal leaves the largest mixture statistic M
until s nodes remain; P_k is M of what is left. Removing i from S lowers M
by the sum of h(U) over the pairs (i, j), j in S, so the node dropped is the
one with the smallest such row sum (the smallest index on ties).
"""

import numpy as np

from .detector import BaseDetector
from .mixture import edge_scores
from ..utils import edge_pairs


class Detector(BaseDetector):

    def __init__(self, config, n_nodes):
        super().__init__(config, n_nodes)
        self._rows, self._cols = edge_pairs(n_nodes)

    def hmix_step(self, snapshot):
        return self.windowed_step(snapshot)

    def peel(self, scores):
        """ runs the node removal chain on (K, n_pairs) edge scores

        returns (P, alive): P_k per row and the boolean membership of the
        surviving nodes
        """

        n, s = self.n_nodes, self.config.s
        scores = np.atleast_2d(scores)
        K = scores.shape[0]
        matrix = np.zeros((K, n, n))
        matrix[:, self._rows, self._cols] = scores
        matrix[:, self._cols, self._rows] = scores
        alive = np.ones((K, n), dtype=bool)
        self.pair_evaluations += scores.size

        for size in range(n, s, -1):
            row_sums = np.einsum('kij,kj->ki', matrix, alive)
            row_sums[~alive] = np.inf
            dropped = np.argmin(row_sums, axis=1)
            alive[np.arange(K), dropped] = False
            self.pair_evaluations += K * size * size

        inside = alive[:, self._rows] & alive[:, self._cols]
        totals = np.where(inside, scores, 0.0).sum(axis=1)
        return totals, alive

    def _statistic(self, ks):
        totals, alive = self.peel(edge_scores(self, ks))
        row = int(np.argmax(totals))
        return totals[row], ks[row], tuple(int(v) for v in np.flatnonzero(alive[row]))
