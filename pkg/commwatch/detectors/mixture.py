""" Mixture method

Sums the soft-thresholded edge statistics h(U) over every edge of the
graph and maximizes over the admissible changepoints. Needs no community
size and gives no localization. With p1 unknown one MLE of p1, pooled over
all edges, is plugged into every U of a changepoint.
"""

import numpy as np

from .detector import BaseDetector
from ..statistics import edge_statistics, plugin_edge_statistics, soft_threshold_h


def edge_scores(detector, ks):
    """h(U) for every admissible changepoint (rows) and edge (columns)"""

    counts = detector.window.counts_matrix(ks)
    taus = detector.t - ks
    if detector.params is not None:
        u = edge_statistics(counts, taus, detector.params)
    else:
        u = plugin_edge_statistics(counts, taus, detector.config.p0)
    return soft_threshold_h(u, detector.config.alpha)


class Detector(BaseDetector):

    def mixture_step(self, snapshot):
        return self.windowed_step(snapshot)

    def _statistic(self, ks):
        scores = edge_scores(self, ks)
        self.pair_evaluations += scores.size
        totals = scores.sum(axis=1)
        row = int(np.argmax(totals))
        return totals[row], ks[row], None
