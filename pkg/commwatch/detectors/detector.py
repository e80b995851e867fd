import logging
from typing import NamedTuple, Optional, Tuple

import numpy as np

from ..exceptions import StreamException
from ..statistics import EdgeCountWindow, LlrParams


class StepReport(NamedTuple):
    t: int
    statistic: float
    alarmed: bool
    argmax_k: Optional[int]
    localized_set: Optional[Tuple[int, ...]] = None


class RunResult(NamedTuple):
    """stopping_time is max_t (or the last step of an exhausted stream) when censored"""
    stopping_time: int
    censored: bool
    report: Optional[StepReport]


class RecordPath(NamedTuple):
    """ times and values at which the running maximum of the statistic rose

    last_t is the final step simulated; reached tells whether the run
    stopped because the ceiling was reached (otherwise it was censored).
    """
    times: Tuple[int, ...]
    values: Tuple[float, ...]
    last_t: int
    reached: bool


class MetaBaseDetector(type):
    @property
    def name(cls):
        return cls.__module__.split('.')[-1]


class BaseDetector(metaclass=MetaBaseDetector):
    """ sequential stopping rule over a snapshot stream

    subclasses define _statistic(ks), which receives the admissible
    hypothesized changepoints newest first and returns
    (statistic, argmax_k, localized_set). step() keeps the count window,
    the clock and the alarm flag.

    pair_evaluations counts the edge-level statistic evaluations performed
    so far; it is the cost model behind the complexity checks.
    """

    def __init__(self, config, n_nodes):
        self.config = config.for_nodes(n_nodes)
        self.n_nodes = n_nodes
        self.logger = logging.getLogger(__name__)
        self.params = LlrParams(config.p0, config.p1) if config.p1_known else None
        self.window = EdgeCountWindow(n_nodes, config.m1)
        self.t = 0
        self.pair_evaluations = 0

    def _check_snapshot(self, snapshot):
        if snapshot.n_nodes != self.n_nodes:
            raise StreamException('snapshot has {} nodes, detector expects {}'.format(snapshot.n_nodes, self.n_nodes))

    def _report(self, statistic, argmax_k, localized_set):
        return StepReport(
            t=self.t,
            statistic=float(statistic),
            alarmed=bool(statistic >= self.config.threshold),
            argmax_k=None if argmax_k is None else int(argmax_k),
            localized_set=localized_set,
        )

    def windowed_step(self, snapshot):
        self._check_snapshot(snapshot)
        self.window.push(snapshot)
        self.t += 1
        ks = self.window.admissible(self.config.m0, self.config.m1)
        if len(ks) == 0:
            return self._report(-np.inf, None, None)
        return self._report(*self._statistic(ks))

    def step(self, snapshot):
        return self.windowed_step(snapshot)

    def _statistic(self, ks):
        raise NotImplementedError


def run_until_alarm(detector, stream, max_t):
    """ feeds the stream to the detector until the first alarm or max_t steps """

    if max_t < 1:
        raise ValueError('max_t must be >= 1, got {}'.format(max_t))

    report = None
    for snapshot in stream:
        report = detector.step(snapshot)
        if report.alarmed:
            return RunResult(report.t, False, report)
        if report.t >= max_t:
            break
    return RunResult(detector.t, True, report)


def record_path(detector, stream, ceiling, max_t):
    """ runs until the statistic reaches ceiling or max_t, recording each new running maximum

    the stopping time for any threshold b <= ceiling on this sample path is
    the first record time whose value is >= b
    """

    times, values = [], []
    best = -np.inf
    for snapshot in stream:
        report = detector.step(snapshot)
        if report.statistic > best:
            best = report.statistic
            times.append(report.t)
            values.append(best)
            if best >= ceiling:
                return RecordPath(tuple(times), tuple(values), report.t, True)
        if report.t >= max_t:
            break
    return RecordPath(tuple(times), tuple(values), detector.t, False)


def stopping_time(path, b):
    """ (stopping time, censored) of a record path at threshold b """

    for t, value in zip(path.times, path.values):
        if value >= b:
            return t, False
    if path.reached:
        raise ValueError('threshold {} lies above the recorded ceiling {}'.format(b, path.values[-1]))
    return path.last_t, True
