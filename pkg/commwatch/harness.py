""" Monte Carlo estimation of run lengths and threshold calibration

Trial i of an experiment owns a fresh detector and the stream seeded with
experiment.seed(i). Outcomes are sorted by trial before they are reduced,
so an estimate does not depend on how many processes ran the trials.
"""

import logging
import math
from multiprocessing import Pool
import time
from typing import NamedTuple, Optional, Tuple

import numpy as np

from . import settings
from .detectors import create_detector, record_path, run_until_alarm, stopping_time
from .exceptions import BracketException, InvalidConfigException
from .graph import stream
from .models import EstimateReport

logger = logging.getLogger(__name__)


class TrialOutcome(NamedTuple):
    trial: int
    stopping_time: int
    censored: bool
    localized_set: Optional[Tuple[int, ...]]


def run_trial(experiment, trial):
    """runs one trial to alarm or experiment.max_t"""

    scenario = experiment.scenario
    detector = create_detector(experiment.detector, scenario.n_nodes)
    result = run_until_alarm(detector, stream(scenario, experiment.seed(trial)), experiment.max_t)
    localized = result.report.localized_set if result.report is not None else None
    return TrialOutcome(trial, result.stopping_time, result.censored, localized)


def record_trial(experiment, trial, ceiling):
    """the record path of one trial, simulated until the statistic reaches ceiling"""

    scenario = experiment.scenario
    detector = create_detector(experiment.detector, scenario.n_nodes)
    return trial, record_path(detector, stream(scenario, experiment.seed(trial)), ceiling, experiment.max_t)


def never_stop():
    return False


def map_trials(function, experiment, trials, processes=1, extra=(), stop=never_stop):
    """ applies function(experiment, trial, *extra) to each trial, in order of trial

    with processes > 1 the trials are spread over a Pool. stop() is checked
    before each trial is started or submitted; a stop raises KeyboardInterrupt.
    """

    trials = list(trials)
    processes = max(1, min(processes, len(trials)))
    results = []

    if processes == 1:
        for trial in trials:
            if stop():
                raise KeyboardInterrupt('stopped after {} of {} trials'.format(len(results), len(trials)))
            results.append(function(experiment, trial, *extra))
        return results

    with Pool(processes=processes) as pool:
        pending = []
        for trial in trials:
            if stop():
                pool.terminate()
                raise KeyboardInterrupt('stopped after submitting {} of {} trials'.format(len(pending), len(trials)))
            pending.append(pool.apply_async(function, (experiment, trial) + tuple(extra)))
        results = [r.get() for r in pending]

    return sorted(results, key=lambda r: r[0])


def summarize(times, censored, wall_time, localization_rate=None):
    """ mean and standard error (sample stdev / sqrt(n)) of the stopping times """

    times = np.asarray(times, dtype=float)
    n = len(times)
    if n == 0:
        raise ValueError('no trials to summarize')
    stderr = float(times.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return EstimateReport(
        estimate=float(times.mean()),
        stderr=stderr,
        n_trials=n,
        n_censored=int(np.count_nonzero(censored)),
        wall_time=wall_time,
        localization_rate=localization_rate,
    )


def _log_report(name, experiment, report):
    logger.info('{} {}: {:.4g} +/- {:.3g} over {} trials ({} censored at {}) in {:.1f}s'.format(
        name, experiment.detector.method, report.estimate, report.stderr, report.n_trials,
        report.n_censored, experiment.max_t, report.wall_time))
    if not report.reliable:
        logger.warning('{:.1%} of trials censored at max_t={}; estimate unreliable'.format(
            report.censored_fraction, experiment.max_t))


def estimate_arl(experiment, processes=1, stop=never_stop):
    """ mean stopping time under the null """

    if experiment.scenario.changepoint is not None:
        raise InvalidConfigException('scenario', 'ARL estimation needs changepoint null')

    start = time.time()
    outcomes = map_trials(run_trial, experiment, range(experiment.n_trials), processes, stop=stop)
    report = summarize([o.stopping_time for o in outcomes], [o.censored for o in outcomes], time.time() - start)
    _log_report('ARL', experiment, report)
    return report


def estimate_delay(experiment, processes=1, stop=never_stop):
    """ mean of T - changepoint over the trials with T > changepoint

    a changepoint of 0 puts the change at t = 1, every trial counts and the
    delay is the stopping time itself. ES and HMix also report the fraction
    of alarmed trials localizing exactly the planted community.
    """

    scenario = experiment.scenario
    if scenario.changepoint is None:
        raise InvalidConfigException('scenario', 'delay estimation needs a finite changepoint')

    start = time.time()
    outcomes = map_trials(run_trial, experiment, range(experiment.n_trials), processes, stop=stop)
    kept = [o for o in outcomes if o.stopping_time > scenario.changepoint]
    if len(kept) < len(outcomes):
        logger.warning('{} of {} trials alarmed before the changepoint and are left out'.format(
            len(outcomes) - len(kept), len(outcomes)))
    if not kept:
        raise ValueError('every trial alarmed before the changepoint {}'.format(scenario.changepoint))

    localization_rate = None
    alarmed = [o for o in kept if not o.censored]
    if scenario.is_community and experiment.detector.method in ('ES', 'HMix') and alarmed:
        hits = sum(1 for o in alarmed if o.localized_set == scenario.community)
        localization_rate = hits / len(alarmed)

    report = summarize(
        [o.stopping_time - scenario.changepoint for o in kept],
        [o.censored for o in kept],
        time.time() - start,
        localization_rate,
    )
    _log_report('delay', experiment, report)
    return report


def record_paths(experiment, trials, ceiling, processes=1, stop=never_stop):
    results = map_trials(record_trial, experiment, trials, processes, extra=(ceiling,), stop=stop)
    return [path for _, path in results]


def arl_from_paths(paths, b):
    """ EstimateReport of the run length at threshold b, read off record paths """

    outcomes = [stopping_time(path, b) for path in paths]
    return summarize([t for t, _ in outcomes], [c for _, c in outcomes], 0.0)


def threshold_from_paths(paths, target_arl, lo, hi, iterations=60):
    """ bisection for the smallest b in [lo, hi] whose path-wise ARL reaches target_arl

    the ARL read off a fixed set of record paths is a nondecreasing step
    function of b, so bisection needs no new simulation
    """

    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if arl_from_paths(paths, mid).estimate < target_arl:
            lo = mid
        else:
            hi = mid
    return hi


def calibrate_threshold_mc(experiment, target_arl=None, tol=None, processes=1, stop=never_stop):
    """ threshold b at which the simulated ARL of the detector is target_arl

    Every candidate b is scored on the same seed schedule (common random
    numbers). Each trial records the running maximum of its statistic until
    it reaches a ceiling; the ceiling grows by half (by a tenth once the ARL
    is within a decade of the target) until the ARL at the ceiling reaches
    the target, then b is found by bisection on the record
    paths. The number of trials starts at CALIBRATION_TRIALS and doubles,
    up to experiment.n_trials, while two standard errors exceed tol.
    """

    target_arl = experiment.target_arl if target_arl is None else target_arl
    tol = settings.CALIBRATION_TOL if tol is None else tol
    if target_arl is None or not target_arl > 1:
        raise InvalidConfigException('target_arl', 'calibration needs a target ARL > 1, got {}'.format(target_arl))
    if experiment.scenario.changepoint is not None:
        raise InvalidConfigException('scenario', 'calibration runs under the null, changepoint must be null')

    n_trials = min(settings.CALIBRATION_TRIALS, experiment.n_trials)
    ceiling = experiment.detector.threshold if experiment.detector.threshold > 0 else 1.0
    start = time.time()

    while True:
        paths = record_paths(experiment, range(n_trials), ceiling, processes, stop)
        at_ceiling = arl_from_paths(paths, ceiling).estimate
        logger.debug('calibration ceiling {:.4g}: ARL {:.5g} over {} trials'.format(ceiling, at_ceiling, n_trials))
        if at_ceiling >= target_arl:
            b = threshold_from_paths(paths, target_arl, 0.0, ceiling)
            report = arl_from_paths(paths, b)
            if 2 * report.stderr <= tol * target_arl or n_trials >= experiment.n_trials:
                break
            n_trials = min(2 * n_trials, experiment.n_trials)
            logger.info('calibration SE {:.3g} too wide, rerunning with {} trials'.format(report.stderr, n_trials))
            continue
        # smaller steps once the ARL is within a decade of the target
        ceiling *= 1.5 if at_ceiling < target_arl / 10 else 1.1
        if ceiling > settings.B_MAX:
            raise BracketException('simulated ARL stays below {} for b in (0, {}]'.format(target_arl, settings.B_MAX))

    if abs(report.estimate / target_arl - 1) > tol:
        logger.warning('calibrated ARL {:.5g} is more than {:.0%} from {}'.format(report.estimate, tol, target_arl))
    if not report.reliable:
        logger.warning('{:.1%} of calibration trials censored'.format(report.censored_fraction))
    logger.info('calibrated {} threshold {:.4f}: ARL {:.5g} +/- {:.3g} over {} trials in {:.1f}s'.format(
        experiment.detector.method, b, report.estimate, report.stderr, n_trials, time.time() - start))
    return b
