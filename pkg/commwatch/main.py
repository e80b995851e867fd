""" Main module for running commwatch from the command line

Every subcommand function takes the parsed arguments and returns an exit
code. main() maps failures onto the exit code contract:

    0  success, or an alarm was raised
    1  I/O failure
    2  invalid config or stream
    3  stream exhausted without an alarm
    4  no threshold or bound could be computed
"""

import logging
import os
import signal
import sys

import numpy as np

from . import cw_io as io
from . import harness
from . import reproduce
from . import settings
from . import theory
from .detectors import create_detector
from .exceptions import (
    BracketException, InvalidConfigException, NoRootException, QuadratureException, StreamException
)
from .graph import stream
from .models import DetectorConfig, ExperimentSpec, ScenarioSpec, TheoryParams

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_NO_ALARM = 3
EXIT_NO_ROOT = 4

STOP = False


def configure_logging(level):
    logging.basicConfig(
        format='%(asctime)s\t%(name)s\t%(levelname)s\t%(message)s',
        level=level)

logger = logging.getLogger(__name__)


def signal_handler(*args):
    global STOP
    if STOP:
        logger.warning("SIGINT caught twice, exiting immediately")
        sys.exit(-1)

    logger.warning("Will exit after the running trial. Repeat to exit immediately.")
    STOP = True


def should_stop():
    return STOP


def resolve_seed(arguments, config_seed=None):
    """ --seed, then $COMMWATCH_SEED, then the config's seed, then BASE_SEED """

    if getattr(arguments, 'seed', None) is not None:
        return arguments.seed
    env = os.environ.get(settings.SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise InvalidConfigException(settings.SEED_ENV, 'expected an integer, got {!r}'.format(env))
    if config_seed is not None:
        return config_seed
    return settings.BASE_SEED


def load_scenario(path):
    data = io.load_json(path)
    scenario = ScenarioSpec.from_dict(data)
    return scenario, data.get('seed')


def load_detector(path):
    return DetectorConfig.from_dict(io.load_json(path))


def command_banner(arguments):
    return None if arguments.no_banner else arguments.command


def simulate(arguments):
    scenario, config_seed = load_scenario(arguments.scenario)
    if arguments.steps < 1:
        raise InvalidConfigException('steps', 'must be >= 1, got {}'.format(arguments.steps))
    seed = resolve_seed(arguments, config_seed)
    logger.info('simulating {} steps of {} nodes with seed {}'.format(arguments.steps, scenario.n_nodes, seed))

    handle = stream(scenario, seed)
    io.write_stream((next(handle) for _ in range(arguments.steps)), arguments.out)
    return EXIT_OK


DETECT_FIELDS = ('t', 'statistic', 'argmax_k', 'alarmed', 'localized_set')


def stream_nodes(arguments, config):
    """ graph size of a stream file: --nodes, else the --scenario graph, else n_nodes of the detector config """

    candidates = []
    if arguments.nodes is not None:
        candidates.append(('--nodes', arguments.nodes))
    if arguments.scenario:
        candidates.append(('--scenario', load_scenario(arguments.scenario)[0].n_nodes))
    if config.n_nodes is not None:
        candidates.append(('n_nodes', config.n_nodes))
    if not candidates:
        raise InvalidConfigException('n_nodes', 'detecting on a stream file needs --nodes or --scenario')

    source, n_nodes = candidates[0]
    for other, value in candidates[1:]:
        if value != n_nodes:
            raise InvalidConfigException('n_nodes', '{} gives {} nodes, {} gives {}'.format(source, n_nodes, other, value))
    return n_nodes


def detect(arguments):
    config = load_detector(arguments.detector)

    if arguments.stream:
        n_nodes = stream_nodes(arguments, config)
        snapshots = io.FileStream(arguments.stream, n_nodes)
        max_t = None
    elif arguments.scenario:
        scenario, config_seed = load_scenario(arguments.scenario)
        n_nodes = scenario.n_nodes
        snapshots = stream(scenario, resolve_seed(arguments, config_seed))
        max_t = arguments.max_t
    else:
        raise InvalidConfigException('stream', 'give --stream or --scenario')

    detector = create_detector(config, n_nodes)
    rows, alarm = [], None
    for snapshot in snapshots:
        report = detector.step(snapshot)
        rows.append(report._asdict())
        if report.alarmed:
            alarm = report
            break
        if STOP or (max_t is not None and report.t >= max_t):
            break

    io.write_csv(rows, arguments.out, DETECT_FIELDS, command_banner(arguments))
    if alarm is None:
        logger.info('no alarm in {} steps'.format(detector.t))
        return EXIT_NO_ALARM
    logger.info('alarm at t={} statistic={:.6g} k={} localized={}'.format(
        alarm.t, alarm.statistic, alarm.argmax_k, alarm.localized_set))
    return EXIT_OK


def _trials(arguments):
    return settings.N_TRIALS if arguments.trials is None else arguments.trials


def calibrate_mc(arguments):
    config = load_detector(arguments.detector)
    n_nodes = arguments.nodes or config.n_nodes
    if n_nodes is None:
        raise InvalidConfigException('n_nodes', 'calibration needs n_nodes in the detector config or --nodes')
    experiment = ExperimentSpec(
        scenario=ScenarioSpec.null(n_nodes, config.p0),
        detector=config,
        target='calibration',
        n_trials=_trials(arguments),
        base_seed=resolve_seed(arguments),
        target_arl=arguments.target_arl,
    )
    b = harness.calibrate_threshold_mc(experiment, tol=arguments.tol, processes=arguments.processes, stop=should_stop)
    io.write_csv([{'method': config.method, 'target_arl': arguments.target_arl, 'threshold': b}],
                 arguments.out, command=command_banner(arguments))
    return EXIT_OK


def run_theory(arguments):
    data = io.load_json(arguments.theory)
    params = TheoryParams.from_dict(data)
    target_arl = arguments.target_arl or data.get('target_arl')

    if target_arl is not None:
        b = theory.threshold_for_arl(params, target_arl, arguments.which, processes=arguments.processes)
        params = params.with_threshold(b)
        logger.info('{} ARL {} at b={:.6g}'.format(arguments.which, target_arl, b))
    elif params.b is None:
        raise InvalidConfigException('b', 'give b in the theory config or a target ARL')

    row = {
        'b': params.b,
        'n_effective': params.n_eff,
        'alpha': params.alpha,
        'arl_lb': theory.arl_lower_bound(params, arguments.processes),
        'arl_ub': theory.arl_upper_bound(params),
    }
    io.write_csv([row], arguments.out, command=command_banner(arguments))

    if arguments.dump_profiles:
        terms = theory.lower_bound_terms(params, arguments.processes)
        io.write_csv(
            ({'tau': term.tau, 'theta': term.theta, 'gamma': term.gamma, 'H': term.big_h,
              'log_H': term.log_h, 'term': term.term} for term in terms),
            arguments.dump_profiles + '-lb.csv', command=command_banner(arguments))
        io.write_csv(
            ({'y': sample.y, 'tau': sample.tau, 'integrand': sample.integrand,
              'log_integrand': sample.log_integrand} for sample in theory.upper_bound_profile(params)),
            arguments.dump_profiles + '-ub.csv', command=command_banner(arguments))
    return EXIT_OK


def delay(arguments):
    scenario, config_seed = load_scenario(arguments.scenario)
    config = load_detector(arguments.detector)
    experiment = ExperimentSpec(
        scenario=scenario,
        detector=config,
        target='delay',
        n_trials=_trials(arguments),
        max_t=arguments.max_t,
        base_seed=resolve_seed(arguments, config_seed),
    )
    report = harness.estimate_delay(experiment, arguments.processes, should_stop)
    io.write_csv([{
        'experiment': 'delay',
        'method': config.method,
        'threshold': config.threshold,
        'estimate': report.estimate,
        'se': report.stderr,
        'n_trials': report.n_trials,
        'n_censored': report.n_censored,
        'localization_rate': report.localization_rate,
    }], arguments.out, command=command_banner(arguments))
    return EXIT_OK


def run_reproduce(arguments):
    if arguments.seed is not None or os.environ.get(settings.SEED_ENV):
        settings.BASE_SEED = resolve_seed(arguments)
    rows = reproduce.reproduce_table(
        arguments.table,
        n_trials=arguments.trials,
        processes=arguments.processes,
        calibrate=not arguments.paper_thresholds,
        stop=should_stop,
    )
    io.write_csv(rows, arguments.out, command=command_banner(arguments))
    return EXIT_OK


COMMANDS = {
    'simulate': simulate,
    'detect': detect,
    'calibrate-mc': calibrate_mc,
    'theory': run_theory,
    'delay': delay,
    'reproduce': run_reproduce,
}


def main(arguments):
    configure_logging(arguments.verbose and logging.DEBUG or logging.INFO)
    signal.signal(signal.SIGINT, signal_handler)

    if arguments.numpy_exception:
        np.seterr(all='raise')
    else:
        np.seterr(all=settings.NUMPY_WARNINGS)

    if getattr(arguments, 'processes', None) is None:
        arguments.processes = settings.PROCESSES

    logger.debug('running {}'.format(arguments.command))
    try:
        return COMMANDS[arguments.command](arguments)
    except (InvalidConfigException, StreamException) as e:
        logger.error('invalid input: {}'.format(e))
        return EXIT_CONFIG
    except (NoRootException, QuadratureException, BracketException) as e:
        logger.error('no solution: {}'.format(e))
        return EXIT_NO_ROOT
    except OSError as e:
        logger.error('I/O failure: {}'.format(e))
        return EXIT_IO
    except KeyboardInterrupt as e:
        logger.critical('Quitting early due to SIGINT: {}'.format(e))
        return EXIT_IO
