from .es import Detector as es
from .hmix import Detector as hmix
from .mixture import Detector as mixture
from .detector import StepReport, RunResult, RecordPath, run_until_alarm, record_path, stopping_time

DETECTORS = {
    'ES': es,
    'Mixture': mixture,
    'HMix': hmix,
}


def create_detector(config, n_nodes):
    return DETECTORS[config.method](config, n_nodes)
