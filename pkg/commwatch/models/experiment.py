""" Monte Carlo experiment descriptions and results """

from dataclasses import dataclass, field
import math
from typing import Optional

from .config import DetectorConfig
from .scenario import ScenarioSpec
from .validation import check_choice, check_integer, check_real
from .. import settings
from ..exceptions import InvalidConfigException


TARGETS = ('arl', 'delay', 'calibration')


@dataclass(frozen=True)
class ExperimentSpec():
    """ trial i of an experiment runs with seed base_seed + i """

    scenario: ScenarioSpec
    detector: DetectorConfig
    target: str = 'arl'
    n_trials: int = field(default_factory=lambda: settings.N_TRIALS)
    max_t: Optional[int] = None
    base_seed: int = field(default_factory=lambda: settings.BASE_SEED)
    target_arl: Optional[float] = None

    def __post_init__(self):
        check_choice('target', self.target, TARGETS)
        check_integer('n_trials', self.n_trials, minimum=1)
        check_integer('base_seed', self.base_seed, minimum=0)
        check_real('target_arl', self.target_arl, minimum=1, exclusive=True, allow_none=True)
        if self.max_t is None:
            if self.target_arl is None:
                raise InvalidConfigException('max_t', 'needs max_t or target_arl to set the censoring horizon')
            object.__setattr__(self, 'max_t', int(math.ceil(settings.CENSOR_FACTOR * self.target_arl)))
        check_integer('max_t', self.max_t, minimum=1)
        if self.target == 'arl' and self.scenario.changepoint is not None:
            raise InvalidConfigException('scenario', 'ARL experiments need changepoint null (no change)')
        if self.target == 'delay' and self.scenario.changepoint is None:
            raise InvalidConfigException('scenario', 'delay experiments need a finite changepoint')
        if self.target == 'calibration' and self.target_arl is None:
            raise InvalidConfigException('target_arl', 'calibration needs a target ARL')
        self.detector.for_nodes(self.scenario.n_nodes)

    def seed(self, trial):
        return self.base_seed + trial


@dataclass(frozen=True)
class EstimateReport():
    """ censored trials enter the mean at max_t and are counted in n_censored """

    estimate: float
    stderr: float
    n_trials: int
    n_censored: int
    wall_time: float
    localization_rate: Optional[float] = None

    @property
    def censored_fraction(self):
        return self.n_censored / self.n_trials

    @property
    def reliable(self):
        return self.censored_fraction <= settings.CENSOR_LIMIT
