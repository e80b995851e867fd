from .config import DetectorConfig, TheoryParams, METHODS
from .experiment import EstimateReport, ExperimentSpec
from .scenario import GraphSnapshot, ScenarioSpec
