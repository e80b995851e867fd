""" Detector and theory configuration """

from dataclasses import dataclass, field, replace
from typing import Optional

from .validation import (
    DETECTOR_SCHEMA, THEORY_SCHEMA, validate_keys,
    check_choice, check_integer, check_probability, check_real
)
from .. import settings
from ..exceptions import InvalidConfigException


METHODS = ('ES', 'Mixture', 'HMix')


def _default(name):
    return field(default_factory=lambda: getattr(settings, name))


@dataclass(frozen=True)
class DetectorConfig():
    """ method selector and parameters of a stopping rule

    p1 None means unknown (the MLE is plugged in). m1 None means an
    unbounded window, which is what the ES CUSUM recursion computes.
    s is required by ES and HMix and ignored by Mixture.
    """

    method: str
    p0: float
    threshold: float
    p1: Optional[float] = None
    s: Optional[int] = None
    alpha: float = _default('ALPHA')
    m0: int = _default('M0')
    m1: Optional[int] = _default('M1')
    n_nodes: Optional[int] = None

    def __post_init__(self):
        check_choice('method', self.method, METHODS)
        check_probability('p0', self.p0)
        check_probability('p1', self.p1, allow_none=True)
        if self.p1 is not None and self.p1 <= self.p0:
            raise InvalidConfigException('p1', 'must be > p0 ({}), got {}'.format(self.p0, self.p1))
        # b = 0 is accepted: it stops every run at the first admissible step
        check_real('threshold', self.threshold, minimum=0)
        check_integer('m0', self.m0, minimum=0)
        check_integer('m1', self.m1, minimum=self.m0, allow_none=True)
        check_integer('n_nodes', self.n_nodes, minimum=2, allow_none=True)

        if self.method in ('Mixture', 'HMix'):
            alpha = check_real('alpha', self.alpha, minimum=0, exclusive=True)
            if alpha > 1:
                raise InvalidConfigException('alpha', 'must lie in (0, 1], got {}'.format(alpha))

        if self.method in ('ES', 'HMix'):
            check_integer('s', self.s, minimum=2)
            if self.n_nodes is not None and self.s > self.n_nodes:
                raise InvalidConfigException('s', 'community size {} exceeds {} nodes'.format(self.s, self.n_nodes))

        if self.method == 'ES' and self.p1 is None and self.m0 < 1:
            raise InvalidConfigException('m0', 'ES with unknown p1 needs m0 >= 1')

    @classmethod
    def from_dict(cls, data):
        validate_keys(data, DETECTOR_SCHEMA, 'detector')
        return cls(**data)

    def to_dict(self):
        return {
            'method': self.method,
            'p0': self.p0,
            'p1': self.p1,
            's': self.s,
            'alpha': self.alpha,
            'm0': self.m0,
            'm1': self.m1,
            'threshold': self.threshold,
        }

    @property
    def p1_known(self):
        return self.p1 is not None

    @property
    def cusum_eligible(self):
        return self.method == 'ES' and self.p1_known and self.m0 == 0 and self.m1 is None

    def with_threshold(self, threshold):
        return replace(self, threshold=threshold)

    def for_nodes(self, n_nodes):
        """returns the config bound to a graph of n_nodes, checking compatibility"""

        if self.n_nodes is not None and self.n_nodes != n_nodes:
            raise InvalidConfigException('n_nodes', 'detector expects {} nodes, stream has {}'.format(self.n_nodes, n_nodes))
        return replace(self, n_nodes=n_nodes)


@dataclass(frozen=True)
class TheoryParams():
    """ inputs of the mixture-method ARL bounds

    n_effective is the N of the bound formulas. None resolves it from the
    N_EFFECTIVE setting: 'nodes' gives n_nodes, 'edges' gives
    n_nodes (n_nodes - 1) / 2.
    """

    p0: float
    p1: float
    n_nodes: int
    b: Optional[float] = None
    alpha: float = _default('ALPHA')
    n_effective: Optional[float] = None
    m0: int = 1
    m1: int = _default('M1')
    quad_tol: float = _default('QUAD_TOL')
    z_range: float = _default('Z_RANGE')

    def __post_init__(self):
        check_probability('p0', self.p0)
        check_probability('p1', self.p1)
        if self.p1 <= self.p0:
            raise InvalidConfigException('p1', 'must be > p0 ({}), got {}'.format(self.p0, self.p1))
        alpha = check_real('alpha', self.alpha, minimum=0, exclusive=True)
        if alpha > 1:
            raise InvalidConfigException('alpha', 'must lie in (0, 1], got {}'.format(alpha))
        check_real('b', self.b, minimum=0, exclusive=True, allow_none=True)
        check_integer('n_nodes', self.n_nodes, minimum=2)
        check_real('n_effective', self.n_effective, minimum=0, exclusive=True, allow_none=True)
        check_integer('m0', self.m0, minimum=1)
        check_integer('m1', self.m1, minimum=self.m0)
        check_real('quad_tol', self.quad_tol, minimum=0, exclusive=True)
        check_real('z_range', self.z_range, minimum=0, exclusive=True)

    @classmethod
    def from_dict(cls, data):
        validate_keys(data, THEORY_SCHEMA, 'theory')
        data = {k: v for k, v in data.items() if k != 'target_arl'}
        return cls(**data)

    @property
    def n_eff(self):
        if self.n_effective is not None:
            return float(self.n_effective)
        mode = check_choice('N_EFFECTIVE', settings.N_EFFECTIVE, ('nodes', 'edges'))
        if mode == 'edges':
            return self.n_nodes * (self.n_nodes - 1) / 2
        return float(self.n_nodes)

    def with_threshold(self, b):
        return replace(self, b=b)
