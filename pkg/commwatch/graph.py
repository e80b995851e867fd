""" Snapshot simulator

Randomness is counter based: the uniform deciding edge e at time t of the
stream with a given seed is fixed by (seed, t, e) alone. Time steps are
grouped in blocks of BLOCK steps and each block is drawn from a Philox
generator keyed by (seed, block), so a snapshot can be sampled directly at
any t and every consumption pattern sees the same sequence.
"""

import functools
import logging

import numpy as np

from .models.scenario import GraphSnapshot
from .utils import n_pairs

logger = logging.getLogger(__name__)

# steps per Philox key; changing it changes every simulated stream
BLOCK = 256

SEED_MASK = (1 << 64) - 1


@functools.lru_cache(maxsize=32)
def _uniform_block(width, seed, block):
    key = np.array([seed & SEED_MASK, block], dtype=np.uint64)
    generator = np.random.Generator(np.random.Philox(key=key))
    uniforms = generator.random((BLOCK, width))
    uniforms.setflags(write=False)
    return uniforms


def edge_uniforms(n_nodes, t, seed):
    """the per-edge uniforms of step t, in canonical edge order"""

    if t < 1:
        raise ValueError('time index starts at 1, got {}'.format(t))
    block, row = divmod(t - 1, BLOCK)
    return _uniform_block(n_pairs(n_nodes), seed, block)[row]


def snapshot_from_uniforms(spec, t, uniforms):
    return GraphSnapshot.from_indicators(spec.n_nodes, uniforms < spec.edge_probabilities(t))


def sample_snapshot(spec, t, seed):
    """ returns the snapshot at time t (1-based) of the stream (spec, seed)

    edge (i, j) is present with probability p1 when t > changepoint and the
    edge is active, and with p0 otherwise
    """

    return snapshot_from_uniforms(spec, t, edge_uniforms(spec.n_nodes, t, seed))


class StreamHandle():
    """ iterator over sample_snapshot(scenario, 1, seed), sample_snapshot(scenario, 2, seed), ...

    position is the time index of the last snapshot handed out. A handle
    must not be advanced from two threads at once.
    """

    def __init__(self, scenario, seed):
        self.scenario = scenario
        self.seed = seed
        self.position = 0

    @property
    def n_nodes(self):
        return self.scenario.n_nodes

    def __iter__(self):
        return self

    def __next__(self):
        self.position += 1
        return sample_snapshot(self.scenario, self.position, self.seed)


def stream(spec, seed):
    logger.debug('opening stream with seed {} over {} nodes'.format(seed, spec.n_nodes))
    return StreamHandle(spec, seed)
