""" Graph snapshots and stream scenarios """

from dataclasses import dataclass, field
import functools
import itertools
from typing import FrozenSet, Optional, Tuple

import numpy as np

from .validation import SCENARIO_SCHEMA, validate_keys, check_integer, check_probability
from ..exceptions import InvalidConfigException
from ..utils import canonical_pair, edge_index, edge_pairs, n_pairs


class GraphSnapshot():
    """ symmetric binary adjacency of n_nodes at one time step

    Only pairs i < j are stored, as a packed bitset in canonical edge order
    (see commwatch.utils). Instances are immutable.
    """

    __slots__ = ('n_nodes', 'bits')

    def __init__(self, n_nodes, bits):
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.shape != ((n_pairs(n_nodes) + 7) // 8,):
            raise ValueError('bitset of shape {} does not fit {} nodes'.format(bits.shape, n_nodes))
        bits.setflags(write=False)
        self.n_nodes = n_nodes
        self.bits = bits

    @classmethod
    def from_indicators(cls, n_nodes, indicators):
        indicators = np.asarray(indicators, dtype=bool)
        if indicators.shape != (n_pairs(n_nodes),):
            raise ValueError('expected {} edge indicators, got {}'.format(n_pairs(n_nodes), indicators.shape))
        return cls(n_nodes, np.packbits(indicators))

    @classmethod
    def from_edges(cls, n_nodes, edges):
        indicators = np.zeros(n_pairs(n_nodes), dtype=bool)
        for i, j in edges:
            indicators[edge_index(i, j, n_nodes)] = True
        return cls.from_indicators(n_nodes, indicators)

    @property
    def indicators(self):
        """boolean array of length n_pairs, one entry per canonical edge"""
        return np.unpackbits(self.bits, count=n_pairs(self.n_nodes)).view(bool)

    def has_edge(self, i, j):
        index = edge_index(i, j, self.n_nodes)
        return bool(self.bits[index >> 3] & (0x80 >> (index & 7)))

    def edges(self):
        rows, cols = edge_pairs(self.n_nodes)
        present = np.flatnonzero(self.indicators)
        return [(int(rows[e]), int(cols[e])) for e in present]

    def edge_count(self):
        return int(np.unpackbits(self.bits, count=n_pairs(self.n_nodes)).sum())

    def __eq__(self, other):
        if not isinstance(other, GraphSnapshot):
            return NotImplemented
        return self.n_nodes == other.n_nodes and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.n_nodes, self.bits.tobytes()))

    def __repr__(self):
        return 'GraphSnapshot(n_nodes={}, edges={})'.format(self.n_nodes, self.edges())


@dataclass(frozen=True)
class ScenarioSpec():
    """ generative description of a snapshot stream

    Before the changepoint every edge fires with p0. After it (t > changepoint)
    the active edges fire with p1. changepoint None means no change ever.
    community is set when active_edges is the clique over a node set.
    """

    n_nodes: int
    p0: float
    p1: float
    changepoint: Optional[int] = None
    active_edges: FrozenSet[Tuple[int, int]] = field(default_factory=frozenset)
    community: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        check_integer('n_nodes', self.n_nodes, minimum=1)
        check_probability('p0', self.p0, closed=True)
        check_probability('p1', self.p1, closed=True)
        if self.p1 < self.p0:
            raise InvalidConfigException('p1', 'must be >= p0 ({}), got {}'.format(self.p0, self.p1))
        check_integer('changepoint', self.changepoint, minimum=0, allow_none=True)

        try:
            edges = frozenset(canonical_pair(int(i), int(j)) for i, j in self.active_edges)
        except (TypeError, ValueError) as e:
            raise InvalidConfigException('active_edges', str(e))
        for i, j in edges:
            if i < 0 or j >= self.n_nodes:
                raise InvalidConfigException('active_edges', 'edge ({}, {}) outside {} nodes'.format(i, j, self.n_nodes))

        if self.community is not None:
            nodes = tuple(sorted(int(v) for v in self.community))
            if len(set(nodes)) != len(nodes) or len(nodes) < 2:
                raise InvalidConfigException('community', 'needs at least 2 distinct nodes, got {}'.format(self.community))
            if nodes[0] < 0 or nodes[-1] >= self.n_nodes:
                raise InvalidConfigException('community', 'nodes outside {} nodes: {}'.format(self.n_nodes, nodes))
            clique = frozenset(itertools.combinations(nodes, 2))
            if edges and edges != clique:
                raise InvalidConfigException('active_edges', 'does not match the clique over community {}'.format(nodes))
            edges = clique
            object.__setattr__(self, 'community', nodes)

        object.__setattr__(self, 'active_edges', edges)

    @classmethod
    def null(cls, n_nodes, p0, p1=None):
        return cls(n_nodes=n_nodes, p0=p0, p1=p0 if p1 is None else p1)

    @classmethod
    def with_community(cls, n_nodes, p0, p1, changepoint, nodes):
        return cls(n_nodes=n_nodes, p0=p0, p1=p1, changepoint=changepoint, community=tuple(nodes))

    @classmethod
    def from_dict(cls, data):
        """ builds a scenario from the JSON scenario format; the seed key is ignored here """

        validate_keys(data, SCENARIO_SCHEMA, 'scenario')
        if 'community' in data and 'active_edges' in data:
            raise InvalidConfigException('community', 'give either community or active_edges, not both')

        active_edges = data.get('active_edges') or ()
        try:
            active_edges = [tuple(pair) for pair in active_edges]
        except TypeError:
            raise InvalidConfigException('active_edges', 'expected a list of node pairs')
        if any(len(pair) != 2 for pair in active_edges):
            raise InvalidConfigException('active_edges', 'expected a list of node pairs')

        community = data.get('community')
        if community is not None and not isinstance(community, list):
            raise InvalidConfigException('community', 'expected a list of nodes')

        return cls(
            n_nodes=data['n_nodes'],
            p0=data['p0'],
            p1=data['p1'],
            changepoint=data.get('changepoint'),
            active_edges=frozenset(active_edges),
            community=tuple(community) if community is not None else None,
        )

    def to_dict(self):
        data = {
            'n_nodes': self.n_nodes,
            'p0': self.p0,
            'p1': self.p1,
            'changepoint': self.changepoint,
        }
        if self.community is not None:
            data['community'] = list(self.community)
        else:
            data['active_edges'] = [list(pair) for pair in sorted(self.active_edges)]
        return data

    @property
    def is_community(self):
        return self.community is not None

    def relabel(self, permutation):
        """ returns the scenario with node v renamed to permutation[v] """

        edges = frozenset(canonical_pair(permutation[i], permutation[j]) for i, j in self.active_edges)
        community = None if self.community is None else tuple(permutation[v] for v in self.community)
        return ScenarioSpec(self.n_nodes, self.p0, self.p1, self.changepoint, edges, community)

    @functools.cached_property
    def active_indices(self):
        """canonical indices of the active edges, sorted"""
        indices = np.array(sorted(edge_index(i, j, self.n_nodes) for i, j in self.active_edges), dtype=np.intp)
        indices.setflags(write=False)
        return indices

    def edge_probabilities(self, t):
        """per-edge firing probability at time t (1-based)"""

        probabilities = np.full(n_pairs(self.n_nodes), self.p0)
        if self.changepoint is not None and t > self.changepoint:
            probabilities[self.active_indices] = self.p1
        return probabilities
