""" canonical edge indexing for the lower-triangle bitset layout

Edges (i, j) with i < j are numbered row by row:
(0, 1), (0, 2), ..., (0, n-1), (1, 2), ... which is the order of
numpy.triu_indices(n, 1).
"""

import functools
import itertools

import numpy as np


def n_pairs(n_nodes):
    return n_nodes * (n_nodes - 1) // 2


def canonical_pair(i, j):
    """returns (min, max) of an unordered pair, rejecting self-loops"""
    if i == j:
        raise ValueError('self-loop ({}, {})'.format(i, j))
    return (i, j) if i < j else (j, i)


def edge_index(i, j, n_nodes):
    i, j = canonical_pair(i, j)
    if i < 0 or j >= n_nodes:
        raise ValueError('edge ({}, {}) outside {} nodes'.format(i, j, n_nodes))
    return i * (2 * n_nodes - i - 1) // 2 + (j - i - 1)


@functools.lru_cache(maxsize=None)
def edge_pairs(n_nodes):
    """returns (rows, cols) arrays of every edge in canonical order"""
    rows, cols = np.triu_indices(n_nodes, 1)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


def clique_edge_indices(nodes, n_nodes):
    """canonical indices of every pair inside nodes, sorted"""
    nodes = sorted(nodes)
    return np.array(
        [edge_index(i, j, n_nodes) for i, j in itertools.combinations(nodes, 2)],
        dtype=np.intp)


@functools.lru_cache(maxsize=None)
def subset_incidence(n_nodes, size):
    """ returns (subsets, incidence) for every node subset of the given size

    subsets is a tuple of node tuples in lexicographic order, incidence a
    read-only boolean matrix of shape (len(subsets), n_pairs) marking the
    clique edges of each subset
    """

    subsets = tuple(itertools.combinations(range(n_nodes), size))
    incidence = np.zeros((len(subsets), n_pairs(n_nodes)), dtype=bool)
    for row, subset in enumerate(subsets):
        incidence[row, clique_edge_indices(subset, n_nodes)] = True
    incidence.setflags(write=False)
    return subsets, incidence
