import unittest

import numpy as np

from commwatch import utils


class TestUtils(unittest.TestCase):

    def test_edge_index_follows_triu_order(self):
        rows, cols = np.triu_indices(5, 1)
        for expected, (i, j) in enumerate(zip(rows, cols)):
            self.assertEqual(utils.edge_index(i, j, 5), expected)
            self.assertEqual(utils.edge_index(j, i, 5), expected)

    def test_edge_pairs_inverts_edge_index(self):
        rows, cols = utils.edge_pairs(6)
        self.assertEqual(len(rows), utils.n_pairs(6))
        for e, (i, j) in enumerate(zip(rows, cols)):
            self.assertEqual(utils.edge_index(int(i), int(j), 6), e)

    def test_self_loop_rejected(self):
        with self.assertRaises(ValueError):
            utils.canonical_pair(3, 3)

    def test_edge_outside_graph_rejected(self):
        with self.assertRaises(ValueError):
            utils.edge_index(1, 4, 4)

    def test_clique_edge_indices(self):
        actual = list(utils.clique_edge_indices([2, 0, 1], 4))
        expected = [0, 1, 3]
        self.assertEqual(actual, expected)

    def test_subset_incidence_pairs(self):
        subsets, incidence = utils.subset_incidence(4, 2)
        self.assertEqual(len(subsets), 6)
        self.assertEqual(list(subsets), sorted(subsets))
        self.assertTrue((incidence.sum(axis=1) == 1).all())

    def test_subset_incidence_triples(self):
        subsets, incidence = utils.subset_incidence(5, 3)
        self.assertEqual(subsets[0], (0, 1, 2))
        self.assertEqual(incidence.shape, (10, 10))
        self.assertTrue((incidence.sum(axis=1) == 3).all())
        self.assertFalse(incidence.flags.writeable)
