"""
Tests for the definable-set oracle in dtlbench.oracle
"""

import unittest

from dtlbench.bisimulation import compute_bisim
from dtlbench.formula import diamond, eta, p
from dtlbench.gallery import GalleryError, gen_A, gen_B
from dtlbench.oracle import definable_sets
from dtlbench.semantics import eval_mask


class TestDefinableSets(unittest.TestCase):
    """Tests for bounded definability on static models"""

    def setUp(self):
        self.model = gen_A(3, 2)

    def test_depth_zero_is_atomic(self):
        """D_0 is generated by the atoms alone"""
        sets = definable_sets(self.model, [1, 2], 1, 0)
        self.assertEqual(sets.depth, 0)
        self.assertEqual(sets.block_count(0), 2)
        self.assertEqual(sets.size(0), 4)
        self.assertTrue(sets.contains(self.model.atom_mask(1), 0))

    def test_width_one_misses_eta(self):
        """The extension of eta^1 is not width-1 definable on A(3,2)"""
        sets = definable_sets(self.model, [1, 2], 1, 2)
        separator = eval_mask(self.model, eta(1))
        self.assertFalse(sets.contains(separator, 2))
        self.assertTrue(sets.same_block("0.2", "1.2", 2))

    def test_contains_formula_extensions(self):
        """Extensions of width-1 formulas within the depth are members"""
        sets = definable_sets(self.model, [1, 2], 1, 2)
        self.assertTrue(sets.contains(eval_mask(self.model, diamond(p(1))), 1))
        self.assertTrue(sets.contains(eval_mask(self.model, diamond(diamond(p(2)))), 2))

    def test_width_two_sees_eta(self):
        """Width 2 defines eta^1 at depth 1"""
        model = gen_A(2, 2)
        sets = definable_sets(model, [1, 2], 2, 1)
        self.assertTrue(sets.contains(eval_mask(model, eta(1)), 1))
        self.assertFalse(sets.same_block("0.2", "1.2", 1))

    def test_monotone_in_depth(self):
        """Each level refines the one before"""
        sets = definable_sets(self.model, [1, 2], 1, 3)
        counts = [sets.block_count(d) for d in range(sets.depth + 1)]
        self.assertEqual(counts, sorted(counts))
        self.assertEqual(len(sets.members(0)), sets.size(0))

    def test_monotone_in_width(self):
        """A set definable at width w stays definable at width w + 1"""
        for model, depth in ((gen_A(2, 2), 2), (self.model, 1)):
            narrow = definable_sets(model, [1, 2], 1, depth)
            wide = definable_sets(model, [1, 2], 2, depth)
            for d in range(depth + 1):
                self.assertGreaterEqual(wide.block_count(d), narrow.block_count(d))
                for mask in narrow.members(d):
                    self.assertTrue(wide.contains(mask, d), (model.name, d, mask.tolist()))

    def test_respects_bisimulation(self):
        """Points related at rank d and width 2 share a block of D_d"""
        table = compute_bisim(self.model, self.model, 2, 2)
        sets = definable_sets(self.model, [1, 2], 1, 2)
        for x, y in table.pairs(2):
            self.assertTrue(sets.same_block(x, y, 2), (x, y))

    def test_limits(self):
        """Dynamic or oversized models and bad caps are refused"""
        with self.assertRaises(GalleryError):
            definable_sets(gen_B(1, 2), [1, 2], 1, 1)
        with self.assertRaises(GalleryError):
            definable_sets(gen_A(6, 2), [1, 2], 1, 1)
        with self.assertRaises(GalleryError):
            definable_sets(self.model, [1, 2], 0, 1)
        with self.assertRaises(GalleryError):
            definable_sets(self.model, [1, 2], 2, 2, max_family_size=2)


if __name__ == "__main__":
    unittest.main()
