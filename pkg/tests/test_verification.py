"""
Tests for the gallery lemma checks in dtlbench.verification
"""

import unittest

from dtlbench.gallery import GalleryError
from dtlbench.verification import (
    c_point,
    verify_bislemm,
    verify_cont_soundness,
    verify_gallery_cell,
    verify_mainaxis,
    verify_nkbis,
    verify_trouble_fails,
    walkthrough_D22,
)


class TestGalleryLemmas(unittest.TestCase):
    """Tests for the structural lemmas on small parameters"""

    def assertPassed(self, report):
        failed = [a.description for a in report.assertions if not a.passed]
        self.assertTrue(report.passed, failed)

    def test_nkbis(self):
        """Root points of A look like deep points"""
        self.assertPassed(verify_nkbis(2, 2, 1))
        self.assertPassed(verify_nkbis(2, 3, 0))
        report = verify_nkbis(3, 2, 1)
        self.assertPassed(report)
        self.assertGreater(report.checked, 0)

    def test_nkbis_range(self):
        """m may not exceed N"""
        with self.assertRaises(GalleryError):
            verify_nkbis(1, 2, 2)

    def test_bislemm(self):
        """Similar points of B are bisimilar"""
        self.assertPassed(verify_bislemm(2, 2, 1))
        self.assertPassed(verify_bislemm(2, 3, 0))

    def test_mainaxis(self):
        """Orbits sweep the main axis"""
        self.assertPassed(verify_mainaxis(1, 2, 0))
        self.assertPassed(verify_mainaxis(2, 3, 1))

    def test_trouble_fails(self):
        """D(N,K) refutes Trouble^K on its static cluster"""
        self.assertPassed(verify_trouble_fails(2, 2))
        self.assertPassed(verify_trouble_fails(1, 3))

    def test_cont_soundness(self):
        """D(N+1,K+1) validates the width-K depth-N axioms"""
        report = verify_cont_soundness(1, 1, sample_size=20, seed=3, schema_samples=2)
        self.assertPassed(report)
        self.assertEqual(report.failures, [])

    def test_gallery_cell(self):
        """All lemmas for one (N, K)"""
        self.assertPassed(verify_gallery_cell(2, 2))

    def test_walkthrough(self):
        """The worked example D(2,2)"""
        report = walkthrough_D22(sample_size=10, seed=1)
        self.assertPassed(report)
        self.assertEqual(c_point(2), "0.-1.2")


if __name__ == "__main__":
    unittest.main()
