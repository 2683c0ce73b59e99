"""
Tests for helpers in dtlbench.utils and dtlbench.report
"""

import asyncio
import unittest

from dtlbench.report import ExperimentReport
from dtlbench.utils import (
    derive_seed,
    format_parameters,
    format_table,
    format_truth_table,
    gather_with_concurrency,
    run_cells,
)


def _square(x):
    return x * x


class TestAsyncUtils(unittest.TestCase):
    """Tests for concurrent cell evaluation"""

    def test_run_cells_keeps_order(self):
        """Results come back in cell order"""
        cells = [(i,) for i in range(8)]
        self.assertEqual(run_cells(_square, cells, max_workers=1), [i * i for i in range(8)])
        self.assertEqual(run_cells(_square, cells, max_workers=3), [i * i for i in range(8)])

    def test_gather_with_concurrency(self):
        """At most n tasks run at once"""
        running = []
        peak = []

        async def task(i):
            running.append(i)
            peak.append(len(running))
            await asyncio.sleep(0.01)
            running.remove(i)
            return i

        async def main():
            return await gather_with_concurrency(2, *(task(i) for i in range(5)))

        self.assertEqual(asyncio.run(main()), [0, 1, 2, 3, 4])
        self.assertLessEqual(max(peak), 2)


class TestSeeds(unittest.TestCase):
    """Tests for seed derivation"""

    def test_stable_and_distinct(self):
        """Seeds depend only on the base seed and label"""
        self.assertEqual(derive_seed(42, "cont-1-2"), derive_seed(42, "cont-1-2"))
        self.assertNotEqual(derive_seed(42, "cont-1-2"), derive_seed(42, "cont-1-3"))
        self.assertNotEqual(derive_seed(42, "a"), derive_seed(43, "a"))
        self.assertLess(derive_seed(7, "x"), 2**31)


class TestFormatting(unittest.TestCase):
    """Tests for terminal formatting"""

    def test_format_parameters(self):
        """Floats are rounded, others printed as is"""
        self.assertEqual(format_parameters({"k": 2, "rate": 0.5}), "k=2, rate=0.5000")
        self.assertEqual(format_parameters({}), "")

    def test_format_table(self):
        """Columns are padded to the widest cell"""
        text = format_table(["rank", "pairs"], [(0, 12), (10, 3)])
        self.assertEqual(text.splitlines(), ["rank  pairs", "----  -----", "0     12", "10    3"])

    def test_format_truth_table(self):
        """Truth values print as 0 and 1"""
        self.assertIn("a      1", format_truth_table([("a", True), ("bb", False)]))


class TestReport(unittest.TestCase):
    """Tests for ExperimentReport"""

    def test_passed_and_absorb(self):
        """A report passes iff every assertion passes, including absorbed ones"""
        outer = ExperimentReport("outer")
        outer.check("one", 1, 1)
        self.assertTrue(outer.passed)
        inner = ExperimentReport("inner")
        inner.check_true("broken", False)
        inner.fail("x")
        inner.checked = 4
        outer.absorb(inner, "sub")
        self.assertFalse(outer.passed)
        self.assertEqual(outer.failures, ["x"])
        self.assertEqual(outer.checked, 4)
        self.assertEqual(outer.assertions[-1].description, "sub: broken")

    def test_tuples_compare_as_lists(self):
        """Expected and observed values are compared in JSON form"""
        report = ExperimentReport("r")
        self.assertTrue(report.check("pair", [["a", "b"]], [("a", "b")]))

    def test_summary(self):
        """The summary line names the status and counts"""
        report = ExperimentReport("demo", parameters={"k": 1, "rate": 0.25})
        report.check("ok", 1, 1)
        self.assertEqual(report.summary(), "[PASS] demo(k=1, rate=0.2500): 1/1 assertions, 0 items checked")


if __name__ == "__main__":
    unittest.main()
