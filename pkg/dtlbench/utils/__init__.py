"""
Utilities module initialization
"""

from dtlbench.utils.async_utils import gather_with_concurrency, run_cells, run_in_executor
from dtlbench.utils.format_utils import format_parameters, format_table, format_truth_table
from dtlbench.utils.seed_utils import derive_seed

__all__ = [
    "gather_with_concurrency",
    "run_cells",
    "run_in_executor",
    "format_parameters",
    "format_table",
    "format_truth_table",
    "derive_seed",
]
