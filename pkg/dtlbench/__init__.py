"""
dtlbench: a workbench for dynamic topological logic
"""

from dtlbench.bisimulation import BisimTable, compute_bisim
from dtlbench.config import Config, load_config
from dtlbench.derivations import derive_trouble
from dtlbench.formula import Formula, FormulaError
from dtlbench.kernel import SystemDescriptor, Verdict, check_derivation
from dtlbench.parser import parse
from dtlbench.report import ExperimentReport
from dtlbench.semantics import DynModel, ModelError, eval_mask, load_model

__version__ = "0.1.0"

__all__ = [
    "BisimTable",
    "compute_bisim",
    "Config",
    "load_config",
    "derive_trouble",
    "Formula",
    "FormulaError",
    "SystemDescriptor",
    "Verdict",
    "check_derivation",
    "parse",
    "ExperimentReport",
    "DynModel",
    "ModelError",
    "eval_mask",
    "load_model",
]
