"""
Configuration handling for dtlbench
"""

import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml


@dataclass
class SemanticsConfig:
    """Configuration for model loading and evaluation"""

    # Warn when a cluster is larger than this (tangles and bisimulations are
    # exponential in cluster size)
    cluster_warn_threshold: int = 8

    # Tangle algorithm used by `check`: "clusters" or "gfp"
    tangle_method: str = "clusters"


@dataclass
class SamplingConfig:
    """Sample sizes for the randomized experiments"""

    # Soundness sampling on D(N+1, K+1)
    cont_samples: int = 200
    schema_samples: int = 20

    # Bisimulation agreement
    agreement_trials: int = 300
    agreement_formulas: int = 20

    # Kernel integrity
    mutation_count: int = 100
    audit_models: int = 50

    # Front end and tangle oracle
    roundtrip_formulas: int = 1000
    preorder_families: int = 20
    criterion_max_size: int = 4

    # Random model budgets
    point_budget: int = 6
    cluster_budget: int = 3
    atom_budget: int = 2


@dataclass
class OracleConfig:
    """Limits for the definable-set oracle"""

    max_points: int = 12
    max_family_size: int = 4096


@dataclass
class KernelConfig:
    """Configuration for the derivation kernel"""

    # Largest truth table built for a TAUT line
    taut_max_atoms: int = 16


@dataclass
class Config:
    """Master configuration for dtlbench"""

    # General settings
    log_level: str = "INFO"
    log_dir: Optional[str] = None
    random_seed: int = 42
    max_workers: int = 4
    progress: bool = True

    # Component configurations
    semantics: SemanticsConfig = field(default_factory=SemanticsConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    kernel: KernelConfig = field(default_factory=KernelConfig)

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> "Config":
        """Load configuration from a YAML file"""
        with open(path, "r", encoding="utf-8") as f:
            config_dict = yaml.safe_load(f) or {}
        return cls.from_dict(config_dict)

    @classmethod
    def from_dict(cls, config_dict: Dict[str, Any]) -> "Config":
        """Create configuration from a dictionary"""
        sections = {"semantics", "sampling", "oracle", "kernel"}
        config = Config(**{k: v for k, v in config_dict.items() if k not in sections})

        if "semantics" in config_dict:
            config.semantics = SemanticsConfig(**config_dict["semantics"])
        if "sampling" in config_dict:
            config.sampling = SamplingConfig(**config_dict["sampling"])
        if "oracle" in config_dict:
            config.oracle = OracleConfig(**config_dict["oracle"])
        if "kernel" in config_dict:
            config.kernel = KernelConfig(**config_dict["kernel"])

        if config.semantics.tangle_method not in ("clusters", "gfp"):
            raise ValueError(f"Unknown tangle_method {config.semantics.tangle_method!r}")
        return config

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to a dictionary"""
        return asdict(self)

    def to_yaml(self, path: Union[str, Path]) -> None:
        """Save configuration to a YAML file"""
        with open(path, "w", encoding="utf-8") as f:
            yaml.dump(self.to_dict(), f, default_flow_style=False, sort_keys=False)


def load_config(config_path: Optional[Union[str, Path]] = None) -> Config:
    """Load configuration from a YAML file or use defaults"""
    if config_path and os.path.exists(config_path):
        return Config.from_yaml(config_path)
    return Config()
