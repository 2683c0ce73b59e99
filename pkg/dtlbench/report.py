"""
Experiment report structures for dtlbench
"""

import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional

from dtlbench.utils.format_utils import format_parameters


def jsonable(value: Any) -> Any:
    """Convert tuples, sets and numpy scalars into plain JSON values"""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return sorted(jsonable(v) for v in value)
    if hasattr(value, "item") and callable(value.item):
        return value.item()
    return value


@dataclass
class Assertion:
    """One checked claim: what was expected, what was observed"""

    description: str
    expected: Any
    observed: Any
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "description": self.description,
            "expected": jsonable(self.expected),
            "observed": jsonable(self.observed),
            "passed": self.passed,
        }


@dataclass
class ExperimentReport:
    """
    Machine-readable evidence for one experiment run

    ``passed`` holds exactly when every assertion passed. ``failures`` lists the
    offending items (points, pairs, line numbers) behind any failed assertion.
    """

    experiment: str
    lemma: str = ""
    parameters: Dict[str, Any] = field(default_factory=dict)
    assertions: List[Assertion] = field(default_factory=list)
    checked: int = 0
    failures: List[Any] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def check(self, description: str, expected: Any, observed: Any) -> bool:
        """Record an equality assertion and return whether it held"""
        passed = jsonable(expected) == jsonable(observed)
        self.assertions.append(Assertion(description, expected, observed, passed))
        return passed

    def check_true(self, description: str, observed: bool) -> bool:
        return self.check(description, True, bool(observed))

    def fail(self, item: Any) -> None:
        self.failures.append(item)

    def absorb(self, other: "ExperimentReport", prefix: Optional[str] = None) -> None:
        """Fold a sub-report in as assertions of this report"""
        prefix = prefix or other.experiment
        for a in other.assertions:
            self.assertions.append(
                Assertion(f"{prefix}: {a.description}", a.expected, a.observed, a.passed)
            )
        self.checked += other.checked
        self.failures.extend(other.failures)

    @contextmanager
    def timed(self) -> Iterator["ExperimentReport"]:
        started = time.perf_counter()
        try:
            yield self
        finally:
            self.elapsed += time.perf_counter() - started

    def to_dict(self, include_timing: bool = False) -> Dict[str, Any]:
        result = {
            "experiment": self.experiment,
            "lemma": self.lemma,
            "parameters": jsonable(self.parameters),
            "assertions": [a.to_dict() for a in self.assertions],
            "checked": self.checked,
            "failures": jsonable(self.failures),
            "passed": self.passed,
        }
        if include_timing:
            result["elapsed"] = round(self.elapsed, 3)
        return result

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentReport":
        report = cls(
            experiment=data["experiment"],
            lemma=data.get("lemma", ""),
            parameters=data.get("parameters", {}),
            checked=data.get("checked", 0),
            failures=data.get("failures", []),
            elapsed=data.get("elapsed", 0.0),
        )
        report.assertions = [Assertion(**a) for a in data.get("assertions", [])]
        return report

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        params = format_parameters(self.parameters)
        failed = sum(1 for a in self.assertions if not a.passed)
        return (
            f"[{status}] {self.experiment}({params}): {len(self.assertions) - failed}/"
            f"{len(self.assertions)} assertions, {self.checked} items checked"
        )
