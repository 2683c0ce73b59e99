"""
Stratified tangled partial bisimulations between finite models

The relation of rank m+1 keeps a pair (x, y) when the atoms agree and:

- Forth/Back on the order: every tuple of mutually equivalent points below x of length
  below the width bound has a pointwise rank-m partner tuple inside one cluster below y,
  and symmetrically.
- Forth on the map: the images are rank-m related (the back clause is the same clause,
  since both maps are total).
- Forth/Back on henceforth: every orbit point of x is rank-m related to some orbit point
  of y, and symmetrically.

Tuples are enumerated as duplicate-free subsets of a cluster. A tuple with repeated
entries is matched exactly when its underlying set is, because the partner tuple may
repeat entries too. A set of size s below the bound is covered whenever every subset of
size min(bound, |C|) containing it is, so only the largest admissible subsets are checked.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from dtlbench.formula import Formula, depth, width
from dtlbench.semantics import DynModel, eval_mask

logger = logging.getLogger(__name__)

UNBOUNDED = None


class BisimulationError(ValueError):
    """Raised for incompatible models or formulas outside a table's caps"""


def _width_label(k: Optional[int]) -> str:
    return "unbounded" if k is None else str(k)


@dataclass
class BisimTable:
    """Relations of rank 0..max_rank between the points of two models"""

    left: DynModel
    right: DynModel
    max_rank: int
    width: Optional[int]
    levels: List[np.ndarray] = field(default_factory=list)

    def related(self, x: str, y: str, rank: Optional[int] = None) -> bool:
        rank = self.max_rank if rank is None else rank
        return bool(self.levels[rank][self.left.index[x], self.right.index[y]])

    def pairs(self, rank: int) -> List[Tuple[str, str]]:
        relation = self.levels[rank]
        return [(self.left.points[i], self.right.points[j]) for i, j in zip(*np.nonzero(relation))]

    def is_rank_monotone(self) -> bool:
        return all(
            not (self.levels[m + 1] & ~self.levels[m]).any() for m in range(len(self.levels) - 1)
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.max_rank,
            "k": self.width if self.width is not None else "unbounded",
            "levels": {str(m): [list(pair) for pair in self.pairs(m)] for m in range(len(self.levels))},
        }


def atom_agreement(left: DynModel, right: DynModel) -> np.ndarray:
    """Rank-0 relation: pairs satisfying the same atoms"""
    relation = np.ones((len(left), len(right)), dtype=bool)
    for atom in sorted(set(left.atom_indices) | set(right.atom_indices)):
        a = left.atom_mask(atom)
        b = right.atom_mask(atom)
        relation &= a[:, None] == b[None, :]
    return relation


def _order_forth(
    left: DynModel, right: DynModel, relation: np.ndarray, width_bound: Optional[int]
) -> np.ndarray:
    """Forth clause for the order, computed per cluster pair and expanded to points"""
    left_clusters = left.cluster_members
    # matched[x, D]: x is related to some point of right-cluster D
    matched = (relation.astype(np.int64) @ right.cluster_membership.T.astype(np.int64)) > 0
    # below_right[D, E]: cluster D lies below cluster E
    below_right = right.cluster_leq.astype(np.int64)

    ok = np.ones((len(left_clusters), below_right.shape[0]), dtype=bool)
    for c, members in enumerate(left_clusters):
        size = len(members) if width_bound is None else min(width_bound - 1, len(members))
        if size <= 0:
            continue
        covered = np.array(
            [matched[list(subset)].all(axis=0) for subset in combinations(members, size)],
            dtype=np.int64,
        )
        # a subset is witnessed below E if some covering cluster D lies below E
        witnessed = (covered @ below_right) > 0
        ok[c] = witnessed.all(axis=0)

    # cluster pair (X, E) passes iff every left cluster below X is ok at E
    failing = (~ok).astype(np.int64)
    forth_clusters = (left.cluster_leq.T.astype(np.int64) @ failing) == 0
    return forth_clusters[np.ix_(left.cluster_labels, right.cluster_labels)]


def _orbit_forth(left: DynModel, right: DynModel, relation: np.ndarray) -> np.ndarray:
    reach = (relation.astype(np.int64) @ right.orbit_matrix.T.astype(np.int64)) > 0
    return (left.orbit_matrix.astype(np.int64) @ (~reach).astype(np.int64)) == 0


def step(
    left: DynModel, right: DynModel, relation: np.ndarray, base: np.ndarray, width_bound: Optional[int]
) -> np.ndarray:
    """One rank of refinement from the relation of the previous rank"""
    result = base & _order_forth(left, right, relation, width_bound)
    result &= _order_forth(right, left, relation.T, width_bound).T
    if left.is_dynamic:
        result &= relation[np.ix_(left.fmap, right.fmap)]
        result &= _orbit_forth(left, right, relation)
        result &= _orbit_forth(right, left, relation.T).T
    return result


def compute_bisim(
    left: DynModel, right: DynModel, n: int, k: Optional[int] = UNBOUNDED
) -> BisimTable:
    """
    Compute the relations of ranks 0..n between two models

    Args:
        left: The model on the left
        right: The model on the right
        n: Maximal rank
        k: Width bound (tuples of size < k), or None for unbounded

    Returns:
        BisimTable with one boolean matrix per rank
    """
    if left.is_dynamic != right.is_dynamic:
        raise BisimulationError("Both models need a point map, or neither")
    if n < 0:
        raise BisimulationError(f"Rank must be a natural number, got {n}")
    if k is not None and k < 1:
        raise BisimulationError(f"Width bound must be positive or unbounded, got {k}")

    base = atom_agreement(left, right)
    levels = [base]
    for m in range(n):
        levels.append(step(left, right, levels[-1], base, k))
        logger.debug(
            f"{left.name} vs {right.name}: rank {m + 1}, width {_width_label(k)}, "
            f"{int(levels[-1].sum())} pairs"
        )
        if np.array_equal(levels[-1], levels[-2]):
            # stable from here on
            levels.extend(levels[-1] for _ in range(n - m - 1))
            break
    return BisimTable(left=left, right=right, max_rank=n, width=k, levels=levels)


@dataclass
class AgreementReport:
    """Pairs related at a formula's depth that nevertheless disagree on it"""

    checked: int = 0
    disagreements: List[Tuple[str, str, str]] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.disagreements

    def to_dict(self) -> Dict[str, Any]:
        return {
            "checked": self.checked,
            "disagreements": [
                {"formula": f, "left": x, "right": y} for f, x, y in self.disagreements
            ],
        }


def check_agreement(table: BisimTable, formulas: Sequence[Formula]) -> AgreementReport:
    """Compare truth values on every pair related at each formula's depth"""
    report = AgreementReport()
    for phi in formulas:
        d = depth(phi)
        if d > table.max_rank:
            raise BisimulationError(f"Depth {d} of {phi} exceeds rank {table.max_rank}")
        if table.width is not None and width(phi) >= table.width:
            raise BisimulationError(
                f"Width {width(phi)} of {phi} is not below the table width {table.width}"
            )
        a = eval_mask(table.left, phi)
        b = eval_mask(table.right, phi)
        clash = table.levels[d] & (a[:, None] != b[None, :])
        for i, j in zip(*np.nonzero(clash)):
            report.disagreements.append((phi.text, table.left.points[i], table.right.points[j]))
        report.checked += 1
    if report.disagreements:
        logger.error(f"Bisimulation agreement violated on {len(report.disagreements)} pairs")
    return report
