"""
Brute-force oracle for the point sets definable with bounded depth and width
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import List, Sequence

import numpy as np

from dtlbench.gallery import GalleryError
from dtlbench.semantics import DynModel, closure_mask, tangled_clusters_mask

logger = logging.getLogger(__name__)

DEFAULT_MAX_POINTS = 12
DEFAULT_MAX_FAMILY_SIZE = 4096


def _relabel(labels: np.ndarray) -> np.ndarray:
    return np.unique(labels, return_inverse=True)[1].astype(np.int64)


def _refine(labels: np.ndarray, generators: Sequence[np.ndarray]) -> np.ndarray:
    for g in generators:
        labels = _relabel(labels * 2 + g.astype(np.int64))
    return labels


def _members(labels: np.ndarray) -> List[np.ndarray]:
    """Every union of blocks, i.e. every member of the Boolean algebra"""
    blocks = [labels == b for b in range(int(labels.max()) + 1)]
    result = []
    for bits in range(2 ** len(blocks)):
        mask = np.zeros(len(labels), dtype=bool)
        for b, block in enumerate(blocks):
            if bits >> b & 1:
                mask |= block
        result.append(mask)
    return result


@dataclass
class DefinableSets:
    """
    Boolean algebras D_0 .. D_d, each stored as the partition into its atoms

    A set belongs to D_i exactly when it is a union of blocks of ``levels[i]``.
    """

    model: DynModel
    atoms: List[int]
    width_cap: int
    levels: List[np.ndarray] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def block_count(self, depth: int) -> int:
        return int(self.levels[depth].max()) + 1

    def size(self, depth: int) -> int:
        return 2 ** self.block_count(depth)

    def contains(self, mask: np.ndarray, depth: int = -1) -> bool:
        labels = self.levels[depth]
        for b in range(int(labels.max()) + 1):
            values = mask[labels == b]
            if values.any() and not values.all():
                return False
        return True

    def same_block(self, x: str, y: str, depth: int = -1) -> bool:
        labels = self.levels[depth]
        return bool(labels[self.model.index[x]] == labels[self.model.index[y]])

    def members(self, depth: int = -1) -> List[np.ndarray]:
        return _members(self.levels[depth])


def definable_sets(
    model: DynModel,
    atoms: Sequence[int],
    width_cap: int,
    depth_budget: int,
    max_points: int = DEFAULT_MAX_POINTS,
    max_family_size: int = DEFAULT_MAX_FAMILY_SIZE,
) -> DefinableSets:
    """
    Compute the sets definable by formulas of bounded depth and width

    D_0 is the Boolean closure of the atom extensions, and D_{i+1} the Boolean closure of
    D_i together with every tangled closure of at most ``width_cap`` members of D_i.

    Args:
        model: Static model with at most ``max_points`` points
        atoms: Atom indices the formulas may use
        width_cap: Largest tangle argument count, >= 1
        depth_budget: Number of modal layers d
        max_points: Size limit on the model
        max_family_size: Largest algebra enumerated when width_cap >= 2

    Returns:
        DefinableSets with levels 0..d
    """
    if model.is_dynamic:
        raise GalleryError("The definability oracle works on static models only")
    if len(model) > max_points:
        raise GalleryError(f"Model has {len(model)} points, oracle limit is {max_points}")
    if width_cap < 1 or depth_budget < 0:
        raise GalleryError(f"Need width_cap >= 1 and depth_budget >= 0, got {width_cap}, {depth_budget}")

    labels = _refine(np.zeros(len(model), dtype=np.int64), [model.atom_mask(a) for a in atoms])
    result = DefinableSets(model=model, atoms=list(atoms), width_cap=width_cap, levels=[labels])

    for depth in range(depth_budget):
        blocks = [labels == b for b in range(int(labels.max()) + 1)]
        if width_cap == 1:
            # closure distributes over unions, so block closures generate the rest
            generators = [closure_mask(model, block) for block in blocks]
        else:
            if 2 ** len(blocks) > max_family_size:
                logger.warning(
                    f"Oracle algebra at depth {depth} has 2^{len(blocks)} members, "
                    f"over the limit {max_family_size}"
                )
                raise GalleryError(f"Definable family exceeds {max_family_size} sets")
            members = [m for m in _members(labels) if m.any()]
            generators = [
                tangled_clusters_mask(model, list(family))
                for size in range(1, width_cap + 1)
                for family in combinations(members, size)
            ]
        refined = _refine(labels, generators)
        logger.debug(f"Oracle depth {depth + 1}: {int(refined.max()) + 1} blocks")
        result.levels.append(refined)
        if np.array_equal(refined, labels):
            result.levels.extend(refined for _ in range(depth_budget - depth - 1))
            break
        labels = refined
    return result
