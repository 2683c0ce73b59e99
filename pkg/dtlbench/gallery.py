"""
Witness model families, similarity relations and random test inputs
"""

import itertools
import logging
import random
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence

import numpy as np

from dtlbench.formula import (
    Atom,
    Formula,
    Hence,
    Next,
    conj,
    mod_index,
    neg,
    tangle,
)
from dtlbench.semantics import (
    DEFAULT_CLUSTER_WARN,
    DynModel,
    ModelError,
    reflexive_transitive_closure,
)

logger = logging.getLogger(__name__)


class GalleryError(ValueError):
    """Raised for generator parameters outside their documented ranges"""


@dataclass(frozen=True, order=True)
class GalleryPoint:
    """A point (h, t, k); ``t`` is None for the purely spatial family A"""

    h: int
    t: Optional[int]
    k: int

    @property
    def s(self) -> int:
        return self.h + (self.t or 0)

    @property
    def name(self) -> str:
        if self.t is None:
            return f"{self.h}.{self.k}"
        return f"{self.h}.{self.t}.{self.k}"

    @classmethod
    def parse(cls, name: str) -> "GalleryPoint":
        parts = [int(part) for part in name.split(".")]
        if len(parts) == 2:
            return cls(parts[0], None, parts[1])
        if len(parts) == 3:
            return cls(parts[0], parts[1], parts[2])
        raise GalleryError(f"Not a gallery point name: {name!r}")


def _check_positive(**values: int) -> None:
    for key, value in values.items():
        if value < 1:
            raise GalleryError(f"{key} must be at least 1, got {value}")


def _check_dynamic_params(N: int, K: int) -> None:
    _check_positive(N=N)
    if K < 2:
        raise GalleryError(f"K must be at least 2 for the dynamic families, got {K}")


def _build(
    name: str,
    points: Sequence[GalleryPoint],
    leq: np.ndarray,
    images: Optional[Sequence[GalleryPoint]],
    meta: Dict,
) -> DynModel:
    index = {x: i for i, x in enumerate(points)}
    fmap = None
    if images is not None:
        missing = [y.name for y in images if y not in index]
        if missing:
            raise ModelError(f"{name}: map leaves the model at {missing[:3]}")
        fmap = [index[y] for y in images]
    K = max(x.k for x in points)
    valuation = {k: np.array([x.k == k for x in points]) for k in range(1, K + 1)}
    return DynModel(
        [x.name for x in points],
        leq,
        fmap,
        valuation,
        name=name,
        cluster_warn_threshold=max(DEFAULT_CLUSTER_WARN, K),
        meta=meta,
    )


# Family A: static, K-simple


def a_points(N: int, K: int) -> List[GalleryPoint]:
    return [
        GalleryPoint(h, None, k)
        for h in range(N * K + 1)
        for k in range(1, K + 1)
        if h == 0 or k != mod_index(h, K)
    ]


def gen_A(N: int, K: int) -> DynModel:
    """Static model A(N, K); (h, k) <= (h', k') iff h >= h'"""
    _check_positive(N=N, K=K)
    points = a_points(N, K)
    h = np.array([x.h for x in points])
    return _build(f"A({N},{K})", points, h[:, None] >= h[None, :], None, {"family": "A", "N": N, "K": K})


# Families B, C, D: dynamic


def b_points(N: int, K: int) -> List[GalleryPoint]:
    points = [
        GalleryPoint(h, s - h, k)
        for s in range(N * K + 1)
        for h in range(s + 1)
        for k in range(1, K + 1)
        if k % K != s % K
    ]
    points.extend(
        GalleryPoint(0, t, k) for t in range(N * K + 1, N * (K + 1) + 1) for k in range(1, K)
    )
    return points


def f_B(x: GalleryPoint, N: int, K: int) -> GalleryPoint:
    """The map of B(N, K)

    Two repairs keep it total: the tail step also applies at t = NK (h = 0 matches no
    other case there), and the wrap rotates k modulo K-1 so it stays off k = K.
    """
    h, t, k = x.h, x.t, x.k
    if h + t < N * K:
        return GalleryPoint(h, t + 1, mod_index(k + 1, K))
    if h + t == N * K and h > 0:
        return GalleryPoint(h - 1, t + 1, k)
    if N * K <= t < N * (K + 1):
        return GalleryPoint(h, t + 1, k)
    if t == N * (K + 1):
        return GalleryPoint(0, 0, mod_index(k + 1, K - 1))
    raise GalleryError(f"{x.name} is not a point of B({N},{K})")


def f_C(x: GalleryPoint, K: int) -> GalleryPoint:
    if x.k == K - 1:
        return GalleryPoint(1, 0, K)
    return GalleryPoint(0, 0, mod_index(x.k + 1, K))


def _b_order(points: Sequence[GalleryPoint]) -> np.ndarray:
    h = np.array([x.h for x in points])
    t = np.array([x.t for x in points])
    return (t[:, None] == t[None, :]) & (h[:, None] >= h[None, :])


def gen_B(N: int, K: int) -> DynModel:
    """Dynamic model B(N, K)"""
    _check_dynamic_params(N, K)
    points = b_points(N, K)
    images = [f_B(x, N, K) for x in points]
    return _build(f"B({N},{K})", points, _b_order(points), images, {"family": "B", "N": N, "K": K})


def gen_C(K: int) -> DynModel:
    """Static model C(K): a single cluster of K points"""
    _check_dynamic_params(1, K)
    points = [GalleryPoint(0, -1, k) for k in range(1, K + 1)]
    leq = np.ones((K, K), dtype=bool)
    return _build(f"C({K})", points, leq, None, {"family": "C", "K": K})


def gen_D(N: int, K: int) -> DynModel:
    """Disjoint union of C(K) and B(N, K) with the discontinuous map on C"""
    _check_dynamic_params(N, K)
    c_points = [GalleryPoint(0, -1, k) for k in range(1, K + 1)]
    points = c_points + b_points(N, K)
    t = np.array([x.t for x in points])
    leq = _b_order(points) | ((t[:, None] == -1) & (t[None, :] == -1))
    images = [f_C(x, K) if x.t == -1 else f_B(x, N, K) for x in points]
    return _build(f"D({N},{K})", points, leq, images, {"family": "D", "N": N, "K": K})


def generate(family: str, N: Optional[int], K: int) -> DynModel:
    family = family.upper()
    if family == "C":
        return gen_C(K)
    if N is None:
        raise GalleryError(f"Family {family} needs N")
    generators = {"A": gen_A, "B": gen_B, "D": gen_D}
    if family not in generators:
        raise GalleryError(f"Unknown family {family!r}; choose A, B, C or D")
    return generators[family](N, K)


def gallery_points(model: DynModel) -> List[GalleryPoint]:
    return [GalleryPoint.parse(x) for x in model.points]


# Similarity on B


def sim_m(model: DynModel, m: int) -> np.ndarray:
    """
    The similarity relation of rank m on a model from ``gen_B`` (or the B part of ``gen_D``)

    Args:
        model: Model built by gen_B or gen_D
        m: Rank, below N

    Returns:
        Boolean matrix over the model's points; C-points relate to nothing
    """
    N, K = model.meta.get("N"), model.meta.get("K")
    if model.meta.get("family") not in ("B", "D"):
        raise GalleryError(f"sim_m needs a model from gen_B or gen_D, got {model.name}")
    if not 0 <= m < N:
        raise GalleryError(f"sim_m needs 0 <= m < N = {N}, got m = {m}")
    points = gallery_points(model)
    s = np.array([x.s for x in points])
    k = np.array([x.k for x in points])
    in_b = np.array([x.t is not None and x.t >= 0 for x in points])
    low = s <= K * (N - m)
    tail = (s >= N * K) & (s <= N * (K + 1) - m)
    related = (
        (s[:, None] == s[None, :])
        | (low[:, None] & low[None, :])
        | (tail[:, None] & tail[None, :])
    )
    return related & (k[:, None] == k[None, :]) & in_b[:, None] & in_b[None, :]


# Random inputs


def random_formula(
    rng: random.Random,
    atoms: Sequence[int],
    max_depth: int,
    max_width: int = 1,
    temporal: bool = True,
    size: int = 6,
) -> Formula:
    """
    Draw a random formula within depth and width bounds

    Args:
        rng: Source of randomness
        atoms: Atom indices to draw from
        max_depth: Upper bound on modal depth
        max_width: Upper bound on tangle width; 0 gives tangle-free formulas
        temporal: Whether X and G may occur
        size: Rough node budget

    Returns:
        A formula with depth <= max_depth and width <= max_width
    """

    def draw(d: int, budget: int) -> Formula:
        kinds = ["atom"]
        if budget > 1:
            kinds += ["not", "and"]
            if d > 0 and temporal:
                kinds += ["next", "hence"]
            if d > 0 and max_width >= 1:
                kinds += ["tangle"]
        kind = rng.choice(kinds)
        if kind == "atom":
            return Atom(rng.choice(list(atoms)))
        if kind == "not":
            return neg(draw(d, budget - 1))
        if kind == "and":
            half = max(1, (budget - 1) // 2)
            return conj(draw(d, half), draw(d, budget - 1 - half))
        if kind == "next":
            return Next(draw(d - 1, budget - 1))
        if kind == "hence":
            return Hence(draw(d - 1, budget - 1))
        arity = rng.randint(1, max_width)
        share = max(1, (budget - 1) // arity)
        return tangle(draw(d - 1, share) for _ in range(arity))

    return draw(max_depth, size)


def gen_random_model(
    seed: int,
    point_budget: int,
    cluster_budget: int,
    atom_budget: int,
    continuous: bool,
    dynamic: bool = True,
    max_attempts: int = 20,
) -> DynModel:
    """
    Draw a random finite model

    Args:
        seed: Random seed; equal seeds give equal models
        point_budget: Maximal number of points
        cluster_budget: Maximal cluster size
        atom_budget: Atoms p1..p_atom_budget are valuated at random
        continuous: Force a monotone (hence continuous) map
        dynamic: Whether the model carries a map at all

    Returns:
        DynModel
    """
    _check_positive(point_budget=point_budget, cluster_budget=cluster_budget, atom_budget=atom_budget)
    if cluster_budget > DEFAULT_CLUSTER_WARN:
        logger.warning(f"cluster_budget {cluster_budget} exceeds {DEFAULT_CLUSTER_WARN}")

    rng = random.Random(seed)
    n = rng.randint(1, point_budget)
    names = [f"w{i}" for i in range(n)]

    for attempt in range(max_attempts):
        order = list(range(n))
        rng.shuffle(order)
        groups: List[List[int]] = []
        while order:
            size = rng.randint(1, min(cluster_budget, len(order)))
            groups.append(order[:size])
            order = order[size:]

        edges = set()
        for group in groups:
            for a, b in zip(group, group[1:] + group[:1]):
                edges.add((a, b))
        for i, j in itertools.combinations(range(len(groups)), 2):
            if rng.random() < 0.35:
                edges.add((rng.choice(groups[i]), rng.choice(groups[j])))

        fmap = [rng.randrange(n) for _ in range(n)] if dynamic else None
        if continuous and fmap is not None:
            frontier = set(edges)
            while frontier:
                images = {(fmap[a], fmap[b]) for a, b in frontier} - edges
                edges |= images
                frontier = images

        relation = np.zeros((n, n), dtype=bool)
        for a, b in edges:
            relation[a, b] = True
        leq = reflexive_transitive_closure(relation)
        largest = int((leq & leq.T).sum(axis=1).max())
        if largest <= cluster_budget:
            break
        logger.debug(f"Random model seed {seed}: attempt {attempt} has a cluster of {largest}")
    else:
        # an antichain with the identity map always fits the budget
        leq = np.eye(n, dtype=bool)
        fmap = list(range(n)) if dynamic else None

    valuation = {
        atom: np.array([rng.random() < 0.5 for _ in range(n)]) for atom in range(1, atom_budget + 1)
    }
    return DynModel(
        names,
        leq,
        fmap,
        valuation,
        name=f"random-{seed}",
        meta={"family": "random", "seed": seed, "continuous": continuous},
    )


def enumerate_preorders(size: int) -> Iterator[DynModel]:
    """Every labeled preorder on points "1".."size" (static, empty valuation)"""
    if not 1 <= size <= 4:
        raise GalleryError(f"enumerate_preorders supports sizes 1..4, got {size}")
    names = [str(i) for i in range(1, size + 1)]
    off_diagonal = [(a, b) for a in range(size) for b in range(size) if a != b]
    for chosen in itertools.product([False, True], repeat=len(off_diagonal)):
        relation = np.eye(size, dtype=bool)
        for (a, b), present in zip(off_diagonal, chosen):
            relation[a, b] = present
        if np.array_equal(reflexive_transitive_closure(relation), relation):
            yield DynModel(names, relation, name=f"preorder-{size}")
