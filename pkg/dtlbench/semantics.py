"""
Finite dynamic preorder models and the semantics of L*

Orientation: ``x <= y`` (stored as ``leq[x, y]``) is the model's preorder. Opens are
downward closed, so the diamond looks downward and topological closure is the upset:
``x`` is in the closure of ``S`` iff some ``a`` in ``S`` has ``a <= x``.
"""

import json
import logging
import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from dtlbench.formula import And, Atom, Formula, Hence, Next, Not, Tangle

logger = logging.getLogger(__name__)

DEFAULT_CLUSTER_WARN = 8
MAX_DOWNSET_POINTS = 16

_ATOM_KEY = re.compile(r"^p([1-9][0-9]*)$")
_MODEL_FIELDS = {"points", "order", "f", "valuation"}

PointSet = FrozenSet[str]


class ModelError(ValueError):
    """Raised for malformed models and for operations a model does not support"""


def reflexive_transitive_closure(relation: np.ndarray) -> np.ndarray:
    """Warshall closure of a square boolean matrix, diagonal included"""
    closure = relation.astype(bool).copy()
    np.fill_diagonal(closure, True)
    for k in range(closure.shape[0]):
        closure |= closure[:, k : k + 1] & closure[k : k + 1, :]
    return closure


@dataclass(frozen=True)
class ClusterPartition:
    """The clusters of a model and the partial order they inherit"""

    blocks: Tuple[Tuple[str, ...], ...]
    order: FrozenSet[Tuple[int, int]]

    def block_of(self, point: str) -> int:
        for i, block in enumerate(self.blocks):
            if point in block:
                return i
        raise ModelError(f"Unknown point {point!r}")

    def leq(self, i: int, j: int) -> bool:
        return (i, j) in self.order

    @property
    def sizes(self) -> List[int]:
        return [len(block) for block in self.blocks]


@dataclass(frozen=True)
class Orbit:
    """An eventually periodic orbit: ``prefix`` is visited once, then ``cycle`` repeats"""

    prefix: Tuple[str, ...]
    cycle: Tuple[str, ...]

    @property
    def points(self) -> FrozenSet[str]:
        return frozenset(self.prefix) | frozenset(self.cycle)

    def __len__(self) -> int:
        return len(self.prefix) + len(self.cycle)


class DynModel:
    """
    A finite preorder with an optional self-map and a valuation

    Instances are treated as immutable: arrays are flagged read-only and derived data
    (clusters, orbits) is computed once on first use.
    """

    def __init__(
        self,
        points: Sequence[str],
        leq: np.ndarray,
        fmap: Optional[Sequence[int]] = None,
        valuation: Optional[Mapping[int, np.ndarray]] = None,
        name: Optional[str] = None,
        cluster_warn_threshold: int = DEFAULT_CLUSTER_WARN,
        meta: Optional[Mapping[str, Any]] = None,
    ):
        self.points: Tuple[str, ...] = tuple(points)
        self.index: Dict[str, int] = {x: i for i, x in enumerate(self.points)}
        if len(self.index) != len(self.points):
            raise ModelError("Duplicate point names")
        n = len(self.points)
        if n == 0:
            raise ModelError("A model needs at least one point")

        self.leq = np.asarray(leq, dtype=bool)
        if self.leq.shape != (n, n):
            raise ModelError(f"Order matrix has shape {self.leq.shape}, expected {(n, n)}")
        self.leq.setflags(write=False)

        self.fmap: Optional[np.ndarray] = None
        if fmap is not None:
            self.fmap = np.asarray(fmap, dtype=np.int64)
            if self.fmap.shape != (n,) or self.fmap.min() < 0 or self.fmap.max() >= n:
                raise ModelError("Point map must send every point to a point of the model")
            self.fmap.setflags(write=False)

        self.valuation: Dict[int, np.ndarray] = {}
        for atom, mask in sorted((valuation or {}).items()):
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != (n,):
                raise ModelError(f"Valuation of p{atom} has the wrong size")
            mask.setflags(write=False)
            self.valuation[int(atom)] = mask

        self.name = name or "model"
        # generator parameters, e.g. {"family": "B", "N": 2, "K": 2}
        self.meta: Dict[str, Any] = dict(meta or {})

        largest = max(len(members) for members in self.cluster_members)
        if largest > cluster_warn_threshold:
            logger.warning(
                f"{self.name}: cluster of size {largest} exceeds {cluster_warn_threshold}; "
                f"tangle and bisimulation checks are exponential in cluster size"
            )

    @classmethod
    def from_relation(
        cls,
        points: Sequence[str],
        order: Iterable[Tuple[str, str]],
        fmap: Optional[Mapping[str, str]] = None,
        valuation: Optional[Mapping[int, Iterable[str]]] = None,
        name: Optional[str] = None,
        cluster_warn_threshold: int = DEFAULT_CLUSTER_WARN,
    ) -> "DynModel":
        """Build a model from generator edges, closing them into a preorder"""
        points = tuple(points)
        index = {x: i for i, x in enumerate(points)}
        if len(index) != len(points):
            raise ModelError("Duplicate point names")

        def lookup(x: str, where: str) -> int:
            try:
                return index[x]
            except (KeyError, TypeError):
                raise ModelError(f"Dangling point name {x!r} in {where}")

        relation = np.zeros((len(points), len(points)), dtype=bool)
        for x, y in order:
            relation[lookup(x, "order"), lookup(y, "order")] = True

        mapped = None
        if fmap is not None:
            for x in fmap:
                lookup(x, "f")
            missing = [x for x in points if x not in fmap]
            if missing:
                raise ModelError(f"Point map is not total; missing {missing[:5]}")
            mapped = [lookup(fmap[x], "f") for x in points]

        masks = {}
        for atom, members in (valuation or {}).items():
            mask = np.zeros(len(points), dtype=bool)
            for x in members:
                mask[lookup(x, f"valuation of p{atom}")] = True
            masks[int(atom)] = mask

        return cls(
            points,
            reflexive_transitive_closure(relation),
            mapped,
            masks,
            name=name,
            cluster_warn_threshold=cluster_warn_threshold,
        )

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        kind = "dynamic" if self.is_dynamic else "static"
        return f"DynModel({self.name!r}, {len(self)} points, {kind})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DynModel):
            return NotImplemented
        if self.points != other.points or not np.array_equal(self.leq, other.leq):
            return False
        if (self.fmap is None) != (other.fmap is None):
            return False
        if self.fmap is not None and not np.array_equal(self.fmap, other.fmap):
            return False
        mine = {a: m for a, m in self.valuation.items() if m.any()}
        theirs = {a: m for a, m in other.valuation.items() if m.any()}
        return mine.keys() == theirs.keys() and all(
            np.array_equal(mine[a], theirs[a]) for a in mine
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def is_dynamic(self) -> bool:
        return self.fmap is not None

    # Conversions between names and masks

    def mask(self, names: Iterable[str]) -> np.ndarray:
        result = np.zeros(len(self.points), dtype=bool)
        for x in names:
            try:
                result[self.index[x]] = True
            except KeyError:
                raise ModelError(f"Unknown point {x!r}")
        return result

    def names(self, mask: np.ndarray) -> PointSet:
        return frozenset(self.points[i] for i in np.flatnonzero(mask))

    def atom_mask(self, atom: int) -> np.ndarray:
        mask = self.valuation.get(atom)
        return mask if mask is not None else np.zeros(len(self.points), dtype=bool)

    @property
    def atom_indices(self) -> List[int]:
        return sorted(a for a, m in self.valuation.items() if m.any())

    # Derived structure

    @cached_property
    def cluster_labels(self) -> np.ndarray:
        equiv = self.leq & self.leq.T
        labels = np.full(len(self.points), -1, dtype=np.int64)
        next_label = 0
        for i in range(len(self.points)):
            if labels[i] < 0:
                labels[equiv[i]] = next_label
                next_label += 1
        labels.setflags(write=False)
        return labels

    @cached_property
    def cluster_members(self) -> List[np.ndarray]:
        labels = self.cluster_labels
        return [np.flatnonzero(labels == c) for c in range(int(labels.max()) + 1)]

    @cached_property
    def cluster_membership(self) -> np.ndarray:
        """Boolean matrix (clusters x points)"""
        membership = np.zeros((len(self.cluster_members), len(self.points)), dtype=bool)
        for c, members in enumerate(self.cluster_members):
            membership[c, members] = True
        membership.setflags(write=False)
        return membership

    @cached_property
    def cluster_leq(self) -> np.ndarray:
        """Boolean matrix (clusters x clusters) of the induced order"""
        reps = [members[0] for members in self.cluster_members]
        result = self.leq[np.ix_(reps, reps)].copy()
        result.setflags(write=False)
        return result

    @cached_property
    def orbit_matrix(self) -> np.ndarray:
        """Boolean matrix with ``[x, y]`` set iff y is some iterate of the map at x"""
        fmap = self._require_map("orbit")
        n = len(self.points)
        result = np.zeros((n, n), dtype=bool)
        for x in range(n):
            y = x
            while not result[x, y]:
                result[x, y] = True
                y = fmap[y]
        result.setflags(write=False)
        return result

    def _require_map(self, operation: str) -> np.ndarray:
        if self.fmap is None:
            raise ModelError(f"{operation} needs a point map, but {self.name} is static")
        return self.fmap


# Loading and saving


def load_model(
    document: Mapping[str, Any],
    name: Optional[str] = None,
    cluster_warn_threshold: int = DEFAULT_CLUSTER_WARN,
) -> DynModel:
    """
    Build a model from its JSON document

    Args:
        document: Parsed JSON with ``points``, ``order``, optional ``f`` and ``valuation``
        name: Label used in logs and reports
        cluster_warn_threshold: Warn when a cluster is larger than this

    Returns:
        The model, with the order closed under reflexivity and transitivity
    """
    if not isinstance(document, Mapping):
        raise ModelError("Model document must be a JSON object")
    unknown = sorted(set(document) - _MODEL_FIELDS)
    if unknown:
        raise ModelError(f"Unknown model fields: {unknown}")
    if "points" not in document:
        raise ModelError("Model document has no 'points'")

    points = document["points"]
    if not isinstance(points, list) or not all(isinstance(x, str) for x in points):
        raise ModelError("'points' must be a list of strings")

    order = document.get("order", [])
    if not isinstance(order, list) or not all(
        isinstance(edge, (list, tuple)) and len(edge) == 2 for edge in order
    ):
        raise ModelError("'order' must be a list of [x, y] pairs")

    fmap = document.get("f")
    if fmap is not None and not isinstance(fmap, Mapping):
        raise ModelError("'f' must map point names to point names")

    raw_valuation = document.get("valuation") or {}
    if not isinstance(raw_valuation, Mapping):
        raise ModelError("'valuation' must map atom names to lists of point names")
    valuation: Dict[int, List[str]] = {}
    for key, members in raw_valuation.items():
        match = _ATOM_KEY.match(key)
        if not match:
            raise ModelError(f"Bad atom name {key!r} in valuation")
        if not isinstance(members, list):
            raise ModelError(f"Valuation of {key} must be a list of point names")
        valuation[int(match.group(1))] = members

    return DynModel.from_relation(
        points,
        [tuple(edge) for edge in order],
        fmap,
        valuation,
        name=name,
        cluster_warn_threshold=cluster_warn_threshold,
    )


def load_model_file(path: Union[str, Path], **kwargs: Any) -> DynModel:
    with open(path, "r", encoding="utf-8") as f:
        document = json.load(f)
    kwargs.setdefault("name", Path(path).stem)
    return load_model(document, **kwargs)


def generator_edges(model: DynModel) -> List[Tuple[str, str]]:
    """A small edge set whose closure is the model's order

    Each cluster contributes a ring through its members; distinct clusters are linked
    by the covering edges of the cluster order.
    """
    edges = []
    for members in model.cluster_members:
        if len(members) > 1:
            ring = list(members) + [members[0]]
            edges.extend((model.points[a], model.points[b]) for a, b in zip(ring, ring[1:]))
    below = model.cluster_leq & ~np.eye(len(model.cluster_members), dtype=bool)
    reps = [members[0] for members in model.cluster_members]
    for c, d in zip(*np.nonzero(below)):
        between = below[c] & below[:, d]
        if not between.any():
            edges.append((model.points[reps[c]], model.points[reps[d]]))
    return edges


def dump_model(model: DynModel) -> Dict[str, Any]:
    """The JSON document of a model; ``load_model(dump_model(M)) == M``"""
    document: Dict[str, Any] = {
        "points": list(model.points),
        "order": [list(edge) for edge in generator_edges(model)],
    }
    if model.fmap is not None:
        document["f"] = {x: model.points[model.fmap[i]] for i, x in enumerate(model.points)}
    document["valuation"] = {
        f"p{atom}": [model.points[i] for i in np.flatnonzero(model.valuation[atom])]
        for atom in model.atom_indices
    }
    return document


def save_model(model: DynModel, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(dump_model(model), f, indent=2)


# Topology


def clusters(model: DynModel) -> ClusterPartition:
    blocks = tuple(tuple(model.points[i] for i in members) for members in model.cluster_members)
    order = frozenset((int(c), int(d)) for c, d in zip(*np.nonzero(model.cluster_leq)))
    return ClusterPartition(blocks=blocks, order=order)


def closure_mask(model: DynModel, mask: np.ndarray) -> np.ndarray:
    """Upset of ``mask``: every x with some a in mask and a <= x"""
    if not mask.any():
        return np.zeros(len(model.points), dtype=bool)
    return model.leq[mask].any(axis=0)


def closure_up(model: DynModel, points: Iterable[str]) -> PointSet:
    return model.names(closure_mask(model, model.mask(points)))


def is_downset(model: DynModel, mask: np.ndarray) -> bool:
    return bool(np.array_equal(model.leq[:, mask].any(axis=1), mask))


def preimage(model: DynModel, mask: np.ndarray) -> np.ndarray:
    return mask[model._require_map("preimage")]


def _downset_rows(leq: np.ndarray, rows: np.ndarray) -> np.ndarray:
    # row r fails when x <= b, b in r and x not in r
    return ~(rows[:, None, :] & ~rows[:, :, None] & leq[None, :, :]).any(axis=(1, 2))


def downsets(model: DynModel) -> np.ndarray:
    """Every open set of the model, one boolean row each"""
    n = len(model.points)
    if n > MAX_DOWNSET_POINTS:
        raise ModelError(f"Enumerating open sets is limited to {MAX_DOWNSET_POINTS} points, got {n}")
    rows = ((np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)
    return rows[_downset_rows(model.leq, rows)]


def preimages_are_open(model: DynModel) -> bool:
    """Whether the preimage of every downset is again a downset"""
    fmap = model._require_map("preimages_are_open")
    return bool(_downset_rows(model.leq, downsets(model)[:, fmap]).all())


def tangled_clusters_mask(model: DynModel, family: Sequence[np.ndarray]) -> np.ndarray:
    """Tangled closure via clusters meeting every member of the family"""
    if len(family) == 0:
        raise ModelError("Tangled closure of an empty family is undefined")
    membership = model.cluster_membership
    good = np.ones(membership.shape[0], dtype=bool)
    for member in family:
        good &= (membership & member[None, :]).any(axis=1)
    if not good.any():
        return np.zeros(len(model.points), dtype=bool)
    return closure_mask(model, membership[good].any(axis=0))


def tangled_gfp_mask(model: DynModel, family: Sequence[np.ndarray]) -> np.ndarray:
    """Tangled closure as the greatest E with every member dense in E"""
    if len(family) == 0:
        raise ModelError("Tangled closure of an empty family is undefined")
    current = np.ones(len(model.points), dtype=bool)
    while True:
        updated = current.copy()
        for member in family:
            updated &= closure_mask(model, member & current)
        if np.array_equal(updated, current):
            return current
        current = updated


def tangled_clusters(model: DynModel, family: Sequence[Iterable[str]]) -> PointSet:
    return model.names(tangled_clusters_mask(model, [model.mask(s) for s in family]))


def tangled_gfp(model: DynModel, family: Sequence[Iterable[str]]) -> PointSet:
    return model.names(tangled_gfp_mask(model, [model.mask(s) for s in family]))


# Dynamics


def orbit(model: DynModel, point: str) -> Orbit:
    """The iterates of ``point`` as a non-repeating prefix followed by the cycle"""
    fmap = model._require_map("orbit")
    try:
        current = model.index[point]
    except KeyError:
        raise ModelError(f"Unknown point {point!r}")
    seen: Dict[int, int] = {}
    sequence: List[int] = []
    while current not in seen:
        seen[current] = len(sequence)
        sequence.append(current)
        current = int(fmap[current])
    start = seen[current]
    names = [model.points[i] for i in sequence]
    return Orbit(prefix=tuple(names[:start]), cycle=tuple(names[start:]))


def hence_mask(model: DynModel, mask: np.ndarray) -> np.ndarray:
    """Points whose whole orbit lies in ``mask``"""
    return ~(model.orbit_matrix & ~mask[None, :]).any(axis=1)


def hence_gfp_mask(model: DynModel, mask: np.ndarray) -> np.ndarray:
    """Greatest S with S = mask & f^-1(S); agrees with ``hence_mask``"""
    current = mask.copy()
    while True:
        updated = mask & preimage(model, current)
        if np.array_equal(updated, current):
            return current
        current = updated


def continuity_check(model: DynModel) -> List[Tuple[str, str]]:
    """Pairs x <= y whose images are not ordered; empty iff the map is continuous"""
    fmap = model._require_map("continuity_check")
    violations = model.leq & ~model.leq[np.ix_(fmap, fmap)]
    return [(model.points[x], model.points[y]) for x, y in zip(*np.nonzero(violations))]


# Evaluation


def eval_mask(
    model: DynModel,
    phi: Formula,
    method: str = "clusters",
    _memo: Optional[Dict[Formula, np.ndarray]] = None,
) -> np.ndarray:
    """
    Extension of a formula as a boolean mask over the model's points

    Args:
        model: The model
        phi: The formula
        method: Tangle algorithm, "clusters" or "gfp"

    Returns:
        Boolean array of length len(model)
    """
    memo = {} if _memo is None else _memo
    if phi in memo:
        return memo[phi]

    if isinstance(phi, Atom):
        result = model.atom_mask(phi.index)
    elif isinstance(phi, Not):
        result = ~eval_mask(model, phi.child, method, memo)
    elif isinstance(phi, And):
        result = eval_mask(model, phi.left, method, memo) & eval_mask(model, phi.right, method, memo)
    elif isinstance(phi, Next):
        if not model.is_dynamic:
            raise ModelError(f"X needs a point map, but {model.name} is static")
        result = preimage(model, eval_mask(model, phi.child, method, memo))
    elif isinstance(phi, Hence):
        if not model.is_dynamic:
            raise ModelError(f"G needs a point map, but {model.name} is static")
        child = eval_mask(model, phi.child, method, memo)
        result = hence_gfp_mask(model, child) if method == "gfp" else hence_mask(model, child)
    elif isinstance(phi, Tangle):
        family = [eval_mask(model, arg, method, memo) for arg in phi.args]
        if method == "gfp":
            result = tangled_gfp_mask(model, family)
        else:
            result = tangled_clusters_mask(model, family)
    else:
        raise ModelError(f"Unknown formula node {type(phi).__name__}")

    memo[phi] = result
    return result


def evaluate(model: DynModel, phi: Formula, method: str = "clusters") -> PointSet:
    return model.names(eval_mask(model, phi, method))


def holds(model: DynModel, point: str, phi: Formula) -> bool:
    if point not in model.index:
        raise ModelError(f"Unknown point {point!r}")
    return bool(eval_mask(model, phi)[model.index[point]])


def valid_on(model: DynModel, phi: Formula) -> bool:
    return bool(eval_mask(model, phi).all())


def truth_table(model: DynModel, phi: Formula) -> List[Tuple[str, bool]]:
    """Per-point truth values in point order"""
    mask = eval_mask(model, phi)
    return [(x, bool(mask[i])) for i, x in enumerate(model.points)]


# Graphviz


def _atom_label(model: DynModel, i: int) -> str:
    names = [f"p{a}" for a in model.atom_indices if model.valuation[a][i]]
    return ",".join(names)


def to_dot(model: DynModel) -> str:
    """DOT text: clusters boxed, strict order between cluster representatives, map dashed"""
    lines = [f'digraph "{model.name}" {{', "  rankdir=BT;", "  node [shape=ellipse];"]
    for c, members in enumerate(model.cluster_members):
        lines.append(f"  subgraph cluster_{c} {{")
        lines.append("    style=rounded;")
        for i in members:
            label = model.points[i]
            atoms = _atom_label(model, i)
            if atoms:
                label = f"{label}\\n{atoms}"
            lines.append(f'    "{model.points[i]}" [label="{label}"];')
        lines.append("  }")
    for x, y in generator_edges(model):
        if model.cluster_labels[model.index[x]] != model.cluster_labels[model.index[y]]:
            lines.append(f'  "{x}" -> "{y}";')
    if model.fmap is not None:
        for i, j in enumerate(model.fmap):
            lines.append(
                f'  "{model.points[i]}" -> "{model.points[j]}" [style=dashed, constraint=false];'
            )
    lines.append("}")
    return "\n".join(lines) + "\n"
