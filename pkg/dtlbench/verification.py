"""
Finite checks of the structural lemmas about the witness model families
"""

import itertools
import logging
import random
from typing import Dict, List, Optional

import numpy as np

from dtlbench.bisimulation import UNBOUNDED, compute_bisim
from dtlbench.formula import (
    Atom,
    Formula,
    cont,
    cycle,
    diamond,
    eventually,
    box,
    neg,
    p,
    substitute,
    trouble,
)
from dtlbench.gallery import (
    GalleryError,
    GalleryPoint,
    gallery_points,
    gen_A,
    gen_B,
    gen_D,
    random_formula,
    sim_m,
)
from dtlbench.kernel import AxiomInstance, Schema, instantiate_axiom
from dtlbench.report import ExperimentReport
from dtlbench.semantics import DynModel, continuity_check, eval_mask, orbit

logger = logging.getLogger(__name__)

NON_CONT_SCHEMAS = (
    Schema.K,
    Schema.T,
    Schema.FOUR,
    Schema.FIX_TANGLE,
    Schema.IND_TANGLE,
    Schema.NEG_NEXT,
    Schema.AND_NEXT,
    Schema.FIX_HENCE,
    Schema.IND_HENCE,
    Schema.K_HENCE,
)


def c_point(k: int) -> str:
    return GalleryPoint(0, -1, k).name


def verify_nkbis(N: int, K: int, m: int) -> ExperimentReport:
    """Root points of A(N, K) are rank-m width-K bisimilar to deep points with the same atom"""
    if m > N:
        raise GalleryError(f"verify_nkbis needs m <= N, got m={m}, N={N}")
    report = ExperimentReport("nkbis", "roots of A(N,K) look like deep points", {"N": N, "K": K, "m": m})
    with report.timed():
        model = gen_A(N, K)
        table = compute_bisim(model, model, m, K)
        for k in range(1, K + 1):
            for h in range(1, (N - m) * K + 1):
                if (h - k) % K == 0:
                    continue
                x, y = GalleryPoint(0, None, k).name, GalleryPoint(h, None, k).name
                report.checked += 1
                if not table.related(x, y, m):
                    report.fail([x, y])
        report.check("root/deep pairs missing from the bisimulation", [], report.failures)
    return report


def verify_bislemm(N: int, K: int, m: int) -> ExperimentReport:
    """The similarity relation of rank m is contained in the rank-m bisimulation on B(N, K)"""
    report = ExperimentReport("bislemm", "similar points are bisimilar", {"N": N, "K": K, "m": m})
    with report.timed():
        model = gen_B(N, K)
        sim = sim_m(model, m)
        report.check_true("similarity is reflexive", sim.diagonal().all())
        report.check_true("similarity is symmetric", np.array_equal(sim, sim.T))
        composed = (sim.astype(np.int64) @ sim.astype(np.int64)) > 0
        report.check_true("similarity is transitive", not (composed & ~sim).any())
        table = compute_bisim(model, model, m, UNBOUNDED)
        missing = sim & ~table.levels[m]
        report.checked = int(sim.sum())
        for i, j in zip(*np.nonzero(missing)):
            report.fail([model.points[i], model.points[j]])
        report.check("similar pairs that are not bisimilar", 0, int(missing.sum()))
    return report


def verify_mainaxis(N: int, K: int, m: int) -> ExperimentReport:
    """
    The main axis h = 0 of B(N, K)

    Every point is similar to a point on the axis, and the axis is a single cycle of the
    map that every orbit enters within NK steps.
    """
    report = ExperimentReport("mainaxis", "orbits sweep the main axis", {"N": N, "K": K, "m": m})
    with report.timed():
        model = gen_B(N, K)
        points = gallery_points(model)
        axis = np.array([x.h == 0 for x in points])
        sim = sim_m(model, m)

        lonely = [model.points[i] for i in np.nonzero(~(sim & axis[None, :]).any(axis=1))[0]]
        report.check("points without a similar axis point", [], lonely)

        missed = ~(model.orbit_matrix[:, axis]).all(axis=1)
        report.check("points whose orbit misses part of the axis", [], model.names(missed))
        report.checked = len(model)

        start = GalleryPoint(0, 0, 1).name
        expected = (K - 1) * (N * K + N + 1)
        report.check("axis size", expected, int(axis.sum()))
        report.check("axis cycle length", expected, len(orbit(model, start).cycle))

        fmap = np.asarray(model.fmap)
        current = np.arange(len(model))
        for _ in range(N * K):
            current = fmap[current]
        report.check_true("every orbit is on the axis after NK steps", axis[current].all())

        rotation = {}
        for k in range(1, K):
            i = model.index[GalleryPoint(0, 0, k).name]
            for _ in range(N * (K + 1) + 1):
                i = int(fmap[i])
            rotation[str(k)] = model.points[i]
        wanted = {str(k): GalleryPoint(0, 0, (k % (K - 1)) + 1).name for k in range(1, K)}
        report.check("axis origin after N(K+1)+1 steps", wanted, rotation)
    return report


def verify_trouble_fails(N: int, K: int) -> ExperimentReport:
    """D(N, K) refutes Trouble^K at every point of its static cluster"""
    report = ExperimentReport("trouble_fails", "D(N,K) refutes Trouble^K", {"N": N, "K": K})
    with report.timed():
        model = gen_D(N, K)
        refuted = eval_mask(model, neg(trouble(K)))
        for k in range(1, K + 1):
            report.checked += 1
            if not refuted[model.index[c_point(k)]]:
                report.fail(c_point(k))
        report.check("C-points where Trouble^K holds", [], report.failures)
        report.check_true("Cycle^K is valid", eval_mask(model, cycle(K)).all())
        report.check_true(
            "<f>[]~p_K is valid", eval_mask(model, eventually(box(neg(p(K))))).all()
        )
    return report


def _schema_params(rng: random.Random, schema: Schema) -> Dict[str, object]:
    if schema in (Schema.FIX_TANGLE, Schema.IND_TANGLE):
        size = rng.randint(1, 3)
        params: Dict[str, object] = {"P": list(range(1, size + 1))}
        if schema is Schema.IND_TANGLE:
            params["p"] = size + 1
        return params
    return {}


def _valid(model: DynModel, phi: Formula, memo: Dict) -> bool:
    return bool(eval_mask(model, phi, _memo=memo).all())


def verify_cont_soundness(
    N: int,
    K: int,
    sample_size: int = 200,
    seed: int = 42,
    schema_samples: int = 20,
) -> ExperimentReport:
    """
    D(N+1, K+1) validates the width-K depth-N system

    Args:
        N: Substituend depth bound for CONT^K
        K: CONT arity
        sample_size: Random CONT^K instances checked
        seed: Random seed
        schema_samples: Random instances checked per non-continuity schema

    Returns:
        ExperimentReport; failures name the invalid instances
    """
    report = ExperimentReport(
        "cont_soundness",
        "D(N+1,K+1) validates every axiom of the width-K depth-N system",
        {"N": N, "K": K, "samples": sample_size, "seed": seed},
    )
    with report.timed():
        model = gen_D(N + 1, K + 1)
        rng = random.Random(seed)
        memo: Dict = {}
        atoms = list(range(1, K + 2))
        invalid: List[str] = []

        def check(phi: Formula) -> None:
            report.checked += 1
            if not _valid(model, phi, memo):
                invalid.append(phi.text)

        check(cont(K))
        for images in itertools.product(atoms, repeat=K):
            check(substitute(cont(K), {i + 1: Atom(a) for i, a in enumerate(images)}))
        report.check("invalid atomic CONT instances", [], list(invalid))

        before = len(invalid)
        for _ in range(sample_size):
            sigma = {
                i: random_formula(rng, atoms, N, max_width=min(K + 1, 3), size=5)
                for i in range(1, K + 1)
            }
            check(substitute(cont(K), sigma))
        report.check("invalid sampled CONT instances", [], invalid[before:])

        before = len(invalid)
        for schema in NON_CONT_SCHEMAS:
            for _ in range(schema_samples):
                params = _schema_params(rng, schema)
                sigma = {i: random_formula(rng, atoms, 2, max_width=2, size=4) for i in range(1, 5)}
                check(instantiate_axiom(AxiomInstance(schema, params, sigma)))
        report.check("invalid instances of other schemas", [], invalid[before:])
        report.failures.extend(invalid)
    return report


def walkthrough_D22(sample_size: int = 50, seed: int = 42) -> ExperimentReport:
    """The worked example D(2,2): map values, bisimilar points and the CONT^2 failure"""
    report = ExperimentReport("walkthrough_D22", "the model D(2,2) in detail", {"seed": seed})
    with report.timed():
        model = gen_D(2, 2)
        fmap = model.fmap
        image = {x: model.points[fmap[model.index[x]]] for x in (c_point(1), c_point(2))}
        report.check("f(0.-1.2)", "0.0.1", image[c_point(2)])
        report.check("f(0.-1.1)", "1.0.2", image[c_point(1)])
        report.check(
            "continuity violations", [[c_point(2), c_point(1)]], [list(v) for v in continuity_check(model)]
        )

        table = compute_bisim(model, model, 1, UNBOUNDED)
        report.check_true("2.0.1 and 0.0.1 are rank-1 bisimilar", table.related("2.0.1", "0.0.1", 1))
        report.check_true("0.5.1 refutes <>p2", not eval_mask(model, diamond(p(2)))[model.index["0.5.1"]])

        refuted = model.names(~eval_mask(model, cont(2)))
        report.check("points refuting CONT^2", [c_point(1), c_point(2)], sorted(refuted))
        report.absorb(verify_cont_soundness(1, 1, sample_size, seed, schema_samples=5))
    return report


def verify_gallery_cell(N: int, K: int, m: Optional[int] = None) -> ExperimentReport:
    """All gallery lemmas for one (N, K), every m < N unless m is given"""
    report = ExperimentReport("gallery_cell", "gallery lemmas", {"N": N, "K": K})
    with report.timed():
        for rank in ([m] if m is not None else range(N)):
            report.absorb(verify_nkbis(N, K, rank), f"nkbis m={rank}")
            report.absorb(verify_bislemm(N, K, rank), f"bislemm m={rank}")
            report.absorb(verify_mainaxis(N, K, rank), f"mainaxis m={rank}")
        report.check("continuity violations in B", [], continuity_check(gen_B(N, K)))
        expected = sorted([c_point(j), c_point(K - 1)] for j in range(1, K + 1) if j != K - 1)
        observed = sorted(list(v) for v in continuity_check(gen_D(N, K)))
        report.check("continuity violations in D", expected, observed)
    return report
