"""
Reproducible experiments built from the gallery, the bisimulation engine and the kernel
"""

import itertools
import logging
import random
from typing import Dict, List, Optional, Sequence

import numpy as np

from dtlbench.bisimulation import check_agreement, compute_bisim
from dtlbench.config import Config
from dtlbench.derivations import derive_trouble, milestone_lines, mutate_line, template_derivation
from dtlbench.formula import (
    And,
    Atom,
    Formula,
    Not,
    atoms,
    conj,
    cont,
    depth,
    eta,
    neg,
    p,
    substitute,
    trouble,
)
from dtlbench.gallery import (
    enumerate_preorders,
    gen_A,
    gen_D,
    gen_random_model,
    random_formula,
)
from dtlbench.kernel import (
    UNBOUNDED_SYSTEM,
    Schema,
    SystemDescriptor,
    audit_soundness,
    check_derivation,
    is_tautology,
)
from dtlbench.oracle import DEFAULT_MAX_FAMILY_SIZE, DEFAULT_MAX_POINTS, definable_sets
from dtlbench.parser import parse
from dtlbench.report import ExperimentReport
from dtlbench.semantics import (
    DynModel,
    continuity_check,
    eval_mask,
    preimages_are_open,
    tangled_clusters_mask,
    tangled_gfp_mask,
)
from dtlbench.utils.async_utils import run_cells
from dtlbench.utils.seed_utils import derive_seed
from dtlbench.verification import (
    c_point,
    verify_cont_soundness,
    verify_gallery_cell,
    verify_trouble_fails,
    walkthrough_D22,
)

logger = logging.getLogger(__name__)

# labeled preorders on 1..4 points
PREORDER_COUNTS = (1, 4, 29, 355)


def _cont_lines(derivation) -> List[int]:
    return [
        i
        for i, line in enumerate(derivation.lines)
        if line.justification.kind == "axiom" and line.justification.axiom.schema is Schema.CONT
    ]


def derivability(ks: Sequence[int] = (1, 2, 3, 4)) -> ExperimentReport:
    """Trouble^k is derivable with width k and depth 2, and not with width k-1"""
    report = ExperimentReport("derivability", "Trouble^k is derivable in DTL^k", {"k": list(ks)})
    with report.timed():
        for k in ks:
            d = derive_trouble(k)
            report.checked += len(d)
            report.check(f"k={k}: last line", trouble(k).text, d.conclusion.text)
            verdict = check_derivation(d, SystemDescriptor(k, 2))
            report.check_true(f"k={k}: accepted with width {k}, depth 2", verdict.accepted)
            report.check_true(
                f"k={k}: accepted with width {k + 1}, depth 3",
                check_derivation(d, SystemDescriptor(k + 1, 3)).accepted,
            )
            lines = milestone_lines(d, k)
            report.check_true(
                f"k={k}: milestones present in order",
                min(lines) >= 0 and lines == sorted(lines),
            )
            cont_lines = _cont_lines(d)
            depths = sorted(
                {depth(phi) for i in cont_lines for phi in d.lines[i].justification.axiom.subst.values()}
            )
            report.check(f"k={k}: CONT substituend depths", [2], depths)
            if k >= 2:
                weaker = check_derivation(d, SystemDescriptor(k - 1, None))
                report.check(
                    f"k={k}: rejected with width {k - 1}",
                    {"accepted": False, "line": cont_lines[0], "reason": "cont_width"},
                    {"accepted": weaker.accepted, "line": weaker.line, "reason": weaker.reason},
                )
    return report


def separation(
    k: int, n: int, seed: int = 42, cont_samples: int = 200, schema_samples: int = 20
) -> ExperimentReport:
    """
    Separate DTL^{k+1} from DTL^k_n on the model D(n+1, k+1)

    Args:
        k: Width of the weaker system, >= 1
        n: Depth of the weaker system, >= 2
        seed: Random seed for the sampled soundness checks
        cont_samples: Number of sampled CONT^k instances
        schema_samples: Sampled instances per other schema

    Returns:
        ExperimentReport
    """
    if k < 1 or n < 2:
        raise ValueError(f"separation needs k >= 1 and n >= 2, got k={k}, n={n}")
    report = ExperimentReport(
        "separation",
        "Trouble^{k+1} is derivable in DTL^{k+1} but not in DTL^k_n",
        {"k": k, "n": n, "seed": seed},
    )
    with report.timed():
        stronger = derive_trouble(k + 1)
        report.check_true(
            f"Trouble^{k + 1} accepted with width {k + 1}, depth 2",
            check_derivation(stronger, SystemDescriptor(k + 1, 2)).accepted,
        )
        report.check(
            f"Trouble^{k + 1} derivation rejected with width {k}",
            "cont_width",
            check_derivation(stronger, SystemDescriptor(k, n)).reason,
        )
        report.absorb(verify_trouble_fails(n + 1, k + 1))

        model = gen_D(n + 1, k + 1)
        report.absorb(audit_soundness(derive_trouble(k), model, SystemDescriptor(k, n)))
        report.absorb(
            verify_cont_soundness(n, k, cont_samples, derive_seed(seed, f"cont-{k}-{n}"), schema_samples)
        )
        refuted = model.names(~eval_mask(model, cont(k + 1)))
        report.check(
            f"canonical CONT^{k + 1} refuted exactly on the C-points",
            sorted(c_point(i) for i in range(1, k + 2)),
            sorted(refuted),
        )
    logger.info(report.summary())
    return report


def expressiveness(
    k: int,
    n: int,
    max_points: int = DEFAULT_MAX_POINTS,
    max_family_size: int = DEFAULT_MAX_FAMILY_SIZE,
) -> ExperimentReport:
    """Width k+1 separates points of A(n+1, k+1) that width k cannot"""
    if k < 1 or n < 1:
        raise ValueError(f"expressiveness needs k >= 1 and n >= 1, got k={k}, n={n}")
    report = ExperimentReport(
        "expressiveness", "L^{k+1} is strictly more expressive than L^k", {"k": k, "n": n}
    )
    with report.timed():
        model = gen_A(n + 1, k + 1)
        x, y = "0.2", "1.2"
        table = compute_bisim(model, model, n, k + 1)
        report.check_true(f"{x} and {y} are rank-{n} width-{k + 1} bisimilar", table.related(x, y, n))
        report.check_true("rank relations shrink", table.is_rank_monotone())
        separator = eval_mask(model, eta(k))
        report.check(
            f"eta^{k} at ({x}, {y})", [True, False], [bool(separator[model.index[z]]) for z in (x, y)]
        )
        if k == 1:
            sets = definable_sets(
                model, [1, 2], 1, n, max_points=max_points, max_family_size=max_family_size
            )
            report.checked = sets.size(n)
            report.check_true(f"eta^1 extension outside D_{n}", not sets.contains(separator, n))
            report.check_true(f"D_{n} never separates {x} from {y}", sets.same_block(x, y, n))
            report.check_true(
                "definable sets grow with depth",
                all(sets.block_count(d) <= sets.block_count(d + 1) for d in range(n)),
            )
    logger.info(report.summary())
    return report


def hierarchy(
    k_max: int = 2,
    n_max: int = 3,
    seed: int = 42,
    cont_samples: int = 200,
    schema_samples: int = 20,
    max_workers: int = 1,
    progress: bool = False,
) -> ExperimentReport:
    """The strict chain DTL^1 < DTL^2 < ... as a grid of separation cells"""
    cells = [
        (k, n, derive_seed(seed, f"separation-{k}-{n}"), cont_samples, schema_samples)
        for k in range(1, k_max + 1)
        for n in range(2, n_max + 1)
    ]
    report = ExperimentReport(
        "hierarchy", "the width hierarchy is strict", {"k_max": k_max, "n_max": n_max, "seed": seed}
    )
    with report.timed():
        for cell, result in zip(cells, run_cells(separation, cells, max_workers, progress, "separation")):
            report.absorb(result, f"k={cell[0]},n={cell[1]}")
    return report


def tangle_oracle(families: int = 20, seed: int = 42, max_size: int = 4) -> ExperimentReport:
    """Cluster and fixpoint computations of the tangled closure agree on small preorders"""
    report = ExperimentReport(
        "tangle_oracle",
        "tangled closure via clusters equals the greatest fixpoint",
        {"families": families, "seed": seed, "max_size": max_size},
    )
    with report.timed():
        models = 0
        for size in range(1, max_size + 1):
            for number, model in enumerate(enumerate_preorders(size)):
                models += 1
                rng = random.Random(derive_seed(seed, f"preorder-{size}-{number}"))
                for _ in range(families):
                    family = [
                        np.array([rng.random() < 0.5 for _ in range(size)])
                        for _ in range(rng.randint(1, 3))
                    ]
                    report.checked += 1
                    a = tangled_clusters_mask(model, family)
                    b = tangled_gfp_mask(model, family)
                    if not np.array_equal(a, b):
                        report.fail(
                            {"size": size, "leq": model.leq.tolist(), "family": [f.tolist() for f in family]}
                        )
        report.check(f"labeled preorders with at most {max_size} points", sum(PREORDER_COUNTS[:max_size]), models)
        report.check("mismatches", 0, len(report.failures))
    return report


def agreement(
    trials: int = 300,
    formulas_per_trial: int = 20,
    seed: int = 42,
    point_budget: int = 6,
    cluster_budget: int = 3,
    atom_budget: int = 2,
) -> ExperimentReport:
    """Bisimilar points agree on every formula within the relation's depth and width"""
    report = ExperimentReport(
        "agreement",
        "bounded bisimulations preserve bounded formulas",
        {"trials": trials, "formulas": formulas_per_trial, "seed": seed},
    )
    with report.timed():
        monotone = True
        for trial in range(trials):
            rng = random.Random(derive_seed(seed, f"agreement-{trial}"))
            n, k = rng.randint(0, 3), rng.randint(1, 3)
            left = gen_random_model(
                rng.randrange(2**31), point_budget, cluster_budget, atom_budget, rng.random() < 0.5
            )
            right = left
            if rng.random() < 0.7:
                right = gen_random_model(
                    rng.randrange(2**31), point_budget, cluster_budget, atom_budget, rng.random() < 0.5
                )
            table = compute_bisim(left, right, n, k)
            monotone = monotone and table.is_rank_monotone()
            formulas = [
                random_formula(
                    rng, range(1, atom_budget + 1), n, max_width=k - 1, size=rng.randint(1, 8)
                )
                for _ in range(formulas_per_trial)
            ]
            result = check_agreement(table, formulas)
            report.checked += result.checked
            report.failures.extend(
                {"trial": trial, "formula": f, "left": x, "right": y}
                for f, x, y in result.disagreements
            )
        report.check("disagreeing related pairs", 0, len(report.failures))
        report.check_true("every table is rank monotone", monotone)
    return report


def gallery_grid(
    N_max: int = 3, Ks: Sequence[int] = (2, 3), max_workers: int = 1, progress: bool = False
) -> ExperimentReport:
    """The gallery lemmas on every (N, K, m) with N <= N_max and m < N"""
    cells = [(N, K) for N in range(1, N_max + 1) for K in Ks]
    report = ExperimentReport("gallery_grid", "gallery lemmas", {"N_max": N_max, "K": list(Ks)})
    with report.timed():
        for cell, result in zip(cells, run_cells(verify_gallery_cell, cells, max_workers, progress, "gallery")):
            report.absorb(result, f"N={cell[0]},K={cell[1]}")
    return report


def kernel_integrity(
    mutations: int = 100,
    audit_models: int = 50,
    seed: int = 42,
    point_budget: int = 6,
    cluster_budget: int = 3,
    atom_budget: int = 2,
    templates: int = 10,
) -> ExperimentReport:
    """Mutated derivations are rejected and accepted ones are valid on continuous models"""
    report = ExperimentReport(
        "kernel_integrity",
        "the kernel rejects tampering and accepts only valid lines",
        {"mutations": mutations, "audit_models": audit_models, "templates": templates, "seed": seed},
    )
    with report.timed():
        original = derive_trouble(2)
        system = SystemDescriptor(2, 2)
        escaped = []
        for i in range(mutations):
            mutant, index = mutate_line(original, derive_seed(seed, f"mutation-{i}"))
            verdict = check_derivation(mutant, system)
            report.checked += 1
            if verdict.accepted or verdict.line != index:
                escaped.append({"mutation": i, "line": index, "verdict": verdict.to_dict()})
        report.check("mutations not rejected at the changed line", [], escaped)

        derivations = {f"trouble-{k}": derive_trouble(k) for k in (1, 2, 3)}
        for i in range(templates):
            derivations[f"template-{i}"] = template_derivation(derive_seed(seed, f"template-{i}"))
        rejected = [
            name for name, d in derivations.items() if not check_derivation(d, UNBOUNDED_SYSTEM).accepted
        ]
        report.check("audited derivations rejected by the unbounded system", [], rejected)

        discontinuous = []
        for i in range(audit_models):
            model = gen_random_model(
                derive_seed(seed, f"audit-{i}"), point_budget, cluster_budget, max(atom_budget, 4), True
            )
            if continuity_check(model):
                discontinuous.append(model.name)
            for name, d in derivations.items():
                audit = audit_soundness(d, model, UNBOUNDED_SYSTEM)
                report.checked += audit.checked
                if not audit.passed:
                    report.fail({"derivation": name, "model": model.name, "lines": audit.failures})
        report.check("random models with a discontinuous map", [], discontinuous)
        report.check("audits with invalid lines", 0, len(report.failures))
    return report


def roundtrip(count: int = 1000, seed: int = 42) -> ExperimentReport:
    """Printing then parsing gives back the same formula"""
    report = ExperimentReport("roundtrip", "parse inverts the printer", {"count": count, "seed": seed})
    with report.timed():
        rng = random.Random(derive_seed(seed, "roundtrip"))
        for _ in range(count):
            phi = random_formula(rng, [1, 2, 3], 4, max_width=3, size=rng.randint(1, 14))
            report.checked += 1
            if parse(phi.text) != phi:
                report.fail(phi.text)
        report.check("formulas that do not round-trip", [], report.failures)
    return report


def _brute_force_tautology(phi: Formula) -> bool:
    indices = sorted(atoms(phi))

    def value(node: Formula, row: Dict[int, bool]) -> bool:
        if isinstance(node, Atom):
            return row[node.index]
        if isinstance(node, Not):
            return not value(node.child, row)
        if isinstance(node, And):
            return value(node.left, row) and value(node.right, row)
        raise ValueError(f"Not propositional: {node}")

    return all(
        value(phi, dict(zip(indices, bits)))
        for bits in itertools.product([False, True], repeat=len(indices))
    )


def taut_agreement(count: int = 500, seed: int = 42) -> ExperimentReport:
    """The kernel's tautology check against a row-by-row evaluation"""
    report = ExperimentReport("taut_agreement", "TAUT recognition is exact", {"count": count, "seed": seed})
    with report.timed():
        rng = random.Random(derive_seed(seed, "taut"))
        for _ in range(count):
            phi = random_formula(rng, [1, 2, 3], 0, max_width=0, temporal=False, size=rng.randint(1, 8))
            if rng.random() < 0.3:
                # excluded middle
                phi = neg(conj(neg(phi), phi))
            report.checked += 1
            if is_tautology(phi) != _brute_force_tautology(phi):
                report.fail(phi.text)
        report.check("disagreements", [], report.failures)
    return report


def cont_hierarchy(k_max: int = 4, models: int = 10, seed: int = 42) -> ExperimentReport:
    """CONT^{k+1} with p_{k+1} replaced by p_k is CONT^k"""
    report = ExperimentReport("cont_hierarchy", "CONT^{k+1} entails CONT^k", {"k_max": k_max, "seed": seed})
    with report.timed():
        for k in range(1, k_max + 1):
            collapsed = substitute(cont(k + 1), {k + 1: p(k)})
            report.check(f"k={k}: collapsed CONT^{k + 1}", cont(k).text, collapsed.text)
            for i in range(models):
                model = gen_random_model(derive_seed(seed, f"cont-{k}-{i}"), 5, 3, k + 1, False)
                report.checked += 1
                if not np.array_equal(eval_mask(model, collapsed), eval_mask(model, cont(k))):
                    report.fail({"k": k, "model": model.name})
        report.check("models telling the instances apart", [], report.failures)
    return report


def continuity_criterion(max_size: int = 4, samples: int = 50, seed: int = 42) -> ExperimentReport:
    """The pointwise continuity check agrees with preimages of open sets being open"""
    report = ExperimentReport(
        "continuity_criterion",
        "continuity_check is empty iff every preimage of a downset is a downset",
        {"max_size": max_size, "samples": samples, "seed": seed},
    )
    with report.timed():
        verdicts = {True: 0, False: 0}

        def compare(model: DynModel) -> None:
            pointwise = not continuity_check(model)
            report.checked += 1
            verdicts[pointwise] += 1
            if pointwise != preimages_are_open(model):
                report.fail({"leq": model.leq.tolist(), "f": model.fmap.tolist(), "pointwise": pointwise})

        for size in range(1, max_size + 1):
            for number, base in enumerate(enumerate_preorders(size)):
                for fmap in itertools.product(range(size), repeat=size):
                    compare(DynModel(base.points, base.leq, np.array(fmap), name=f"preorder-{size}-{number}"))
        expected = sum(count * n**n for n, count in enumerate(PREORDER_COUNTS[:max_size], start=1))
        report.check(f"maps on preorders with at most {max_size} points", expected, report.checked)
        for i in range(samples):
            compare(gen_random_model(derive_seed(seed, f"criterion-{i}"), 5, 5, 1, continuous=i % 2 == 0))
        report.check_true("continuous maps seen", verdicts[True] > 0)
        report.check_true("discontinuous maps seen", verdicts[False] > 0)
        report.check("disagreements", 0, len(report.failures))
    return report


def selftest(config: Optional[Config] = None) -> List[ExperimentReport]:
    """Every invariant suite with the configured sample sizes"""
    config = config or Config()
    s = config.sampling
    seed = config.random_seed
    budgets = {
        "point_budget": s.point_budget,
        "cluster_budget": s.cluster_budget,
        "atom_budget": s.atom_budget,
    }
    suites = [
        lambda: derivability(),
        lambda: roundtrip(s.roundtrip_formulas, seed),
        lambda: taut_agreement(seed=seed),
        lambda: tangle_oracle(s.preorder_families, seed),
        lambda: agreement(s.agreement_trials, s.agreement_formulas, seed, **budgets),
        lambda: gallery_grid(max_workers=config.max_workers, progress=config.progress),
        lambda: kernel_integrity(s.mutation_count, s.audit_models, seed, **budgets),
        lambda: cont_hierarchy(seed=seed),
        lambda: continuity_criterion(s.criterion_max_size, seed=seed),
        lambda: walkthrough_D22(seed=seed),
        lambda: expressiveness(1, 2, config.oracle.max_points, config.oracle.max_family_size),
        lambda: separation(1, 2, seed, s.cont_samples, s.schema_samples),
    ]
    reports = []
    for suite in suites:
        report = suite()
        logger.info(report.summary())
        reports.append(report)
    return reports
