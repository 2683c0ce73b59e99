"""
Command-line interface for dtlbench
"""

import argparse
import json
import logging
import os
import re
import sys
import time
from typing import Any, Callable, Dict, List, Optional

import yaml

from dtlbench import experiments
from dtlbench.bisimulation import compute_bisim
from dtlbench.config import Config, load_config
from dtlbench.derivations import derive_trouble
from dtlbench.formula import Formula, build_schema
from dtlbench.gallery import GalleryError, generate
from dtlbench.kernel import SystemDescriptor, check_derivation, derivation_to_dict, load_derivation
from dtlbench.oracle import definable_sets
from dtlbench.parser import parse
from dtlbench.report import ExperimentReport
from dtlbench.semantics import DynModel, dump_model, eval_mask, load_model_file, to_dot
from dtlbench.utils.format_utils import format_table, format_truth_table
from dtlbench.utils.seed_utils import derive_seed

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

_GALLERY_SPEC = re.compile(r"^([ABCD])\((\d+)(?:,\s*(\d+))?\)$")
_FAMILY_SPEC = re.compile(r"^([A-Za-z]+):(\d+)(?::(\d+))?$")


def setup_logging(level: str = "INFO", log_dir: Optional[str] = None) -> None:
    """Send logs to stderr, and to a timestamped file when log_dir is set"""
    root_logger = logging.getLogger()
    root_logger.setLevel(getattr(logging, level))
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root_logger.addHandler(console_handler)

    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
        log_file = os.path.join(log_dir, f"dtlbench_{time.strftime('%Y%m%d_%H%M%S')}.log")
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root_logger.addHandler(file_handler)
        logger.info(f"Logging to {log_file}")


def parse_cap(value: str) -> Optional[int]:
    """A width or depth cap: a natural number or 'unbounded'"""
    if value in ("unbounded", "*", "inf"):
        return None
    try:
        cap = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a natural number or 'unbounded', got {value!r}")
    if cap < 0:
        raise argparse.ArgumentTypeError(f"caps must be >= 0, got {cap}")
    return cap


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command-line arguments"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", help="Path to configuration file (YAML)", default=None)
    common.add_argument("--seed", help="Master random seed", type=int, default=None)
    common.add_argument("--json", help="Print machine-readable JSON", action="store_true")
    common.add_argument("--out", "-o", help="Write the output to this file", default=None)
    common.add_argument("--timing", help="Include elapsed time in reports", action="store_true")
    common.add_argument("--quiet", "-q", help="Only warnings, no progress bars", action="store_true")
    common.add_argument(
        "--log-level",
        "-l",
        help="Logging level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        default=None,
    )

    parser = argparse.ArgumentParser(
        description="dtlbench - dynamic topological logic workbench"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", parents=[common], help="Model-check a formula")
    check.add_argument("model", help="Model JSON file or gallery spec such as 'D(2,2)' or 'C(2)'")
    check.add_argument("formula", help="Formula text, or a family such as 'TROUBLE:2'")
    check.add_argument("--method", choices=["clusters", "gfp"], default=None)

    gen = commands.add_parser("gen", parents=[common], help="Export a gallery model")
    gen.add_argument("--family", choices=["A", "B", "C", "D"], required=True)
    gen.add_argument("--N", type=int, default=None)
    gen.add_argument("--K", type=int, required=True)
    gen.add_argument("--dot", help="Emit Graphviz DOT instead of JSON", action="store_true")

    bisim = commands.add_parser("bisim", parents=[common], help="Compute a bisimulation table")
    bisim.add_argument("left", help="Model JSON file or gallery spec")
    bisim.add_argument("right", help="Model JSON file or gallery spec")
    bisim.add_argument("--n", type=int, required=True, help="Maximal rank")
    bisim.add_argument("--k", type=parse_cap, default=None, help="Width bound or 'unbounded'")

    prove = commands.add_parser("prove", parents=[common], help="Compile a derivation")
    prove.add_argument("target", choices=["trouble"])
    prove.add_argument("--k", type=int, required=True)

    verify = commands.add_parser("verify", parents=[common], help="Check a derivation file")
    verify.add_argument("--derivation", required=True)
    verify.add_argument("--k", type=parse_cap, default=None, help="Width cap or 'unbounded'")
    verify.add_argument("--n", type=parse_cap, default=None, help="Depth cap or 'unbounded'")
    verify.add_argument("--km", help="Restrict every line to width 1", action="store_true")

    experiment = commands.add_parser("experiment", parents=[common], help="Run an experiment")
    experiment.add_argument(
        "name",
        choices=[
            "separation",
            "expressiveness",
            "hierarchy",
            "derivability",
            "tangle-oracle",
            "agreement",
            "gallery-grid",
            "kernel-integrity",
            "roundtrip",
            "walkthrough",
            "taut-agreement",
            "cont-hierarchy",
            "continuity-criterion",
        ],
    )
    experiment.add_argument("--k", type=int, default=1)
    experiment.add_argument("--n", type=int, default=2)
    experiment.add_argument("--k-max", type=int, default=2)
    experiment.add_argument("--n-max", type=int, default=3)
    experiment.add_argument("--N-max", type=int, default=3)

    oracle = commands.add_parser("oracle", parents=[common], help="Definable-set oracle")
    oracle.add_argument("query", choices=["width-definable"])
    oracle.add_argument("model", help="Static model JSON file or gallery spec such as 'A(3,2)'")
    oracle.add_argument("--atoms", default="1,2", help="Comma-separated atom indices")
    oracle.add_argument("--width", type=int, default=1)
    oracle.add_argument("--depth", type=int, default=2)
    oracle.add_argument("--formula", default=None, help="Ask whether this formula's extension is definable")

    commands.add_parser("selftest", parents=[common], help="Run every invariant suite")

    return parser.parse_args(argv)


def resolve_model(spec: str, config: Config) -> DynModel:
    match = _GALLERY_SPEC.match(spec.strip())
    if match and not os.path.exists(spec):
        family, first, second = match.groups()
        if family == "C":
            if second is not None:
                raise GalleryError("C takes only K, as in 'C(2)'")
            return generate("C", None, int(first))
        if second is None:
            raise GalleryError(f"{family} needs N and K, as in '{family}(2,2)'")
        return generate(family, int(first), int(second))
    return load_model_file(spec, cluster_warn_threshold=config.semantics.cluster_warn_threshold)


def resolve_formula(text: str) -> Formula:
    match = _FAMILY_SPEC.match(text.strip())
    if match:
        name, k, i = match.groups()
        return build_schema(name, int(k), int(i) if i else None)
    return parse(text)


def _emit(args: argparse.Namespace, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text if text.endswith("\n") else text + "\n")
        logger.info(f"Wrote {args.out}")
    else:
        print(text)


def _emit_reports(args: argparse.Namespace, reports: List[ExperimentReport]) -> int:
    if args.json or args.out:
        documents = [r.to_dict(include_timing=args.timing) for r in reports]
        payload = documents[0] if len(documents) == 1 else documents
        _emit(args, json.dumps(payload, indent=2))
    else:
        for report in reports:
            print(report.summary())
            for a in report.assertions:
                if not a.passed:
                    print(f"  FAILED {a.description}: expected {a.expected}, observed {a.observed}")
    return 0 if all(r.passed for r in reports) else 1


def cmd_check(args: argparse.Namespace, config: Config) -> int:
    model = resolve_model(args.model, config)
    phi = resolve_formula(args.formula)
    mask = eval_mask(model, phi, method=args.method or config.semantics.tangle_method)
    witness = next((x for i, x in enumerate(model.points) if not mask[i]), None)
    valid = witness is None
    if args.json or args.out:
        _emit(
            args,
            json.dumps(
                {
                    "model": model.name,
                    "formula": phi.text,
                    "table": {x: bool(mask[i]) for i, x in enumerate(model.points)},
                    "valid": valid,
                    "witness": witness,
                },
                indent=2,
            ),
        )
    else:
        print(format_truth_table([(x, bool(mask[i])) for i, x in enumerate(model.points)]))
        print(f"{phi.text} is {'valid' if valid else 'refuted at ' + witness} on {model.name}")
    return 0 if valid else 1


def cmd_gen(args: argparse.Namespace, config: Config) -> int:
    model = generate(args.family, args.N, args.K)
    _emit(args, to_dot(model) if args.dot else json.dumps(dump_model(model), indent=2))
    return 0


def cmd_bisim(args: argparse.Namespace, config: Config) -> int:
    left = resolve_model(args.left, config)
    right = resolve_model(args.right, config)
    table = compute_bisim(left, right, args.n, args.k)
    if args.json or args.out:
        _emit(args, json.dumps(table.to_dict(), indent=2))
    else:
        rows = [(m, len(table.pairs(m))) for m in range(len(table.levels))]
        print(format_table(["rank", "pairs"], rows))
    return 0


def cmd_prove(args: argparse.Namespace, config: Config) -> int:
    derivation = derive_trouble(args.k)
    _emit(args, json.dumps(derivation_to_dict(derivation), indent=2))
    return 0


def cmd_verify(args: argparse.Namespace, config: Config) -> int:
    derivation = load_derivation(args.derivation)
    system = SystemDescriptor(args.k, args.n, args.km)
    verdict = check_derivation(derivation, system, config.kernel.taut_max_atoms)
    if args.json or args.out:
        _emit(args, json.dumps({"system": system.to_dict(), **verdict.to_dict()}, indent=2))
    elif verdict.accepted:
        print(f"accepted under {system.label} ({len(derivation)} lines)")
    else:
        print(f"rejected under {system.label} at line {verdict.line} [{verdict.reason}]: {verdict.message}")
    return 0 if verdict.accepted else 1


def cmd_experiment(args: argparse.Namespace, config: Config) -> int:
    s = config.sampling
    seed = config.random_seed
    budgets = {
        "point_budget": s.point_budget,
        "cluster_budget": s.cluster_budget,
        "atom_budget": s.atom_budget,
    }
    progress = config.progress and not args.quiet
    runners: Dict[str, Callable[[], ExperimentReport]] = {
        "separation": lambda: experiments.separation(
            args.k, args.n, derive_seed(seed, f"separation-{args.k}-{args.n}"), s.cont_samples, s.schema_samples
        ),
        "expressiveness": lambda: experiments.expressiveness(
            args.k, args.n, config.oracle.max_points, config.oracle.max_family_size
        ),
        "hierarchy": lambda: experiments.hierarchy(
            args.k_max, args.n_max, seed, s.cont_samples, s.schema_samples, config.max_workers, progress
        ),
        "derivability": lambda: experiments.derivability(),
        "tangle-oracle": lambda: experiments.tangle_oracle(s.preorder_families, seed),
        "agreement": lambda: experiments.agreement(
            s.agreement_trials, s.agreement_formulas, seed, **budgets
        ),
        "gallery-grid": lambda: experiments.gallery_grid(
            args.N_max, max_workers=config.max_workers, progress=progress
        ),
        "kernel-integrity": lambda: experiments.kernel_integrity(
            s.mutation_count, s.audit_models, seed, **budgets
        ),
        "roundtrip": lambda: experiments.roundtrip(s.roundtrip_formulas, seed),
        "walkthrough": lambda: experiments.walkthrough_D22(seed=seed),
        "taut-agreement": lambda: experiments.taut_agreement(seed=seed),
        "cont-hierarchy": lambda: experiments.cont_hierarchy(args.k_max, seed=seed),
        "continuity-criterion": lambda: experiments.continuity_criterion(s.criterion_max_size, seed=seed),
    }
    logger.info(f"Running experiment {args.name}")
    return _emit_reports(args, [runners[args.name]()])


def cmd_oracle(args: argparse.Namespace, config: Config) -> int:
    model = resolve_model(args.model, config)
    atoms = [int(a) for a in args.atoms.split(",") if a.strip()]
    sets = definable_sets(
        model,
        atoms,
        args.width,
        args.depth,
        max_points=config.oracle.max_points,
        max_family_size=config.oracle.max_family_size,
    )
    result: Dict[str, Any] = {
        "model": model.name,
        "atoms": atoms,
        "width": args.width,
        "depth": args.depth,
        "blocks": [sets.block_count(d) for d in range(sets.depth + 1)],
        "sizes": [sets.size(d) for d in range(sets.depth + 1)],
    }
    if args.formula:
        phi = resolve_formula(args.formula)
        result["formula"] = phi.text
        result["definable"] = sets.contains(eval_mask(model, phi), args.depth)
    if args.json or args.out:
        _emit(args, json.dumps(result, indent=2))
    else:
        print(format_table(["depth", "blocks", "sets"], zip(range(sets.depth + 1), result["blocks"], result["sizes"])))
        if "definable" in result:
            print(f"{result['formula']} {'is' if result['definable'] else 'is not'} in D_{args.depth}")
    return 0


def cmd_selftest(args: argparse.Namespace, config: Config) -> int:
    return _emit_reports(args, experiments.selftest(config))


COMMANDS = {
    "check": cmd_check,
    "gen": cmd_gen,
    "bisim": cmd_bisim,
    "prove": cmd_prove,
    "verify": cmd_verify,
    "experiment": cmd_experiment,
    "oracle": cmd_oracle,
    "selftest": cmd_selftest,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main entry point

    Returns:
        Exit code: 0 pass or accept, 1 refuted or rejected, 2 usage or input error
    """
    try:
        args = parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2

    try:
        config = load_config(args.config)
    except (OSError, ValueError, TypeError, yaml.YAMLError) as e:
        print(f"Error: could not load configuration: {e}", file=sys.stderr)
        return 2
    if args.seed is not None:
        config.random_seed = args.seed
    if args.quiet:
        config.progress = False
    level = args.log_level or ("WARNING" if args.quiet else config.log_level)
    setup_logging(level, config.log_dir)

    try:
        return COMMANDS[args.command](args, config)
    except (ValueError, OSError, yaml.YAMLError) as e:
        logger.debug(f"{args.command} failed", exc_info=True)
        print(f"Error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
