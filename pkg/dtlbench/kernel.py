"""
Hilbert-style derivation kernel for the stratified systems DTL^k_n

The kernel trusts only primitive steps: axiom instances (substitution applied directly
to an axiom), modus ponens, and necessitation for box, next and henceforth.
"""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from dtlbench.formula import (
    And,
    Atom,
    Formula,
    FormulaError,
    Hence,
    Next,
    Not,
    atoms,
    big_and,
    box,
    conj,
    cont,
    depth,
    diamond,
    iff,
    implies,
    is_propositional,
    neg,
    split_implies,
    substitute,
    tangle,
    width,
)
from dtlbench.parser import parse
from dtlbench.report import ExperimentReport
from dtlbench.semantics import DynModel, eval_mask

logger = logging.getLogger(__name__)

DEFAULT_TAUT_MAX_ATOMS = 16


class KernelError(ValueError):
    """Raised for malformed axiom instances and undecodable derivation documents"""


class Schema(str, Enum):
    TAUT = "TAUT"
    K = "K"
    T = "T"
    FOUR = "FOUR"
    FIX_TANGLE = "FIX_TANGLE"
    IND_TANGLE = "IND_TANGLE"
    NEG_NEXT = "NEG_NEXT"
    AND_NEXT = "AND_NEXT"
    FIX_HENCE = "FIX_HENCE"
    IND_HENCE = "IND_HENCE"
    K_HENCE = "K_HENCE"
    CONT = "CONT"


class NecOp(str, Enum):
    BOX = "box"
    NEXT = "next"
    HENCE = "hence"


@dataclass(frozen=True)
class SystemDescriptor:
    """
    A proof system: DTL^k_n with k = width_cap and n = depth_cap

    ``None`` means unbounded; width_cap 0 is the system without any continuity axiom.
    ``km`` additionally restricts every line to width at most one.
    """

    width_cap: Optional[int] = None
    depth_cap: Optional[int] = None
    km: bool = False

    def __post_init__(self) -> None:
        if self.width_cap is not None and self.width_cap < 0:
            raise KernelError(f"width_cap must be >= 0 or unbounded, got {self.width_cap}")
        if self.depth_cap is not None and self.depth_cap < 0:
            raise KernelError(f"depth_cap must be >= 0 or unbounded, got {self.depth_cap}")

    @property
    def label(self) -> str:
        k = "*" if self.width_cap is None else str(self.width_cap)
        n = "" if self.depth_cap is None else f"_{self.depth_cap}"
        return f"{'KM/' if self.km else ''}DTL^{k}{n}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": "unbounded" if self.width_cap is None else self.width_cap,
            "n": "unbounded" if self.depth_cap is None else self.depth_cap,
            "km": self.km,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SystemDescriptor":
        def cap(value: Any) -> Optional[int]:
            return None if value in (None, "unbounded") else int(value)

        return cls(cap(data.get("k")), cap(data.get("n")), bool(data.get("km", False)))


UNBOUNDED_SYSTEM = SystemDescriptor()


# Axiom schemas


@dataclass
class AxiomInstance:
    """A schema, its parameters, and the substitution applied to it"""

    schema: Schema
    params: Dict[str, Any] = field(default_factory=dict)
    subst: Dict[int, Formula] = field(default_factory=dict)

    @property
    def arity(self) -> int:
        return int(self.params.get("k", 0))


def _atom_list(values: Any, what: str) -> List[int]:
    try:
        result = [int(v) for v in values]
    except (TypeError, ValueError):
        raise KernelError(f"{what} must be a list of atom indices")
    if not result:
        raise KernelError(f"{what} must be nonempty")
    if len(set(result)) != len(result) or min(result) < 1:
        raise KernelError(f"{what} must list distinct positive atom indices, got {result}")
    return result


def base_formula(inst: AxiomInstance, taut_max_atoms: int = DEFAULT_TAUT_MAX_ATOMS) -> Formula:
    """The schema's display formula before substitution"""
    p1, p2 = Atom(1), Atom(2)
    schema = Schema(inst.schema)
    if schema is Schema.TAUT:
        base = inst.params.get("base")
        if not isinstance(base, Formula):
            raise KernelError("TAUT needs an explicit base formula")
        if not is_propositional(base):
            raise KernelError(f"TAUT base is not propositional: {base}")
        if not is_tautology(base, taut_max_atoms):
            raise KernelError(f"TAUT base is not a tautology: {base}")
        return base
    if schema is Schema.K:
        return implies(box(implies(p1, p2)), implies(box(p1), box(p2)))
    if schema is Schema.T:
        return implies(box(p1), p1)
    if schema is Schema.FOUR:
        return implies(box(p1), box(box(p1)))
    if schema is Schema.FIX_TANGLE:
        P = [Atom(i) for i in _atom_list(inst.params.get("P"), "P")]
        return implies(tangle(P), big_and(diamond(conj(q, tangle(P))) for q in P))
    if schema is Schema.IND_TANGLE:
        indices = _atom_list(inst.params.get("P"), "P")
        if "p" not in inst.params:
            raise KernelError("IND_TANGLE needs the atom p")
        p = Atom(int(inst.params["p"]))
        if p.index in indices:
            raise KernelError("IND_TANGLE atom p must not occur in P")
        P = [Atom(i) for i in indices]
        return implies(
            box(big_and(implies(p, diamond(conj(q, p))) for q in P)), implies(p, tangle(P))
        )
    if schema is Schema.NEG_NEXT:
        return iff(neg(Next(p1)), Next(neg(p1)))
    if schema is Schema.AND_NEXT:
        return iff(Next(conj(p1, p2)), conj(Next(p1), Next(p2)))
    if schema is Schema.FIX_HENCE:
        return implies(Hence(p1), conj(p1, Next(Hence(p1))))
    if schema is Schema.IND_HENCE:
        return implies(Hence(implies(p1, Next(p1))), implies(p1, Hence(p1)))
    if schema is Schema.K_HENCE:
        return implies(Hence(implies(p1, p2)), implies(Hence(p1), Hence(p2)))
    if schema is Schema.CONT:
        if inst.arity < 1:
            raise KernelError(f"CONT arity must be at least 1, got {inst.params.get('k')}")
        return cont(inst.arity)
    raise KernelError(f"Unknown schema {inst.schema!r}")


def instantiate_axiom(inst: AxiomInstance, taut_max_atoms: int = DEFAULT_TAUT_MAX_ATOMS) -> Formula:
    """Apply the instance's substitution to its schema's base formula"""
    try:
        return substitute(base_formula(inst, taut_max_atoms), inst.subst)
    except FormulaError as e:
        raise KernelError(str(e))


# Propositional reasoning


def is_tautology(phi: Formula, max_atoms: int = DEFAULT_TAUT_MAX_ATOMS) -> bool:
    """Truth-table decision for a propositional formula"""
    indices = sorted(atoms(phi))
    if len(indices) > max_atoms:
        raise KernelError(f"Tautology check limited to {max_atoms} atoms, got {len(indices)}")
    rows = np.arange(2 ** len(indices))
    columns = {a: ((rows >> bit) & 1).astype(bool) for bit, a in enumerate(indices)}

    def value(node: Formula) -> np.ndarray:
        if isinstance(node, Atom):
            return columns[node.index]
        if isinstance(node, Not):
            return ~value(node.child)
        if isinstance(node, And):
            return value(node.left) & value(node.right)
        raise KernelError(f"Not propositional: {node}")

    return bool(value(phi).all())


def skeleton(phi: Formula) -> Tuple[Formula, Dict[int, Formula]]:
    """
    Abstract maximal non-Boolean subformulas into fresh atoms

    Returns:
        (base, sigma) with base propositional and substitute(base, sigma) == phi
    """
    fresh: Dict[Formula, int] = {}

    def walk(node: Formula) -> Formula:
        if isinstance(node, Not):
            return neg(walk(node.child))
        if isinstance(node, And):
            return And(walk(node.left), walk(node.right))
        if node not in fresh:
            fresh[node] = len(fresh) + 1
        return Atom(fresh[node])

    base = walk(phi)
    return base, {index: node for node, index in fresh.items()}


# Derivations


@dataclass(frozen=True)
class Justification:
    kind: str
    axiom: Optional[AxiomInstance] = None
    premises: Tuple[int, ...] = ()
    op: Optional[NecOp] = None

    @classmethod
    def from_axiom(cls, inst: AxiomInstance) -> "Justification":
        return cls("axiom", axiom=inst)

    @classmethod
    def modus_ponens(cls, premise: int, implication: int) -> "Justification":
        return cls("mp", premises=(premise, implication))

    @classmethod
    def necessitation(cls, op: NecOp, premise: int) -> "Justification":
        return cls("nec", premises=(premise,), op=NecOp(op))


@dataclass
class Line:
    formula: Formula
    justification: Justification


@dataclass
class Derivation:
    lines: List[Line] = field(default_factory=list)
    system: Optional[SystemDescriptor] = None

    def __len__(self) -> int:
        return len(self.lines)

    @property
    def conclusion(self) -> Optional[Formula]:
        return self.lines[-1].formula if self.lines else None

    def index_of(self, phi: Formula) -> int:
        for i, line in enumerate(self.lines):
            if line.formula == phi:
                return i
        return -1


@dataclass
class Verdict:
    accepted: bool
    line: Optional[int] = None
    reason: Optional[str] = None
    message: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "accepted": self.accepted,
            "line": self.line,
            "reason": self.reason,
            "message": self.message,
        }


def necessitate(op: NecOp, phi: Formula) -> Formula:
    op = NecOp(op)
    if op is NecOp.BOX:
        return box(phi)
    if op is NecOp.NEXT:
        return Next(phi)
    return Hence(phi)


def modus_ponens(premise: Formula, implication: Formula) -> Formula:
    """Conclusion of MP, or KernelError when the implication does not fit"""
    try:
        antecedent, consequent = split_implies(implication)
    except FormulaError as e:
        raise KernelError(str(e))
    if antecedent != premise:
        raise KernelError("Antecedent does not match the premise")
    return consequent


def _check_cont(inst: AxiomInstance, system: SystemDescriptor) -> Optional[Tuple[str, str]]:
    if system.width_cap == 0:
        return "cont_forbidden", "this system has no continuity axiom"
    if system.width_cap is not None and inst.arity > system.width_cap:
        return "cont_width", f"CONT arity {inst.arity} exceeds width cap {system.width_cap}"
    if system.depth_cap is not None:
        for i in range(1, inst.arity + 1):
            d = depth(inst.subst.get(i, Atom(i)))
            if d > system.depth_cap:
                return "cont_depth", f"substituend for p{i} has depth {d} > {system.depth_cap}"
    return None


def check_derivation(
    derivation: Derivation,
    system: SystemDescriptor = UNBOUNDED_SYSTEM,
    taut_max_atoms: int = DEFAULT_TAUT_MAX_ATOMS,
) -> Verdict:
    """
    Check every line of a derivation against the given system

    Args:
        derivation: The derivation to check
        system: Width/depth caps (and KM flag)
        taut_max_atoms: Largest truth table the TAUT check will build

    Returns:
        Verdict naming the least failing line and a reason code on rejection
    """
    if not derivation.lines:
        return Verdict(False, None, "empty", "derivation has no lines")

    for index, line in enumerate(derivation.lines):
        just = line.justification

        def reject(reason: str, message: str) -> Verdict:
            logger.debug(f"{system.label}: line {index} rejected ({reason}): {message}")
            return Verdict(False, index, reason, message)

        if just.kind == "axiom":
            inst = just.axiom
            if inst is None:
                return reject("bad_instance", "axiom line without an instance")
            try:
                schema = Schema(inst.schema)
            except ValueError:
                return reject("bad_instance", f"unknown schema {inst.schema!r}")
            if schema is Schema.CONT:
                if inst.arity < 1:
                    return reject("bad_instance", "CONT arity must be at least 1")
                problem = _check_cont(inst, system)
                if problem:
                    return reject(*problem)
            if system.km and schema in (Schema.FIX_TANGLE, Schema.IND_TANGLE):
                if len(inst.params.get("P", [])) > 1:
                    return reject("km_width", "KM admits only singleton tangle schemas")
            try:
                expected = instantiate_axiom(inst, taut_max_atoms)
            except KernelError as e:
                code = "not_tautology" if schema is Schema.TAUT else "bad_instance"
                return reject(code, str(e))
        elif just.kind in ("mp", "nec"):
            expected_count = 2 if just.kind == "mp" else 1
            if len(just.premises) != expected_count or not all(
                0 <= i < index for i in just.premises
            ):
                return reject("index_order", f"premises {list(just.premises)} must be earlier lines")
            if just.kind == "mp":
                premise, implication = (derivation.lines[i].formula for i in just.premises)
                try:
                    expected = modus_ponens(premise, implication)
                except KernelError as e:
                    return reject("formula_mismatch", str(e))
            else:
                expected = necessitate(just.op, derivation.lines[just.premises[0]].formula)
        else:
            return reject("bad_instance", f"unknown justification kind {just.kind!r}")

        if line.formula != expected:
            return reject("formula_mismatch", "formula does not follow from its justification")
        if system.km and width(line.formula) > 1:
            return reject("km_width", f"line has width {width(line.formula)}")

    logger.debug(f"{system.label}: accepted {len(derivation.lines)} lines")
    return Verdict(True)


def audit_soundness(
    derivation: Derivation,
    model: DynModel,
    system: SystemDescriptor = UNBOUNDED_SYSTEM,
) -> ExperimentReport:
    """Model-check every line of an accepted derivation"""
    report = ExperimentReport(
        experiment="audit_soundness",
        lemma="derivable lines are valid on models of the system",
        parameters={"model": model.name, "lines": len(derivation), "system": system.label},
    )
    with report.timed():
        verdict = check_derivation(derivation, system)
        if not report.check_true("derivation accepted by the kernel", verdict.accepted):
            report.fail({"line": verdict.line, "reason": verdict.reason})
            return report
        memo: Dict[Formula, np.ndarray] = {}
        invalid = []
        for index, line in enumerate(derivation.lines):
            if not eval_mask(model, line.formula, _memo=memo).all():
                invalid.append(index)
        report.checked = len(derivation.lines)
        report.failures.extend(invalid)
        report.check("lines invalid on the model", [], invalid)
    return report


# JSON codec


def _formula_from(value: Any) -> Formula:
    if not isinstance(value, str):
        raise KernelError(f"Expected a formula string, got {value!r}")
    try:
        return parse(value)
    except FormulaError as e:
        raise KernelError(f"Bad formula {value!r}: {e}")


def _subst_key(key: Any) -> int:
    text = str(key)
    if text.startswith("p"):
        text = text[1:]
    try:
        index = int(text)
    except ValueError:
        raise KernelError(f"Bad substitution key {key!r}")
    if index < 1:
        raise KernelError(f"Bad substitution key {key!r}")
    return index


def axiom_to_dict(inst: AxiomInstance) -> Dict[str, Any]:
    params = dict(inst.params)
    if "base" in params:
        params["base"] = params["base"].text
    return {
        "kind": "axiom",
        "schema": Schema(inst.schema).value,
        "params": params,
        "subst": {f"p{i}": phi.text for i, phi in sorted(inst.subst.items())},
    }


def axiom_from_dict(data: Mapping[str, Any]) -> AxiomInstance:
    try:
        schema = Schema(data["schema"])
    except (KeyError, ValueError):
        raise KernelError(f"Unknown schema {data.get('schema')!r}")
    params = dict(data.get("params") or {})
    if "base" in params:
        params["base"] = _formula_from(params["base"])
    subst = {_subst_key(k): _formula_from(v) for k, v in (data.get("subst") or {}).items()}
    return AxiomInstance(schema, params, subst)


def derivation_to_dict(derivation: Derivation) -> Dict[str, Any]:
    lines = []
    for line in derivation.lines:
        just = line.justification
        if just.kind == "axiom":
            encoded = axiom_to_dict(just.axiom)
        elif just.kind == "mp":
            encoded = {"kind": "mp", "from": list(just.premises)}
        else:
            encoded = {"kind": "nec", "op": NecOp(just.op).value, "from": just.premises[0]}
        lines.append({"formula": line.formula.text, "just": encoded})
    system = derivation.system or UNBOUNDED_SYSTEM
    return {"system": system.to_dict(), "lines": lines}


def _line_from_dict(number: int, item: Any) -> Line:
    if not isinstance(item, Mapping):
        raise KernelError(f"Line {number}: expected an object, got {item!r}")
    just = item.get("just") or {}
    if not isinstance(just, Mapping):
        raise KernelError(f"Line {number}: 'just' must be an object")
    kind = just.get("kind")
    if kind == "axiom":
        justification = Justification.from_axiom(axiom_from_dict(just))
    elif kind == "mp":
        premises = just.get("from")
        if not isinstance(premises, list) or len(premises) != 2:
            raise KernelError(f"Line {number}: modus ponens needs 'from': [i, j]")
        justification = Justification("mp", premises=tuple(int(i) for i in premises))
    elif kind == "nec":
        try:
            op = NecOp(just.get("op"))
        except ValueError:
            raise KernelError(f"Line {number}: unknown necessitation {just.get('op')!r}")
        if "from" not in just:
            raise KernelError(f"Line {number}: necessitation needs 'from'")
        justification = Justification.necessitation(op, int(just["from"]))
    else:
        raise KernelError(f"Line {number}: unknown justification kind {kind!r}")
    return Line(_formula_from(item.get("formula")), justification)


def derivation_from_dict(data: Mapping[str, Any]) -> Derivation:
    """Decode a derivation document; every malformed document raises KernelError"""
    if not isinstance(data, Mapping) or not isinstance(data.get("lines"), list):
        raise KernelError("Derivation document needs a 'lines' list")
    try:
        system = SystemDescriptor.from_dict(data["system"]) if data.get("system") else None
        lines = [_line_from_dict(number, item) for number, item in enumerate(data["lines"])]
    except KernelError:
        raise
    except (TypeError, AttributeError, ValueError) as e:
        raise KernelError(f"Malformed derivation document: {e}")
    return Derivation(lines=lines, system=system)


def save_derivation(derivation: Derivation, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(derivation_to_dict(derivation), f, indent=2)


def load_derivation(path: str) -> Derivation:
    with open(path, "r", encoding="utf-8") as f:
        return derivation_from_dict(json.load(f))
