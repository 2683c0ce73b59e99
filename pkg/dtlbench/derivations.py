"""
Derivation compiler: admissible-rule templates expanded into primitive kernel steps
"""

import logging
import random
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from dtlbench.formula import (
    Atom,
    Formula,
    Hence,
    Next,
    big_and,
    box,
    bundle,
    conj,
    cycle,
    diamond,
    implies,
    mod_index,
    neg,
    p,
    split_implies,
    start,
    substitute,
    tangle,
    tangle_k,
    trouble,
)
from dtlbench.gallery import random_formula
from dtlbench.kernel import (
    DEFAULT_TAUT_MAX_ATOMS,
    UNBOUNDED_SYSTEM,
    AxiomInstance,
    Derivation,
    Justification,
    KernelError,
    Line,
    NecOp,
    Schema,
    SystemDescriptor,
    instantiate_axiom,
    is_tautology,
    modus_ponens,
    necessitate,
    skeleton,
)

logger = logging.getLogger(__name__)


class DerivationBuilder:
    """
    Append-only derivation under construction

    Every method returns the index of the line holding its conclusion. A formula that
    is already a line is never added twice.
    """

    def __init__(self, taut_max_atoms: int = DEFAULT_TAUT_MAX_ATOMS):
        self.taut_max_atoms = taut_max_atoms
        self.lines: List[Line] = []
        self._index: Dict[Formula, int] = {}

    def formula(self, i: int) -> Formula:
        return self.lines[i].formula

    def build(self, system: Optional[SystemDescriptor] = None) -> Derivation:
        return Derivation(lines=list(self.lines), system=system)

    def _add(self, phi: Formula, justification: Justification) -> int:
        if phi in self._index:
            return self._index[phi]
        self.lines.append(Line(phi, justification))
        self._index[phi] = len(self.lines) - 1
        return self._index[phi]

    # Primitive steps

    def axiom(
        self,
        schema: Schema,
        params: Optional[Mapping] = None,
        subst: Optional[Mapping[int, Formula]] = None,
    ) -> int:
        inst = AxiomInstance(Schema(schema), dict(params or {}), dict(subst or {}))
        return self._add(instantiate_axiom(inst, self.taut_max_atoms), Justification.from_axiom(inst))

    def mp(self, premise: int, implication: int) -> int:
        conclusion = modus_ponens(self.formula(premise), self.formula(implication))
        return self._add(conclusion, Justification.modus_ponens(premise, implication))

    def nec(self, op: NecOp, i: int) -> int:
        return self._add(necessitate(op, self.formula(i)), Justification.necessitation(op, i))

    # Propositional templates

    def taut(self, phi: Formula) -> int:
        """Add phi as a TAUT instance over its propositional skeleton"""
        base, sigma = skeleton(phi)
        if not is_tautology(base, self.taut_max_atoms):
            raise KernelError(f"Not a propositional tautology: {phi}")
        return self.axiom(Schema.TAUT, {"base": base}, sigma)

    def consequence(self, premises: Sequence[int], conclusion: Formula) -> int:
        """Derive a propositional consequence of earlier lines"""
        if conclusion in self._index:
            return self._index[conclusion]
        chained = conclusion
        for i in reversed(premises):
            chained = implies(self.formula(i), chained)
        current = self.taut(chained)
        for i in premises:
            current = self.mp(i, current)
        return current

    def chain(self, first: int, second: int) -> int:
        """From A -> B and B -> C derive A -> C"""
        a, _ = split_implies(self.formula(first))
        _, c = split_implies(self.formula(second))
        return self.consequence([first, second], implies(a, c))

    # Modal templates

    def box_mono(self, i: int) -> int:
        """From A -> B derive []A -> []B"""
        a, b = split_implies(self.formula(i))
        boxed = self.nec(NecOp.BOX, i)
        return self.mp(boxed, self.axiom(Schema.K, subst={1: a, 2: b}))

    def dia_mono(self, i: int) -> int:
        """From A -> B derive <>A -> <>B"""
        a, b = split_implies(self.formula(i))
        contra = self.consequence([i], implies(neg(b), neg(a)))
        return self.consequence([self.box_mono(contra)], implies(diamond(a), diamond(b)))

    def next_mono(self, i: int) -> int:
        """From A -> B derive XA -> XB"""
        a, b = split_implies(self.formula(i))
        premises = [
            self.nec(NecOp.NEXT, i),
            self.axiom(Schema.NEG_NEXT, subst={1: conj(a, neg(b))}),
            self.axiom(Schema.AND_NEXT, subst={1: a, 2: neg(b)}),
            self.axiom(Schema.NEG_NEXT, subst={1: b}),
        ]
        return self.consequence(premises, implies(Next(a), Next(b)))

    def hence_mono(self, i: int) -> int:
        """From A -> B derive GA -> GB"""
        a, b = split_implies(self.formula(i))
        nec = self.nec(NecOp.HENCE, i)
        return self.mp(nec, self.axiom(Schema.K_HENCE, subst={1: a, 2: b}))

    def box_dia_and(self, a: Formula, b: Formula) -> int:
        """Derive ([]a & <>b) -> <>(b & a)"""
        t = self.taut(implies(a, implies(neg(conj(b, a)), neg(b))))
        distributed = self.chain(
            self.box_mono(t), self.axiom(Schema.K, subst={1: neg(conj(b, a)), 2: neg(b)})
        )
        return self.consequence([distributed], implies(conj(box(a), diamond(b)), diamond(conj(b, a))))


def _tangle_params(k: int) -> Dict[str, object]:
    return {"P": list(range(1, k + 1)), "p": k + 1}


def milestones(k: int) -> List[Formula]:
    """The six intermediate claims of the derivation of Trouble^k, in order"""
    tan = tangle_k(k)
    return [
        implies(bundle(k), tan),
        implies(tan, diamond(p(k))),
        implies(tan, tangle(Next(start(k, j)) for j in range(1, k + 1))),
        implies(tan, Next(tan)),
        implies(tan, Hence(tan)),
        trouble(k),
    ]


def derive_trouble(k: int) -> Derivation:
    """
    Compile a primitive derivation of Trouble^k

    The CONT^k instance substitutes Start^k_i (depth 2) for p_i, so the result is a
    derivation in the width-k, depth-2 system.

    Args:
        k: Width parameter, k >= 1

    Returns:
        Derivation whose last line is Trouble^k
    """
    if k < 1:
        raise KernelError(f"Trouble^k needs k >= 1, got {k}")
    b = DerivationBuilder()
    indices = range(1, k + 1)
    S = {i: start(k, i) for i in indices}
    bun = bundle(k)
    tan = tangle_k(k)
    starts = big_and(diamond(S[i]) for i in indices)

    # Bundle -> Tangle
    reflexive = b.axiom(Schema.T, subst={1: starts})
    transitive = b.axiom(Schema.FOUR, subst={1: starts})
    steps = []
    for i in indices:
        reaches = b.consequence([reflexive], implies(bun, diamond(S[i])))
        combined = b.box_dia_and(bun, S[i])
        steps.append(
            b.consequence([transitive, reaches, combined], implies(bun, diamond(conj(S[i], bun))))
        )
    body = big_and(implies(bun, diamond(conj(S[i], bun))) for i in indices)
    boxed = b.nec(NecOp.BOX, b.consequence(steps, body))
    induction = b.axiom(Schema.IND_TANGLE, _tangle_params(k), {**S, k + 1: bun})
    m1 = b.mp(boxed, induction)

    # Tangle -> <>p_k
    fixpoint = b.axiom(Schema.FIX_TANGLE, {"P": list(indices)}, S)
    last = b.consequence([fixpoint], implies(tan, diamond(conj(S[k], tan))))
    m2 = b.chain(last, b.dia_mono(b.taut(implies(conj(S[k], tan), p(k)))))

    # Tangle -> <>{XStart_1 .. XStart_k}
    cyc = cycle(k)
    unfold = b.axiom(Schema.FIX_HENCE, subst={1: cyc})
    XS = {j: Next(S[j]) for j in indices}
    steps = []
    for j in indices:
        i = mod_index(j - 1, k)
        below = b.consequence([fixpoint], implies(tan, diamond(conj(S[i], tan))))
        split = b.axiom(Schema.AND_NEXT, subst={1: p(j), 2: Hence(cyc)})
        advance = b.consequence(
            [unfold, m2, split], implies(conj(S[i], tan), conj(XS[j], tan))
        )
        steps.append(b.chain(below, b.dia_mono(advance)))
    body = big_and(implies(tan, diamond(conj(XS[j], tan))) for j in indices)
    boxed = b.nec(NecOp.BOX, b.consequence(steps, body))
    m3 = b.mp(boxed, b.axiom(Schema.IND_TANGLE, _tangle_params(k), {**XS, k + 1: tan}))

    # Tangle -> XTangle
    m4 = b.chain(m3, b.axiom(Schema.CONT, {"k": k}, S))

    # Tangle -> GTangle
    m5 = b.mp(b.nec(NecOp.HENCE, m4), b.axiom(Schema.IND_HENCE, subst={1: tan}))

    # Bundle -> G<>p_k
    m6 = b.chain(m1, b.chain(m5, b.hence_mono(m2)))

    derivation = b.build(SystemDescriptor(width_cap=k, depth_cap=2))
    logger.debug(
        f"Trouble^{k}: {len(derivation)} lines, milestones at {[m1, m2, m3, m4, m5, m6]}"
    )
    return derivation


def milestone_lines(derivation: Derivation, k: int) -> List[int]:
    """First line index of each milestone, -1 where absent"""
    return [derivation.index_of(phi) for phi in milestones(k)]


MUTATIONS = ("swap", "negate", "next")


def mutate_line(derivation: Derivation, seed: int) -> Tuple[Derivation, int]:
    """
    Replace one line's formula, keeping its justification

    Returns:
        (mutated derivation, index of the changed line)
    """
    if not derivation.lines:
        raise KernelError("Cannot mutate an empty derivation")
    rng = random.Random(seed)
    index = rng.randrange(len(derivation.lines))
    kind = rng.choice(MUTATIONS)
    original = derivation.lines[index]
    phi = original.formula
    if kind == "swap":
        mutated = substitute(phi, {1: Atom(2), 2: Atom(1)})
        if mutated == phi:
            mutated = neg(phi)
    elif kind == "negate":
        mutated = neg(phi)
    else:
        mutated = Next(phi)
    lines = list(derivation.lines)
    lines[index] = Line(mutated, original.justification)
    return Derivation(lines=lines, system=derivation.system), index


TEMPLATES = ("box_mono", "dia_mono", "next_mono", "hence_mono", "strengthen")


def template_derivation(seed: int, steps: int = 6, atom_count: int = 3) -> Derivation:
    """
    Random derivation grown from axiom instances by the monotonicity templates

    Every line is accepted by the unbounded system; no CONT instance is used.

    Args:
        seed: Source of randomness
        steps: Number of templates applied
        atom_count: Atoms p1..p<atom_count> used in the random formulas

    Returns:
        The derivation, with UNBOUNDED_SYSTEM attached
    """
    rng = random.Random(seed)
    atom_indices = list(range(1, atom_count + 1))

    def draw() -> Formula:
        return random_formula(rng, atom_indices, 1, max_width=2, size=rng.randint(1, 4))

    b = DerivationBuilder()
    x, y = draw(), draw()
    implications = [
        b.axiom(Schema.T, subst={1: x}),
        b.axiom(Schema.FIX_HENCE, subst={1: y}),
        b.taut(implies(conj(x, y), x)),
        b.box_dia_and(x, y),
    ]
    for _ in range(steps):
        i = rng.choice(implications)
        kind = rng.choice(TEMPLATES)
        if kind == "strengthen":
            a, c = split_implies(b.formula(i))
            implications.append(b.consequence([i], implies(conj(a, draw()), c)))
        else:
            implications.append(getattr(b, kind)(i))
    return b.build(UNBOUNDED_SYSTEM)
