"""
Formula AST for the polyadic language L*, with metrics, substitution and named families
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import FrozenSet, Iterable, Iterator, Mapping, Optional, Tuple, Union

logger = logging.getLogger(__name__)


class FormulaError(ValueError):
    """Raised for structurally invalid formulas or out-of-range parameters"""


class Formula:
    """Base class of every formula node

    Nodes are immutable and compared structurally. Double negations are never
    stored: use ``neg`` rather than ``Not`` when the child may itself be negated.
    """

    @cached_property
    def text(self) -> str:
        return to_text(self)

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class Atom(Formula):
    index: int

    def __post_init__(self) -> None:
        if isinstance(self.index, bool) or not isinstance(self.index, int) or self.index < 1:
            raise FormulaError(f"Atom index must be a positive integer, got {self.index!r}")


@dataclass(frozen=True)
class Not(Formula):
    child: Formula

    def __post_init__(self) -> None:
        if isinstance(self.child, Not):
            raise FormulaError("Double negation is not stored; build it with neg()")


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    child: Formula


@dataclass(frozen=True)
class Hence(Formula):
    child: Formula


@dataclass(frozen=True)
class Tangle(Formula):
    """Polyadic diamond over a finite nonempty set of formulas

    ``args`` is normalized to a duplicate-free tuple sorted by printed text, so
    structural equality decides set equality.
    """

    args: Tuple[Formula, ...]

    def __post_init__(self) -> None:
        unique = {arg.text: arg for arg in self.args}
        if not unique:
            raise FormulaError("Tangle requires a nonempty set of arguments")
        object.__setattr__(self, "args", tuple(unique[key] for key in sorted(unique)))


# Smart constructors


def p(index: int) -> Atom:
    return Atom(index)


def neg(phi: Formula) -> Formula:
    """Negate, collapsing a double negation"""
    if isinstance(phi, Not):
        return phi.child
    return Not(phi)


def conj(left: Formula, right: Formula) -> Formula:
    return And(left, right)


def big_and(items: Iterable[Formula]) -> Formula:
    """Left-folded conjunction of a nonempty sequence"""
    items = list(items)
    if not items:
        raise FormulaError("Empty conjunction")
    result = items[0]
    for item in items[1:]:
        result = And(result, item)
    return result


def disj(left: Formula, right: Formula) -> Formula:
    return neg(And(neg(left), neg(right)))


def implies(antecedent: Formula, consequent: Formula) -> Formula:
    return neg(And(antecedent, neg(consequent)))


def iff(left: Formula, right: Formula) -> Formula:
    return And(implies(left, right), implies(right, left))


def tangle(args: Iterable[Formula]) -> Tangle:
    return Tangle(tuple(args))


def diamond(phi: Formula) -> Tangle:
    return Tangle((phi,))


def box(phi: Formula) -> Formula:
    return neg(Tangle((neg(phi),)))


def next_(phi: Formula) -> Next:
    return Next(phi)


def hence(phi: Formula) -> Hence:
    return Hence(phi)


def eventually(phi: Formula) -> Formula:
    """The dual of henceforth"""
    return neg(Hence(neg(phi)))


def split_implies(phi: Formula) -> Tuple[Formula, Formula]:
    """Recover (antecedent, consequent) from a formula built by ``implies``

    Every ``Not(And(a, b))`` reads as ``a -> neg(b)``.
    """
    if not (isinstance(phi, Not) and isinstance(phi.child, And)):
        raise FormulaError(f"Not an implication: {phi}")
    return phi.child.left, neg(phi.child.right)


# Metrics


def depth(phi: Formula) -> int:
    """Modal nesting depth; Next, Hence and Tangle each count one"""
    if isinstance(phi, Atom):
        return 0
    if isinstance(phi, Not):
        return depth(phi.child)
    if isinstance(phi, And):
        return max(depth(phi.left), depth(phi.right))
    if isinstance(phi, (Next, Hence)):
        return 1 + depth(phi.child)
    if isinstance(phi, Tangle):
        return 1 + max(depth(arg) for arg in phi.args)
    raise FormulaError(f"Unknown formula node {type(phi).__name__}")


def width(phi: Formula) -> int:
    """Largest tangle argument set occurring in phi, 0 when tangle-free"""
    if isinstance(phi, Atom):
        return 0
    if isinstance(phi, (Not, Next, Hence)):
        return width(phi.child)
    if isinstance(phi, And):
        return max(width(phi.left), width(phi.right))
    if isinstance(phi, Tangle):
        return max([len(phi.args)] + [width(arg) for arg in phi.args])
    raise FormulaError(f"Unknown formula node {type(phi).__name__}")


def children(phi: Formula) -> Tuple[Formula, ...]:
    if isinstance(phi, Atom):
        return ()
    if isinstance(phi, (Not, Next, Hence)):
        return (phi.child,)
    if isinstance(phi, And):
        return (phi.left, phi.right)
    if isinstance(phi, Tangle):
        return phi.args
    raise FormulaError(f"Unknown formula node {type(phi).__name__}")


def subformulas(phi: Formula) -> Iterator[Formula]:
    """Pre-order traversal, duplicates included"""
    stack = [phi]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def atoms(phi: Formula) -> FrozenSet[int]:
    return frozenset(node.index for node in subformulas(phi) if isinstance(node, Atom))


def is_propositional(phi: Formula) -> bool:
    return all(isinstance(node, (Atom, Not, And)) for node in subformulas(phi))


def mod_index(n: int, k: int) -> int:
    """The representative of n modulo k taken in [1, k] rather than [0, k-1]"""
    if k < 1:
        raise FormulaError(f"mod_index needs k >= 1, got {k}")
    return (n - 1) % k + 1


# Substitution


Substitution = Mapping[int, Formula]


def substitute(phi: Formula, sigma: Substitution) -> Formula:
    """Simultaneous substitution of atoms, re-canonicalizing tangles"""
    if not sigma:
        return phi
    if isinstance(phi, Atom):
        return sigma.get(phi.index, phi)
    if isinstance(phi, Not):
        return neg(substitute(phi.child, sigma))
    if isinstance(phi, And):
        return And(substitute(phi.left, sigma), substitute(phi.right, sigma))
    if isinstance(phi, Next):
        return Next(substitute(phi.child, sigma))
    if isinstance(phi, Hence):
        return Hence(substitute(phi.child, sigma))
    if isinstance(phi, Tangle):
        return Tangle(tuple(substitute(arg, sigma) for arg in phi.args))
    raise FormulaError(f"Unknown formula node {type(phi).__name__}")


# Named families


class FormulaFamily(str, Enum):
    CYCLE = "CYCLE"
    START = "START"
    BUNDLE = "BUNDLE"
    TANGLE = "TANGLE"
    TROUBLE = "TROUBLE"
    ETA = "ETA"
    CONT = "CONT"


def _check_k(k: int) -> None:
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise FormulaError(f"Family parameter k must be a positive integer, got {k!r}")


def cycle(k: int) -> Formula:
    _check_k(k)
    steps = [implies(p(i), Next(p(mod_index(i + 1, k)))) for i in range(1, k + 1)]
    return implies(diamond(p(k)), big_and(steps))


def start(k: int, i: int) -> Formula:
    _check_k(k)
    if not 1 <= i <= k:
        raise FormulaError(f"START index {i} outside [1, {k}]")
    return conj(p(i), Hence(cycle(k)))


def bundle(k: int) -> Formula:
    _check_k(k)
    return box(big_and(diamond(start(k, i)) for i in range(1, k + 1)))


def tangle_k(k: int) -> Tangle:
    _check_k(k)
    return tangle(start(k, i) for i in range(1, k + 1))


def trouble(k: int) -> Formula:
    return implies(bundle(k), Hence(diamond(p(k))))


def eta(k: int) -> Tangle:
    _check_k(k)
    return tangle(p(i) for i in range(1, k + 2))


def cont(k: int) -> Formula:
    _check_k(k)
    return implies(
        tangle(Next(p(i)) for i in range(1, k + 1)),
        Next(tangle(p(i) for i in range(1, k + 1))),
    )


def build_schema(name: Union[str, FormulaFamily], k: int, i: Optional[int] = None) -> Formula:
    """
    Build one of the named formula families

    Args:
        name: Family name (CYCLE, START, BUNDLE, TANGLE, TROUBLE, ETA, CONT)
        k: Family parameter, k >= 1
        i: Index in [1, k], required for START only

    Returns:
        The family member as a Formula
    """
    try:
        family = FormulaFamily(str(getattr(name, "value", name)).upper())
    except ValueError:
        raise FormulaError(f"Unknown formula family {name!r}")
    if family is FormulaFamily.START:
        if i is None:
            raise FormulaError("START requires an index i")
        return start(k, i)
    if i is not None:
        raise FormulaError(f"{family.value} takes no index")
    builders = {
        FormulaFamily.CYCLE: cycle,
        FormulaFamily.BUNDLE: bundle,
        FormulaFamily.TANGLE: tangle_k,
        FormulaFamily.TROUBLE: trouble,
        FormulaFamily.ETA: eta,
        FormulaFamily.CONT: cont,
    }
    return builders[family](k)


# Printing

_IFF, _IMP, _OR, _AND, _UNARY = 0, 1, 2, 3, 4


def _as_iff(phi: Formula) -> Optional[Tuple[Formula, Formula]]:
    if not isinstance(phi, And):
        return None
    left, right = phi.left, phi.right
    if not (isinstance(left, Not) and isinstance(left.child, And)):
        return None
    if not (isinstance(right, Not) and isinstance(right.child, And)):
        return None
    a, nb = left.child.left, left.child.right
    b, na = right.child.left, right.child.right
    if nb == neg(b) and na == neg(a):
        return a, b
    return None


def _render(phi: Formula) -> Tuple[str, int]:
    """Return (text, precedence) for phi"""
    if isinstance(phi, Atom):
        return f"p{phi.index}", _UNARY + 1
    pair = _as_iff(phi)
    if pair is not None:
        return f"{_wrap(pair[0], _IFF + 1)} <-> {_wrap(pair[1], _IFF + 1)}", _IFF
    if isinstance(phi, And):
        return f"{_wrap(phi.left, _AND)} & {_wrap(phi.right, _AND + 1)}", _AND
    if isinstance(phi, Not):
        inner = phi.child
        if isinstance(inner, And):
            a, b = inner.left, inner.right
            if isinstance(a, Not) and isinstance(b, Not):
                return f"{_wrap(a.child, _OR)} | {_wrap(b.child, _OR + 1)}", _OR
            if isinstance(b, Not):
                return f"{_wrap(a, _IMP + 1)} -> {_wrap(b.child, _IMP)}", _IMP
        if isinstance(inner, Tangle) and len(inner.args) == 1 and isinstance(inner.args[0], Not):
            return f"[]{_wrap(inner.args[0].child, _UNARY)}", _UNARY
        if isinstance(inner, Hence) and isinstance(inner.child, Not):
            return f"F {_wrap(inner.child.child, _UNARY)}", _UNARY
        return f"~{_wrap(inner, _UNARY)}", _UNARY
    if isinstance(phi, Next):
        return f"X {_wrap(phi.child, _UNARY)}", _UNARY
    if isinstance(phi, Hence):
        return f"G {_wrap(phi.child, _UNARY)}", _UNARY
    if isinstance(phi, Tangle):
        if len(phi.args) == 1:
            return f"<>{_wrap(phi.args[0], _UNARY)}", _UNARY
        return "<>{" + ",".join(arg.text for arg in phi.args) + "}", _UNARY
    raise FormulaError(f"Unknown formula node {type(phi).__name__}")


def _wrap(phi: Formula, required: int) -> str:
    text, level = _render(phi)
    return f"({text})" if level < required else text


def to_text(phi: Formula) -> str:
    """Deterministic concrete syntax; re-parses to a structurally equal formula"""
    return _render(phi)[0]
