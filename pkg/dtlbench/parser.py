"""
Concrete syntax front-end: ASCII formulas to desugared ASTs
"""

import logging
from functools import lru_cache

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, VisitError

from dtlbench.formula import (
    Atom,
    Formula,
    FormulaError,
    Hence,
    Next,
    box,
    conj,
    diamond,
    disj,
    eventually,
    iff,
    implies,
    neg,
    tangle,
)

logger = logging.getLogger(__name__)

GRAMMAR = r"""
?start: equiv

?equiv: imp
      | imp "<->" imp          -> iff

?imp: disj
    | disj "->" imp            -> implies

?disj: conj
     | disj "|" conj           -> disjunction

?conj: unary
     | conj "&" unary          -> conjunction

?unary: "~" unary              -> negation
      | "X" unary              -> next
      | "G" unary              -> hence
      | "F" unary              -> eventually
      | "[]" unary             -> box
      | "<>" "{" equiv ("," equiv)* "}" -> tangle
      | "<>" unary             -> diamond
      | atom
      | "(" equiv ")"

atom: ATOM

ATOM: /p[1-9][0-9]*/

%import common.WS
%ignore WS
"""


class FormulaSyntaxError(FormulaError):
    """Syntax error with the 1-based position where parsing stopped"""

    def __init__(self, message: str, text: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.text = text
        self.line = line
        self.column = column


@v_args(inline=True)
class FormulaTransformer(Transformer):
    """Builds formulas bottom-up through the smart constructors"""

    def atom(self, token):
        return Atom(int(token[1:]))

    def negation(self, child):
        return neg(child)

    def next(self, child):
        return Next(child)

    def hence(self, child):
        return Hence(child)

    def eventually(self, child):
        return eventually(child)

    def box(self, child):
        return box(child)

    def diamond(self, child):
        return diamond(child)

    def tangle(self, *args):
        return tangle(args)

    def conjunction(self, left, right):
        return conj(left, right)

    def disjunction(self, left, right):
        return disj(left, right)

    def implies(self, left, right):
        return implies(left, right)

    def iff(self, left, right):
        return iff(left, right)


@lru_cache(maxsize=1)
def _parser() -> Lark:
    return Lark(GRAMMAR, parser="lalr", transformer=FormulaTransformer())


def parse(text: str) -> Formula:
    """
    Parse a formula written in the ASCII grammar

    Args:
        text: Formula text, e.g. ``"<>{p1,p2} -> X p3"``

    Returns:
        The desugared formula

    Raises:
        FormulaSyntaxError: if the text does not conform to the grammar
    """
    try:
        return _parser().parse(text)
    except UnexpectedEOF:
        lines = text.splitlines() or [""]
        raise FormulaSyntaxError("Unexpected end of input", text, len(lines), len(lines[-1]) + 1)
    except UnexpectedCharacters as e:
        raise FormulaSyntaxError(f"Unexpected character {e.char!r}", text, e.line, e.column)
    except UnexpectedInput as e:
        token = getattr(e, "token", None)
        shown = f" {str(token)!r}" if token is not None and str(token) else ""
        line = getattr(e, "line", -1)
        column = getattr(e, "column", -1)
        if line is None or line < 1:
            lines = text.splitlines() or [""]
            line, column = len(lines), len(lines[-1]) + 1
        raise FormulaSyntaxError(f"Unexpected token{shown}", text, line, column)
    except VisitError as e:
        if isinstance(e.orig_exc, FormulaError):
            raise e.orig_exc
        raise
