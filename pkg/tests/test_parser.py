"""
Tests for the concrete syntax in dtlbench.parser
"""

import unittest

from hypothesis import given

from dtlbench.formula import (
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
    p,
    tangle,
    trouble,
)
from dtlbench.parser import FormulaSyntaxError, parse
from tests.strategies import formulas


class TestParse(unittest.TestCase):
    """Tests for parsing and desugaring"""

    def test_operators(self):
        """Each connective desugars through the smart constructors"""
        self.assertEqual(parse("p1"), p(1))
        self.assertEqual(parse("p12"), p(12))
        self.assertEqual(parse("~p1"), neg(p(1)))
        self.assertEqual(parse("p1 & p2"), conj(p(1), p(2)))
        self.assertEqual(parse("p1 | p2"), disj(p(1), p(2)))
        self.assertEqual(parse("p1 -> p2"), implies(p(1), p(2)))
        self.assertEqual(parse("p1 <-> p2"), iff(p(1), p(2)))
        self.assertEqual(parse("[]p1"), box(p(1)))
        self.assertEqual(parse("<>p1"), diamond(p(1)))
        self.assertEqual(parse("<>{p1, p2}"), tangle([p(1), p(2)]))
        self.assertEqual(parse("X p1"), Next(p(1)))
        self.assertEqual(parse("G p1"), Hence(p(1)))
        self.assertEqual(parse("F p1"), eventually(p(1)))

    def test_double_negation_collapses(self):
        """~~p1 is p1"""
        self.assertEqual(parse("~~p1"), p(1))

    def test_precedence(self):
        """Unary binds tightest, then &, |, -> and finally <->"""
        self.assertEqual(parse("X p1 & p2"), conj(Next(p(1)), p(2)))
        self.assertEqual(parse("[]p1 -> p1"), implies(box(p(1)), p(1)))
        self.assertEqual(parse("p1 & p2 | p3"), disj(conj(p(1), p(2)), p(3)))
        self.assertEqual(parse("p1 | p2 -> p3"), implies(disj(p(1), p(2)), p(3)))
        self.assertEqual(parse("p1 -> p2 <-> p3"), iff(implies(p(1), p(2)), p(3)))

    def test_associativity(self):
        """& and | group to the left, -> to the right"""
        self.assertEqual(parse("p1 & p2 & p3"), conj(conj(p(1), p(2)), p(3)))
        self.assertEqual(parse("p1 -> p2 -> p3"), implies(p(1), implies(p(2), p(3))))

    def test_tangle_set_semantics(self):
        """Tangle arguments are a set"""
        self.assertEqual(parse("<>{p2,p1,p2}"), parse("<>{p1,p2}"))
        self.assertEqual(parse("<>{p1}"), diamond(p(1)))

    def test_whitespace_ignored(self):
        """Whitespace is insignificant"""
        self.assertEqual(parse("  ( p1->p2 )\n"), implies(p(1), p(2)))


class TestParseErrors(unittest.TestCase):
    """Tests for rejected inputs"""

    def test_empty_tangle(self):
        """<>{} is not a formula"""
        with self.assertRaises(FormulaError):
            parse("<>{}")

    def test_atom_zero(self):
        """Atoms start at p1"""
        with self.assertRaises(FormulaSyntaxError):
            parse("p0")

    def test_unexpected_character_position(self):
        """The error carries the 1-based position"""
        with self.assertRaises(FormulaSyntaxError) as ctx:
            parse("p1 $ p2")
        self.assertEqual(ctx.exception.line, 1)
        self.assertEqual(ctx.exception.column, 4)

    def test_unexpected_end(self):
        """Truncated input is reported"""
        with self.assertRaises(FormulaSyntaxError):
            parse("p1 &")
        with self.assertRaises(FormulaSyntaxError):
            parse("(p1")

    def test_iff_does_not_chain(self):
        """<-> is non-associative"""
        with self.assertRaises(FormulaSyntaxError):
            parse("p1 <-> p2 <-> p3")


class TestPrinter(unittest.TestCase):
    """Tests for the printer and the print/parse round trip"""

    def test_simple_text(self):
        """Sugar is restored where the shape allows it"""
        cases = [
            "p1 -> p2",
            "p1 | p2",
            "p1 <-> p2",
            "[]p1",
            "<>{p1,p2}",
            "X p1",
            "G p1",
            "F p1",
            "~p1",
            "p1 & p2",
        ]
        for text in cases:
            with self.subTest(text=text):
                self.assertEqual(parse(text).text, text)

    def test_roundtrip_named_family(self):
        """A large family member survives printing"""
        phi = trouble(3)
        self.assertEqual(parse(phi.text), phi)

    @given(formulas(atom_count=12, max_leaves=14))
    def test_roundtrip(self, phi):
        """parse(print(phi)) == phi"""
        self.assertEqual(parse(phi.text), phi)


if __name__ == "__main__":
    unittest.main()
