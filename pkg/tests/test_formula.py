"""
Tests for the formula AST in dtlbench.formula
"""

import unittest

from hypothesis import given, settings

from dtlbench.formula import (
    And,
    Atom,
    FormulaError,
    Next,
    Not,
    Tangle,
    atoms,
    box,
    build_schema,
    bundle,
    conj,
    cont,
    cycle,
    depth,
    diamond,
    disj,
    eta,
    implies,
    is_propositional,
    mod_index,
    neg,
    p,
    split_implies,
    start,
    substitute,
    tangle,
    tangle_k,
    trouble,
    width,
)
from tests.strategies import formulas


class TestConstruction(unittest.TestCase):
    """Tests for node invariants and smart constructors"""

    def test_atom_index_must_be_positive(self):
        """Atoms are numbered from 1"""
        with self.assertRaises(FormulaError):
            Atom(0)
        with self.assertRaises(FormulaError):
            Atom(True)

    def test_double_negation_is_never_stored(self):
        """Not(Not(...)) is rejected and neg collapses it"""
        with self.assertRaises(FormulaError):
            Not(Not(p(1)))
        self.assertEqual(neg(neg(p(1))), p(1))
        self.assertEqual(neg(p(1)), Not(p(1)))

    def test_tangle_arguments_are_a_set(self):
        """Order and repetition of tangle arguments do not matter"""
        self.assertEqual(tangle([p(2), p(1)]), tangle([p(1), p(2), p(1)]))
        self.assertEqual(len(tangle([p(1), p(1)]).args), 1)
        self.assertEqual(tangle([p(1)]), diamond(p(1)))

    def test_empty_tangle_rejected(self):
        """A tangle needs at least one argument"""
        with self.assertRaises(FormulaError):
            tangle([])

    def test_derived_connectives(self):
        """Disjunction, implication and box are the expected desugarings"""
        self.assertEqual(implies(p(1), p(2)), Not(And(p(1), Not(p(2)))))
        self.assertEqual(disj(p(1), p(2)), Not(And(Not(p(1)), Not(p(2)))))
        self.assertEqual(box(p(1)), Not(Tangle((Not(p(1)),))))

    def test_split_implies(self):
        """split_implies recovers the parts of an implication"""
        self.assertEqual(split_implies(implies(p(1), p(2))), (p(1), p(2)))
        self.assertEqual(split_implies(implies(p(1), neg(p(2)))), (p(1), neg(p(2))))
        with self.assertRaises(FormulaError):
            split_implies(p(1))
        with self.assertRaises(FormulaError):
            split_implies(conj(p(1), p(2)))

    @given(formulas())
    def test_neg_is_an_involution(self, phi):
        """Negating twice gives the formula back"""
        self.assertEqual(neg(neg(phi)), phi)

    @given(formulas(), formulas())
    def test_split_implies_inverts_implies(self, a, b):
        """implies and split_implies are inverse"""
        self.assertEqual(split_implies(implies(a, b)), (a, b))


class TestMetrics(unittest.TestCase):
    """Tests for depth, width and atoms"""

    def test_depth(self):
        """Tangle, X and G each add one level; Boolean connectives add none"""
        self.assertEqual(depth(p(1)), 0)
        self.assertEqual(depth(neg(conj(p(1), p(2)))), 0)
        self.assertEqual(depth(box(p(1))), 1)
        self.assertEqual(depth(Next(diamond(p(1)))), 2)
        self.assertEqual(depth(start(3, 1)), 2)
        self.assertEqual(depth(trouble(2)), 4)

    def test_width(self):
        """Width is the largest tangle argument set"""
        self.assertEqual(width(p(1)), 0)
        self.assertEqual(width(box(p(1))), 1)
        self.assertEqual(width(trouble(3)), 1)
        self.assertEqual(width(bundle(3)), 1)
        self.assertEqual(width(tangle_k(2)), 2)
        self.assertEqual(width(cont(3)), 3)
        self.assertEqual(width(eta(2)), 3)

    def test_atoms_and_propositional(self):
        """Atom collection and the propositional test"""
        self.assertEqual(atoms(cont(2)), frozenset({1, 2}))
        self.assertEqual(atoms(cycle(3)), frozenset({1, 2, 3}))
        self.assertTrue(is_propositional(implies(p(1), disj(p(2), p(3)))))
        self.assertFalse(is_propositional(implies(p(1), diamond(p(2)))))
        self.assertFalse(is_propositional(Next(p(1))))

    def test_mod_index(self):
        """Residues are taken in 1..k"""
        self.assertEqual(mod_index(0, 3), 3)
        self.assertEqual(mod_index(3, 3), 3)
        self.assertEqual(mod_index(4, 3), 1)
        self.assertEqual(mod_index(-1, 3), 2)
        with self.assertRaises(FormulaError):
            mod_index(1, 0)


class TestSubstitution(unittest.TestCase):
    """Tests for simultaneous substitution"""

    def test_simultaneous(self):
        """Swapping two atoms is simultaneous, not sequential"""
        self.assertEqual(substitute(conj(p(1), p(2)), {1: p(2), 2: p(1)}), conj(p(2), p(1)))

    def test_negation_normalized(self):
        """Substituting a negation under a negation collapses the pair"""
        self.assertEqual(substitute(neg(p(1)), {1: neg(p(2))}), p(2))

    def test_tangle_arguments_merge(self):
        """Arguments that become equal merge into one"""
        self.assertEqual(substitute(tangle([p(1), p(2)]), {2: p(1)}), diamond(p(1)))
        self.assertEqual(substitute(cont(2), {2: p(1)}), cont(1))

    @given(formulas())
    def test_empty_substitution(self, phi):
        """The empty substitution is the identity"""
        self.assertEqual(substitute(phi, {}), phi)
        self.assertEqual(substitute(phi, {4: p(5)}), phi)

    @settings(max_examples=50)
    @given(formulas(), formulas(), formulas())
    def test_commutes_with_builders(self, a, b, image):
        """Substitution distributes over implies, box and tangle"""
        sigma = {1: image}
        self.assertEqual(
            substitute(implies(a, b), sigma), implies(substitute(a, sigma), substitute(b, sigma))
        )
        self.assertEqual(substitute(box(a), sigma), box(substitute(a, sigma)))
        self.assertEqual(
            substitute(tangle([a, b]), sigma), tangle([substitute(a, sigma), substitute(b, sigma)])
        )


class TestFamilies(unittest.TestCase):
    """Tests for the named formula families"""

    def test_cycle_shape(self):
        """Cycle^k is <>p_k -> the chain of X-steps"""
        antecedent, _ = split_implies(cycle(2))
        self.assertEqual(antecedent, diamond(p(2)))
        self.assertEqual(depth(cycle(2)), 1)

    def test_trouble_shape(self):
        """Trouble^k is Bundle^k -> G<>p_k"""
        antecedent, consequent = split_implies(trouble(2))
        self.assertEqual(antecedent, bundle(2))
        self.assertEqual(consequent.text, "G <>p2")

    def test_start_range(self):
        """START indices range over 1..k"""
        with self.assertRaises(FormulaError):
            start(2, 3)
        with self.assertRaises(FormulaError):
            start(2, 0)

    def test_k_must_be_positive(self):
        """Every family needs k >= 1"""
        for builder in (cycle, bundle, tangle_k, trouble, eta, cont):
            with self.assertRaises(FormulaError):
                builder(0)

    def test_build_schema(self):
        """Families are built by name"""
        self.assertEqual(build_schema("start", 2, 1), start(2, 1))
        self.assertEqual(build_schema("TROUBLE", 2), trouble(2))
        self.assertEqual(build_schema("Cont", 3), cont(3))
        with self.assertRaises(FormulaError):
            build_schema("START", 2)
        with self.assertRaises(FormulaError):
            build_schema("TROUBLE", 2, 1)
        with self.assertRaises(FormulaError):
            build_schema("nope", 1)


if __name__ == "__main__":
    unittest.main()
