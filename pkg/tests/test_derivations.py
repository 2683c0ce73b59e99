"""
Tests for the derivation compiler in dtlbench.derivations
"""

import json
import unittest

from dtlbench.derivations import (
    DerivationBuilder,
    derive_trouble,
    milestone_lines,
    milestones,
    mutate_line,
    template_derivation,
)
from dtlbench.formula import (
    Hence,
    Next,
    box,
    conj,
    depth,
    diamond,
    implies,
    neg,
    p,
    tangle_k,
    trouble,
)
from dtlbench.gallery import gen_D, gen_random_model
from dtlbench.kernel import (
    UNBOUNDED_SYSTEM,
    Derivation,
    KernelError,
    Line,
    Schema,
    SystemDescriptor,
    audit_soundness,
    check_derivation,
    derivation_from_dict,
    derivation_to_dict,
)


class TestBuilder(unittest.TestCase):
    """Tests for the admissible-rule templates"""

    def setUp(self):
        self.builder = DerivationBuilder()
        self.premise = self.builder.taut(implies(conj(p(1), p(2)), p(1)))

    def assertAccepted(self):
        verdict = check_derivation(self.builder.build())
        self.assertTrue(verdict.accepted, verdict.to_dict())

    def test_taut_rejects_non_tautology(self):
        """taut only adds tautologies"""
        with self.assertRaises(KernelError):
            self.builder.taut(implies(p(1), p(2)))

    def test_lines_are_not_repeated(self):
        """Adding a formula twice returns the existing line"""
        again = self.builder.taut(implies(conj(p(1), p(2)), p(1)))
        self.assertEqual(again, self.premise)
        self.assertEqual(len(self.builder.lines), 1)

    def test_box_mono(self):
        """From A -> B derive []A -> []B"""
        i = self.builder.box_mono(self.premise)
        self.assertEqual(self.builder.formula(i), implies(box(conj(p(1), p(2))), box(p(1))))
        self.assertAccepted()

    def test_dia_mono(self):
        """From A -> B derive <>A -> <>B"""
        i = self.builder.dia_mono(self.premise)
        self.assertEqual(self.builder.formula(i), implies(diamond(conj(p(1), p(2))), diamond(p(1))))
        self.assertAccepted()

    def test_next_mono(self):
        """From A -> B derive XA -> XB"""
        i = self.builder.next_mono(self.premise)
        self.assertEqual(self.builder.formula(i), implies(Next(conj(p(1), p(2))), Next(p(1))))
        self.assertAccepted()

    def test_hence_mono(self):
        """From A -> B derive GA -> GB"""
        i = self.builder.hence_mono(self.premise)
        self.assertEqual(self.builder.formula(i), implies(Hence(conj(p(1), p(2))), Hence(p(1))))
        self.assertAccepted()

    def test_chain(self):
        """Implications compose"""
        i = self.builder.chain(self.premise, self.builder.taut(implies(p(1), conj(p(1), p(1)))))
        self.assertEqual(self.builder.formula(i), implies(conj(p(1), p(2)), conj(p(1), p(1))))
        self.assertAccepted()

    def test_consequence_reuses_lines(self):
        """A conclusion already on a line is not derived again"""
        before = len(self.builder.lines)
        i = self.builder.consequence([], implies(conj(p(1), p(2)), p(1)))
        self.assertEqual(i, self.premise)
        self.assertEqual(len(self.builder.lines), before)
        self.assertEqual(self.builder.formula(self.builder.taut(neg(neg(implies(p(1), p(1)))))), implies(p(1), p(1)))

    def test_box_dia_and(self):
        """([]a & <>b) -> <>(b & a)"""
        i = self.builder.box_dia_and(p(1), p(2))
        self.assertEqual(
            self.builder.formula(i),
            implies(conj(box(p(1)), diamond(p(2))), diamond(conj(p(2), p(1)))),
        )
        self.assertAccepted()


class TestTrouble(unittest.TestCase):
    """Tests for the compiled derivation of Trouble^k"""

    @classmethod
    def setUpClass(cls):
        cls.derivations = {k: derive_trouble(k) for k in (1, 2)}

    def test_conclusion(self):
        """The last line is Trouble^k"""
        for k, d in self.derivations.items():
            self.assertEqual(d.conclusion, trouble(k))
            self.assertEqual(d.system, SystemDescriptor(k, 2))

    def test_accepted_in_width_k_depth_2(self):
        """Trouble^k is derivable with width k and depth 2"""
        for k, d in self.derivations.items():
            with self.subTest(k=k):
                self.assertTrue(check_derivation(d, SystemDescriptor(k, 2)).accepted)
                self.assertTrue(check_derivation(d, SystemDescriptor(k + 1, 3)).accepted)
                self.assertTrue(check_derivation(d, UNBOUNDED_SYSTEM).accepted)

    def test_rejected_below_width_k(self):
        """The first CONT line is refused with width k - 1"""
        d = self.derivations[2]
        verdict = check_derivation(d, SystemDescriptor(1, None))
        self.assertFalse(verdict.accepted)
        self.assertEqual(verdict.reason, "cont_width")
        just = d.lines[verdict.line].justification
        self.assertIs(just.axiom.schema, Schema.CONT)

    def test_rejected_below_depth_2(self):
        """The CONT substituends have depth exactly 2"""
        d = self.derivations[2]
        self.assertEqual(check_derivation(d, SystemDescriptor(2, 1)).reason, "cont_depth")
        for line in d.lines:
            if line.justification.kind == "axiom" and line.justification.axiom.schema is Schema.CONT:
                self.assertEqual({depth(phi) for phi in line.justification.axiom.subst.values()}, {2})

    def test_km(self):
        """Width one suffices for k = 1 but not for k = 2"""
        self.assertTrue(check_derivation(self.derivations[1], SystemDescriptor(km=True)).accepted)
        self.assertEqual(
            check_derivation(self.derivations[2], SystemDescriptor(km=True)).reason, "km_width"
        )

    def test_milestones_in_order(self):
        """All six milestones occur, in order"""
        for k, d in self.derivations.items():
            lines = milestone_lines(d, k)
            self.assertNotIn(-1, lines)
            self.assertEqual(lines, sorted(lines))
            self.assertEqual(milestones(k)[1], implies(tangle_k(k), diamond(p(k))))

    def test_lines_valid_on_continuous_part(self):
        """Every line of Trouble^1 holds on D(3,2), whose CONT^1 instances are valid"""
        report = audit_soundness(self.derivations[1], gen_D(3, 2), SystemDescriptor(1, 2))
        self.assertTrue(report.passed, report.failures)

    def test_json_roundtrip(self):
        """The compiled derivation survives the JSON codec"""
        d = self.derivations[2]
        decoded = derivation_from_dict(json.loads(json.dumps(derivation_to_dict(d))))
        self.assertTrue(check_derivation(decoded, SystemDescriptor(2, 2)).accepted)
        self.assertEqual(decoded.conclusion, trouble(2))

    def test_k_must_be_positive(self):
        """There is no Trouble^0"""
        with self.assertRaises(KernelError):
            derive_trouble(0)


class TestMutation(unittest.TestCase):
    """Tests for derivation tampering"""

    def test_mutants_rejected_at_changed_line(self):
        """Changing a line's formula is caught exactly there"""
        original = derive_trouble(1)
        system = SystemDescriptor(1, 2)
        for seed in range(20):
            mutant, index = mutate_line(original, seed)
            self.assertNotEqual(mutant.lines[index].formula, original.lines[index].formula)
            verdict = check_derivation(mutant, system)
            self.assertFalse(verdict.accepted)
            self.assertEqual(verdict.line, index)

    def test_deterministic(self):
        """Equal seeds give equal mutants"""
        original = derive_trouble(1)
        first, i = mutate_line(original, 7)
        second, j = mutate_line(original, 7)
        self.assertEqual(i, j)
        self.assertEqual(first.lines[i].formula, second.lines[j].formula)

    def test_first_bad_line_reported(self):
        """With several broken lines the verdict names the earliest, every time"""
        original = derive_trouble(1)
        last = len(original.lines) - 1
        system = SystemDescriptor(1, 2)
        for i, j in ((0, last), (2, 5), (last // 2, last)):
            lines = list(original.lines)
            for index in (j, i):
                lines[index] = Line(neg(lines[index].formula), lines[index].justification)
            broken = Derivation(lines=lines, system=original.system)
            verdict = check_derivation(broken, system)
            self.assertFalse(verdict.accepted)
            self.assertEqual(verdict.line, i)
            self.assertEqual(verdict.to_dict(), check_derivation(broken, system).to_dict())


class TestAcceptanceMonotone(unittest.TestCase):
    """Acceptance under caps (k, n) carries over to larger caps"""

    CAPS = (0, 1, 2, 3, None)

    @staticmethod
    def at_least(a, b):
        return a is None or (b is not None and a >= b)

    def test_larger_caps_accept(self):
        """Raising either cap never rejects an accepted derivation"""
        trouble_1 = derive_trouble(1)
        candidates = {
            "trouble-1": trouble_1,
            "trouble-2": derive_trouble(2),
            "mutant": mutate_line(trouble_1, 3)[0],
        }
        for seed in range(3):
            candidates[f"template-{seed}"] = template_derivation(seed)
        for name, d in candidates.items():
            accepted = {
                (k, n): check_derivation(d, SystemDescriptor(k, n)).accepted
                for k in self.CAPS
                for n in self.CAPS
            }
            for (k, n), ok in accepted.items():
                if not ok:
                    continue
                for (k2, n2), ok2 in accepted.items():
                    if self.at_least(k2, k) and self.at_least(n2, n):
                        self.assertTrue(ok2, (name, (k, n), (k2, n2)))
        self.assertFalse(check_derivation(derive_trouble(2), SystemDescriptor(1, 2)).accepted)
        self.assertTrue(check_derivation(derive_trouble(2), SystemDescriptor(2, 2)).accepted)


class TestTemplateDerivation(unittest.TestCase):
    """Tests for random derivations built from the templates"""

    def test_accepted_without_caps(self):
        """Template derivations use no CONT instance, so every cap accepts them"""
        for seed in range(10):
            d = template_derivation(seed)
            self.assertEqual(d.system, UNBOUNDED_SYSTEM)
            self.assertGreater(len(d.lines), 4)
            self.assertTrue(check_derivation(d, UNBOUNDED_SYSTEM).accepted, seed)
            self.assertTrue(check_derivation(d, SystemDescriptor(0, 0)).accepted, seed)

    def test_deterministic(self):
        """Equal seeds give equal derivations"""
        self.assertEqual(derivation_to_dict(template_derivation(5)), derivation_to_dict(template_derivation(5)))

    def test_valid_on_continuous_models(self):
        """Every line of an accepted template derivation holds on random continuous models"""
        for seed in range(5):
            d = template_derivation(seed, steps=8)
            for model_seed in range(4):
                model = gen_random_model(model_seed, 5, 3, 3, True)
                report = audit_soundness(d, model, UNBOUNDED_SYSTEM)
                self.assertTrue(report.passed, (seed, model.name, report.failures))
                self.assertEqual(report.checked, len(d.lines))


if __name__ == "__main__":
    unittest.main()
