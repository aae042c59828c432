import numpy as np

from tforms.classify import (
    classify_form,
    congruent,
    congruent_variant,
    germ_field_from_factors,
    hyperbolic_instance,
    mutated_variant,
    random_form_pair,
    random_germ_field,
    ratio_oracle,
)
from tforms.fields import GermField
from tforms.forms import discriminant, is_hyperbolic
from tforms.torsion import germ_signature

Z_HALF = GermField.from_zeros("z-0.5", [{"at": 0.5, "order": 1, "left": "-", "right": "+"}])
ABS = GermField.from_zeros("abs(z-0.5)", [{"at": 0.5, "order": 1}])
ABS2 = GermField.from_zeros("2*abs(z-0.5)", [{"at": 0.5, "order": 1, "coeff": 2.0}])


def sign_at(f, at, side, r=1e-3):
    return int(np.sign(f(at + (r if side == "right" else -r))))


class TestClassifyForm:
    def test_trivial(self):
        rep = classify_form(discriminant(GermField.unit("2+cos(2*pi*z)")), ns=False)
        assert len(rep.positive) == 0 and len(rep.negative) == 0
        assert rep.mode == "exact-symbolic"

    def test_z_half(self):
        rep = classify_form(discriminant(Z_HALF), ns=False)
        assert rep.positive.entries == ((0.5, "right", 1, 1),)
        assert rep.negative.entries == ((0.5, "left", 1, -1),)

    def test_product_signs_match_evaluation(self):
        f = germ_field_from_factors([(0.25, 1, False), (0.5, 2, False)])
        rep = classify_form(discriminant(f), ns=False)
        got = {(at, side): (order, sg) for at, side, order, sg in rep.positive.entries + rep.negative.entries}
        assert len(got) == 4
        for at, order in ((0.25, 1), (0.5, 2)):
            for side in ("left", "right"):
                assert got[(at, side)] == (order, sign_at(f, at, side))

    def test_slots_carry_fixed_signs(self, rng):
        for _ in range(10):
            a, _ = random_germ_field(rng)
            rep = classify_form(discriminant(a), ns=False)
            assert all(e[3] == 1 for e in rep.positive.entries)
            assert all(e[3] == -1 for e in rep.negative.entries)

    def test_ns_exponents(self):
        rep = classify_form(discriminant(Z_HALF), ns_grid=65536)
        assert all(0.95 <= e <= 1.05 for e in rep.ns)

    def test_json(self):
        js = classify_form(discriminant(Z_HALF), ns=False).to_json()
        assert js["mode"] == "exact-symbolic"
        assert js["certificates"]["split"]["signature_match"] is True


class TestCongruent:
    def test_self(self):
        ans = congruent(discriminant(Z_HALF), discriminant(Z_HALF), n=512)
        assert ans.value and ans.mode == "exact"
        for c in ans.certificates:
            assert c.ok
            assert np.abs(c.field.data - 1).max() <= 1e-9

    def test_doubling(self):
        ans = congruent(discriminant(ABS), discriminant(ABS2), n=512)
        assert ans.value
        k = ans.certificates[0].field.data
        assert np.abs(k - np.sqrt(2)).max() <= 1e-9

    def test_signed_vs_absolute(self):
        ans = congruent(discriminant(Z_HALF), discriminant(ABS), n=512)
        assert not ans.value and ans.mode == "exact"
        assert ans.distinguisher == (0.5, "left", 1)

    def test_matches_signature_equality(self, rng):
        for _ in range(20):
            phi, psi, built = random_form_pair(rng)
            ans = congruent(phi, psi, n=256, certify=False)
            cp, cq = classify_form(phi, ns=False), classify_form(psi, ns=False)
            same = cp.positive.entries == cq.positive.entries and cp.negative.entries == cq.negative.entries
            assert ans.value == same == built


class TestRatioOracle:
    def test_equal(self):
        v = ratio_oracle(Z_HALF, Z_HALF)
        assert v.answer == "congruent" and v.dilatation == (1.0, 1.0)

    def test_bounded_perturbation(self):
        beta = GermField.from_zeros(
            "(z-0.5)+(z-0.5)^2*cos(2*pi*z)", [{"at": 0.5, "order": 1, "left": "-", "right": "+"}]
        )
        assert ratio_oracle(Z_HALF, beta).answer == "congruent"

    def test_cube(self):
        cube = GermField.from_zeros("(z-0.5)^3", [{"at": 0.5, "order": 3, "left": "-", "right": "+"}])
        assert ratio_oracle(Z_HALF, cube).answer == "not-congruent"

    def test_sign_mismatch(self):
        assert ratio_oracle(Z_HALF, ABS).answer == "not-congruent"

    def test_generators(self, rng):
        for _ in range(10):
            a, spec = random_germ_field(rng)
            assert ratio_oracle(a, congruent_variant(rng, spec)).answer != "not-congruent"
            assert ratio_oracle(a, mutated_variant(rng, spec, "order")).answer != "congruent"


class TestHyperbolicConsistency:
    def test_instances(self, rng):
        for i in range(4):
            phi = hyperbolic_instance(rng) if i % 2 == 0 else discriminant(random_germ_field(rng)[0])
            rep = classify_form(phi, ns=False)
            expect = rep.positive.unsigned() == rep.negative.unsigned()
            assert is_hyperbolic(phi, n=512).value == expect

    def test_signature_of_pair(self, rng):
        phi = hyperbolic_instance(rng)
        rep = classify_form(phi, ns=False)
        assert rep.positive.unsigned() == rep.negative.unsigned()
        assert len(germ_signature(phi.X)) == len(rep.positive) + len(rep.negative)
