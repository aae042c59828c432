import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import herm
from tforms.errors import (
    DimMismatch,
    GermUndetermined,
    GridHitsZero,
    SpaceMismatch,
    UndeclaredZeroSuspected,
    ValidationError,
)
from tforms.fields import (
    CircleGrid,
    Field,
    Germ,
    GermField,
    ess_bounds,
    field_algebra,
    germ_orders_from_samples,
    is_injective_dense,
    sample_symbolic,
)

Z_HALF = GermField.from_zeros("z-0.5", [{"at": 0.5, "order": 1, "left": "-", "right": "+"}])
SQ = GermField.from_zeros("(z-0.5)^2", [{"at": 0.5, "order": 2, "left": "+", "right": "+"}])


def rand_field(rng, n, d):
    return Field(n, rng.normal(size=(n, d, d)) + 1j * rng.normal(size=(n, d, d)))


class TestGrid:
    def test_points_and_weights(self):
        g = CircleGrid(8)
        assert np.allclose(g.points, (np.arange(8) + 0.5) / 8)
        assert np.isclose(g.weight * g.n, 1.0)
        assert len(np.unique(g.points)) == 8

    def test_dyadic_zeros_avoided(self):
        # denominators dividing N never meet a half-offset point
        for n in (32, 1024, 4096):
            z = CircleGrid(n).points
            for k in range(1, 32):
                assert np.min(np.abs(z - k / 32)) > 1e-14


class TestSampledAlgebra:
    def test_double_adjoint_exact(self, rng):
        T = rand_field(rng, 64, 3)
        assert np.array_equal(field_algebra("adjoint", field_algebra("adjoint", T)).data, T.data)

    def test_adjoint_of_composition(self, rng):
        S, T = rand_field(rng, 64, 3), rand_field(rng, 64, 3)
        lhs = field_algebra("adjoint", field_algebra("compose", S, T)).data
        rhs = field_algebra("compose", T.adjoint(), S.adjoint()).data
        assert np.abs(lhs - rhs).max() <= 1e-14 * max(1, np.abs(lhs).max())

    def test_fiberwise_exact(self, rng):
        S, T = rand_field(rng, 32, 2), rand_field(rng, 32, 2)
        assert np.array_equal(field_algebra("add", S, T).data, S.data + T.data)
        assert np.array_equal(field_algebra("scale", S, 2.5).data, 2.5 * S.data)
        C = field_algebra("compose", S, T).data
        for j in range(32):
            assert np.abs(C[j] - S.data[j] @ T.data[j]).max() <= 1e-14 * 10

    def test_hermitian_propagation(self, rng):
        A = Field(16, herm(rng, 3, n=16))
        B = Field(16, herm(rng, 3, n=16))
        assert (A + B).is_hermitian()
        T = rand_field(rng, 16, 3)
        P = T.adjoint() @ T
        assert P.is_hermitian()
        assert np.all(np.linalg.eigvalsh(P.data) >= -1e-12)

    def test_mismatches(self, rng):
        with pytest.raises(SpaceMismatch):
            rand_field(rng, 16, 2) + rand_field(rng, 32, 2)
        with pytest.raises(DimMismatch):
            rand_field(rng, 16, 2) @ rand_field(rng, 16, 3)
        with pytest.raises(SpaceMismatch):
            field_algebra("add", Z_HALF, rand_field(rng, 16, 1))

    def test_validation(self):
        with pytest.raises(ValidationError):
            Field(4, np.full((4, 1, 1), np.nan))
        with pytest.raises(ValidationError):
            Field(4, np.zeros((4, 9, 9)))
        with pytest.raises(ValidationError):
            Field(4, np.zeros((5, 1, 1)))

    def test_immutable(self, rng):
        T = rand_field(rng, 4, 2)
        with pytest.raises(ValueError):
            T.data[0, 0, 0] = 1.0

    def test_diag(self, rng):
        A, B = rand_field(rng, 8, 1), rand_field(rng, 8, 2)
        D = Field.diag(A, B)
        assert D.dim == 3 and np.array_equal(D.data[:, 1:, 1:], B.data) and not np.any(D.data[:, 0, 1:])


class TestBounds:
    def test_identity(self):
        r = ess_bounds(Field.identity(16, 2))
        assert r.ess_sup == 1.0 and r.inf_singular == 1.0 and r.zero_measure == 0.0

    def test_symbolic_linear(self):
        r = ess_bounds(Z_HALF, 4096)
        assert np.isclose(r.ess_sup, 0.5 - 0.5 / 4096)
        assert np.isclose(r.inf_singular, 0.5 / 4096)
        assert r.zero_measure == 0.0

    def test_diag_attains_first_component(self):
        F = Field.diag(sample_symbolic(Z_HALF, 4096), Field.identity(4096))
        r = ess_bounds(F)
        assert np.isclose(r.inf_singular, 0.5 / 4096)
        assert ess_bounds((Z_HALF, GermField.unit("1")), 4096).inf_singular == r.inf_singular


class TestInjectivity:
    def test_examples(self):
        assert is_injective_dense(Field.identity(8))
        assert is_injective_dense(Z_HALF)
        rep = is_injective_dense(Field.constant(8, [[0.0]]))
        assert not rep and "fiber 0" in rep.witness

    def test_matrix_fiber_singular(self):
        F = Field.constant(8, np.diag([1.0, 1e-14]))
        assert not is_injective_dense(F)


class TestSampling:
    def test_examples(self):
        assert np.array_equal(sample_symbolic(GermField.unit("1"), 16).data, np.ones((16, 1, 1)))
        v = sample_symbolic(Z_HALF, 4).data[:, 0, 0].real
        assert np.allclose(v, [-0.375, -0.125, 0.125, 0.375])

    def test_order_slope(self):
        F = sample_symbolic(SQ, 4096)
        assert abs(germ_orders_from_samples(F, 0.5) - 2) <= 0.2
        cube = GermField.from_zeros("abs(z-0.25)^3", [{"at": 0.25, "order": 3}])
        assert abs(germ_orders_from_samples(sample_symbolic(cube, 4096), 0.25) - 3) <= 0.3

    def test_grid_hits_zero(self):
        f = GermField.from_zeros("z-0.5625", [{"at": 0.5625, "order": 1, "left": "-", "right": "+"}])
        with pytest.raises(GridHitsZero):
            sample_symbolic(f, 8)

    def test_tuple_is_diagonal(self):
        F = sample_symbolic((Z_HALF, SQ), 64)
        assert F.dim == 2 and not np.any(F.data[:, 0, 1])


class TestGermValidation:
    def test_undeclared_zero(self):
        with pytest.raises(UndeclaredZeroSuspected):
            GermField("z-0.5")

    def test_wrong_order(self):
        with pytest.raises(ValidationError):
            GermField.from_zeros("(z-0.5)^2", [{"at": 0.5, "order": 1}])

    def test_wrong_sign(self):
        with pytest.raises(ValidationError):
            GermField.from_zeros("z-0.5", [{"at": 0.5, "order": 1, "left": "+", "right": "+"}])

    def test_wrong_coefficient(self):
        with pytest.raises(ValidationError):
            GermField.from_zeros("z-0.5", [{"at": 0.5, "order": 1, "left": "-", "right": "+", "coeff": 5.0}])

    def test_identically_zero(self):
        with pytest.raises(UndeclaredZeroSuspected):
            GermField("0*z")

    def test_half_integer_order(self):
        f = GermField.from_zeros("sqrt(abs(z-0.5))", [{"at": 0.5, "order": "1/2"}])
        assert f.germ(0.5, "left").order == Fraction(1, 2)

    def test_negative_coeff_folds_into_signs(self):
        f = GermField.from_zeros("0.5-z", [{"at": 0.5, "order": 1, "left": "-", "right": "+", "coeff": -1.0}])
        assert f.germ(0.5, "left").sign == 1 and f.germ(0.5, "right").sign == -1

    def test_piecewise_one_sided(self):
        f = GermField.from_zeros(
            "piecewise(1, 0.5, z-0.5)+piecewise(0, 0.9, 1)",
            [],
            validate=False,
        )
        assert f.locations == []


class TestGermAlgebra:
    def test_compose_orders_add(self):
        p = Z_HALF.compose(Z_HALF)
        for side in ("left", "right"):
            g = p.germ(0.5, side)
            assert g.order == 2 and g.sign == 1
        p.validate()

    def test_compose_with_unit_picks_value(self):
        u = GermField.unit("1+z")
        p = Z_HALF * u
        assert np.isclose(p.germ(0.5, "right").coeff, 1.5)
        p.validate()

    def test_add_dominant_term(self):
        s = Z_HALF.add(SQ)
        assert s.germ(0.5, "right").order == 1
        with pytest.raises(GermUndetermined):
            Z_HALF.add(-Z_HALF, validate=False)

    def test_divide(self):
        q = SQ / Z_HALF
        assert q.germ(0.5, "right").order == 1 and q.germ(0.5, "left").sign == -1
        with pytest.raises(GermUndetermined):
            Z_HALF / SQ

    def test_sqrt_abs_and_parts(self):
        r = Z_HALF.sqrt_abs()
        assert r.germ(0.5, "left").order == Fraction(1, 2)
        r.validate()
        pp, nn = Z_HALF.positive_part(), Z_HALF.negative_part()
        assert [g.side for g in pp.germs] == ["right"] and [g.side for g in nn.germs] == ["left"]
        pp.validate()
        nn.validate()

    @settings(max_examples=25, deadline=None)
    @given(st.sampled_from(["compose", "add", "scale", "divide", "sqrt_abs", "abs", "neg"]), st.integers(0, 10**6))
    def test_commuting_square(self, op, seed):
        rng = np.random.default_rng(seed)
        c = float(rng.uniform(0.5, 2.0))
        f = GermField.from_zeros(f"{c!r}*(z-0.25)", [{"at": 0.25, "order": 1, "left": "-", "right": "+", "coeff": c}])
        g = GermField.from_zeros("abs(z-0.75)^2+0*z", [{"at": 0.75, "order": 2}])
        n = 256
        F, G = sample_symbolic(f, n).data, sample_symbolic(g, n).data
        sym, ref = {
            "compose": (lambda: f * g, lambda: F * G),
            "add": (lambda: f.add(g), lambda: F + G),
            "scale": (lambda: f.scale(-c), lambda: -c * F),
            "divide": (lambda: f / GermField.unit("2+z"), lambda: F / (2 + CircleGrid(n).points)[:, None, None]),
            "sqrt_abs": (lambda: f.sqrt_abs(), lambda: np.sqrt(np.abs(F))),
            "abs": (lambda: g.abs(), lambda: np.abs(G)),
            "neg": (lambda: -f, lambda: -F),
        }[op]
        assert np.abs(sample_symbolic(sym(), n).data - ref()).max() <= 1e-12


def test_germ_ordering_and_key():
    a = Germ(0.25, "left", 1, 1)
    b = Germ(0.25, "right", 1, -1)
    assert sorted([b, a])[0] is a
    assert a.key() == (0.25, "left")
    with pytest.raises(ValidationError):
        Germ(1.0, "left", 1, 1)
