import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tforms.errors import ParseError
from tforms.expr import Expr

Z = (np.arange(257) + 0.5) / 257


@pytest.mark.parametrize(
    "text, ref",
    [
        ("z-0.5", lambda z: z - 0.5),
        ("(z-0.5)^2", lambda z: (z - 0.5) ** 2),
        ("(z-0.5)**3", lambda z: (z - 0.5) ** 3),
        ("abs(z-0.25)*(1+z/2)", lambda z: np.abs(z - 0.25) * (1 + z / 2)),
        ("sin(2*pi*z)+cos(4*pi*z)", lambda z: np.sin(2 * np.pi * z) + np.cos(4 * np.pi * z)),
        ("sqrt(abs(z-0.5))", lambda z: np.sqrt(np.abs(z - 0.5))),
        ("-z^-1", lambda z: -1 / z),
        ("posp(z-0.5)", lambda z: np.where(z > 0.5, z - 0.5, 1.0)),
        ("negp(z-0.5)", lambda z: np.where(z < 0.5, z - 0.5, -1.0)),
        ("piecewise(z, 0.5, 1-z)", lambda z: np.where(z < 0.5, z, 1 - z)),
        ("piecewise(1, 0.25, 2, 0.75, 3)", lambda z: np.select([z < 0.25, z < 0.75], [1.0, 2.0], 3.0)),
    ],
)
def test_evaluation_matches_numpy(text, ref):
    e = Expr(text)
    assert np.allclose(e(Z), ref(Z), rtol=0, atol=1e-15)


def test_breakpoints():
    assert Expr("piecewise(1, 0.25, 2, 0.75, 3)").breakpoints == [0.25, 0.75]
    assert Expr("z").breakpoints == []


def test_constant_broadcasts():
    assert Expr("2").__call__(Z).shape == Z.shape


@pytest.mark.parametrize(
    "text, column",
    [
        ("(z-0.5", 0),
        ("z^0.5", 2),
        ("z + y", 4),
        ("exp(z)", 0),
        ("z.real", 0),
        ("__import__('os')", 0),
        ("piecewise(z, 0.5, 1, 0.25, 2)", 21),
    ],
)
def test_parse_errors_carry_columns(text, column):
    with pytest.raises(ParseError) as info:
        Expr(text)
    assert info.value.column == column


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=4), st.floats(0.01, 0.99))
def test_polynomials(coeffs, z0):
    text = "+".join(f"({c!r})*(z-{z0!r})^{k}" for k, c in enumerate(coeffs))
    ref = sum(c * (Z - z0) ** k for k, c in enumerate(coeffs))
    assert np.allclose(Expr(text)(Z), ref, atol=1e-12)
