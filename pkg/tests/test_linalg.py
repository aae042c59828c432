import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import herm
from tforms import linalg
from tforms.errors import (
    EigenvalueAtThreshold,
    KernelPresent,
    NotHermitian,
    SingularShift,
    SpectrumOnCut,
    ValidationError,
)


def hermitian_matrices(max_dim=linalg.MAX_DIM):
    @st.composite
    def build(draw):
        d = draw(st.integers(1, max_dim))
        seed = draw(st.integers(0, 2**32 - 1))
        scale = draw(st.sampled_from([1e-6, 1.0, 1e3]))
        return herm(np.random.default_rng(seed), d, scale=scale)

    return build()


class TestHermEig:
    def test_identity(self):
        w, V = linalg.herm_eig(np.eye(2))
        assert np.allclose(w, [1, 1]) and np.allclose(V, np.eye(2))

    def test_diagonal_sorted(self):
        w, _ = linalg.herm_eig(np.diag([3.0, -2.0]))
        assert np.allclose(w, [-2, 3])

    def test_swap_matrix(self):
        M = np.array([[0.0, 1.0], [1.0, 0.0]])
        w, V = linalg.herm_eig(M)
        # characteristic polynomial t^2 - 1
        assert np.allclose(w, np.sort(np.roots([1, 0, -1]).real), atol=1e-15)
        s = 1 / np.sqrt(2)
        assert np.allclose(V[:, 0], [s, -s]) and np.allclose(V[:, 1], [s, s])

    @settings(max_examples=60, deadline=None)
    @given(hermitian_matrices())
    def test_invariants_against_numpy(self, M):
        w, V = linalg.herm_eig(M)
        scale = max(1.0, np.linalg.norm(M, 2))
        assert np.linalg.norm(M @ V - V * w, 2) <= 1e-10 * scale
        assert np.linalg.norm(V.conj().T @ V - np.eye(len(w)), 2) <= 1e-12
        assert np.all(np.diff(w) >= 0)
        assert np.allclose(w, np.linalg.eigvalsh(M), atol=1e-12 * scale)
        # phase tie-break: first entry of largest modulus has Re >= 0
        for j in range(len(w)):
            col = V[:, j]
            k = int(np.argmax(np.abs(col) > np.abs(col).max() * (1 - 1e-9)))
            assert col[k].real >= -1e-12

    def test_deterministic_bits(self, rng):
        M = herm(rng, 6)
        a = linalg.herm_eig(M)
        b = linalg.herm_eig(M.copy())
        assert np.array_equal(a.eigenvalues, b.eigenvalues) and np.array_equal(a.eigenvectors, b.eigenvectors)

    def test_stack(self, rng):
        M = herm(rng, 3, n=50)
        w, V = linalg.herm_eig(M)
        assert w.shape == (50, 3) and V.shape == (50, 3, 3)
        assert linalg.rel_residual(linalg.from_eig(w, V), M) <= 1e-12

    def test_not_hermitian(self):
        with pytest.raises(NotHermitian):
            linalg.herm_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_tiny_offdiagonal(self):
        M = np.array([[1.0, 1e-310], [1e-310, 2.0]])
        w, _ = linalg.herm_eig(M)
        assert np.allclose(w, [1, 2])


class TestProjector:
    def test_examples(self):
        assert np.allclose(linalg.spectral_projector(np.diag([-1.0, 2.0]), 0.0), np.diag([1, 0]))
        assert np.allclose(linalg.spectral_projector(np.diag([-1.0, 2.0]), 5.0), np.eye(2))
        P = linalg.spectral_projector(np.array([[0.0, 1.0], [1.0, 0.0]]), 0.0)
        assert np.allclose(P, 0.5 * np.array([[1, -1], [-1, 1]]))

    def test_threshold_on_eigenvalue(self):
        with pytest.raises(EigenvalueAtThreshold):
            linalg.spectral_projector(np.diag([0.0, 1.0]), 0.0)

    def test_nested(self, rng):
        M = herm(rng, 5, n=20)
        P1 = linalg.spectral_projector(M, -0.3)
        P2 = linalg.spectral_projector(M, 0.7)
        assert linalg.rel_residual(P1 @ P2, P1) <= 1e-10
        assert linalg.rel_residual(P1 @ P1, P1) <= 1e-10
        assert linalg.rel_residual(M @ P2, P2 @ M) <= 1e-10


class TestSqrt:
    def test_examples(self):
        for method in ("eig", "contour", "iteration"):
            assert np.allclose(linalg.principal_sqrt(np.eye(3), method), np.eye(3))
            assert np.allclose(linalg.principal_sqrt(np.diag([4.0, 9.0]), method), np.diag([2.0, 3.0]))

    def test_methods_agree_on_positive(self, rng):
        for d in (1, 2, 4, 8):
            w = rng.uniform(0.1, 10, size=(20, d))
            Q, _ = np.linalg.qr(rng.normal(size=(20, d, d)) + 1j * rng.normal(size=(20, d, d)))
            A = (Q * w[:, None, :]) @ np.conj(np.swapaxes(Q, 1, 2))
            R = [linalg.principal_sqrt(A, m) for m in ("eig", "contour", "iteration")]
            assert linalg.rel_residual(R[1], R[0]) <= 1e-9
            assert linalg.rel_residual(R[2], R[0]) <= 1e-9

    def test_near_identity_matches_scipy(self, rng):
        for _ in range(10):
            G = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
            G /= np.linalg.norm(G, 2)
            M = np.eye(3) + 0.4 * G
            Rc = linalg.principal_sqrt(M, "contour")
            Ri = linalg.principal_sqrt(M, "iteration")
            assert np.linalg.norm(Rc - Ri, 2) <= 1e-9
            assert np.linalg.norm(Rc - scipy.linalg.sqrtm(M), 2) <= 1e-9

    def test_real_input_real_output(self, rng):
        M = np.eye(3) + 0.3 * rng.normal(size=(3, 3))
        R = linalg.principal_sqrt(M, "contour")
        assert not np.iscomplexobj(R)
        assert np.all(np.linalg.eigvals(R).real > 0)

    def test_fixed_contour(self):
        spec = linalg.ContourSpec(eps=0.5, top=20.0, delta=1.0)
        R = linalg.principal_sqrt(np.diag([1.0, 16.0]), "contour", spec)
        assert np.allclose(R, np.diag([1.0, 4.0]), atol=1e-10)

    def test_contour_spec_validation(self):
        with pytest.raises(ValidationError):
            linalg.ContourSpec(eps=0.0, top=1.0, delta=1.0)
        with pytest.raises(ValidationError):
            linalg.ContourSpec(eps=0.1, top=1.0, delta=1.0, nodes=15)

    def test_cut(self):
        with pytest.raises(SpectrumOnCut):
            linalg.principal_sqrt(np.diag([-1.0, 1.0]), "contour")
        with pytest.raises(SpectrumOnCut):
            linalg.principal_sqrt(np.diag([-1.0, 1.0]), "eig")

    def test_circle_rule_nonnormal(self, rng):
        T = np.eye(3) + 0.3 * rng.normal(size=(3, 3))
        M = T @ np.diag([0.5, 1.0, 1.4]) @ np.linalg.inv(T)
        R, K = linalg.sqrt_on_circle(M, 1.0, 0.75)
        assert K >= 64
        assert np.linalg.norm(R[0] - scipy.linalg.sqrtm(M), 2) <= 1e-10


class TestResolventAndPolar:
    def test_resolvent_examples(self, rng):
        assert np.allclose(linalg.resolvent(np.zeros((2, 2)), 1.0), np.eye(2))
        assert np.allclose(linalg.resolvent(np.array([[2.0]]), 3.0), [[1.0]])
        M = rng.normal(size=(3, 3))
        lam = 0.3 + 2.0j
        R = linalg.resolvent(M, lam)
        assert np.linalg.norm((lam * np.eye(3) - M) @ R - np.eye(3)) < 1e-10

    def test_singular_shift(self):
        with pytest.raises(SingularShift):
            linalg.resolvent(np.diag([1.0, 2.0]), 2.0)

    def test_sign_modulus_examples(self):
        s, g = linalg.sign_modulus(np.diag([4.0, -9.0]))
        assert np.allclose(s, np.diag([1, -1])) and np.allclose(g, np.diag([2, 3]))
        s, g = linalg.sign_modulus(np.array([[0.0, 2.0], [2.0, 0.0]]))
        assert np.allclose(s, [[0, 1], [1, 0]]) and np.allclose(g, np.sqrt(2) * np.eye(2))
        A = np.array([[2.0, 1.0], [1.0, 2.0]])
        s, g = linalg.sign_modulus(A)
        assert np.allclose(s, np.eye(2)) and np.allclose(g, linalg.principal_sqrt(A))

    def test_sign_modulus_random(self, rng):
        A = herm(rng, 4, n=1000)
        s, g = linalg.sign_modulus(A)
        assert linalg.rel_residual(s @ g @ g, A) <= 1e-10
        assert linalg.rel_residual(s @ g, g @ s) <= 1e-10
        assert linalg.rel_residual(s @ s, np.broadcast_to(np.eye(4), s.shape)) <= 1e-10

    def test_kernel(self):
        with pytest.raises(KernelPresent):
            linalg.sign_modulus(np.diag([0.0, 1.0]))
