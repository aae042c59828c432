"""Seeded random sampled instances with known structure.

Each builder returns plain :class:`~tforms.fields.Field` objects together
with the data an independent check needs (for example the exact ``k``).
Symbolic random forms live in :mod:`tforms.classify`.
"""

import numpy as np

from . import linalg
from .fields import CircleGrid, Field


def _cplx(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_unitary(rng, n, d):
    Q, R = np.linalg.qr(_cplx(rng, (n, d, d)))
    ph = np.diagonal(R, axis1=1, axis2=2)
    return Q * (ph / np.abs(ph))[:, None, :]


def hermitian_with_spectrum(rng, w):
    """``U diag(w) U*`` with Haar-like ``U``; ``w`` has shape (n, d)."""
    n, d = w.shape
    U = random_unitary(rng, n, d)
    return (U * w[:, None, :]) @ linalg.adjoint(U)


def random_hermitian(rng, n, d, scale=1.0):
    G = _cplx(rng, (n, d, d))
    return scale * 0.5 * (G + linalg.adjoint(G))


def torsion_spectrum(rng, n, d, signed=True, low=1e-4):
    """Eigenvalues in ``[low, 1]`` on a log scale, with random signs when ``signed``."""
    w = 10.0 ** rng.uniform(np.log10(low), 0.0, size=(n, d))
    if signed:
        w *= rng.choice([-1.0, 1.0], size=(n, d))
    return w


def random_alpha(rng, n, d, signed=True, low=1e-4):
    """Injective Hermitian field with ``||alpha|| <= 1`` and small eigenvalues."""
    return Field(n, hermitian_with_spectrum(rng, torsion_spectrum(rng, n, d, signed, low)))


def isometry_pair(rng, n, d, product=0.9, signed=True):
    """``(alpha, beta, f, g, F)`` with ``beta = alpha + alpha F alpha`` and ``||alpha|| ||F|| = product``.

    ``F`` is Hermitian, ``f = 1 + alpha F`` and ``g = 1``, so ``f alpha = beta g``
    and ``f* g = 1 + F alpha``.
    """
    alpha = random_alpha(rng, n, d, signed)
    a = alpha.data
    F = random_hermitian(rng, n, d)
    F *= product / (linalg.ess_sup(F) * linalg.ess_sup(a))
    b = a + a @ F @ a
    b = 0.5 * (b + linalg.adjoint(b))
    I = np.broadcast_to(np.eye(d), a.shape)
    return alpha, Field(n, b), Field(n, I + a @ F), Field.identity(n, d), Field(n, F)


def positive_pair(rng, n, d, low=1e-3):
    """Positive ``alpha_phi``, ``alpha_psi`` with iso data ``(f, g)`` and the exact ``k``.

    ``k = alpha^{1/2} S alpha^{-1/2}`` for a positive Hermitian ``S``; then
    ``f`` is random invertible, ``g = f^{-*} k^2`` and
    ``alpha_psi = g alpha_phi f^{-1}``.
    """
    alpha = random_alpha(rng, n, d, signed=False, low=low)
    a = alpha.data
    w, V = linalg.herm_eig(a)
    root = linalg.from_eig(np.sqrt(w), V)
    iroot = linalg.from_eig(1 / np.sqrt(w), V)
    S = hermitian_with_spectrum(rng, rng.uniform(0.25, 4.0, size=(n, d)))
    k = root @ S @ iroot
    I = np.eye(d)
    fm = I + 0.3 * _cplx(rng, (n, d, d)) / np.sqrt(d)
    gm = np.linalg.inv(linalg.adjoint(fm)) @ k @ k
    b = gm @ a @ np.linalg.inv(fm)
    b = 0.5 * (b + linalg.adjoint(b))
    return alpha, Field(n, b), Field(n, fm), Field(n, gm), Field(n, k)


def superfinite_pair(rng, n, d):
    """``(alpha, f)`` with ``f = e^{i alpha}(1 + alpha K)``, so ``alpha^{-1} f alpha = e^{i alpha}(1 + K alpha)``."""
    alpha = random_alpha(rng, n, d)
    a = alpha.data
    K = _cplx(rng, (n, d, d))
    K *= 0.5 / linalg.ess_sup(K)
    w, V = linalg.herm_eig(a)
    u = linalg.from_eig(np.exp(1j * w), V)
    I = np.eye(d)
    return alpha, Field(n, u @ (I + a @ K)), Field(n, u @ (I + K @ a))


def positivity_pair(rng, n, d):
    """``(alpha, beta)`` with ``beta > 0`` and ``beta alpha = C C*``."""
    T = _cplx(rng, (n, d, d))
    b = linalg.adjoint(T) @ T + 0.1 * np.eye(d)
    C = _cplx(rng, (n, d, d))
    a = np.linalg.solve(b, C @ linalg.adjoint(C))
    return Field(n, a), Field(n, b)


def germ_alpha(n, at=0.5, order=1, d=1, rng=None):
    """Sampled ``|z - at|^order`` in the first eigen-direction, rotated when ``rng`` is given."""
    z = CircleGrid(n).points
    w = np.ones((n, d))
    w[:, 0] = np.abs(z - at) ** order
    if rng is None or d == 1:
        a = np.zeros((n, d, d), dtype=complex)
        a[:, np.arange(d), np.arange(d)] = w
        return Field(n, a)
    U = random_unitary(rng, 1, d)[0]
    return Field(n, (U * w[:, None, :]) @ U.conj().T)
