"""Small dense complex linear algebra, batched over a leading fiber axis.

Every routine accepts either a single ``(d, d)`` matrix or a stack
``(..., d, d)`` and works fiber by fiber.  Fiber dimensions are tiny
(``d <= 8``), so the loops that remain are over matrix entries, never over
fibers.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    ContourTooTight,
    EigenvalueAtThreshold,
    KernelPresent,
    NoConvergence,
    NotHermitian,
    SingularShift,
    SpectrumOnCut,
    ValidationError,
)

HERMITIAN_TOL = 1e-12
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
MAX_DIM = 8

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


class HermitianEig(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class PolarData(NamedTuple):
    """Sign/modulus pair with ``alpha = s @ gamma @ gamma``."""

    s: np.ndarray
    gamma: np.ndarray


def as_stack(M):
    """Return ``(stack, was_single)`` with ``stack`` of shape (n, d, d)."""
    A = np.asarray(M)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {A.shape}")
    single = A.ndim == 2
    return A.reshape((-1,) + A.shape[-2:]), single


def adjoint(M):
    return np.conj(np.swapaxes(M, -1, -2))


def opnorm(M):
    """Spectral norm of each matrix in the stack."""
    M = np.asarray(M)
    if M.shape[-1] == 1:
        return np.abs(M[..., 0, 0])
    return np.linalg.norm(M, 2, axis=(-2, -1))


def ess_sup(M):
    """Largest fiber spectral norm; 0.0 for an empty stack."""
    n = opnorm(M)
    return float(n.max()) if n.size else 0.0


def rel_residual(X, Y):
    """``ess_sup(X - Y) / max(1, ess_sup(Y))``."""
    return ess_sup(np.asarray(X) - np.asarray(Y)) / max(1.0, ess_sup(Y))


def hermitian_defect(M):
    """Per-fiber ``max|M - M*|`` scaled by ``max(1, ||M||_F)``."""
    A, _ = as_stack(M)
    diff = np.abs(A - adjoint(A)).max(axis=(-2, -1))
    scale = np.maximum(1.0, np.linalg.norm(A, axis=(-2, -1)))
    return (diff / scale).reshape(np.shape(M)[:-2])


def check_hermitian(M, tol=HERMITIAN_TOL):
    defect = hermitian_defect(M)
    worst = float(np.max(defect)) if np.size(defect) else 0.0
    if worst > tol:
        raise NotHermitian(f"symmetry defect {worst:.3e} exceeds {tol:.1e}")


def _jacobi(A, V):
    """Cyclic complex Jacobi on a stack, in place.  Returns sweeps used."""
    n, d, _ = A.shape
    scale = np.linalg.norm(A, axis=(-2, -1))
    iu = np.triu_indices(d, 1)
    for sweep in range(JACOBI_MAX_SWEEPS + 1):
        off = np.sqrt(2.0 * np.sum(np.abs(A[:, iu[0], iu[1]]) ** 2, axis=-1))
        if np.all(off <= JACOBI_TOL * scale):
            return sweep
        if sweep == JACOBI_MAX_SWEEPS:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[:, p, q]
                mag = np.abs(apq)
                # pivots this small cannot affect the stopping test
                live = mag > np.maximum(1e-20 * scale, 1e-300)
                if not live.any():
                    continue
                safe = np.where(live, mag, 1.0)
                phase = np.where(live, apq, 1.0) / safe
                theta = (A[:, q, q].real - A[:, p, p].real) / (2.0 * safe)
                big = np.abs(theta) > 1e150
                th = np.where(big, 0.0, theta)
                t = np.where(th >= 0, 1.0, -1.0) / (np.abs(th) + np.sqrt(th * th + 1.0))
                t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
                t = np.where(live, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                sp = (s * phase)[:, None]
                sq = (s * np.conj(phase))[:, None]
                cc = c[:, None]
                # A <- A J
                colp = A[:, :, p].copy()
                colq = A[:, :, q]
                A[:, :, p] = cc * colp - sq * colq
                A[:, :, q] = sp * colp + cc * colq
                # A <- J^H A
                rowp = A[:, p, :].copy()
                rowq = A[:, q, :]
                A[:, p, :] = cc * rowp - sp * rowq
                A[:, q, :] = sq * rowp + cc * rowq
                A[:, p, q] = 0.0
                A[:, q, p] = 0.0
                A[:, p, p] = A[:, p, p].real
                A[:, q, q] = A[:, q, q].real
                vp = V[:, :, p].copy()
                vq = V[:, :, q]
                V[:, :, p] = cc * vp - sq * vq
                V[:, :, q] = sp * vp + cc * vq
    raise NoConvergence(f"cyclic Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")


def herm_eig(M, check=True):
    """Eigendecomposition of Hermitian matrices by cyclic Jacobi rotations.

    Eigenvalues come back ascending.  Each eigenvector is rotated so that its
    first entry of largest modulus is real and non-negative, which makes the
    output a deterministic function of the input bits.
    """
    A0, single = as_stack(M)
    if A0.shape[-1] > MAX_DIM:
        raise ValidationError(f"fiber dimension {A0.shape[-1]} exceeds {MAX_DIM}")
    if check:
        check_hermitian(A0)
    A = (0.5 * (A0 + adjoint(A0))).astype(complex)
    n, d, _ = A.shape
    V = np.broadcast_to(np.eye(d, dtype=complex), (n, d, d)).copy()
    if d > 1 and n:
        _jacobi(A, V)
    w = np.real(np.diagonal(A, axis1=-2, axis2=-1)).copy()
    order = np.argsort(w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    V = np.take_along_axis(V, order[:, None, :], axis=-1)
    idx = np.argmax(np.abs(V), axis=-2)
    lead = np.take_along_axis(V, idx[:, None, :], axis=-2)[:, 0, :]
    mag = np.abs(lead)
    fix = np.where(mag > 0, np.conj(lead) / np.where(mag > 0, mag, 1.0), 1.0)
    V = V * fix[:, None, :]
    if single:
        return HermitianEig(w[0], V[0])
    lead_shape = np.shape(M)[:-2]
    return HermitianEig(w.reshape(lead_shape + (d,)), V.reshape(np.shape(M)))


def from_eig(w, V):
    """Rebuild ``V diag(w) V*`` for stacks of eigenpairs."""
    return (V * w[..., None, :]) @ adjoint(V)


def spectral_projector(M, lam):
    """Sum of eigenprojectors of ``M`` with eigenvalue <= ``lam``."""
    w, V = herm_eig(M)
    if np.any(np.abs(w - lam) < 1e-12):
        raise EigenvalueAtThreshold(f"an eigenvalue lies within 1e-12 of {lam!r}; shift the threshold")
    keep = (w <= lam).astype(float)
    return from_eig(keep, V)


def resolvent(M, lam):
    """``(lam I - M)^{-1}``, refusing shifts within 1e-12 of the spectrum."""
    A, single = as_stack(M)
    A = A.astype(complex)
    ev = np.linalg.eigvals(A)
    if np.any(np.abs(ev - lam) < 1e-12):
        raise SingularShift(f"shift {lam!r} lies on the spectrum")
    d = A.shape[-1]
    R = np.linalg.inv(lam * np.eye(d) - A)
    return R[0] if single else R.reshape(np.shape(M))


def sign_modulus(alpha):
    """Split a Hermitian invertible ``alpha`` as ``s gamma^2``.

    ``s`` is the spectral sign (a Hermitian involution) and ``gamma`` the
    positive square root of ``|alpha|``; the two commute.
    """
    w, V = herm_eig(alpha)
    if np.any(np.abs(w) <= 1e-12):
        raise KernelPresent("alpha has an eigenvalue within 1e-12 of zero")
    s = from_eig(np.sign(w), V)
    gamma = from_eig(np.sqrt(np.abs(w)), V)
    return PolarData(s, gamma)


# ---------------------------------------------------------------------------
# principal square root


@dataclass(frozen=True)
class ContourSpec:
    """Rectangle with vertices eps -/+ i*delta and top -/+ i*delta."""

    eps: float
    top: float
    delta: float
    nodes: int = 64

    def __post_init__(self):
        if not (self.eps > 0 and self.delta > 0 and self.top > self.eps):
            raise ValidationError("contour needs eps > 0, delta > 0 and top > eps")
        if self.nodes < 16 or self.nodes % 2:
            raise ValidationError("contour node count must be even and >= 16")


def _cut_distance(ev):
    return np.where(ev.real <= 0, np.abs(ev.imag), np.abs(ev))


def _is_diagonal(A):
    d = A.shape[-1]
    if d == 1:
        return True
    off = A[:, ~np.eye(d, dtype=bool)]
    return not np.any(off)


def _quadrature(A, nodes, weights, chunk=64):
    """``sum_k weights_k sqrt(nodes_k) (nodes_k - A)^{-1}`` per fiber.

    ``nodes`` and ``weights`` have shape (n, K).  Diagonal stacks take an
    elementwise path; everything else uses batched inverses.
    """
    n, d, _ = A.shape
    coef = weights * np.sqrt(nodes)
    if _is_diagonal(A):
        a = np.diagonal(A, axis1=-2, axis2=-1)
        R = np.zeros((n, d, d), dtype=complex)
        for i in range(d):
            R[:, i, i] = np.sum(coef / (nodes - a[:, i, None]), axis=1)
        return R
    eye = np.eye(d)
    R = np.zeros((n, d, d), dtype=complex)
    for k0 in range(0, nodes.shape[1], chunk):
        lam = nodes[:, k0:k0 + chunk, None, None]
        inv = np.linalg.inv(lam * eye - A[:, None])
        R += np.einsum("nk,nkij->nij", coef[:, k0:k0 + chunk], inv)
    return R


def _rectangle_panels(eps, top, delta):
    """Panel endpoints (a, b), each of shape (n,), counterclockwise."""
    panels = []
    lo, hi = eps - 1j * delta, top - 1j * delta
    for j in range(4):
        panels.append((lo + (hi - lo) * j / 4, lo + (hi - lo) * (j + 1) / 4))
    lo, hi = top - 1j * delta, top + 1j * delta
    for j in range(2):
        panels.append((lo + (hi - lo) * j / 2, lo + (hi - lo) * (j + 1) / 2))
    lo, hi = top + 1j * delta, eps + 1j * delta
    for j in range(4):
        panels.append((lo + (hi - lo) * j / 4, lo + (hi - lo) * (j + 1) / 4))
    # left edge, graded geometrically towards the real axis
    J = int(np.clip(np.ceil(np.log2(np.max(2 * delta / eps))), 0, 60))
    heights = [delta * 2.0 ** -j for j in range(J + 1)] + [0.0 * delta]
    for a, b in zip(heights[:-1], heights[1:]):
        panels.append((eps + 1j * a, eps + 1j * b))
    rev = heights[::-1]
    for a, b in zip(rev[:-1], rev[1:]):
        panels.append((eps - 1j * a, eps - 1j * b))
    return panels


def _rectangle_rule(eps, top, delta, level):
    sub = 2 ** level
    panels = _rectangle_panels(eps, top, delta)
    a = np.array([np.broadcast_to(p[0], eps.shape) for p in panels])  # (P, n)
    b = np.array([np.broadcast_to(p[1], eps.shape) for p in panels])
    t = np.arange(sub) / sub
    pa = a[:, None, :] + (b - a)[:, None, :] * t[None, :, None]  # (P, sub, n)
    half = 0.5 * (b - a)[:, None, :] / sub
    mid = pa + half
    nodes = mid[..., None] + half[..., None] * _GL_X  # (P, sub, n, 16)
    weights = np.broadcast_to(half[..., None] * _GL_W, nodes.shape)
    nodes = np.moveaxis(nodes, 2, 0).reshape(eps.shape[0], -1)
    weights = np.moveaxis(weights, 2, 0).reshape(eps.shape[0], -1) / (2j * np.pi)
    return nodes, weights


def _auto_rectangle(A):
    ev = np.linalg.eigvals(A)
    if np.any(ev.real <= 0):
        raise ContourTooTight("spectrum is not contained in the open right half-plane")
    rho = np.abs(ev).max(axis=-1)
    eps = 0.5 * ev.real.min(axis=-1)
    top = 2.0 * rho
    delta = np.maximum(2.0 * np.abs(ev.imag).max(axis=-1), 0.1 * top)
    return eps, top, delta


def _sqrt_contour(A, spec=None, tol=1e-10, max_doublings=6):
    n = A.shape[0]
    if spec is None:
        eps, top, delta = _auto_rectangle(A)
    else:
        ev = np.linalg.eigvals(A)
        inside = (ev.real > spec.eps) & (ev.real < spec.top) & (np.abs(ev.imag) < spec.delta)
        if not inside.all():
            raise ContourTooTight("spectrum is not strictly inside the given rectangle")
        eps = np.full(n, spec.eps)
        top = np.full(n, spec.top)
        delta = np.full(n, spec.delta)
    result = np.zeros_like(A, dtype=complex)
    active = np.arange(n)
    prev = None
    for level in range(max_doublings + 1):
        nodes, weights = _rectangle_rule(eps[active], top[active], delta[active], level)
        cur = _quadrature(A[active], nodes, weights)
        if prev is not None:
            change = opnorm(cur - prev) / np.maximum(1.0, opnorm(cur))
            done = change < tol
            result[active[done]] = cur[done]
            active, cur = active[~done], cur[~done]
            if active.size == 0:
                return result
        prev = cur
    raise ContourTooTight(f"rectangle quadrature did not settle after {max_doublings} doublings")


def sqrt_on_circle(A, center, radius, tol=1e-12, start=64, max_doublings=10):
    """Principal square root by the trapezoid rule on circles.

    ``center`` and ``radius`` are per-fiber arrays; every circle must enclose
    its fiber's spectrum and stay in the open right half-plane.  Node sets are
    nested, so each doubling only evaluates the new midpoints.  Returns the
    stack of roots and the number of nodes used.
    """
    A, _ = as_stack(A)
    A = A.astype(complex)
    n = A.shape[0]
    center = np.broadcast_to(np.asarray(center, dtype=float), (n,))
    radius = np.broadcast_to(np.asarray(radius, dtype=float), (n,))
    if np.any(center - radius <= 0):
        raise ContourTooTight("circle crosses the branch cut")

    def partial(idx, K, offset):
        theta = 2 * np.pi * (np.arange(offset, K, 2 if offset else 1)) / K
        e = np.exp(1j * theta)[None, :]
        nodes = center[idx, None] + radius[idx, None] * e
        weights = radius[idx, None] * e / K
        return _quadrature(A[idx], nodes, weights)

    K = start
    idx = np.arange(n)
    cur = partial(idx, K, 0)
    result = np.zeros_like(A)
    for _ in range(max_doublings):
        K *= 2
        new = 0.5 * cur + partial(idx, K, 1)
        change = opnorm(new - cur) / np.maximum(1.0, opnorm(new))
        done = change < tol
        result[idx[done]] = new[done]
        idx, cur = idx[~done], new[~done]
        if idx.size == 0:
            return result, K
    raise ContourTooTight(f"circle quadrature did not settle with {K} nodes")


def _denman_beavers(A, max_iter=50):
    n, d, _ = A.shape
    Y = A.astype(complex).copy()
    Z = np.broadcast_to(np.eye(d, dtype=complex), A.shape).copy()
    scaling = np.ones(n, dtype=bool)
    for _ in range(max_iter):
        detY = np.abs(np.linalg.det(Y))
        detZ = np.abs(np.linalg.det(Z))
        mu = np.where(scaling, (detY * detZ) ** (-1.0 / (2 * d)), 1.0)[:, None, None]
        Yi = np.linalg.inv(Y)
        Zi = np.linalg.inv(Z)
        Yn = 0.5 * (mu * Y + Zi / mu)
        Zn = 0.5 * (mu * Z + Yi / mu)
        step = np.linalg.norm(Yn - Y, axis=(-2, -1)) / np.maximum(1e-300, np.linalg.norm(Yn, axis=(-2, -1)))
        scaling &= step > 1e-2
        Y, Z = Yn, Zn
        if np.all(step <= 1e-13):
            return Y
    raise NoConvergence("Denman-Beavers iteration hit its 50-step cap")


def principal_sqrt(M, method="eig", contour=None):
    """Principal square root of ``M`` (spectrum off the closed negative axis).

    ``method`` selects the route: ``"eig"`` (Hermitian positive input, via
    :func:`herm_eig`), ``"contour"`` (resolvent quadrature on a rectangle in
    the right half-plane; pass a :class:`ContourSpec` to fix it, otherwise one
    is fitted to each fiber's spectrum) or ``"iteration"`` (scaled
    Denman-Beavers).  Real input gives real output.
    """
    A, single = as_stack(M)
    is_real = not np.iscomplexobj(A) or not np.any(np.imag(A))
    if method == "eig":
        w, V = herm_eig(A)
        if np.any(w < -1e-8):
            raise SpectrumOnCut("negative eigenvalue; eig method needs a positive matrix")
        R = from_eig(np.sqrt(np.clip(w, 0.0, None)), V)
    elif method in ("contour", "iteration"):
        A = A.astype(complex)
        ev = np.linalg.eigvals(A)
        if np.any(_cut_distance(ev) < 1e-8):
            raise SpectrumOnCut("an eigenvalue lies within 1e-8 of the branch cut")
        if method == "contour":
            R = _sqrt_contour(A, contour)
        else:
            R = _denman_beavers(A)
    else:
        raise ValueError(f"unknown method {method!r}")
    if is_real:
        R = R.real
    scale = np.maximum(1.0, opnorm(A))
    bad = opnorm(R @ R - A) > 1e-9 * scale
    if np.any(bad):
        if method == "contour":
            raise ContourTooTight("quadrature residual above 1e-9")
        raise NoConvergence(f"square root residual above 1e-9 ({method})")
    return R[0] if single else R.reshape(np.shape(M))
