"""Congruence certificates built from holomorphic functional calculus.

* :func:`excision_isometry` turns isometry data ``(f, g)`` between
  discriminant forms into an explicit ``h`` with ``g* beta g = h* alpha h``
  on an excised block, via square roots of ``1 + F alpha`` computed on a
  circle around 1.
* :func:`congruence_positive` takes iso data between positive discriminant
  forms and produces ``k = sqrt(f* g)`` on a rectangle contour, with
  ``f* alpha_psi f = k alpha_phi k*``.
* :func:`complete_diagram`, :func:`spectrum_positivity`, :func:`add_forms`
  and :func:`superfinite_check` are the supporting fiberwise arguments.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import (
    ContourFailure,
    ContourTooTight,
    HypothesisViolated,
    NegativityDetected,
    NotConverging,
    SmallnessUnreachable,
    SpectrumNotPositive,
)
from .fields import DEFAULT_GRID, Field, as_field
from .forms import TorsionForm, _eye_like, _intervals, _nudge_eps
from .torsion import BOUND, FLOOR, TorsionObject

IDENTITY_TOL = 1e-9
CERT_TOL = 1e-8


def _rel(X, Y):
    """``ess_sup(X - Y) / max(ess_sup(Y), tiny)``: relative to the target size."""
    return linalg.ess_sup(X - Y) / max(linalg.ess_sup(Y), 1e-300)


@dataclass
class CongruenceCertificate:
    """Explicit congruence with its verified residuals.

    ``kind`` is ``"direct"`` (``target = map* source map``),
    ``"excision-pair"`` (the identity holds on the excised block) or
    ``"k-pair"`` (``f* alpha_psi f = k alpha_phi k*``).  ``field`` holds ``h``
    or ``k``; ``map`` the resulting congruence when one is available.
    """

    kind: str
    field: Field
    residual: float
    identities: dict = field(default_factory=dict)
    excised: dict = field(default_factory=dict)
    map: object = None

    @property
    def ok(self):
        return self.residual <= CERT_TOL and all(v <= IDENTITY_TOL for v in self.identities.values())

    def to_json(self, include_field=False):
        out = {
            "kind": self.kind,
            "residual": float(self.residual),
            "identities": {k: float(v) for k, v in sorted(self.identities.items())},
            "excised": self.excised,
            "ok": bool(self.ok),
        }
        if include_field:
            d = self.field.data
            out["field"] = {"dim": int(self.field.dim), "grid": int(self.field.n),
                            "re": d.real.ravel().tolist(), "im": d.imag.ravel().tolist()}
        return out

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)


# ---------------------------------------------------------------------------
# excision certificate


def recover_F(alpha, f, g):
    """``F = alpha^{-1}(g* f - 1)``, checked against ``f* g = 1 + F alpha``."""
    a = as_field(alpha).data
    fm, gm = as_field(f).data, as_field(g).data
    I = _eye_like(a)
    F = np.linalg.solve(a, linalg.adjoint(gm) @ fm - I)
    res = linalg.rel_residual(linalg.adjoint(fm) @ gm, I + F @ a)
    return F, res


def excision_isometry(alpha, beta, f, g, eps=None):
    """Certificate for ``disc(alpha) ~ disc(beta)`` from data with ``g* f = 1 + alpha F``.

    ``f alpha = beta g`` is the isometry square.  When ``||alpha|| ||F||`` is
    not below ``1 - 1e-3``, ``alpha`` is first excised to the block
    ``|alpha| <= eps`` with ``eps ||F|| < 1``.  On that block, with
    ``alpha = s gamma^2``, the roots ``h1^2 = 1 + gamma F s gamma``,
    ``h2^2 = 1 + gamma^2 F s`` and ``h^2 = 1 + F s gamma^2`` come from one
    circle quadrature, and ``g* beta g = h* alpha h`` is checked there.
    Without excision and with ``g`` invertible the certificate is direct:
    ``beta = (h g^{-1})* alpha (h g^{-1})``.
    """
    A, B = as_field(alpha), as_field(beta)
    a, b = A.data, B.data
    fm, gm = as_field(f).data, as_field(g).data
    I = _eye_like(a)
    sq = linalg.rel_residual(fm @ a, b @ gm)
    if sq > 1e-10:
        raise HypothesisViolated(f"f alpha = beta g fails (residual {sq:.2e})")
    F, rec = recover_F(A, f, g)
    if rec > 1e-10:
        raise HypothesisViolated(f"f* g = 1 + F alpha fails (residual {rec:.2e})")
    normF = linalg.ess_sup(F)
    if normF > BOUND:
        raise SmallnessUnreachable(f"recovered F is unbounded on this grid (|F| = {normF:.3e})")
    norm_a = linalg.ess_sup(a)
    excised = {}
    if normF * norm_a >= 1 - 1e-3:
        target = 0.5 / normF if eps is None else eps
        ev = np.abs(linalg.herm_eig(a).eigenvalues)
        eps = _nudge_eps(ev, target)
        if eps * normF >= 1:
            raise SmallnessUnreachable("no eps with eps ||F|| < 1")
        w, V = linalg.herm_eig(a)
        Q = linalg.from_eig((np.abs(w) <= eps).astype(float), V)
        P = I - Q
        mask = np.real(np.trace(Q, axis1=1, axis2=2)) > 0.5
        excised = {"eps": float(eps), "alpha": _intervals(mask, A.grid), "beta": _intervals(mask, A.grid)}
    else:
        Q, P = I, np.zeros_like(I)
    aQ = Q @ a @ Q + P
    FQ = Q @ F @ Q
    s, gamma = linalg.sign_modulus(aQ)
    r = linalg.opnorm(FQ) * linalg.opnorm(aQ - P)
    if np.any(r >= 1):
        raise SmallnessUnreachable("||alpha|| ||F|| >= 1 on the excised block")
    n, d, _ = a.shape
    stack = np.concatenate([I + gamma @ FQ @ s @ gamma, I + gamma @ gamma @ FQ @ s, I + FQ @ s @ gamma @ gamma])
    center = np.ones(3 * n)
    radius = np.tile(0.5 * (1 + r), 3)
    try:
        roots, _ = linalg.sqrt_on_circle(stack, center, radius)
    except ContourTooTight as exc:
        raise ContourFailure(str(exc)) from None
    h1, h2, h = roots[:n], roots[n:2 * n], roots[2 * n:]
    hH = linalg.adjoint(h)
    ident = {
        "h_squared": linalg.rel_residual(h @ h, stack[2 * n:]),
        "s_h2": linalg.rel_residual(s @ h2, hH @ s),
        "gamma_h1": linalg.rel_residual(gamma @ h1, h2 @ gamma),
        "gamma_h": linalg.rel_residual(gamma @ h, h1 @ gamma),
    }
    target = Q @ linalg.adjoint(gm) @ b @ gm @ Q
    got = Q @ hH @ aQ @ h @ Q
    res = _rel(got, target)
    ident["alpha_plus_aFa"] = _rel(Q @ (a + a @ F @ a) @ Q, target)
    cmap = None
    kind = "excision-pair"
    if not excised:
        kind = "direct"
        cmap = A.with_data(h @ np.linalg.inv(gm))
        res = max(res, _rel(linalg.adjoint(cmap.data) @ a @ cmap.data, b))
    return CongruenceCertificate(kind, A.with_data(h), res, ident, excised, cmap)


# ---------------------------------------------------------------------------
# positive congruence certificate


def positive_iso_data(alpha_phi, alpha_psi):
    """Iso data ``(f, g)`` between positive fields by matching sorted eigenbases.

    ``f = V_psi V_phi*`` and ``g = alpha_psi f alpha_phi^{-1}``, so that
    ``g alpha_phi = alpha_psi f``.
    """
    A, B = as_field(alpha_phi), as_field(alpha_psi)
    if A.dim == 1:
        f = np.ones_like(A.data)
        return A.with_data(f), A.with_data(B.data / A.data)
    wa, Va = linalg.herm_eig(A.data)
    wb, Vb = linalg.herm_eig(B.data)
    f = Vb @ linalg.adjoint(Va)
    g = B.data @ f @ np.linalg.inv(A.data)
    return A.with_data(f), A.with_data(g)


def congruence_positive(alpha_phi, alpha_psi, f, g):
    """``k = sqrt(f* g)`` with ``k alpha_phi = alpha_phi k*`` and ``f* alpha_psi f = k alpha_phi k*``.

    Inputs are positive Hermitian fields and iso data with
    ``g alpha_phi = alpha_psi f``.  The spectrum of ``f* g`` must be real
    and above 1e-6 in every fiber.
    """
    A, B = as_field(alpha_phi), as_field(alpha_psi)
    a, b = A.data, B.data
    fm, gm = as_field(f).data, as_field(g).data
    sq = linalg.rel_residual(gm @ a, b @ fm)
    if sq > 1e-10:
        raise HypothesisViolated(f"g alpha_phi != alpha_psi f (residual {sq:.2e})")
    M = linalg.adjoint(fm) @ gm
    ev = np.linalg.eigvals(M)
    scale = np.maximum(1.0, np.abs(ev).max(axis=-1, keepdims=True))
    if np.any(np.abs(ev.imag) > 1e-8 * scale) or np.any(ev.real <= 1e-6):
        raise SpectrumNotPositive(f"spectrum of f* g reaches {ev.real.min():.3e}")
    k = linalg.principal_sqrt(M, method="contour")
    kH = linalg.adjoint(k)
    ident = {
        "k_squared": linalg.rel_residual(k @ k, M),
        "k_alpha": _rel(k @ a, a @ kH),
    }
    lhs = linalg.adjoint(fm) @ b @ fm
    res = _rel(lhs, k @ a @ kH)
    cmap = A.with_data(kH @ np.linalg.inv(fm))
    return CongruenceCertificate("k-pair", A.with_data(k), res, ident, {}, cmap)


# ---------------------------------------------------------------------------
# supporting checks


MU_LEVELS = tuple(10.0 ** -k for k in range(2, 9))


def complete_diagram(alpha, f, g=None, tol=1e-9):
    """``h`` with ``h alpha = alpha f`` as the limit of ``alpha f eta_mu(alpha)^{-1}``.

    ``eta_mu(lam)`` is 1 below ``mu`` and ``lam`` above, for
    ``mu = 1e-2, ..., 1e-8``; the limit is accepted once successive iterates
    agree to ``tol``.  When ``g`` is given the square ``g alpha^2 = alpha^2 f``
    is checked first and ``g alpha = alpha h`` afterwards.
    """
    A = as_field(alpha)
    a, fm = A.data, as_field(f).data
    if g is not None:
        gm = as_field(g).data
        sq = linalg.rel_residual(gm @ a @ a, a @ a @ fm)
        if sq > 1e-10:
            raise HypothesisViolated(f"g alpha^2 != alpha^2 f (residual {sq:.2e})")
    w, V = linalg.herm_eig(a)
    if np.any(w < -1e-12):
        raise HypothesisViolated("alpha must be positive")
    VH = linalg.adjoint(V)
    prev = None
    for mu in MU_LEVELS:
        eta_inv = np.where(w >= mu, 1.0 / np.where(w >= mu, w, 1.0), 1.0)
        h = a @ fm @ ((V * eta_inv[:, None, :]) @ VH)
        if prev is not None and linalg.ess_sup(h - prev) < tol * max(1.0, linalg.ess_sup(h)):
            out = A.with_data(h)
            return out
        prev = h
    raise NotConverging("eta_mu iterates did not settle by mu = 1e-8")


def spectrum_positivity(alpha, beta):
    """Fiber spectra of ``alpha`` are >= 0 when ``beta > 0`` and ``beta alpha >= 0``.

    Checks the hypotheses, then forms ``f = beta^{1/2} alpha beta^{-1/2}`` by
    :func:`complete_diagram` on ``beta^{1/2}`` and verifies ``f`` is
    Hermitian with spectrum above -1e-9.  Returns ``(ok, min_eigenvalue)``.
    """
    A, Bt = as_field(alpha), as_field(beta)
    a, b = A.data, Bt.data
    wb, Vb = linalg.herm_eig(b)
    if np.any(wb <= 1e-12):
        raise HypothesisViolated("beta is not positive")
    ba = b @ a
    if np.max(linalg.hermitian_defect(ba)) > 1e-9:
        raise HypothesisViolated("beta alpha is not Hermitian")
    if linalg.herm_eig(0.5 * (ba + linalg.adjoint(ba)), check=False).eigenvalues.min() < -1e-9 * max(1.0, linalg.ess_sup(ba)):
        raise HypothesisViolated("beta alpha is not positive")
    root = linalg.from_eig(np.sqrt(wb), Vb)
    g = b @ a @ np.linalg.inv(b)
    f = complete_diagram(A.with_data(root), A, A.with_data(g)).data
    defect = float(np.max(linalg.hermitian_defect(f)))
    if defect > 1e-9:
        raise HypothesisViolated(f"conjugated field is not Hermitian (defect {defect:.2e})")
    lo = float(linalg.herm_eig(0.5 * (f + linalg.adjoint(f)), check=False).eigenvalues.min())
    return lo >= -1e-9, lo


def add_forms(phi, psi_beta, n=DEFAULT_GRID):
    """Sum of a positive discriminant form and a positive presentation ``beta``.

    ``phi = disc(alpha)`` with ``alpha > 0``; ``psi_beta`` is the field
    ``beta`` of the second form, with ``beta alpha`` Hermitian and >= 0.
    ``g = alpha^{1/2} beta* alpha^{-1/2}`` (from :func:`complete_diagram`)
    must be >= 0, which makes ``1 + beta`` invertible.  Returns the form with
    presentation ``f = 1 + beta`` and the reduced field ``(1 + beta) alpha``.
    """
    A = as_field(phi.alpha, n)
    a = A.data
    bm = as_field(psi_beta, n).data
    ba = bm @ a
    if np.max(linalg.hermitian_defect(ba)) > 1e-9:
        raise NegativityDetected("beta alpha is not Hermitian")
    w, V = linalg.herm_eig(a)
    if np.any(w <= 0):
        raise NegativityDetected("alpha is not positive")
    root = linalg.from_eig(np.sqrt(w), V)
    g = complete_diagram(A.with_data(root), A.with_data(linalg.adjoint(bm))).data
    gw = linalg.herm_eig(0.5 * (g + linalg.adjoint(g)), check=False).eigenvalues
    if gw.min() < -1e-9 or np.max(linalg.hermitian_defect(g)) > 1e-8:
        raise NegativityDetected(f"alpha^(1/2) beta* alpha^(-1/2) has eigenvalue {gw.min():.3e}")
    I = _eye_like(a)
    fsum = I + bm
    low = float(np.linalg.svd(fsum, compute_uv=False)[:, -1].min()) if A.dim > 1 else float(np.abs(fsum[:, 0, 0]).min())
    X = TorsionObject(A, check=False)
    f = A.with_data(fsum)
    form = TorsionForm(X, f, f.adjoint(), check=False)
    red = fsum @ a
    red = A.with_data(0.5 * (red + linalg.adjoint(red)))
    return form, red, low


def superfinite_check(alpha, f):
    """Transfer of uniform invertibility from ``f`` to ``g = alpha^{-1} f alpha``.

    Returns ``(ok, report)``.  Since ``det g = det f``, every fiber has
    ``sigma_min(g) >= |det f| / ||g||^{d-1}``; ``ok`` requires the measured
    ``inf sigma_min(g)`` to clear the floor and to respect that bound.
    """
    A, Fm = as_field(alpha), as_field(f)
    a, fm = A.data, Fm.data
    g = np.linalg.solve(a, fm @ a)
    d = A.dim
    sg = np.linalg.svd(g, compute_uv=False)
    sf = np.linalg.svd(fm, compute_uv=False)
    detf = np.abs(np.linalg.det(fm))
    adj = detf / np.maximum(sg[:, 0], 1e-300) ** (d - 1)
    report = {
        "inf_sigma_g": float(sg[:, -1].min()),
        "sup_sigma_g": float(sg[:, 0].max()),
        "inf_sigma_f": float(sf[:, -1].min()),
        "adjugate_bound": float(adj.min()),
    }
    consistent = bool(np.all(sg[:, -1] >= adj * (1 - 1e-9)))
    ok = report["inf_sigma_g"] >= FLOOR and report["adjugate_bound"] > 0 and consistent
    return ok, report
