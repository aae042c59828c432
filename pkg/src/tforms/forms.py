"""Hermitian forms on torsion objects.

A form on ``X = (alpha)`` is stored as a presentation ``(f, h, F)`` with

    f alpha = alpha* h          and          f - h* = alpha* F,  F* = -F.

A symmetric presentation has ``F = 0`` (so ``f = h*``).  The discriminant
form of a Hermitian ``alpha`` is ``f = h = 1``.  Symbolic forms are
discriminant forms of scalar germ fields (or diagonal tuples of them).

Operator fields that live on a sub-block ``Q`` of each fiber are kept in the
full space in compressed form ``Q a Q + P`` (identity on ``P = 1 - Q``), so
everything stays an ordinary ``(N, d, d)`` stack.
"""

from typing import NamedTuple

import numpy as np

from . import linalg
from .errors import (
    Degenerate,
    EigenvalueAtThreshold,
    JointlySingular,
    NoSplitting,
    NotBlockDefinite,
    NotInjectiveDense,
    ValidationError,
    ZeroEigenvalueFiber,
)
from .fields import DEFAULT_GRID, Field, GermField, as_field, circle_dist, is_injective_dense
from .torsion import (
    BOUND,
    FLOOR,
    TorsionMorphism,
    TorsionObject,
    dual_object,
    germ_signature,
    iso_modules,
    is_isomorphism,
)

DIAGRAM_TOL = 1e-10
# f counts as uniformly invertible for the direct reduction above this margin
DIRECT_MARGIN = 1e-3


def _eye_like(A):
    n, d, _ = A.shape
    return np.broadcast_to(np.eye(d, dtype=complex), (n, d, d))


def _parts(alpha):
    return (alpha,) if isinstance(alpha, GermField) else tuple(alpha)


# ---------------------------------------------------------------------------
# presentations


class PresentationPair:
    """Presentation ``(f, h, F)`` of a form on a sampled torsion object."""

    __slots__ = ("X", "f", "h", "F")

    def __init__(self, X, f, h, F=None, check=True):
        if X.symbolic:
            X = TorsionObject(X.sampled(f.n), check=False)
        self.X, self.f, self.h = X, f, h
        self.F = F if F is not None else Field(f.grid, np.zeros_like(f.data))
        if check:
            d = self.defects()
            if d["diagram"] > DIAGRAM_TOL or d["hermitian"] > DIAGRAM_TOL or d["antisymmetry"] > DIAGRAM_TOL:
                raise ValidationError(f"presentation invariants fail: {d}", "presentation")

    @property
    def alpha(self):
        return self.X.alpha

    def defects(self):
        a = self.alpha.data
        aH = linalg.adjoint(a)
        f, h, F = self.f.data, self.h.data, self.F.data
        return {
            "diagram": linalg.rel_residual(f @ a, aH @ h),
            "hermitian": linalg.rel_residual(f - linalg.adjoint(h), aH @ F),
            "antisymmetry": linalg.ess_sup(F + linalg.adjoint(F)) / max(1.0, linalg.ess_sup(F)),
        }

    def transpose(self):
        """Presentation of the transposed form: ``(h*, f*, -F)``."""
        return PresentationPair(self.X, self.h.adjoint(), self.f.adjoint(), -self.F, check=False)

    def morphism(self):
        """The underlying morphism ``[f]: X -> e(X)`` with witness ``h``."""
        return TorsionMorphism(self.X, dual_object(self.X), self.f, self.h, check=False)


class TorsionForm:
    """Form with a symmetric presentation (``f = h*``).

    ``X`` may be symbolic, in which case ``f`` and ``h`` are None and the form
    is the discriminant form of ``X.alpha``; a symbolic scalar ``f`` (a
    :class:`GermField`) is also allowed and stands for ``f = h``.
    """

    __slots__ = ("X", "f", "h")

    def __init__(self, X, f=None, h=None, check=True):
        self.X, self.f, self.h = X, f, h
        if isinstance(f, Field):
            if h is None:
                self.h = h = f.adjoint()
            if check:
                if linalg.rel_residual(f.data, linalg.adjoint(h.data)) > 1e-12:
                    raise ValidationError("presentation is not symmetric (f != h*)", "h")
                a = X.sampled(f.n).data
                if linalg.rel_residual(f.data @ a, linalg.adjoint(a) @ h.data) > DIAGRAM_TOL:
                    raise ValidationError("f alpha != alpha* h", "f")
        elif isinstance(f, GermField):
            self.h = f
        elif f is not None or not X.symbolic:
            raise ValidationError("sampled forms need a sampled f", "f")

    def __repr__(self):
        kind = "discriminant" if self.is_discriminant else "form"
        return f"TorsionForm({kind}, {self.X.alpha!r})"

    @property
    def alpha(self):
        return self.X.alpha

    @property
    def symbolic(self):
        return self.X.symbolic

    @property
    def dim(self):
        return self.X.dim

    @property
    def is_discriminant(self):
        if self.f is None:
            return True
        if isinstance(self.f, GermField):
            return self.f.text == "1"
        return linalg.ess_sup(self.f.data - _eye_like(self.f.data)) == 0.0

    def sampled(self, n=DEFAULT_GRID):
        if isinstance(self.f, Field):
            return self
        X = TorsionObject(self.X.sampled(n), check=False)
        f = Field.identity(n, self.dim) if self.f is None else as_field(self.f, n)
        return TorsionForm(X, f, f.adjoint(), check=False)

    def presentation(self, n=DEFAULT_GRID):
        s = self.sampled(n)
        return PresentationPair(s.X, s.f, s.h, check=False)

    def is_nondegenerate(self, n=DEFAULT_GRID):
        if self.f is None:
            return True
        if isinstance(self.f, GermField):
            # only the germs of alpha carry torsion; f may vanish elsewhere
            return not ({g.key() for g in self.f.germs} & {g.key() for g in self.alpha.germs})
        return is_isomorphism(self.presentation(n).morphism())


def symmetrize(p):
    """``f1 = f - alpha* F / 2``, ``h1 = h - F alpha / 2``."""
    a = p.alpha.data
    F = p.F.data
    if not np.any(F):
        return TorsionForm(p.X, p.f, p.h, check=False)
    f1 = p.f.data - 0.5 * linalg.adjoint(a) @ F
    h1 = p.h.data - 0.5 * F @ a
    f1 = p.f.with_data(f1)
    # equal by construction; use the exact adjoint so f1 = h1* bitwise
    h1 = p.h.with_data(0.5 * (h1 + linalg.adjoint(f1.data)))
    return TorsionForm(p.X, f1, h1)


def discriminant(alpha):
    """Discriminant form of a Hermitian injective field (``f = h = 1``)."""
    rep = is_injective_dense(alpha)
    if not rep.ok:
        raise NotInjectiveDense(rep.witness)
    if isinstance(alpha, Field):
        linalg.check_hermitian(alpha.data, 1e-10)
        X = TorsionObject(alpha, check=False)
        I = Field.identity(alpha.n, alpha.dim)
        return TorsionForm(X, I, I, check=False)
    return TorsionForm(TorsionObject(alpha, check=False))


def orthogonal_sum(*forms, n=DEFAULT_GRID):
    """Block-diagonal sum of forms."""
    if all(phi.symbolic and phi.f is None for phi in forms):
        parts = []
        for phi in forms:
            parts += list(_parts(phi.alpha))
        return TorsionForm(TorsionObject(tuple(parts), check=False))
    s = [phi.sampled(n) for phi in forms]
    X = TorsionObject(Field.diag(*(p.X.alpha for p in s)), check=False)
    return TorsionForm(X, Field.diag(*(p.f for p in s)), Field.diag(*(p.h for p in s)), check=False)


def negate(phi):
    """``-phi``; on discriminant forms this is the discriminant of ``-alpha``."""
    if phi.symbolic and phi.f is None:
        parts = tuple(-p for p in _parts(phi.alpha))
        return TorsionForm(TorsionObject(parts[0] if isinstance(phi.alpha, GermField) else parts, check=False))
    if phi.is_discriminant:
        return discriminant(-phi.alpha)
    return TorsionForm(phi.X, -phi.f, -phi.h, check=False)


# ---------------------------------------------------------------------------
# excision


class Excision(NamedTuple):
    """Fiberwise split ``1 = P + Q`` with ``Q`` the spectral block ``|alpha| <= eps``.

    ``alpha_Q = Q alpha Q + P`` and ``alpha_P = P alpha P + Q``.
    """

    P: Field
    Q: Field
    alpha_Q: Field
    alpha_P: Field
    eps: float
    intervals: list


def _abs_projector(A, eps):
    """Spectral projector of ``|A|`` onto ``[0, eps]`` (Hermitian ``A``)."""
    w, V = linalg.herm_eig(A)
    if np.any(np.abs(np.abs(w) - eps) < 1e-12):
        raise EigenvalueAtThreshold(f"an eigenvalue of |alpha| lies within 1e-12 of {eps!r}")
    return linalg.from_eig((np.abs(w) <= eps).astype(float), V)


def _intervals(mask, grid):
    """Maximal runs of True fibers as ``[lo, hi)`` pairs of grid cell edges."""
    out = []
    n = grid.n
    j = 0
    while j < n:
        if mask[j]:
            k = j
            while k < n and mask[k]:
                k += 1
            out.append([j / n, k / n])
            j = k
        else:
            j += 1
    return out


def excise_spectral(alpha, eps):
    """Split off the block where ``|alpha| <= eps``."""
    if eps <= 0:
        raise ValidationError("excision needs eps > 0", "eps")
    A = as_field(alpha)
    a = A.data
    Q = _abs_projector(a, eps)
    I = _eye_like(a)
    P = I - Q
    aQ = Q @ a @ Q + P
    aP = P @ a @ P + Q
    mask = np.real(np.trace(Q, axis1=1, axis2=2)) > 0.5
    return Excision(A.with_data(P), A.with_data(Q), A.with_data(aQ), A.with_data(aP), float(eps), _intervals(mask, A.grid))


class BlockCertificate(NamedTuple):
    """``W* (a (+) b) W = c (+) d`` with ``d`` uniformly invertible."""

    residual: float
    trivial_bound: float


def _swap(P, Q):
    """``W(x, y) = (Q x + P y, P x + Q y)``, a self-adjoint unitary on ``A (+) A``."""
    n, d, _ = P.shape
    W = np.zeros((n, 2 * d, 2 * d), dtype=complex)
    W[:, :d, :d] = Q
    W[:, :d, d:] = P
    W[:, d:, :d] = P
    W[:, d:, d:] = Q
    return W


def _blockdiag(a, b):
    n, d, _ = a.shape
    out = np.zeros((n, 2 * d, 2 * d), dtype=complex)
    out[:, :d, :d] = a
    out[:, d:, d:] = b
    return out


def block_certificate(left, right, W, trivial):
    lhs = linalg.adjoint(W) @ left @ W
    res = linalg.rel_residual(lhs, right)
    n, d2, _ = trivial.shape
    if d2 == 1:
        bound = float(np.abs(trivial[:, 0, 0]).min())
    else:
        bound = float(np.linalg.svd(trivial, compute_uv=False)[:, -1].min())
    return BlockCertificate(res, bound)


def excision_certificate(exc, alpha):
    """Certify ``disc(alpha) ~ disc(alpha_Q)``.

    ``W* (alpha (+) 1) W = alpha_Q (+) alpha_P`` with ``alpha_P`` invertible,
    and the identity summand on the left is trivial as well.
    """
    a = as_field(alpha).data
    W = _swap(exc.P.data, exc.Q.data)
    return block_certificate(_blockdiag(a, _eye_like(a)), _blockdiag(exc.alpha_Q.data, exc.alpha_P.data), W, exc.alpha_P.data)


# ---------------------------------------------------------------------------
# splitting witness and reduction


class SplittingWitness(NamedTuple):
    sigma: Field
    delta: Field
    residual: float
    lower_bound: float


def splitting_witness(alpha, f):
    """Least-norm ``(sigma, delta)`` with ``sigma alpha + delta f* = 1``.

    ``sigma = G^{-1} alpha*`` and ``delta = G^{-1} f`` where
    ``G = alpha* alpha + f f*``.  Symbolic scalar inputs are first checked
    exactly for a common zero.
    """
    if isinstance(alpha, GermField) and isinstance(f, GermField):
        common = set(alpha.locations) & set(f.locations)
        if common:
            raise JointlySingular(f"alpha and f* vanish together at z={min(common)}")
    A, Fd = as_field(alpha), as_field(f)
    a, fm = A.data, Fd.data
    G = linalg.adjoint(a) @ a + fm @ linalg.adjoint(fm)
    w = np.linalg.eigvalsh(G)
    low = float(np.sqrt(max(w.min(), 0.0)))
    if low < 1e-8:
        j = int(np.argmin(w.min(axis=1)))
        raise JointlySingular(f"alpha and f* vanish together at fiber {j} (z={A.grid.points[j]:.6g})")
    Gi = np.linalg.inv(G)
    sigma = Gi @ linalg.adjoint(a)
    delta = Gi @ fm
    res = linalg.ess_sup(sigma @ a + delta @ linalg.adjoint(fm) - _eye_like(a))
    if res > 1e-10:
        raise NoSplitting(f"splitting identity residual {res:.2e}")
    return SplittingWitness(A.with_data(sigma), A.with_data(delta), res, low)


def _nudge_eps(eig_abs, eps):
    """Largest threshold in [eps/2, eps] at least 1e-9 away from the spectrum."""
    flat = np.sort(eig_abs.ravel())
    for t in np.linspace(eps, eps / 2, 257):
        i = np.searchsorted(flat, t)
        near = [flat[k] for k in (i - 1, i) if 0 <= k < flat.size]
        if all(abs(v - t) > 1e-9 * max(1.0, t) for v in near):
            return float(t)
    raise EigenvalueAtThreshold("no admissible threshold in [eps/2, eps]")


class Reduction(NamedTuple):
    """Result of reducing a form to a discriminant form.

    ``alpha`` is the new Hermitian field; ``steps`` records the residuals of
    each stage.
    """

    alpha: object
    eps: float
    steps: dict


def reduce_to_discriminant(phi, n=DEFAULT_GRID):
    """Hermitian ``alpha'`` with ``disc(alpha')`` isometric to ``phi``.

    If ``f`` is uniformly invertible, ``alpha' = f alpha``.  Otherwise the
    splitting witness fixes ``eps`` with ``eps ||sigma|| < 1``, ``alpha`` is
    excised to ``|alpha| <= eps`` where ``f`` is bounded below, and
    ``alpha' = Q f alpha Q + P alpha P``.  Symbolic scalar forms get the
    same treatment with ``f`` applied on windows around the zeros.
    """
    if phi.f is None:
        return Reduction(phi.alpha, 0.0, {"identity": 0.0})
    if isinstance(phi.f, GermField):
        return _reduce_symbolic(phi)
    if not phi.is_nondegenerate(n):
        raise Degenerate("the form's morphism X -> e(X) is not an isomorphism")
    a = phi.X.sampled(n).data
    f = phi.f.data
    smin_f = phi.f.min_singular()
    if smin_f.min() >= DIRECT_MARGIN * max(1.0, phi.f.norm()):
        new = f @ a
        herm = linalg.ess_sup(new - linalg.adjoint(new)) / max(1.0, linalg.ess_sup(new))
        new = 0.5 * (new + linalg.adjoint(new))
        return Reduction(phi.f.with_data(new), 0.0, {"hermitian_defect": herm, "f_lower_bound": float(smin_f.min())})
    sw = splitting_witness(phi.X.sampled(n), phi.f)
    eps0 = 0.5 / max(sw.sigma.norm(), 1e-300)
    ev = np.abs(linalg.herm_eig(a).eigenvalues)
    eps = _nudge_eps(ev, min(eps0, 0.5 * ev.max() + 0.5))
    exc = excise_spectral(phi.X.sampled(n), eps)
    P, Q = exc.P.data, exc.Q.data
    fQ = Q @ f @ Q + P
    low = np.linalg.svd(fQ, compute_uv=False)[:, -1].min()
    new = Q @ f @ a @ Q + P @ a @ P
    herm = linalg.ess_sup(new - linalg.adjoint(new)) / max(1.0, linalg.ess_sup(new))
    new = 0.5 * (new + linalg.adjoint(new))
    cert = excision_certificate(exc, phi.X.sampled(n))
    return Reduction(
        phi.f.with_data(new),
        eps,
        {
            "splitting_residual": sw.residual,
            "excision_residual": cert.residual,
            "fQ_lower_bound": float(low),
            "hermitian_defect": herm,
        },
    )


def _reduce_symbolic(phi):
    a, f = phi.alpha, phi.f
    if not isinstance(a, GermField):
        raise ValidationError("symbolic non-discriminant forms must be scalar", "f")
    if not f.germs:
        return Reduction(f.compose(a), 0.0, {"unit": 0.0})
    common = {g.key() for g in f.germs} & {g.key() for g in a.germs}
    if common:
        raise Degenerate(f"f and alpha vanish together at {sorted(common)[0][0]}")
    # apply f only on windows around the zeros of alpha, where f is a unit
    locs = a.locations
    fl = f.locations
    pieces = []
    for z0 in locs:
        others = [x for x in locs if x != z0] + fl
        w = 0.5 * float(np.min(circle_dist(others, z0))) if others else 0.25
        w = min(w, z0 - 1e-9, 1 - 1e-9 - z0, 0.25)
        pieces.append((z0 - w, z0 + w))
    args = [f"({a.text})"]
    for lo, hi in pieces:
        args += [repr(lo), f"({f.text})*({a.text})", repr(hi), f"({a.text})"]
    expr = "piecewise(" + ", ".join(args) + ")"
    germs = []
    for g in a.germs:
        val = f.side_value(g.at, g.side)
        germs.append(type(g)(g.at, g.side, g.order, g.sign * int(np.sign(val)), g.coeff * abs(val)))
    return Reduction(GermField(expr, germs), 0.0, {"windows": [list(p) for p in pieces]})


# ---------------------------------------------------------------------------
# positive / negative split


class Split(NamedTuple):
    """``phi ~ disc(alpha_plus) (+) disc(alpha_minus)``."""

    plus: TorsionForm
    minus: TorsionForm
    P_plus: object
    P_minus: object
    certificate: object


def pos_neg_split(phi, n=DEFAULT_GRID):
    """Split a non-degenerate form into positive and negative definite parts.

    Sampled: ``alpha_+ = P+ alpha P+ + P-`` and ``alpha_- = P- alpha P- - P+``
    with ``P- = E_0``.  The block swap ``W`` certifies
    ``W* (alpha_+ (+) alpha_-) W = alpha (+) (P- - P+)``.
    Symbolic: ``posp`` / ``negp`` of each component, filled with
    ``+-sup|alpha|`` off their support.
    """
    red = reduce_to_discriminant(phi, n)
    alpha = red.alpha
    if not isinstance(alpha, Field):
        parts = _parts(alpha)
        plus = tuple(p.positive_part() for p in parts)
        minus = tuple(p.negative_part() for p in parts)
        single = isinstance(alpha, GermField)
        Xp = TorsionObject(plus[0] if single else plus, check=False)
        Xm = TorsionObject(minus[0] if single else minus, check=False)
        sig = germ_signature(TorsionObject(alpha, check=False))
        joined = sorted(germ_signature(Xp).entries + germ_signature(Xm).entries)
        cert = {"signature_match": list(sig.entries) == joined}
        a = as_field(alpha, n).data
        ap = as_field(plus, n).data
        am = as_field(minus, n).data
        Pm = np.zeros_like(a)
        idx = np.arange(a.shape[1])
        Pm[:, idx, idx] = (a[:, idx, idx].real < 0)
        Pp = _eye_like(a) - Pm
        # the fill values c (resp. -c) of the parts sit on the other block
        fill = ap * Pm - am * Pp
        blk = block_certificate(_blockdiag(ap, am), _blockdiag(a, fill @ (Pm - Pp)), _swap(Pm, Pp), fill @ (Pm - Pp))
        cert["residual"] = blk.residual
        cert["trivial_bound"] = blk.trivial_bound
        return Split(TorsionForm(Xp), TorsionForm(Xm), "posp", "negp", cert)
    ap, am, cert, Pp, Pm = _split_block(alpha)
    I = Field.identity(alpha.n, alpha.dim)
    return Split(
        TorsionForm(TorsionObject(ap, check=False), I, I, check=False),
        TorsionForm(TorsionObject(am, check=False), I, I, check=False),
        Pp,
        Pm,
        cert,
    )


def _split_block(alpha):
    a = alpha.data
    w, V = linalg.herm_eig(a)
    if np.any(np.abs(w) <= 1e-13):
        j = int(np.argmax(np.any(np.abs(w) <= 1e-13, axis=1)))
        raise ZeroEigenvalueFiber(f"fiber {j} has an eigenvalue within 1e-13 of zero")
    Pm = linalg.from_eig((w < 0).astype(float), V)
    Pp = _eye_like(a) - Pm
    ap = Pp @ a @ Pp + Pm
    am = Pm @ a @ Pm - Pp
    W = _swap(Pm, Pp)
    cert = block_certificate(_blockdiag(ap, am), _blockdiag(a, Pm - Pp), W, Pm - Pp)
    return alpha.with_data(ap), alpha.with_data(am), cert, alpha.with_data(Pp), alpha.with_data(Pm)


def is_trivial_form(phi):
    return phi.X.is_trivial()


# ---------------------------------------------------------------------------
# metabolizers


class Metabolizer(NamedTuple):
    """``Y = (beta)`` with inclusion representative ``s beta`` and ``alpha = beta delta beta``."""

    Y: TorsionObject
    inclusion: object
    delta: object
    residual: float


def metabolizer(phi, n=DEFAULT_GRID):
    """Canonical metabolizer: ``beta = |alpha|^{1/2}``, ``delta = sign(alpha)``."""
    alpha = reduce_to_discriminant(phi, n).alpha
    if not isinstance(alpha, Field):
        parts = _parts(alpha)
        betas = tuple(p.sqrt_abs() for p in parts)
        signs = tuple(p.sign_field() for p in parts)
        single = isinstance(alpha, GermField)
        Y = TorsionObject(betas[0] if single else betas, check=False)
        delta = signs[0] if single else signs
        inc = tuple(s.compose(b) for s, b in zip(signs, betas))
        inc = inc[0] if single else inc
        A, Bt, D = as_field(alpha, n).data, as_field(Y.alpha, n).data, as_field(delta, n).data
        return Metabolizer(Y, inc, delta, linalg.rel_residual(Bt @ D @ Bt, A))
    a = alpha.data
    w, V = linalg.herm_eig(a)
    if np.any(np.abs(w) <= 1e-13):
        raise NotBlockDefinite("alpha has a fiber eigenvalue within 1e-13 of zero; split it first")
    beta = linalg.from_eig(np.sqrt(np.abs(w)), V)
    s = linalg.from_eig(np.sign(w), V)
    res = linalg.rel_residual(beta @ s @ beta, a)
    return Metabolizer(TorsionObject(alpha.with_data(beta), check=False), alpha.with_data(s @ beta), alpha.with_data(s), res)


class MetabolizerCheck(NamedTuple):
    ok: bool
    delta_sup: float
    delta_inf: float


def is_metabolizer(phi, Y, n=DEFAULT_GRID):
    """``delta = beta^{-*} alpha beta^{-1}`` must be bounded and invertible.

    Symbolic scalar objects are decided exactly from germ orders; sampled
    ones against the thresholds ``FLOOR`` and ``BOUND``.
    """
    alpha = reduce_to_discriminant(phi, n).alpha
    beta = Y.alpha if isinstance(Y, TorsionObject) else Y
    if isinstance(alpha, GermField) and isinstance(beta, GermField):
        ok = True
        keys = {g.key() for g in alpha.germs} | {g.key() for g in beta.germs}
        for at, side in keys:
            ga, gb = alpha.germ(at, side), beta.germ(at, side)
            oa = ga.order if ga else 0
            ob = gb.order if gb else 0
            if oa != 2 * ob:
                ok = False
        D = (as_field(alpha, n).data / as_field(beta, n).data ** 2)
        mags = np.abs(D[:, 0, 0])
        return MetabolizerCheck(ok, float(mags.max()), float(mags.min()))
    A, Bt = as_field(alpha, n), as_field(beta, n)
    Bi = np.linalg.inv(Bt.data)
    D = linalg.adjoint(Bi) @ A.data @ Bi
    sv = np.linalg.svd(D, compute_uv=False)
    sup, inf = float(sv[:, 0].max()), float(sv[:, -1].min())
    return MetabolizerCheck(bool(sup <= BOUND and inf >= FLOOR), sup, inf)


# ---------------------------------------------------------------------------
# hyperbolicity


class Hyperbolicity(NamedTuple):
    value: bool
    mode: str
    structure: object
    distinguisher: object


def _hyperbolic_matrix(a):
    """``R* (a (+) -a) R = [[0, a], [a, 0]]`` with ``R = [[1, 1], [1, -1]]/sqrt 2``."""
    n, d, _ = a.shape
    I = np.eye(d)
    R = np.zeros((n, 2 * d, 2 * d), dtype=complex)
    R[:, :d, :d] = I
    R[:, :d, d:] = I
    R[:, d:, :d] = I
    R[:, d:, d:] = -I
    R /= np.sqrt(2.0)
    off = np.zeros_like(R)
    off[:, :d, d:] = a
    off[:, d:, :d] = a
    lhs = linalg.adjoint(R) @ _blockdiag(a, -a) @ R
    return off, linalg.rel_residual(lhs, off)


def is_hyperbolic(phi, n=DEFAULT_GRID):
    """Hyperbolic iff the positive and negative parts are isomorphic modules.

    When they are, ``-alpha_-`` is congruent to ``alpha_+`` (both positive
    on isomorphic modules), and ``alpha_+ (+) -alpha_+`` is carried to the
    off-diagonal form ``[[0, a], [a, 0]]`` whose first summand is a
    metabolizer and a direct summand.  The structure records both residuals.
    """
    from .congruence import congruence_positive, positive_iso_data

    sp = pos_neg_split(phi, n)
    Xp, Xm = sp.plus.X, sp.minus.X
    verdict = iso_modules(Xp, Xm)
    mode = "exact" if verdict.answer != "heuristic" else "heuristic"
    if not verdict.value:
        dist = None
        if mode == "exact":
            up, um = germ_signature(Xp).unsigned(), germ_signature(Xm).unsigned()
            diff = (up - um) + (um - up)
            dist = sorted(diff.elements())[0] if diff else None
        return Hyperbolicity(False, mode, None, dist)
    ap = as_field(Xp.alpha, n)
    am_neg = -as_field(Xm.alpha, n)
    f, g = positive_iso_data(ap, am_neg)
    cert = congruence_positive(ap, am_neg, f, g)
    off, res = _hyperbolic_matrix(ap.data)
    structure = {
        "offdiagonal_residual": res,
        "congruence_residual": cert.residual,
        "identity_residuals": cert.identities,
        "form": ap.with_data(off) if ap.dim <= 4 else None,
    }
    return Hyperbolicity(True, mode, structure, None)
