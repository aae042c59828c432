"""Torsion objects, their morphisms, duality and module isomorphism tests.

A torsion object is presented by an injective field ``alpha`` with dense
image.  A morphism ``X -> Y`` is a class ``[f]`` of fields with a witness
``g`` satisfying ``f alpha = beta g``; two representatives agree when their
difference factors through ``beta`` with a bounded quotient.
"""

from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import linalg
from .errors import EmptyWindow, NotInjectiveDense, ValidationError
from .fields import (
    DEFAULT_GRID,
    Field,
    GermField,
    as_field,
    evaluate,
    is_injective_dense,
    is_symbolic,
    symbolic_dim,
)

BOUND = 1e6
FLOOR = 1e-6
DENSITY_GRID = 65536


class TorsionObject:
    """``X = (alpha: A -> A)`` with ``alpha`` injective and of dense image.

    ``alpha`` is a sampled :class:`Field`, a :class:`GermField`, or a tuple
    of germ fields read as a diagonal field.
    """

    __slots__ = ("alpha",)

    def __init__(self, alpha, check=True):
        if isinstance(alpha, list):
            alpha = tuple(alpha)
        if check:
            rep = is_injective_dense(alpha)
            if not rep.ok:
                raise NotInjectiveDense(rep.witness)
        self.alpha = alpha

    def __repr__(self):
        return f"TorsionObject({self.alpha!r})"

    @property
    def symbolic(self):
        return is_symbolic(self.alpha)

    @property
    def dim(self):
        return symbolic_dim(self.alpha) if self.symbolic else self.alpha.dim

    def sampled(self, n=DEFAULT_GRID):
        return as_field(self.alpha, n)

    def is_trivial(self):
        """True when ``alpha`` is uniformly invertible (the object is zero)."""
        if self.symbolic:
            parts = (self.alpha,) if isinstance(self.alpha, GermField) else self.alpha
            return all(not p.germs for p in parts)
        return bool(self.alpha.min_singular().min() >= FLOOR)


def dual_object(X):
    """``e(X)``: the fiberwise adjoint presentation."""
    a = X.alpha
    if X.symbolic:
        return TorsionObject(a, check=False)
    return TorsionObject(a.adjoint(), check=False)


class TorsionMorphism:
    """Morphism ``[f]: X -> Y`` with witness ``g`` (``f alpha = beta g``).

    Sampled morphisms compute ``g = beta^{-1} f alpha`` fiberwise when it is
    not supplied and check the commuting square.  Symbolic scalar morphisms
    keep ``f`` and ``g`` as germ fields.
    """

    __slots__ = ("source", "target", "f", "g", "residual")

    def __init__(self, source, target, f, g=None, check=True):
        self.source, self.target, self.f = source, target, f
        if isinstance(f, GermField):
            if g is None:
                g = f.compose(source.alpha).divide(target.alpha)
            self.g = g
            self.residual = 0.0
            return
        n = f.n
        a = source.sampled(n).data
        b = target.sampled(n).data
        if g is None:
            g = Field(f.grid, np.linalg.solve(b, f.data @ a))
        self.g = g
        lhs = f.data @ a
        rhs = b @ g.data
        scale = linalg.ess_sup(f.data) * linalg.ess_sup(a) + linalg.ess_sup(b) * linalg.ess_sup(g.data)
        self.residual = linalg.ess_sup(lhs - rhs) / max(scale, 1e-300)
        if check and self.residual > 1e-10:
            raise ValidationError(f"f alpha != beta g (relative residual {self.residual:.2e})", "g")

    def __repr__(self):
        return f"TorsionMorphism(f={self.f!r})"

    @property
    def symbolic(self):
        return isinstance(self.f, GermField)

    def sampled(self, n=DEFAULT_GRID):
        if not self.symbolic:
            return self
        return TorsionMorphism(self.source, self.target, as_field(self.f, n), as_field(self.g, n), check=False)


def identity_morphism(X, n=DEFAULT_GRID):
    if X.symbolic and isinstance(X.alpha, GermField):
        one = GermField.unit("1", validate=False)
        return TorsionMorphism(X, X, one, one)
    I = Field.identity(n if X.symbolic else X.alpha.n, X.dim)
    return TorsionMorphism(X, X, I, I)


def dual_morphism(m):
    """``[g*]: e(Y) -> e(X)`` with witness ``f*``."""
    return TorsionMorphism(
        dual_object(m.target), dual_object(m.source), m.g.adjoint(), m.f.adjoint(), check=False
    )


def compose(m2, m1):
    """``m2 o m1``; representatives and witnesses multiply."""
    if m1.symbolic and m2.symbolic:
        return TorsionMorphism(m1.source, m2.target, m2.f.compose(m1.f), m2.g.compose(m1.g))
    a, b = m1.sampled(), m2.sampled()
    return TorsionMorphism(m1.source, m2.target, b.f @ a.f, b.g @ a.g, check=False)


# ---------------------------------------------------------------------------
# equality of representatives


class Verdict(NamedTuple):
    """Three-valued answer: ``value`` is True, False or None (inconclusive)."""

    value: object
    sup: float
    witness: object

    def __bool__(self):
        return self.value is True


def band(sup, bound=BOUND):
    """Classify a sup against ``bound``: True below B/10, False above 10B."""
    if sup < bound / 10:
        return True
    if sup > 10 * bound:
        return False
    return None


def probe_points(locations, k):
    """Points at distance ``10**-k`` on both sides of each location."""
    locs = np.asarray(locations, dtype=float)
    h = 10.0 ** -k
    return np.concatenate([locs - h, locs + h]) % 1.0


def growth_verdict(levels, values):
    """Bounded / unbounded from sup values at the two finest radii.

    ``values[i]`` is the sup at radius ``10**-levels[i]``.  A change of more
    than 0.75 in log10 per decade means growth, less than 0.25 means a
    stable limit; anything between is inconclusive (None).
    """
    v = np.maximum(np.asarray(values, dtype=float), 1e-300)
    step = (np.log10(v[-1]) - np.log10(v[-2])) / (levels[-1] - levels[-2])
    if step > 0.75:
        return False
    if abs(step) < 0.25:
        return True
    return None


def morphisms_equal(m, m2, bound=BOUND, levels=(2, 3, 4, 5, 6, 7, 8)):
    """Decide ``f - f' = beta F`` with ``F`` bounded.

    Sampled morphisms solve for ``F`` on fibers where ``beta`` is invertible
    and compare its sup with ``bound`` (inconclusive inside
    ``[bound/10, 10 bound]``); near-singular fibers must carry ``f = f'``.
    Symbolic scalar morphisms probe ``F`` at radii ``10**-k`` around the zeros
    of ``beta`` and test whether it grows under refinement.  Returns a
    :class:`Verdict` whose witness is ``F`` (sampled) or the probe sups.
    """
    beta = m.target.alpha
    if m.symbolic and m2.symbolic:
        def F(z):
            return (m.f(z) - m2.f(z)) / beta(z)
        zgrid = (np.arange(DEFAULT_GRID) + 0.5) / DEFAULT_GRID
        base = float(np.max(np.abs(F(zgrid))))
        locs = beta.locations
        if not locs:
            return Verdict(band(base, bound), base, [base])
        sups = [max(base, float(np.max(np.abs(F(probe_points(locs, k)))))) for k in levels]
        grows = growth_verdict(levels, sups)
        if grows is False:
            return Verdict(False, sups[-1], sups)
        value = band(sups[-1], bound)
        if grows is None and value is True:
            value = None
        return Verdict(value, sups[-1], sups)
    a, b = m.sampled(), m2.sampled()
    n = a.f.n
    B = m.target.sampled(n)
    diff = a.f.data - b.f.data
    smin = B.min_singular()
    ok = smin > 1e-13
    Fd = np.zeros_like(diff)
    Fd[ok] = np.linalg.solve(B.data[ok], diff[ok])
    sup = linalg.ess_sup(Fd)
    if np.any(~ok) and linalg.ess_sup(diff[~ok]) > 1e-10 * max(1.0, linalg.ess_sup(diff)):
        return Verdict(False, np.inf, Field(B.grid, Fd))
    return Verdict(band(sup, bound), sup, Field(B.grid, Fd))


def is_isomorphism(m, r=FLOOR, bound=BOUND):
    """Both ``f`` and ``g`` uniformly invertible and bounded."""
    if m.symbolic:
        if m.f.germs or m.g.germs:
            return False
    s = m.sampled()
    for h in (s.f, s.g):
        if h.min_singular().min() < r or h.norm() > bound:
            return False
    return True


# ---------------------------------------------------------------------------
# germ signatures


@dataclass(frozen=True)
class GermSignature:
    """Multiset of ``(location, side, order, sign)`` entries."""

    entries: tuple

    def unsigned(self):
        return Counter((loc, side, order) for loc, side, order, _ in self.entries)

    def with_sign(self, sign):
        return GermSignature(tuple(e for e in self.entries if e[3] == sign))

    def __len__(self):
        return len(self.entries)

    def to_json(self):
        return [
            {"at": loc, "side": side, "order": str(order), "sign": "+" if sg > 0 else "-"}
            for loc, side, order, sg in self.entries
        ]


def germ_signature(X):
    """Signature of a symbolic object (rescanned for undeclared zeros)."""
    a = X.alpha if isinstance(X, TorsionObject) else X
    parts = (a,) if isinstance(a, GermField) else tuple(a)
    entries = []
    for p in parts:
        p._scan()
        entries += [(round(g.at, 12), g.side, g.order, g.sign) for g in p.germs]
    return GermSignature(tuple(sorted(entries)))


# ---------------------------------------------------------------------------
# density curves


class DensityCurve(NamedTuple):
    lambdas: np.ndarray
    F: np.ndarray


def _abs_spectrum(X, n):
    A = X.sampled(n) if isinstance(X, TorsionObject) else as_field(X, n)
    if A.dim == 1:
        return np.abs(A.data[:, 0, 0].real)[:, None], A.grid.weight
    if A.is_hermitian():
        w = linalg.herm_eig(A.data).eigenvalues
        return np.abs(w), A.grid.weight
    return np.linalg.svd(A.data, compute_uv=False), A.grid.weight


def density_curve(X, lam_min=1e-6, lam_max=1e-1, points=200, n=DENSITY_GRID):
    """``F(lam)``: weighted count of fiber eigenvalues of ``|alpha|`` at most ``lam``.

    ``X`` is a torsion object or a bare field; symbolic input is sampled on
    ``n`` points, sampled input keeps its own grid.
    """
    if not (0 < lam_min < lam_max):
        raise ValidationError("need 0 < lambda_min < lambda_max", "lambda")
    lam = np.logspace(np.log10(lam_min), np.log10(lam_max), int(points))
    ev, w = _abs_spectrum(X, n)
    flat = np.sort(ev.ravel())
    F = np.searchsorted(flat, lam, side="right") * w
    return DensityCurve(lam, F)


def ns_exponent(curve):
    """Least-squares slope of log F against log lambda over the middle decade."""
    lam, F = curve
    if not np.any(F > 0):
        raise EmptyWindow("F vanishes on the whole window")
    mid = 0.5 * (np.log10(lam[0]) + np.log10(lam[-1]))
    sel = (np.abs(np.log10(lam) - mid) <= 0.5 + 1e-12) & (F > 0)
    if np.count_nonzero(sel) < 2:
        raise EmptyWindow("fewer than two positive samples in the middle decade")
    x, y = np.log(lam[sel]), np.log(F[sel])
    A = np.vstack([x, np.ones_like(x)]).T
    return float(np.linalg.lstsq(A, y, rcond=None)[0][0])


# ---------------------------------------------------------------------------
# module isomorphism


class IsoVerdict(NamedTuple):
    """``answer`` is "iso" / "not-iso" (exact) or "heuristic"."""

    answer: str
    value: bool
    confidence: float
    dilatation: float

    def __bool__(self):
        return self.value


def iso_modules(X, Y, lam_min=1e-6, lam_max=1e-1, points=200, n=DEFAULT_GRID, cmax=64.0):
    """Module isomorphism: exact on symbolic objects, density-based otherwise.

    Symbolic objects are isomorphic iff their signatures agree once signs are
    forgotten.  Otherwise the density curves are compared for a dilatation
    ``c`` in ``[1, cmax]`` with ``F_X(lam/c) <= F_Y(lam) <= F_X(c lam)`` on
    the window; the smallest such ``c`` is reported.  Confidence is
    ``1 - log(c)/(2 log cmax)`` when a ``c`` exists, and otherwise
    ``1/2 + 1/2`` times the fraction of window points violating the
    sandwich at ``c = cmax``.
    """
    if X.symbolic and Y.symbolic:
        same = germ_signature(X).unsigned() == germ_signature(Y).unsigned()
        return IsoVerdict("iso" if same else "not-iso", same, 1.0, 1.0)
    lam = np.logspace(np.log10(lam_min), np.log10(lam_max), int(points))
    ex, wx = _abs_spectrum(X, n)
    ey, wy = _abs_spectrum(Y, n)
    fx, fy = np.sort(ex.ravel()), np.sort(ey.ravel())

    def Fx(t):
        return np.searchsorted(fx, t, side="right") * wx

    FY = np.searchsorted(fy, lam, side="right") * wy
    tol = 1e-12
    for c in np.exp(np.linspace(0.0, np.log(cmax), 49)):
        if np.all(Fx(lam / c) <= FY + tol) and np.all(FY <= Fx(lam * c) + tol):
            conf = 1.0 - np.log(c) / (2 * np.log(cmax))
            return IsoVerdict("heuristic", True, float(conf), float(c))
    bad = (Fx(lam / cmax) > FY + tol) | (FY > Fx(lam * cmax) + tol)
    return IsoVerdict("heuristic", False, float(0.5 + 0.5 * bad.mean()), float("inf"))


def evaluate_alpha(X, z):
    return evaluate(X.alpha, z)
