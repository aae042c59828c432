"""Decomposable operator fields over the circle [0, 1).

Two representations live here:

* :class:`Field`, a sampled field with one ``d x d`` complex matrix per point
  of a :class:`CircleGrid` (points ``(j + 1/2)/N``, weight ``1/N`` each);
* :class:`GermField`, a real scalar expression in ``z`` together with its
  declared zeros, each described by one-sided :class:`Germ` records.

Symbolic operations recompute germ data exactly where the operands allow it
and sample everything else.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import linalg
from .errors import (
    DimMismatch,
    GermUndetermined,
    GridHitsZero,
    SpaceMismatch,
    UndeclaredZeroSuspected,
    ValidationError,
)
from .expr import Expr

SCAN_POINTS = 65536
DEFAULT_GRID = 4096


def circle_dist(a, b):
    d = np.abs(np.asarray(a, dtype=float) - b) % 1.0
    return np.minimum(d, 1.0 - d)


# ---------------------------------------------------------------------------
# sampled fields


@dataclass(frozen=True)
class CircleGrid:
    """Half-offset grid on the circle."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError("grid size must be a positive integer", "grid")

    @property
    def points(self):
        return (np.arange(self.n) + 0.5) / self.n

    @property
    def weight(self):
        return 1.0 / self.n


class Field:
    """Sampled operator field: an immutable ``(N, d, d)`` complex stack."""

    __slots__ = ("grid", "data")

    def __init__(self, grid, data):
        if isinstance(grid, int):
            grid = CircleGrid(grid)
        arr = np.array(data, dtype=complex)
        if arr.ndim == 1:
            arr = arr[:, None, None]
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise ValidationError(f"field data must have shape (N, d, d), got {arr.shape}", "data")
        if arr.shape[0] != grid.n:
            raise ValidationError(f"field has {arr.shape[0]} fibers but grid has {grid.n}", "data")
        if arr.shape[1] > linalg.MAX_DIM:
            raise ValidationError(f"fiber dimension {arr.shape[1]} exceeds {linalg.MAX_DIM}", "dim")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("field has non-finite entries", "data")
        arr.flags.writeable = False
        self.grid = grid
        self.data = arr

    def __repr__(self):
        return f"Field(N={self.n}, dim={self.dim})"

    @property
    def n(self):
        return self.grid.n

    @property
    def dim(self):
        return self.data.shape[1]

    @classmethod
    def identity(cls, n, dim=1):
        return cls.constant(n, np.eye(dim))

    @classmethod
    def constant(cls, n, M):
        M = np.atleast_2d(np.asarray(M, dtype=complex))
        return cls(n, np.broadcast_to(M, (n,) + M.shape))

    @classmethod
    def from_function(cls, n, fn):
        """Build from ``fn(z) -> (N, d, d)`` or ``(N,)`` evaluated on the grid."""
        grid = CircleGrid(n)
        return cls(grid, fn(grid.points))

    @classmethod
    def diag(cls, *parts):
        """Block-diagonal orthogonal sum of fields on a common grid."""
        _same_grid(*parts)
        n = parts[0].n
        d = sum(p.dim for p in parts)
        out = np.zeros((n, d, d), dtype=complex)
        k = 0
        for p in parts:
            out[:, k:k + p.dim, k:k + p.dim] = p.data
            k += p.dim
        return cls(parts[0].grid, out)

    def with_data(self, data):
        return Field(self.grid, data)

    def adjoint(self):
        return self.with_data(linalg.adjoint(self.data))

    def __add__(self, other):
        _same_shape(self, other)
        return self.with_data(self.data + other.data)

    def __sub__(self, other):
        _same_shape(self, other)
        return self.with_data(self.data - other.data)

    def __neg__(self):
        return self.with_data(-self.data)

    def __matmul__(self, other):
        _same_shape(self, other)
        return self.with_data(self.data @ other.data)

    def scale(self, c):
        return self.with_data(complex(c) * self.data)

    def inverse(self):
        return self.with_data(np.linalg.inv(self.data))

    def is_hermitian(self, tol=linalg.HERMITIAN_TOL):
        return bool(np.all(linalg.hermitian_defect(self.data) <= tol))

    def norm(self):
        return linalg.ess_sup(self.data)

    def min_singular(self):
        """Per-fiber smallest singular value."""
        if self.dim == 1:
            return np.abs(self.data[:, 0, 0])
        return np.linalg.svd(self.data, compute_uv=False)[:, -1]


def _same_grid(*fields):
    n = fields[0].n
    for f in fields[1:]:
        if f.n != n:
            raise SpaceMismatch(f"grid sizes differ ({n} vs {f.n})")


def _same_shape(a, b):
    if not isinstance(b, Field):
        raise TypeError("operand must be a sampled Field")
    _same_grid(a, b)
    if a.dim != b.dim:
        raise DimMismatch(f"fiber dimensions differ ({a.dim} vs {b.dim})")


# ---------------------------------------------------------------------------
# symbolic scalar fields


@dataclass(frozen=True, order=True)
class Germ:
    """One-sided zero: ``f(z) ~ sign * coeff * |z - at|**order`` from ``side``."""

    at: float
    side: str
    order: Fraction
    sign: int
    coeff: float = 1.0

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValidationError("germ side must be 'left' or 'right'", "side")
        if not (0.0 <= self.at < 1.0):
            raise ValidationError("zero location must lie in [0, 1)", "at")
        object.__setattr__(self, "order", Fraction(self.order).limit_denominator(64))
        if self.order <= 0:
            raise ValidationError("zero order must be positive", "order")
        if self.sign not in (1, -1):
            raise ValidationError("germ sign must be +1 or -1", "sign")
        if not (self.coeff > 0 and np.isfinite(self.coeff)):
            raise ValidationError("germ coefficient must be a positive finite number", "coeff")

    @property
    def direction(self):
        return -1.0 if self.side == "left" else 1.0

    def key(self):
        return (round(self.at, 12), self.side)


def _sign_char(s):
    if s in ("+", 1, "+1"):
        return 1
    if s in ("-", -1, "-1"):
        return -1
    raise ValidationError(f"bad sign {s!r}", "sign")


def germs_from_zero(at, order, left, right, coeff=1.0, coeff_left=None, coeff_right=None):
    """Two-sided zero declaration expanded to its pair of one-sided germs.

    A negative ``coeff`` is folded into both signs.
    """
    left, right = _sign_char(left), _sign_char(right)
    out = []
    for side, sgn, c in (("left", left, coeff_left), ("right", right, coeff_right)):
        c = coeff if c is None else c
        c = float(c)
        if c == 0:
            raise ValidationError("zero coefficient must be nonzero", "coeff")
        if c < 0:
            sgn, c = -sgn, -c
        out.append(Germ(float(at) % 1.0, side, Fraction(order), sgn, c))
    return out


class GermField:
    """Real scalar field given by an expression and its declared zeros.

    ``germs`` is a list of :class:`Germ` (one per zero and side).  With
    ``validate=True`` the declaration is checked against the expression:
    each germ must match the expression within a factor of two near its
    zero, and a scan of :data:`SCAN_POINTS` points looks for zeros that were
    not declared.
    """

    __slots__ = ("expr", "germs")

    def __init__(self, expr, germs=(), validate=True):
        self.expr = expr if isinstance(expr, Expr) else Expr(expr)
        gs = sorted(germs)
        keys = [g.key() for g in gs]
        if len(set(keys)) != len(keys):
            raise ValidationError("duplicate germ declared for one zero and side", "zeros")
        self.germs = tuple(gs)
        if validate:
            self.validate()

    @classmethod
    def from_zeros(cls, expr, zeros, validate=True):
        """``zeros``: iterable of dicts with at/order/left/right[/coeff]."""
        germs = []
        for i, z in enumerate(zeros):
            try:
                germs += germs_from_zero(
                    z["at"], z["order"], z.get("left", "+"), z.get("right", "+"),
                    z.get("coeff", 1.0), z.get("coeff_left"), z.get("coeff_right"),
                )
            except KeyError as exc:
                raise ValidationError(f"zero #{i} lacks {exc.args[0]!r}", f"zeros[{i}].{exc.args[0]}") from None
        return cls(expr, germs, validate)

    @classmethod
    def unit(cls, expr, validate=True):
        """Field with no zeros."""
        return cls(expr, (), validate)

    def __repr__(self):
        zs = ", ".join(f"{g.at:g}{'-' if g.side == 'left' else '+'}^{g.order}" for g in self.germs)
        return f"GermField({self.expr.text!r}, [{zs}])"

    def __call__(self, z):
        return self.expr(np.asarray(z, dtype=float) % 1.0)

    @property
    def text(self):
        return self.expr.text

    @property
    def locations(self):
        return sorted({g.at for g in self.germs})

    @property
    def breakpoints(self):
        return self.expr.breakpoints

    def germ(self, at, side):
        for g in self.germs:
            if abs(g.at - at) < 1e-12 and g.side == side:
                return g
        return None

    def side_value(self, at, side, h=1e-9):
        """One-sided value just off ``at`` (a limit for continuous pieces)."""
        return float(self(at + (-h if side == "left" else h)))

    # -- validation ---------------------------------------------------------

    def _radius(self, at):
        others = [g.at for g in self.germs if abs(g.at - at) > 1e-12]
        others += [b for b in self.breakpoints if abs(b - at) > 1e-12]
        gap = float(np.min(circle_dist(others, at))) if others else 1.0
        return min(1e-4, gap / 8.0)

    def validate(self):
        for g in self.germs:
            r0 = self._radius(g.at)
            t = r0 * 2.0 ** -np.arange(6)
            z = g.at + g.direction * t
            model = g.sign * g.coeff * t ** float(g.order)
            ratio = self(z) / model
            if not np.all((ratio >= 0.5) & (ratio <= 2.0)):
                bad = float(ratio[~((ratio >= 0.5) & (ratio <= 2.0))][0])
                raise ValidationError(
                    f"germ at {g.at} ({g.side}) does not match the expression (ratio {bad:.3g})",
                    "zeros",
                )
        self._scan()

    def _scan(self):
        grid = CircleGrid(SCAN_POINTS)
        z = grid.points
        v = self(z)
        if not np.all(np.isfinite(v)):
            j = int(np.argmin(np.isfinite(v)))
            raise ValidationError(f"expression is not finite at z={z[j]:.6g}", "expr")
        scale = float(np.max(np.abs(v)))
        if scale == 0.0:
            raise UndeclaredZeroSuspected("expression vanishes identically", "zeros")
        floor = 1e-8 * scale
        locs = np.array(self.locations + list(self.breakpoints))
        near = np.zeros(z.shape, dtype=bool)
        for b in self.breakpoints:
            near |= circle_dist(z, b) < 1e-3
        for g in self.germs:
            # where the declared germ itself drops under 10x the floor
            rho = min(0.05, max(1e-3, (10 * floor / g.coeff) ** (1.0 / float(g.order))))
            off = (z - g.at + 0.5) % 1.0 - 0.5
            near |= (np.abs(off) < rho) & (np.sign(off) == g.direction)
        small = (np.abs(v) <= floor) & ~near
        if small.any():
            j = int(np.argmax(small))
            raise UndeclaredZeroSuspected(f"|f| below {floor:.2e} at z={z[j]:.6g} away from declared zeros", "zeros")
        flips = np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]
        for j in flips:
            lo, hi = z[j], z[j + 1]
            if not np.any((locs >= lo) & (locs <= hi)):
                raise UndeclaredZeroSuspected(
                    f"sign change between z={lo:.6g} and z={hi:.6g} without a declared zero", "zeros"
                )

    # -- algebra -----------------------------------------------------------

    def compose(self, other):
        """Product; orders add and signs multiply at common zeros."""
        expr = f"({self.text})*({other.text})"
        germs = {}
        keys = {g.key() for g in self.germs} | {g.key() for g in other.germs}
        for at, side in keys:
            a, b = self.germ(at, side), other.germ(at, side)
            if a is not None and b is not None:
                germs[(at, side)] = Germ(a.at, side, a.order + b.order, a.sign * b.sign, a.coeff * b.coeff)
            else:
                g, h = (a, other) if a is not None else (b, self)
                val = h.side_value(g.at, side)
                if not np.isfinite(val) or val == 0.0:
                    raise GermUndetermined(f"factor has no finite nonzero limit at {g.at} ({side})")
                germs[(at, side)] = Germ(g.at, side, g.order, g.sign * int(np.sign(val)), g.coeff * abs(val))
        return GermField(expr, germs.values(), validate=False)

    __mul__ = compose

    def scale(self, c):
        c = float(c)
        if c == 0.0:
            raise GermUndetermined("scaling by zero leaves no torsion data")
        s = 1 if c > 0 else -1
        germs = [Germ(g.at, g.side, g.order, g.sign * s, g.coeff * abs(c)) for g in self.germs]
        return GermField(f"{c!r}*({self.text})", germs, validate=False)

    def __neg__(self):
        return self.scale(-1.0)

    def adjoint(self):
        return self

    def add(self, other, validate=True):
        """Sum by the dominant-term rule at shared zeros.

        At a zero of only one summand the other is nonzero, so the sum does
        not vanish there; equal orders with cancelling leading terms cannot be
        resolved and raise :class:`GermUndetermined`.  New zeros away from the
        declared ones are caught by validation.
        """
        expr = f"({self.text})+({other.text})"
        germs = []
        keys = {g.key() for g in self.germs} & {g.key() for g in other.germs}
        for at, side in sorted(keys):
            a, b = self.germ(at, side), other.germ(at, side)
            if a.order < b.order:
                germs.append(a)
            elif b.order < a.order:
                germs.append(Germ(a.at, side, b.order, b.sign, b.coeff))
            else:
                c = a.sign * a.coeff + b.sign * b.coeff
                if abs(c) <= 1e-12 * max(a.coeff, b.coeff):
                    raise GermUndetermined(f"leading terms cancel at {a.at} ({side})")
                germs.append(Germ(a.at, side, a.order, int(np.sign(c)), abs(c)))
        return GermField(expr, germs, validate=validate)

    __add__ = add

    def divide(self, other):
        """Quotient; orders subtract, and a pole raises :class:`GermUndetermined`."""
        expr = f"({self.text})/({other.text})"
        germs = []
        keys = {g.key() for g in self.germs} | {g.key() for g in other.germs}
        for at, side in sorted(keys):
            a, b = self.germ(at, side), other.germ(at, side)
            if a is None:
                raise GermUndetermined(f"quotient has a pole at {b.at} ({side})")
            if b is None:
                val = other.side_value(a.at, side)
                germs.append(Germ(a.at, side, a.order, a.sign * int(np.sign(val)), a.coeff / abs(val)))
            elif a.order < b.order:
                raise GermUndetermined(f"quotient has a pole at {a.at} ({side})")
            elif a.order > b.order:
                germs.append(Germ(a.at, side, a.order - b.order, a.sign * b.sign, a.coeff / b.coeff))
        return GermField(expr, germs, validate=False)

    __truediv__ = divide

    def sqrt_abs(self):
        """``sqrt(|f|)``: orders halve, signs become +."""
        germs = [Germ(g.at, g.side, g.order / 2, 1, float(np.sqrt(g.coeff))) for g in self.germs]
        return GermField(f"sqrt(abs({self.text}))", germs, validate=False)

    def abs(self):
        germs = [Germ(g.at, g.side, g.order, 1, g.coeff) for g in self.germs]
        return GermField(f"abs({self.text})", germs, validate=False)

    def sign_field(self):
        """Piecewise +-1 sign of the field (a unit)."""
        return GermField(f"({self.text})/abs({self.text})", (), validate=False)

    def positive_part(self):
        """``f`` where positive and ``sup|f|`` elsewhere; keeps the positive germs."""
        germs = [g for g in self.germs if g.sign > 0]
        c = self._scale()
        return GermField(f"{c!r}*posp(({self.text})/{c!r})", germs, validate=False)

    def negative_part(self):
        """``f`` where negative and ``-sup|f|`` elsewhere; keeps the negative germs."""
        germs = [g for g in self.germs if g.sign < 0]
        c = self._scale()
        return GermField(f"{c!r}*negp(({self.text})/{c!r})", germs, validate=False)

    def _scale(self):
        """Sup of ``|f|`` on a coarse grid, used as the fill value of parts."""
        z = CircleGrid(4096).points
        c = float(np.max(np.abs(self(z))))
        return c if c > 0 else 1.0

    def sample(self, n):
        return sample_symbolic(self, n)


def field_algebra(op, *operands):
    """Apply ``add``, ``scale``, ``compose`` or ``adjoint`` to fields.

    ``scale`` takes ``(field, c)``.  Operands must share a representation.
    """
    if op == "adjoint":
        (a,) = operands
        return a.adjoint()
    if op == "scale":
        a, c = operands
        return a.scale(c)
    if op not in ("add", "compose"):
        raise ValueError(f"unknown field operation {op!r}")
    a, b = operands
    if isinstance(a, GermField) != isinstance(b, GermField):
        raise SpaceMismatch("cannot mix symbolic and sampled operands")
    if op == "add":
        return a + b
    return a @ b if isinstance(a, Field) else a.compose(b)


# ---------------------------------------------------------------------------
# inspection


class FieldNormReport(NamedTuple):
    ess_sup: float
    inf_singular: float
    zero_measure: float


class InjectivityReport(NamedTuple):
    ok: bool
    witness: str

    def __bool__(self):
        return self.ok


def sample_symbolic(f, n):
    """Sample a symbolic scalar field (or a tuple of them, as a diagonal field)."""
    if isinstance(f, (tuple, list)):
        return Field.diag(*(sample_symbolic(p, n) for p in f))
    if int(n) != n or n < 1:
        raise ValidationError("grid size must be a positive integer", "grid")
    grid = CircleGrid(int(n))
    z = grid.points
    for loc in f.locations:
        if np.min(circle_dist(z, loc)) < 1e-14:
            raise GridHitsZero(f"grid point coincides with the zero at {loc}")
    return Field(grid, f(z).astype(complex))


def is_symbolic(T):
    return isinstance(T, GermField) or (
        isinstance(T, (tuple, list)) and len(T) > 0 and all(isinstance(p, GermField) for p in T)
    )


def symbolic_dim(T):
    return 1 if isinstance(T, GermField) else len(T)


def evaluate(T, z):
    """Values of a symbolic field at arbitrary points as an ``(m, d, d)`` stack."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    parts = (T,) if isinstance(T, GermField) else tuple(T)
    out = np.zeros((z.size, len(parts), len(parts)), dtype=complex)
    for i, p in enumerate(parts):
        out[:, i, i] = p(z)
    return out


def as_field(T, n=DEFAULT_GRID):
    """Sampled view of ``T``; a sampled field is returned unchanged."""
    if isinstance(T, Field):
        return T
    return sample_symbolic(T, n)


_as_sampled = as_field


def ess_bounds(T, n=DEFAULT_GRID):
    """Essential sup norm, inf of fiber singular values, measure of near-zero fibers."""
    F = _as_sampled(T, n)
    smin = F.min_singular()
    zero = float(np.count_nonzero(smin <= 1e-13)) * F.grid.weight
    return FieldNormReport(F.norm(), float(smin.min()), zero)


def is_injective_dense(alpha):
    """Injectivity with dense image, returning a report that is truthy on success.

    Symbolic fields are injective exactly when their zero set is finite,
    which a validated :class:`GermField` guarantees.  Sampled fields use the
    grid proxy: every fiber nonsingular above 1e-13.
    """
    if isinstance(alpha, (tuple, list)):
        for i, p in enumerate(alpha):
            r = is_injective_dense(p)
            if not r.ok:
                return InjectivityReport(False, f"component {i}: {r.witness}")
        return InjectivityReport(True, "")
    if isinstance(alpha, GermField):
        try:
            alpha._scan()
        except ValidationError as exc:
            return InjectivityReport(False, str(exc))
        return InjectivityReport(True, f"{len(alpha.locations)} isolated zeros")
    smin = alpha.min_singular()
    bad = np.nonzero(smin <= 1e-13)[0]
    if bad.size:
        j = int(bad[0])
        return InjectivityReport(False, f"fiber {j} (z={alpha.grid.points[j]:.6g}) is singular")
    return InjectivityReport(True, f"min singular value {smin.min():.3e}")


def loglog_slope(x, y):
    """Least-squares slope of log y against log x."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    A = np.vstack([lx, np.ones_like(lx)]).T
    return float(np.linalg.lstsq(A, ly, rcond=None)[0][0])


def germ_orders_from_samples(F, at, width=0.05):
    """Fit the vanishing order of a sampled scalar field near ``at``.

    Uses the sorted magnitudes within ``width`` of the zero; the k-th
    smallest sample sits at distance about ``k/(2N)``.
    """
    z = F.grid.points
    v = np.abs(F.data[:, 0, 0])
    d = circle_dist(z, at)
    sel = d < width
    dist, mag = d[sel], v[sel]
    order = np.argsort(dist)
    dist, mag = dist[order], mag[order]
    k = max(4, dist.size // 4)
    return loglog_slope(dist[:k], mag[:k])
