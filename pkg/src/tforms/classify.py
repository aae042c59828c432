"""Congruence classification of torsion Hermitian forms.

:func:`classify_form` reduces a form to a discriminant, splits it into
positive and negative parts and reads off their germ signatures.  Two
symbolic forms are congruent exactly when these signatures agree, and
:func:`congruent` backs every positive answer with explicit ``k``
certificates.  :func:`ratio_oracle` is an independent check that only
evaluates the two fields near their zeros.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .congruence import congruence_positive, positive_iso_data
from .errors import EmptyWindow
from .fields import DEFAULT_GRID, GermField, as_field, germs_from_zero
from .forms import TorsionForm, discriminant, pos_neg_split
from .torsion import (
    DENSITY_GRID,
    GermSignature,
    TorsionObject,
    density_curve,
    germ_signature,
    growth_verdict,
    iso_modules,
    ns_exponent,
)


@dataclass
class ClassificationReport:
    positive: object
    negative: object
    ns: tuple
    mode: str
    certificates: dict = field(default_factory=dict)

    def to_json(self):
        def sig(s):
            return s.to_json() if isinstance(s, GermSignature) else s

        return {
            "mode": self.mode,
            "positive": sig(self.positive),
            "negative": sig(self.negative),
            "ns_exponents": [None if v is None else float(v) for v in self.ns],
            "certificates": self.certificates,
        }


def _exponent(X, n):
    try:
        return ns_exponent(density_curve(X, n=n))
    except EmptyWindow:
        return None


def classify_form(phi, n=DEFAULT_GRID, ns=True, ns_grid=DENSITY_GRID):
    """Positive and negative germ signatures (symbolic) or density data (sampled)."""
    sp = pos_neg_split(phi, n)
    Xp, Xm = sp.plus.X, sp.minus.X
    certs = {}
    if isinstance(sp.certificate, dict):
        certs["split"] = {k: (float(v) if not isinstance(v, bool) else v) for k, v in sp.certificate.items()}
    else:
        certs["split"] = {"residual": float(sp.certificate.residual), "trivial_bound": float(sp.certificate.trivial_bound)}
    exps = (_exponent(Xp, ns_grid), _exponent(Xm, ns_grid)) if ns else (None, None)
    if Xp.symbolic:
        return ClassificationReport(germ_signature(Xp), germ_signature(Xm), exps, "exact-symbolic", certs)
    return ClassificationReport(None, None, exps, "heuristic-sampled", certs)


class CongruenceAnswer(NamedTuple):
    """``value`` is True / False (exact) or the heuristic guess; ``mode`` says which."""

    value: bool
    mode: str
    certificates: list
    distinguisher: object

    def __bool__(self):
        return self.value


def _first_difference(a, b):
    ua, ub = a.unsigned(), b.unsigned()
    diff = (ua - ub) + (ub - ua)
    return sorted(diff.elements())[0] if diff else None


def _part_certificate(Xa, Xb, sign, n):
    """``k`` certificate between two definite parts (negated when ``sign < 0``)."""
    A = as_field(Xa.alpha, n)
    B = as_field(Xb.alpha, n)
    if sign < 0:
        A, B = -A, -B
    f, g = positive_iso_data(A, B)
    return congruence_positive(A, B, f, g)


def congruent(phi, psi, n=DEFAULT_GRID, certify=True):
    """Decide congruence of two non-degenerate forms.

    Symbolic forms: exact comparison of the signed part signatures; a
    positive answer carries one ``k`` certificate per part, and a negative
    one the first distinguishing germ.  Sampled forms: module isomorphism of
    the parts by density curves, labeled heuristic.
    """
    sa, sb = pos_neg_split(phi, n), pos_neg_split(psi, n)
    parts = ((sa.plus.X, sb.plus.X, 1), (sa.minus.X, sb.minus.X, -1))
    if all(x.symbolic and y.symbolic for x, y, _ in parts):
        for x, y, _ in parts:
            d = _first_difference(germ_signature(x), germ_signature(y))
            if d is not None:
                return CongruenceAnswer(False, "exact", [], d)
        certs = [_part_certificate(x, y, s, n) for x, y, s in parts] if certify else []
        return CongruenceAnswer(True, "exact", certs, None)
    verdicts = [iso_modules(x, y) for x, y, _ in parts]
    value = all(v.value for v in verdicts)
    certs = []
    if value and certify:
        certs = [_part_certificate(x, y, s, n) for x, y, s in parts]
    return CongruenceAnswer(value, "heuristic", certs, None if value else verdicts)


# ---------------------------------------------------------------------------
# independent oracle


class OracleVerdict(NamedTuple):
    answer: str
    dilatation: tuple
    levels: list


def _as_parts(x):
    if isinstance(x, TorsionForm):
        x = x.alpha
    if isinstance(x, TorsionObject):
        x = x.alpha
    return (x,) if isinstance(x, GermField) else tuple(x)


def ratio_oracle(alpha, beta, refinements=(2, 3, 4, 5, 6)):
    """Compare two symbolic fields by sampling near their zeros.

    At every zero location of either field and on each side, both fields are
    evaluated at distance ``10**-k``.  Components that shrink by more than a
    factor 10 over the refinement range count as vanishing; within each sign
    class the vanishing magnitudes are sorted and paired.  A mismatch in
    counts is a distinguisher.  Otherwise each ratio must settle (log10
    change below 0.25 per decade between the two finest levels); growth
    above 0.75 per decade is a distinguisher and anything in between makes
    the answer inconclusive.
    """
    A, B = _as_parts(alpha), _as_parts(beta)
    levels = list(refinements)
    locs = sorted({g.at for p in A + B for g in p.germs})
    worst = {1: 1.0, -1: 1.0}
    answer = "congruent"
    for z0 in locs:
        for side in (-1.0, 1.0):
            z = (z0 + side * 10.0 ** -np.asarray(levels, dtype=float)) % 1.0
            va = np.array([p(z) for p in A])
            vb = np.array([p(z) for p in B])
            for sign in (1, -1):
                ma = _vanishing(va, sign)
                mb = _vanishing(vb, sign)
                if ma.shape[0] != mb.shape[0]:
                    return OracleVerdict("not-congruent", (worst[1], worst[-1]), levels)
                if ma.shape[0] == 0:
                    continue
                ratio = mb / ma
                for row in ratio:
                    v = growth_verdict(levels, np.maximum(row, 1.0 / row))
                    if v is False:
                        return OracleVerdict("not-congruent", (worst[1], worst[-1]), levels)
                    if v is None:
                        answer = "inconclusive"
                    c = float(max(row[-1], 1.0 / row[-1]))
                    worst[sign] = max(worst[sign], c)
    return OracleVerdict(answer, (worst[1], worst[-1]), levels)


def _vanishing(vals, sign):
    """Sorted magnitudes (per level) of components of the given sign that vanish.

    A component qualifies if its sign at the two finest levels is ``sign`` and
    it shrinks by more than a factor 10 from the coarsest to the finest level.
    """
    keep = []
    for row in vals:
        if np.all(np.sign(row[-2:]) == sign) and abs(row[-1]) < 0.1 * abs(row[0]):
            keep.append(np.abs(row))
    if not keep:
        return np.zeros((0, vals.shape[1]))
    return np.sort(np.array(keep), axis=0)


# ---------------------------------------------------------------------------
# random instances

UNITS = ("1", "1+z/2", "2-z")


def _unit_value(u, z):
    return {"1": 1.0, "1+z/2": 1.0 + z / 2, "2-z": 2.0 - z}[u]


def germ_field_from_factors(factors, unit="1", sign=1, validate=True):
    """Product ``sign * unit * prod(factor)`` with its exact germ data.

    ``factors`` holds ``(location, order, absolute)`` triples; an absolute
    factor is ``|z - z_i|**p``, otherwise ``(z - z_i)**p``.
    """
    terms = []
    for zi, p, ab in factors:
        terms.append(f"abs(z-{zi!r})^{p}" if ab else f"(z-{zi!r})^{p}")
    body = "*".join(terms) if terms else "1"
    expr = f"{'-' if sign < 0 else ''}({unit})*{body}"
    germs = []
    for i, (zi, p, ab) in enumerate(factors):
        coeff = abs(_unit_value(unit, zi))
        base_sign = sign * int(np.sign(_unit_value(unit, zi)))
        for j, (zj, q, abj) in enumerate(factors):
            if j == i:
                continue
            v = zi - zj
            coeff *= abs(v) ** q
            if not abj and q % 2 == 1 and v < 0:
                base_sign = -base_sign
        left = base_sign * (1 if ab or p % 2 == 0 else -1)
        right = base_sign
        germs += germs_from_zero(zi, p, left, right, coeff)
    return GermField(expr, germs, validate=validate)


def random_factors(rng, max_zeros=3, max_order=3):
    k = int(rng.integers(1, max_zeros + 1))
    slots = rng.choice(np.arange(1, 32), size=k, replace=False)
    return [(float(s) / 32, int(rng.integers(1, max_order + 1)), bool(rng.integers(0, 2))) for s in sorted(slots)]


def random_germ_field(rng, max_zeros=3, max_order=3):
    """Random product of zero factors, a unit and a sign; zeros at multiples of 1/32."""
    factors = random_factors(rng, max_zeros, max_order)
    unit = UNITS[int(rng.integers(0, len(UNITS)))]
    sign = 1 if rng.random() < 0.5 else -1
    return germ_field_from_factors(factors, unit, sign), (factors, unit, sign)


def congruent_variant(rng, spec):
    """Same zeros, orders and signs; another positive unit factor."""
    factors, unit, sign = spec
    other = [u for u in UNITS if u != unit]
    new_unit = other[int(rng.integers(0, len(other)))]
    # the abs flag only matters for odd orders
    flipped = [(z, p, ab if p % 2 else not ab) for z, p, ab in factors]
    return germ_field_from_factors(flipped, new_unit, sign)


def mutated_variant(rng, spec, kind=None):
    """Change one germ: order, parity type, location, or the global sign."""
    factors, unit, sign = spec
    kinds = ["order", "type", "move", "sign"]
    kind = kind or kinds[int(rng.integers(0, len(kinds)))]
    factors = list(factors)
    i = int(rng.integers(0, len(factors)))
    z, p, ab = factors[i]
    if kind == "order":
        factors[i] = (z, 1 + (p % 3), ab)
    elif kind == "type":
        if p % 2 == 0:
            p = p - 1 if p > 1 else 1
            factors[i] = (z, p, ab)
        factors[i] = (z, factors[i][1], not factors[i][2])
    elif kind == "move":
        used = {round(f[0] * 32) for f in factors}
        free = [s for s in range(1, 32) if s not in used]
        factors[i] = (free[int(rng.integers(0, len(free)))] / 32, p, ab)
        factors.sort()
    else:
        sign = -sign
    return germ_field_from_factors(factors, unit, sign)


def hyperbolic_instance(rng):
    """``psi (+) (-psi')`` with ``psi'`` congruent to ``psi``."""
    a, spec = random_germ_field(rng)
    b = congruent_variant(rng, spec)
    return discriminant((a, -b))


def random_form_pair(rng, p_congruent=0.5):
    """Two random symbolic discriminant forms and whether they were built congruent."""
    a, spec = random_germ_field(rng)
    if rng.random() < p_congruent:
        b, built = congruent_variant(rng, spec), True
    else:
        b, built = mutated_variant(rng, spec), False
    return discriminant(a), discriminant(b), built
