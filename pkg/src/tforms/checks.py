"""Seeded property suite behind ``tforms check``.

Every check draws its instances from one generator seeded by the suite seed
and the check name, so a report depends only on the seed.  A check returns
the number of trials, the number that failed and the worst residual seen.
"""

import zlib

import numpy as np

from . import generators as gen
from . import linalg
from .classify import congruent, germ_field_from_factors, hyperbolic_instance, random_form_pair, random_germ_field, ratio_oracle
from .congruence import congruence_positive, excision_isometry, spectrum_positivity, superfinite_check
from .fields import GermField, sample_symbolic
from .forms import discriminant, is_hyperbolic, is_metabolizer, metabolizer, pos_neg_split
from .torsion import density_curve, germ_signature, ns_exponent

SUITES = ("linalg", "forms", "classify")
_CHECKS = {s: [] for s in SUITES}


def _check(suite):
    def deco(fn):
        _CHECKS[suite].append(fn)
        return fn

    return deco


def _rng(seed, name):
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


class _Tally:
    def __init__(self):
        self.trials = 0
        self.failed = 0
        self.worst = 0.0

    def add(self, ok, residual=0.0):
        self.trials += 1
        self.failed += 0 if ok else 1
        if np.isfinite(residual):
            self.worst = max(self.worst, float(residual))


# ---------------------------------------------------------------------------
# linalg


@_check("linalg")
def eigen_reconstruction(rng, t):
    for d in range(1, linalg.MAX_DIM + 1):
        M = gen.random_hermitian(rng, 32, d)
        w, V = linalg.herm_eig(M)
        rec = linalg.rel_residual(linalg.from_eig(w, V), M)
        orth = linalg.ess_sup(linalg.adjoint(V) @ V - np.eye(d))
        t.add(rec <= 1e-10 and orth <= 1e-10 and np.all(np.diff(w, axis=1) >= 0), max(rec, orth))


@_check("linalg")
def eigen_known_values(rng, t):
    w, V = linalg.herm_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
    err = np.abs(w - [-1.0, 1.0]).max()
    t.add(err <= 1e-14, err)
    D = np.diag([2.0, -3.0, 0.5])
    U = gen.random_unitary(rng, 1, 3)[0]
    w, _ = linalg.herm_eig(U @ D @ U.conj().T)
    err = np.abs(w - np.sort(np.diag(D))).max()
    t.add(err <= 1e-12, err)


@_check("linalg")
def sqrt_methods_agree(rng, t):
    for d in (1, 2, 3, 4):
        w = 10.0 ** rng.uniform(-3, 1, size=(16, d))
        A = gen.hermitian_with_spectrum(rng, w)
        R_eig = linalg.principal_sqrt(A, "eig")
        R_con = linalg.principal_sqrt(A, "contour")
        R_db = linalg.principal_sqrt(A, "iteration")
        err = max(linalg.rel_residual(R_con, R_eig), linalg.rel_residual(R_db, R_eig))
        sq = linalg.rel_residual(R_eig @ R_eig, A)
        t.add(err <= 1e-9 and sq <= 1e-10, max(err, sq))


@_check("linalg")
def sqrt_nonnormal(rng, t):
    for d in (2, 3, 4):
        T = np.eye(d) + 0.3 * (rng.normal(size=(16, d, d)))
        w = rng.uniform(0.2, 3.0, size=(16, d))
        M = T @ (w[:, :, None] * np.eye(d)) @ np.linalg.inv(T)
        R, _ = linalg.sqrt_on_circle(M, 1.6, 1.5)
        R2 = linalg.principal_sqrt(M, "contour")
        err = max(linalg.rel_residual(R @ R, M), linalg.rel_residual(R2, R))
        t.add(err <= 1e-9, err)


@_check("linalg")
def projector_identities(rng, t):
    for d in (1, 2, 4):
        A = gen.random_hermitian(rng, 32, d)
        P = linalg.spectral_projector(A, 0.0)
        err = max(linalg.rel_residual(P @ P, P), linalg.rel_residual(A @ P, P @ A))
        t.add(err <= 1e-10, err)


# ---------------------------------------------------------------------------
# forms


@_check("forms")
def sampling_commutes(rng, t):
    f = GermField.from_zeros("(z-0.25)*(1+z/2)", [{"at": 0.25, "order": 1, "left": "-", "right": "+", "coeff": 1.125}])
    g = GermField.from_zeros("abs(z-0.5)^2", [{"at": 0.5, "order": 2, "left": "+", "right": "+"}])
    n = 256
    F, Gs = sample_symbolic(f, n), sample_symbolic(g, n)
    for sym, num in ((f * g, F @ Gs), (f.scale(2.0), F.scale(2.0)), (g.sqrt_abs(), None)):
        S = sample_symbolic(sym, n)
        ref = num.data if num is not None else np.sqrt(np.abs(Gs.data))
        err = linalg.ess_sup(S.data - ref)
        t.add(err <= 1e-12, err)


@_check("forms")
def excision_certificates(rng, t):
    for i in range(20):
        d = 1 + i % 4
        product = 0.9 if i % 2 == 0 else float(rng.uniform(1.5, 4.0))
        a, b, f, g, _ = gen.isometry_pair(rng, 8, d, product)
        c = excision_isometry(a, b, f, g)
        t.add(c.ok, max([c.residual, *c.identities.values()]))


@_check("forms")
def k_certificates(rng, t):
    for i in range(20):
        a, b, f, g, k = gen.positive_pair(rng, 8, 1 + i % 4)
        c = congruence_positive(a, b, f, g)
        err = linalg.rel_residual(c.field.data, k.data)
        t.add(c.ok and err <= 1e-9, max([c.residual, err, *c.identities.values()]))


@_check("forms")
def split_reassembly(rng, t):
    for i in range(10):
        a = gen.random_alpha(rng, 16, 1 + i % 4)
        sp = pos_neg_split(discriminant(a))
        t.add(sp.certificate.residual <= 1e-8, sp.certificate.residual)


@_check("forms")
def metabolizer_delta(rng, t):
    for i in range(10):
        a = gen.random_alpha(rng, 16, 1 + i % 4)
        phi = discriminant(a)
        m = metabolizer(phi)
        chk = is_metabolizer(phi, m.Y)
        t.add(chk.ok and m.residual <= 1e-10, m.residual)


@_check("forms")
def density_exponent(rng, t):
    for p in (1, 2, 3):
        e = ns_exponent(density_curve(gen.germ_alpha(65536, 0.5, p)))
        err = abs(e * p - 1)
        t.add(err <= 0.05, err)


@_check("forms")
def superfiniteness(rng, t):
    for i in range(10):
        a, f, _ = gen.superfinite_pair(rng, 64, 1 + i % 4)
        ok, rep = superfinite_check(a, f)
        t.add(ok, 0.0)
        a, b = gen.positivity_pair(rng, 64, 1 + i % 4)
        ok, lo = spectrum_positivity(a, b)
        t.add(ok, max(0.0, -lo))


# ---------------------------------------------------------------------------
# classify


@_check("classify")
def congruence_vs_oracle(rng, t):
    for _ in range(20):
        phi, psi, built = random_form_pair(rng)
        ans = congruent(phi, psi, n=1024)
        orc = ratio_oracle(phi, psi)
        agree = orc.answer == "inconclusive" or (orc.answer == "congruent") == ans.value
        certs = all(c.ok for c in ans.certificates)
        worst = max([0.0] + [c.residual for c in ans.certificates])
        t.add(agree and ans.value == built and certs, worst)


@_check("classify")
def definite_parts(rng, t):
    for _ in range(10):
        factors = [(float(s) / 32, int(rng.integers(1, 4)), True) for s in sorted(rng.choice(np.arange(1, 32), 2, replace=False))]
        sign = 1 if rng.random() < 0.5 else -1
        phi = discriminant(germ_field_from_factors(factors, "1+z/2", sign))
        sp = pos_neg_split(phi)
        empty = sp.minus.X if sign > 0 else sp.plus.X
        t.add(len(germ_signature(empty)) == 0, 0.0)


@_check("classify")
def hyperbolic_structures(rng, t):
    for i in range(4):
        if i % 2 == 0:
            phi, expect = hyperbolic_instance(rng), True
        else:
            a, _ = random_germ_field(rng)
            phi, expect = discriminant(a), False
        h = is_hyperbolic(phi, n=1024)
        worst = 0.0
        if h.value:
            s = h.structure
            worst = max([s["offdiagonal_residual"], s["congruence_residual"], *s["identity_residuals"].values()])
        t.add(h.value == expect and worst <= 1e-8, worst)


def run_checks(seed=42, suite="all"):
    """Run the property suite; returns a JSON-ready report."""
    suites = SUITES if suite == "all" else (suite,)
    rows = []
    for s in suites:
        for fn in _CHECKS[s]:
            t = _Tally()
            try:
                fn(_rng(seed, fn.__name__), t)
                error = None
            except Exception as exc:  # a crash counts as one failed trial
                t.failed += 1
                t.trials += 1
                error = f"{type(exc).__name__}: {exc}"
            rows.append({
                "suite": s,
                "name": fn.__name__,
                "trials": t.trials,
                "failed": t.failed,
                "worst_residual": float(f"{t.worst:.3g}"),
                "error": error,
            })
    passed = sum(1 for r in rows if r["failed"] == 0)
    return {"seed": int(seed), "suite": suite, "passed": passed, "failed": len(rows) - passed, "checks": rows}
