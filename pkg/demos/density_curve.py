"""Spectral density near zero for |z - 1/2|^p; the fitted exponent approaches 1/p."""

from tforms import generators as gen
from tforms.torsion import density_curve, ns_exponent

for p in (1, 2, 3):
    curve = density_curve(gen.germ_alpha(65536, 0.5, p))
    print(f"p = {p}: exponent {ns_exponent(curve):.4f} (1/p = {1 / p:.4f})")
    for lam, F in list(zip(curve.lambdas, curve.F))[::50]:
        print(f"    F({lam:.2e}) = {F:.3e}")
