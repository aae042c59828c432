"""Certificates relating alpha and beta = alpha + alpha F alpha on random matrix fields."""

import numpy as np

from tforms import generators as gen
from tforms.congruence import excision_isometry

rng = np.random.default_rng(7)
for product in (0.5, 0.9, 2.0, 5.0):
    a, b, f, g, F = gen.isometry_pair(rng, 256, 3, product)
    c = excision_isometry(a, b, f, g)
    print(f"|alpha||F| = {product:3.1f}: kind {c.kind:13s} residual {c.residual:.2e} "
          f"worst identity {max(c.identities.values()):.2e} eps {c.excised.get('eps', '-')}")
