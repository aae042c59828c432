"""Hermitian forms on torsion modules over the circle.

Sampled operator fields are stacks of small complex matrices on a
half-offset grid; symbolic scalar fields carry exact zero germs.  The
subpackages build discriminant forms, split and reduce them, and certify
congruences with functional-calculus square roots.
"""

import os

# cap BLAS threads before numpy is first imported
_threads = os.environ.get("TFORMS_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

from .errors import ParseError, TformsError, ValidationError  # noqa: E402
from .fields import CircleGrid, Field, Germ, GermField  # noqa: E402
from .torsion import TorsionMorphism, TorsionObject, density_curve, germ_signature, ns_exponent  # noqa: E402
from .forms import (  # noqa: E402
    TorsionForm,
    discriminant,
    is_hyperbolic,
    is_metabolizer,
    metabolizer,
    pos_neg_split,
    reduce_to_discriminant,
)
from .congruence import congruence_positive, excision_isometry  # noqa: E402
from .classify import classify_form, congruent, ratio_oracle  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    "CircleGrid",
    "Field",
    "Germ",
    "GermField",
    "ParseError",
    "TformsError",
    "TorsionForm",
    "TorsionMorphism",
    "TorsionObject",
    "ValidationError",
    "classify_form",
    "congruence_positive",
    "congruent",
    "density_curve",
    "discriminant",
    "excision_isometry",
    "germ_signature",
    "is_hyperbolic",
    "is_metabolizer",
    "metabolizer",
    "ns_exponent",
    "pos_neg_split",
    "ratio_oracle",
    "reduce_to_discriminant",
]
