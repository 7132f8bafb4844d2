"""Hilbert modules over finite-dimensional block matrix algebras.

Coercivity certificates for module-valued sesquilinear forms, a
representation solver with the norm bound ||x|| <= ||tau|| / c, and a
scenario runner exposed through a CLI and an HTTP service.
"""

__version__ = "0.1.0"

from .algebra import (
    AlgebraElement,
    AlgebraShape,
    abs_element,
    hermitian_eigensystem,
    invert,
    is_positive,
    operator_norm,
    polar_decompose,
    positive_sqrt,
    range_projection,
)

__all__ = [
    "AlgebraElement",
    "AlgebraShape",
    "abs_element",
    "hermitian_eigensystem",
    "invert",
    "is_positive",
    "operator_norm",
    "polar_decompose",
    "positive_sqrt",
    "range_projection",
    "__version__",
]
