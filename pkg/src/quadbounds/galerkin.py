"""Rayleigh-Ritz upper bounds from the definite pencil (A1, A0)."""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .assembly import AssembledForms, band_quadratic_form
from .errors import ConvergenceFailure, SingularMass


def galerkin_eigenvalues(forms: AssembledForms, count: int) -> list[float]:
    """The ``count`` smallest eigenvalues of ``A1 v = lambda A0 v``, ascending.

    The dense solve runs on the Jacobi-scaled pencil (the slope functions are
    O(h) smaller than the value functions, which inflates cond(A0)).  Each
    eigenvalue is then replaced by the Rayleigh quotient of its eigenvector
    in long double, which removes most of the solver rounding.
    """
    size = forms.size
    if not 1 <= count <= size:
        raise ValueError(f"count must be in 1..{size}, got {count}")
    A0, A1 = forms.A0, forms.A1
    s = 1.0 / np.sqrt(np.diag(A0))
    try:
        _, vecs = scipy.linalg.eigh(A1 * s[:, None] * s, A0 * s[:, None] * s,
                                    subset_by_index=[0, count - 1])
    except np.linalg.LinAlgError as exc:
        msg = str(exc)
        if "not positive definite" in msg:
            raise SingularMass("A0 is not positive definite") from exc
        raise ConvergenceFailure("symmetric eigensolver failed", n=forms.mesh.n,
                                 L=forms.mesh.L, detail=msg) from exc
    vals = []
    for v in (vecs * s[:, None]).T:
        num = band_quadratic_form(forms.band(1), v)
        den = band_quadratic_form(forms.band(0), v)
        vals.append(float(num / den))
    return sorted(vals)
