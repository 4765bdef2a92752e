"""Assembly of the three form matrices for H u = -u'' + V u.

``A0[a, b] = <b_a, b_b>``, ``A1[a, b] = <H b_a, b_b>`` and
``A2[a, b] = <H b_a, H b_b>`` on the Hermite trial space.  A1 is assembled in
form representation ``int u'v' + V u v`` (equal to ``<Hu, v>`` for C1 trial
functions vanishing at the ends).  A2 uses the elementwise second derivatives,
which is legitimate because the trial space lies in the operator domain.

All integrals use Gauss-Legendre rules that are exact for the polynomial
integrands.  Storage is LAPACK upper banded form with half-bandwidth 3.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import PositiveDefinitenessFailure
from .hermite_fem import HALF_BANDWIDTH, Dof, DofKind, Mesh, reference_shapes

MIN_GAUSS_POINTS = 8


@dataclass(frozen=True)
class Potential:
    """Polynomial potential ``V(x) = sum(coeffs[k] * x**k)``."""

    name: str
    coeffs: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs = coeffs[:-1]
        if not coeffs or not all(math.isfinite(c) for c in coeffs):
            raise ValueError(f"invalid potential coefficients {self.coeffs!r}")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def harmonic(cls) -> "Potential":
        return cls("harmonic", (0.0, 0.0, 1.0))

    @classmethod
    def anharmonic(cls) -> "Potential":
        return cls("anharmonic", (0.0, 0.0, 0.0, 0.0, 1.0))

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]) -> "Potential":
        name = "poly:" + ",".join(f"{float(c):g}" for c in coeffs)
        return cls(name, tuple(coeffs))

    @classmethod
    def parse(cls, text: str) -> "Potential":
        """Parse ``harmonic``, ``anharmonic`` or ``poly:c0,c1,...``."""
        text = text.strip()
        if text == "harmonic":
            return cls.harmonic()
        if text == "anharmonic":
            return cls.anharmonic()
        m = re.fullmatch(r"poly:(.+)", text)
        if m:
            return cls.polynomial([float(c) for c in m.group(1).split(",")])
        raise ValueError(f"unknown potential {text!r}; use harmonic, anharmonic or poly:c0,c1,...")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.coeffs)

    def minimum_on(self, L: float) -> float:
        """Minimum of V over [-L, L] (critical points plus endpoints)."""
        cands = [-L, L]
        if self.degree >= 2:
            crit = np.polynomial.polynomial.polyroots(
                np.polynomial.polynomial.polyder(self.coeffs)
            )
            cands += [c.real for c in crit if abs(c.imag) < 1e-12 and -L <= c.real <= L]
        return float(min(self(np.array(cands))))


@lru_cache(maxsize=None)
def gauss_legendre_unit(npts: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(npts)
    t = 0.5 * (x + 1.0)
    w = 0.5 * w
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def gauss_points_for(potential: Potential) -> int:
    # integrand degree of <H b, H b> is 6 + 2 deg V
    degree = 6 + 2 * potential.degree
    return max(MIN_GAUSS_POINTS, math.ceil((degree + 1) / 2))


def local_moment(mesh: Mesh, dof_a: Dof, dof_b: Dof, deriv_a: int, deriv_b: int, m: int,
                 npts: int | None = None) -> float:
    """``int b_a^(deriv_a)(x) x^m b_b^(deriv_b)(x) dx`` over the shared support."""
    if deriv_a not in (0, 1, 2) or deriv_b not in (0, 1, 2):
        raise ValueError("derivative orders must be 0, 1 or 2")
    if not 0 <= m <= 8:
        raise ValueError(f"moment power must be in 0..8, got {m}")
    mesh.dofs.index(dof_a)
    mesh.dofs.index(dof_b)
    if npts is None:
        npts = max(MIN_GAUSS_POINTS, math.ceil((6 + m + 1) / 2))
    t, w = gauss_legendre_unit(npts)
    h = mesh.h

    def local_slot(dof, e):
        slot = 0 if dof.node_index == e else 2
        return slot + (dof.kind is DofKind.DERIVATIVE)

    total = 0.0
    ja, jb = dof_a.node_index, dof_b.node_index
    for e in sorted({ja - 1, ja} & {jb - 1, jb}):
        if not 0 <= e < mesh.n:
            continue
        x = mesh.nodes[e] + t * h
        fa = reference_shapes(t, h, deriv_a)[local_slot(dof_a, e)]
        fb = reference_shapes(t, h, deriv_b)[local_slot(dof_b, e)]
        total += h * float(np.sum(w * fa * x**m * fb))
    return total


def _element_matrices(mesh: Mesh, potential: Potential, npts: int):
    t, w = gauss_legendre_unit(npts)
    h = mesh.h
    N0 = reference_shapes(t, h, 0)
    N1 = reference_shapes(t, h, 1)
    N2 = reference_shapes(t, h, 2)
    x = mesh.nodes[:-1, None] + h * t[None, :]
    V = potential(x)
    hw = h * w

    m0 = np.einsum("q,aq,bq->ab", hw, N0, N0)
    k1 = np.einsum("q,aq,bq->ab", hw, N1, N1)
    mv = np.einsum("q,eq,aq,bq->eab", hw, V, N0, N0)
    Hb = -N2[None, :, :] + V[:, None, :] * N0[None, :, :]
    a2 = np.einsum("q,eaq,ebq->eab", hw, Hb, Hb)

    n = mesh.n
    a0 = np.broadcast_to(m0, (n, 4, 4))
    a1 = k1[None, :, :] + mv
    return a0, a1, a2


def _scatter_band(mesh: Mesh, local: np.ndarray) -> np.ndarray:
    u = HALF_BANDWIDTH
    size = mesh.size
    band = np.zeros((u + 1, size))
    emap = mesh.dofs.element_map
    # local order (p_l, q_l, p_r, q_r) maps to increasing global indices,
    # so a <= b fills the upper triangle; each entry is touched once per element
    for a in range(4):
        for b in range(a, 4):
            gi, gj = emap[:, a], emap[:, b]
            ok = (gi >= 0) & (gj >= 0)
            np.add.at(band, (u + gi[ok] - gj[ok], gj[ok]), local[ok, a, b])
    return band


def band_to_dense(band: np.ndarray) -> np.ndarray:
    u = band.shape[0] - 1
    size = band.shape[1]
    dense = np.zeros((size, size))
    for d in range(u + 1):
        diag = band[u - d, d:]
        idx = np.arange(size - d)
        dense[idx, idx + d] = diag
        dense[idx + d, idx] = diag
    return dense


def band_quadratic_form(band: np.ndarray, v: np.ndarray, dtype=np.longdouble):
    """``v^T A v`` for symmetric ``A`` in upper band storage, accumulated in ``dtype``."""
    u = band.shape[0] - 1
    b = np.asarray(band, dtype=dtype)
    v = np.asarray(v, dtype=dtype)
    total = np.sum(b[u] * v * v)
    for d in range(1, u + 1):
        total += 2 * np.sum(b[u - d, d:] * v[:-d] * v[d:])
    return total


@dataclass(frozen=True)
class AssembledForms:
    mesh: Mesh
    potential: Potential
    bands: tuple[np.ndarray, np.ndarray, np.ndarray] = field(repr=False)
    gauss_points: int = MIN_GAUSS_POINTS
    warnings: tuple[str, ...] = ()

    @property
    def size(self) -> int:
        return self.mesh.size

    def band(self, ell: int) -> np.ndarray:
        return self.bands[ell]

    def dense(self, ell: int) -> np.ndarray:
        return band_to_dense(self.bands[ell])

    @cached_property
    def A0(self) -> np.ndarray:
        return self.dense(0)

    @cached_property
    def A1(self) -> np.ndarray:
        return self.dense(1)

    @cached_property
    def A2(self) -> np.ndarray:
        return self.dense(2)


def assemble_forms(mesh: Mesh, potential: Potential, npts: int | None = None) -> AssembledForms:
    if npts is None:
        npts = gauss_points_for(potential)
    a0, a1, a2 = _element_matrices(mesh, potential, npts)
    bands = tuple(_scatter_band(mesh, loc) for loc in (a0, a1, a2))
    for b in bands:
        b.setflags(write=False)

    try:
        scipy.linalg.cholesky_banded(bands[0], lower=False)
    except np.linalg.LinAlgError as exc:
        raise PositiveDefinitenessFailure(
            f"Gram matrix is not positive definite for L={mesh.L}, n={mesh.n}"
        ) from exc

    warnings = []
    vmin = potential.minimum_on(mesh.L)
    if vmin < 0:
        warnings.append(f"potential {potential.name} reaches {vmin:.6g} < 0 on [-L, L]")
    return AssembledForms(mesh=mesh, potential=potential, bands=bands,
                          gauss_points=npts, warnings=tuple(warnings))


def write_coordinate(matrix: np.ndarray, fh) -> int:
    """Write nonzeros as ``row col value`` lines (0-based, 17 significant digits)."""
    rows, cols = np.nonzero(matrix)
    for i, j in zip(rows, cols):
        fh.write(f"{i} {j} {matrix[i, j]:.17g}\n")
    return len(rows)
