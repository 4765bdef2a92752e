"""Quadratic pencil Q(z) = A2 - 2 z A1 + z^2 A0 and its second-order spectrum.

The full spectrum comes from the companion linearization

    [[0, I], [-A2, 2 A1]] w = z [[I, 0], [0, A0]] w,

reduced to a standard nonsymmetric eigenproblem with the Cholesky factor of
A0 and solved densely.  Individual points can then be polished by Newton's
method on det Q(z), evaluated through a banded LU in extended precision.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .assembly import band_quadratic_form
from .errors import ConvergenceFailure, SingularMass

_EXT = np.longdouble
_CEXT = np.clongdouble


@dataclass(frozen=True)
class SecondOrderPoint:
    z: complex
    residual: float
    refined: bool = False

    @property
    def real(self) -> float:
        return self.z.real

    @property
    def imag(self) -> float:
        return self.z.imag


@dataclass(frozen=True)
class CompanionPair:
    C: np.ndarray
    D: np.ndarray


def _half_bandwidth(M: np.ndarray) -> int:
    rows, cols = np.nonzero(M)
    return int(np.max(np.abs(rows - cols))) if rows.size else 0


def _upper_band(M: np.ndarray, u: int) -> np.ndarray:
    size = M.shape[0]
    band = np.zeros((u + 1, size))
    for d in range(u + 1):
        band[u - d, d:] = np.diagonal(M, d)
    return band


@dataclass(frozen=True, eq=False)
class QuadraticPencil:
    """Real symmetric coefficient triple (A0, A1, A2) with A0 positive definite."""

    A0: np.ndarray = field(repr=False)
    A1: np.ndarray = field(repr=False)
    A2: np.ndarray = field(repr=False)
    half_bandwidth: int = 0
    forms: object = field(default=None, repr=False)

    @classmethod
    def from_forms(cls, forms) -> "QuadraticPencil":
        return cls(forms.A0, forms.A1, forms.A2,
                   half_bandwidth=forms.band(0).shape[0] - 1, forms=forms)

    @classmethod
    def from_matrices(cls, A0, A1, A2) -> "QuadraticPencil":
        mats = [np.atleast_2d(np.asarray(M, dtype=float)) for M in (A0, A1, A2)]
        for M in mats:
            if M.shape != mats[0].shape or M.shape[0] != M.shape[1]:
                raise ValueError("coefficient matrices must be square and of equal size")
            if not np.array_equal(M, M.T):
                raise ValueError("coefficient matrices must be symmetric")
        u = max(_half_bandwidth(M) for M in mats)
        return cls(*mats, half_bandwidth=u)

    @classmethod
    def from_operator(cls, A, basis) -> "QuadraticPencil":
        """Pencil of a symmetric matrix ``A`` restricted to the span of ``basis`` columns."""
        A = np.asarray(A, dtype=float)
        B = np.asarray(basis, dtype=float)
        if B.ndim == 1:
            B = B[:, None]
        AB = A @ B
        sym = lambda M: 0.5 * (M + M.T)
        return cls.from_matrices(sym(B.T @ B), sym(B.T @ AB), sym(AB.T @ AB))

    @property
    def size(self) -> int:
        return self.A0.shape[0]

    @cached_property
    def bands(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self.forms is not None:
            return tuple(self.forms.band(ell) for ell in range(3))
        return tuple(_upper_band(M, self.half_bandwidth) for M in (self.A0, self.A1, self.A2))

    @cached_property
    def norms(self) -> tuple[float, float, float]:
        return tuple(float(np.linalg.norm(M, 2)) for M in (self.A0, self.A1, self.A2))

    @cached_property
    def cholesky(self) -> np.ndarray:
        try:
            return scipy.linalg.cholesky(self.A0, lower=True)
        except np.linalg.LinAlgError as exc:
            raise SingularMass("A0 is not positive definite") from exc

    @cached_property
    def reduced(self) -> tuple[np.ndarray, np.ndarray]:
        """``L^-1 A1 L^-T`` and ``L^-1 A2 L^-T`` for ``A0 = L L^T``."""
        L = self.cholesky
        out = []
        for M in (self.A1, self.A2):
            X = scipy.linalg.solve_triangular(L, M, lower=True)
            X = scipy.linalg.solve_triangular(L, X.T, lower=True)
            out.append(0.5 * (X + X.T))
        return tuple(out)

    def scale(self, z: complex) -> float:
        n0, n1, n2 = self.norms
        return n2 + 2 * abs(z) * n1 + abs(z) ** 2 * n0


def pencil_eval(P: QuadraticPencil, z: complex) -> np.ndarray:
    return P.A2 - 2 * z * P.A1 + z * z * P.A0


def companion(P: QuadraticPencil) -> CompanionPair:
    P.cholesky  # raises SingularMass
    n = P.size
    I = np.eye(n)
    Z = np.zeros((n, n))
    C = np.block([[Z, I], [-P.A2, 2 * P.A1]])
    D = np.block([[I, Z], [Z, P.A0]])
    return CompanionPair(C, D)


def reduced_companion(P: QuadraticPencil) -> np.ndarray:
    """Standard-form matrix with the same eigenvalues as the companion pair.

    With ``A0 = L L^T`` and ``u = L^-T u'``, ``v = L^-T w`` the pair (C, D)
    is strictly equivalent to ``[[0, I], [-L^-1 A2 L^-T, 2 L^-1 A1 L^-T]]``.
    """
    T1, T2 = P.reduced
    n = P.size
    return np.block([[np.zeros((n, n)), np.eye(n)], [-T2, 2 * T1]])


def _eigvals_nonsymmetric(S: np.ndarray, balance: bool) -> np.ndarray:
    if balance:
        S = scipy.linalg.matrix_balance(S, permute=True, scale=True)[0]
    # dgees only permutes; the explicit balancing above is the sole scaling step
    out = lapack.dgees(lambda wr, wi: 0, S, compute_v=0, sort_t=0, overwrite_a=True)
    info = out[-1]
    if info != 0:
        raise ConvergenceFailure("nonsymmetric eigensolver failed", info=int(info), size=S.shape[0],
                                 balance=balance)
    return out[2] + 1j * out[3]


def second_order_spectrum(P: QuadraticPencil, balance: bool = True,
                          residuals: bool = True) -> list[SecondOrderPoint]:
    """All 2N points of the second-order spectrum, sorted by (Re z, Im z)."""
    zs = _eigvals_nonsymmetric(reduced_companion(P), balance)
    zs = sorted(zs.tolist(), key=lambda z: (z.real, z.imag))
    cache: dict[complex, float] = {}
    points = []
    for z in zs:
        if residuals:
            key = complex(z.real, abs(z.imag))
            if key not in cache:
                cache[key] = normalized_residual(P, key)
            res = cache[key]
        else:
            res = float("nan")
        points.append(SecondOrderPoint(complex(z), res))
    return points


# --- banded evaluations ----------------------------------------------------


def _general_band(P: QuadraticPencil, z: complex) -> np.ndarray:
    """Q(z) in LAPACK general band layout with room for pivoting fill-in."""
    u = P.half_bandwidth
    b0, b1, b2 = P.bands
    upper = b2 - 2 * z * b1 + z * z * b0
    size = P.size
    ab = np.zeros((3 * u + 1, size), dtype=complex)
    # a[i, j] -> ab[2u + i - j, j]
    ab[u:2 * u + 1, :] = upper
    for d in range(1, u + 1):
        ab[2 * u + d, : size - d] = upper[u - d, d:]
    return ab


def normalized_residual(P: QuadraticPencil, z: complex, iterations: int = 8) -> float:
    """Upper estimate of ``sigma_min(Q(z)) / (|A2| + 2|z||A1| + |z|^2 |A0|)``.

    Inverse iteration on ``(Q^H Q)^-1`` with a banded LU; the Rayleigh
    quotient bounds the largest eigenvalue from below, so the returned value
    never underestimates the smallest singular value.
    """
    u = P.half_bandwidth
    ab = _general_band(P, z)
    lu, piv, info = lapack.zgbtrf(ab, u, u)
    if info > 0:
        return 0.0
    x = np.cos(np.arange(P.size) * 0.7) + 0.5
    x = x / np.linalg.norm(x)
    best = np.inf
    for _ in range(iterations):
        w, info = lapack.zgbtrs(lu, u, u, x, piv, trans=2)
        nw = np.linalg.norm(w)
        if not np.isfinite(nw) or nw == 0:
            return 0.0
        sigma = 1.0 / nw
        v, info = lapack.zgbtrs(lu, u, u, w, piv, trans=0)
        x = v / np.linalg.norm(v)
        if abs(sigma - best) <= 1e-3 * sigma:
            best = min(best, sigma)
            break
        best = min(best, sigma)
    return float(best / P.scale(z))


@dataclass(frozen=True, eq=False)
class _ExtendedBands:
    rows: tuple  # (A0, A1, A2) in row-window layout, long double


def _row_window(band: np.ndarray, u: int) -> np.ndarray:
    """Row i holds columns i-u .. i+2u (width 3u+1); u padding rows at the end."""
    size = band.shape[1]
    W = np.zeros((size + u, 3 * u + 1), dtype=_EXT)
    for d in range(u + 1):
        diag = band[u - d, d:].astype(_EXT)
        W[: size - d, u + d] = diag
        W[d:size, u - d] = diag
    return W


def _extended(P: QuadraticPencil):
    cached = P.__dict__.get("_ext_rows")
    if cached is None:
        cached = tuple(_row_window(b, P.half_bandwidth) for b in P.bands)
        P.__dict__["_ext_rows"] = cached
    return cached


def logdet_derivative(P: QuadraticPencil, z: complex) -> complex:
    """``d/dz log det Q(z)`` via banded LU with partial pivoting in long double.

    The derivative is propagated through the elimination (forward mode), so
    the result is ``sum(dU_kk / U_kk)``.  Returns ``inf`` on an exact zero pivot.
    """
    u = P.half_bandwidth
    W0, W1, W2 = _extended(P)
    zz = _CEXT(z)
    A = W2 - 2 * zz * W1 + zz * zz * W0
    dA = (-2 * W1 + 2 * zz * W0).astype(_CEXT)
    ar = np.arange(u + 1)
    cols = u - ar[:, None] + np.arange(2 * u + 1)[None, :]
    total = _CEXT(0)
    for k in range(P.size):
        rows = (k + ar)[:, None]
        M = A[rows, cols]
        dM = dA[rows, cols]
        p = int(np.argmax(np.abs(M[:, 0])))
        if p:
            M[[0, p]] = M[[p, 0]]
            dM[[0, p]] = dM[[p, 0]]
        piv, dpiv = M[0, 0], dM[0, 0]
        if piv == 0:
            return complex(np.inf)
        f = M[1:, 0] / piv
        df = (dM[1:, 0] * piv - M[1:, 0] * dpiv) / (piv * piv)
        M[1:] -= f[:, None] * M[0]
        dM[1:] -= df[:, None] * M[0] + f[:, None] * dM[0]
        total += dpiv / piv
        A[rows, cols] = M
        dA[rows, cols] = dM
    return complex(total)


def refine_point(P: QuadraticPencil, z0: complex, max_steps: int = 80,
                 tol: float = 1e-15) -> SecondOrderPoint:
    """Polish a point of the second-order spectrum by Newton's method on det Q.

    Starting above a near-real conjugate pair, the iteration contracts onto
    the upper member of the pair.  Iteration stops on a relative step below
    ``tol`` or once the steps stop shrinking at the rounding floor.
    """
    z = complex(z0)
    prev = np.inf
    for step in range(max_steps):
        s = logdet_derivative(P, z)
        if not np.isfinite(s):
            break
        if s == 0:
            raise ConvergenceFailure("Newton derivative vanished", z0=z0, z=z)
        dz = -1.0 / s
        z = z + dz
        size = abs(dz)
        if size <= tol * (1 + abs(z)):
            break
        if size >= prev and size <= 1e-7 * (1 + abs(z)):
            break
        prev = size
    else:
        raise ConvergenceFailure("Newton refinement did not converge", z0=z0, z=z, steps=max_steps)
    return SecondOrderPoint(z, normalized_residual(P, z), refined=True)


# --- distance bound ----------------------------------------------------------


def _quadform_ext(P: QuadraticPencil, x: float, v: np.ndarray) -> tuple:
    """``v^T Q(x) v`` and ``v^T A0 v`` accumulated in long double from the bands."""
    xe = _EXT(x)
    b0, b1, b2 = (b.astype(_EXT) for b in P.bands)
    return band_quadratic_form(b2 - 2 * xe * b1 + xe * xe * b0, v), band_quadratic_form(b0, v)


def _upper_solve_ext(ub: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Solve ``U y = w`` for banded upper-triangular ``U`` in long double."""
    u = ub.shape[0] - 1
    size = ub.shape[1]
    U = ub.astype(_EXT)
    y = np.zeros(size, dtype=_EXT)
    w = np.asarray(w, dtype=_EXT)
    for i in range(size - 1, -1, -1):
        acc = w[i]
        for d in range(1, min(u, size - 1 - i) + 1):
            acc -= U[u - d, i + d] * y[i + d]
        y[i] = acc / U[u, i]
    return y


def distance_bound(P: QuadraticPencil, x: float) -> float:
    """``F(x) = min ||(x - A) v|| / ||v||`` over the trial space.

    Square root of the smallest eigenvalue of the definite pencil (Q(x), A0).
    The eigenvector comes from a dense solve; the eigenvalue is its Rayleigh
    quotient in extended precision, which is accurate to second order.
    """
    P.cholesky
    Q = pencil_eval(P, float(x)).real
    _, vec = scipy.linalg.eigh(Q, P.A0, subset_by_index=[0, 0])
    num, den = _quadform_ext(P, x, vec[:, 0])
    return float(np.sqrt(max(num / den, 0)))


def orthonormal_min_singular(P: QuadraticPencil, x: float) -> float:
    """``G(x) = sigma_min(L^-1 Q(x) L^-T)`` with ``A0 = L L^T``.

    The transformed matrix is symmetric positive semidefinite, so its
    smallest singular value is the Rayleigh quotient of the corresponding
    singular vector, evaluated in extended precision.
    """
    L = P.cholesky
    Q = pencil_eval(P, float(x)).real
    X = scipy.linalg.solve_triangular(L, Q, lower=True)
    X = scipy.linalg.solve_triangular(L, X.T, lower=True)
    _, _, vt = scipy.linalg.svd(0.5 * (X + X.T))
    w = vt[-1]
    y = _upper_solve_ext(scipy.linalg.cholesky_banded(P.bands[0], lower=False), w)
    num, _ = _quadform_ext(P, x, y)
    return float(num / np.sum(np.asarray(w, dtype=_EXT) ** 2))
