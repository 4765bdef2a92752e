"""Independent high-precision reference computations used by the tests."""
from __future__ import annotations

import mpmath as mp
import numpy as np


def mp_det_banded(Q, bw):
    """Determinant by Gaussian elimination with partial pivoting on a banded list-of-lists."""
    N = len(Q)
    A = [row[:] for row in Q]
    det = mp.mpc(1)
    for k in range(N):
        hi = min(N, k + bw + 1)
        p = max(range(k, hi), key=lambda i: abs(A[i][k]))
        if p != k:
            A[k], A[p] = A[p], A[k]
            det = -det
        piv = A[k][k]
        det *= piv
        for i in range(k + 1, hi):
            f = A[i][k] / piv
            if f == 0:
                continue
            for j in range(k, min(N, k + 2 * bw + 1)):
                A[i][j] -= f * A[k][j]
    return det


def mp_pencil_root(A0, A1, A2, z0, dps=40, bw=3):
    """Root of det(A2 - 2 z A1 + z^2 A0) near ``z0`` by Muller's method in ``dps`` digits."""
    with mp.workdps(dps):
        N = A0.shape[0]
        M = [[(mp.mpf(A2[i, j]), mp.mpf(A1[i, j]), mp.mpf(A0[i, j])) if abs(i - j) <= bw else None
              for j in range(N)] for i in range(N)]

        def f(z):
            Q = [[(m[0] - 2 * z * m[1] + z * z * m[2]) if m is not None else mp.mpc(0)
                  for m in row] for row in M]
            return mp_det_banded(Q, bw)

        z0 = mp.mpc(z0)
        root = mp.findroot(f, (z0, z0 * (1 + mp.mpf("1e-7")), z0 + mp.mpc(0, "1e-7")),
                           solver="muller", tol=mp.mpf(10) ** (-2 * dps + 10), verify=False,
                           maxsteps=80)
        return complex(root)


def roots_of_toy(a, b, c):
    """Second-order spectrum of diag(a, b) on span{(sqrt c, sqrt(1-c))} in closed form."""
    a1 = c * a + (1 - c) * b
    im = np.sqrt(c * (1 - c)) * abs(a - b)
    return complex(a1, im), complex(a1, -im)
