"""Tabulated closed forms for the element integrals, and their cross-check.

The rows below are transcribed literally from the published integral tables
(including apparent misprints).  They are never used for assembly; quadrature
is canonical.  :func:`verify_closed_forms` compares every row against
:func:`~quadbounds.assembly.local_moment` and classifies it as ``verified`` or
``inconsistent``.

Row conventions: ``q0``/``p1`` refer to the left boundary (coordinate ``x_0``),
``q_{n+1}`` is the slope DOF at the right end ``x_n`` and its neighbours
``p_n``/``q_n`` sit at node ``n-1``.  Interior rows are written relative to a
node ``j`` and evaluated at the coordinate printed in the table (``x_j`` or
``x_{j+1}``).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .assembly import gauss_legendre_unit, local_moment
from .hermite_fem import Dof, DofKind, MeshSpec, build_mesh, reference_shapes

# (family name) -> (deriv_left, deriv_right, moment power)
FAMILIES = {
    "<b,b>": (0, 0, 0),
    "<b',b'>": (1, 1, 0),
    "<b'',b''>": (2, 2, 0),
    "<b,x2b>": (0, 0, 2),
    "<b,x4b>": (0, 0, 4),
    "<b,x8b>": (0, 0, 8),
    "<b'',x2b>": (2, 0, 2),
    "<b'',x4b>": (2, 0, 4),
}

VERIFY_TOL = 1e-12
SAMPLE_MESHES = ((0.4, 8), (2.0, 8), (6.0, 12))  # h = 0.1, 0.5, 1


@dataclass(frozen=True)
class LocalIntegralKey:
    family: str
    left: str    # e.g. "q0", "p_j", "q_{n+1}"
    right: str
    variant: int = 0  # the x^4/x^8 table prints two different "q_j,p_j" rows

    @property
    def deriv_left(self) -> int:
        return FAMILIES[self.family][0]

    @property
    def deriv_right(self) -> int:
        return FAMILIES[self.family][1]

    @property
    def moment(self) -> int:
        return FAMILIES[self.family][2]

    @property
    def label(self) -> str:
        tag = f"#{self.variant}" if self.variant else ""
        return f"{self.family} {self.left},{self.right}{tag}"


# DOF label -> (kind, node) as a function of (n, j)
_DOF_LABELS: dict[str, Callable[[int, int], tuple[DofKind, int]]] = {
    "q0": lambda n, j: (DofKind.DERIVATIVE, 0),
    "p1": lambda n, j: (DofKind.VALUE, 1),
    "q1": lambda n, j: (DofKind.DERIVATIVE, 1),
    "q_{n+1}": lambda n, j: (DofKind.DERIVATIVE, n),
    "p_n": lambda n, j: (DofKind.VALUE, n - 1),
    "q_n": lambda n, j: (DofKind.DERIVATIVE, n - 1),
    "p_j": lambda n, j: (DofKind.VALUE, j),
    "q_j": lambda n, j: (DofKind.DERIVATIVE, j),
    "p_{j+1}": lambda n, j: (DofKind.VALUE, j + 1),
    "q_{j+1}": lambda n, j: (DofKind.DERIVATIVE, j + 1),
    "p_{j-1}": lambda n, j: (DofKind.VALUE, j - 1),
    "q_{j-1}": lambda n, j: (DofKind.DERIVATIVE, j - 1),
}


# Each entry: key -> (coordinate, formula(h, x)).  coordinate is one of
# "x0", "xn", "xj", "xj+1".
_TABLE: dict[LocalIntegralKey, tuple[str, Callable[[float, float], float]]] = {}


def _row(left, right, coord, variant=0, **forms):
    names = {
        "m0": "<b,b>", "d1": "<b',b'>", "d2": "<b'',b''>",
        "x2": "<b,x2b>", "x4": "<b,x4b>", "x8": "<b,x8b>",
        "d2x2": "<b'',x2b>", "d2x4": "<b'',x4b>",
    }
    for short, fn in forms.items():
        _TABLE[LocalIntegralKey(names[short], left, right, variant)] = (coord, fn)


# first table: <b,b>, <b',b'>, <b'',b''>, <b,x^2 b>
_row("q0", "q0", "x0",
     m0=lambda h, x: h**3 / 105, d1=lambda h, x: 2 * h / 15, d2=lambda h, x: 4 / h,
     x2=lambda h, x: h**5 / 630 + h**4 * x / 140 + h**3 * x**2 / 105)
_row("q_{n+1}", "q_{n+1}", "xn",
     m0=lambda h, x: h**3 / 105, d1=lambda h, x: 2 * h / 15, d2=lambda h, x: 4 / h,
     x2=lambda h, x: h**5 / 630 - h**4 * x / 140 + h**3 * x**2 / 105)
_row("q0", "p1", "x0",
     m0=lambda h, x: 13 * h**2 / 420, d1=lambda h, x: -1 / 10, d2=lambda h, x: -6 / h**2,
     x2=lambda h, x: 5 * h**4 / 504 + 13 * h**2 * x**2 / 420 + h**3 * x / 30)
_row("q0", "q1", "x0",
     m0=lambda h, x: -3 * h**3 / 420, d1=lambda h, x: -h / 30, d2=lambda h, x: 2 / h,
     x2=lambda h, x: -h**5 / 504 - h**4 * x / 140 - h**3 * x**2 / 140)
_row("q_{n+1}", "p_n", "xn",
     m0=lambda h, x: -13 * h**2 / 420, d1=lambda h, x: 1 / 10, d2=lambda h, x: 6 / h**2,
     x2=lambda h, x: -5 * h**4 / 504 + h**3 * x / 30 - 13 * h**2 * x**2 / 420)
_row("q_{n+1}", "q_n", "xn",
     m0=lambda h, x: -3 * h**3 / 420, d1=lambda h, x: -h / 30, d2=lambda h, x: 2 / h,
     x2=lambda h, x: -h**5 / 504 + h**4 * x / 140 - h**3 * x**2 / 140)
_row("p_j", "p_j", "xj",
     m0=lambda h, x: 52 * h / 70, d1=lambda h, x: 12 * h / 5, d2=lambda h, x: 24 / h**3,
     x2=lambda h, x: 19 * h**3 / 315 + 26 * h * x**2 / 35)
_row("q_j", "q_j", "xj",
     m0=lambda h, x: 8 * h**3 / 420, d1=lambda h, x: 8 * h / 30, d2=lambda h, x: 8 / h,
     x2=lambda h, x: 2 * h**3 * x**2 / 105 + h**5 / 315)
_row("q_j", "p_j", "xj",
     m0=lambda h, x: 0.0, d1=lambda h, x: 0.0, d2=lambda h, x: 0.0,
     x2=lambda h, x: h**3 * x / 15)
_row("p_j", "p_{j+1}", "xj+1",
     m0=lambda h, x: 9 * h / 70, d1=lambda h, x: -6 * h / 5, d2=lambda h, x: -12 / h**3,
     x2=lambda h, x: 23 * h**3 / 630 - 81 * h * x + 81 * x**2)
_row("q_j", "q_{j+1}", "xj+1",
     m0=lambda h, x: -3 * h**3 / 420, d1=lambda h, x: -h / 30, d2=lambda h, x: 2 / h,
     x2=lambda h, x: -h**5 / 504 + h**4 * x / 140 - h**3 * x**2 / 140)
_row("p_j", "q_{j+1}", "xj+1",
     m0=lambda h, x: 13 * h**2 / 420, d1=lambda h, x: 1 / 10, d2=lambda h, x: 6 / h**2,
     x2=lambda h, x: 19 * h**4 / 2520 - 72 * h * x + 78 * x**2)
_row("p_j", "q_{j-1}", "xj+1",
     m0=lambda h, x: -13 * h**2 / 420, d1=lambda h, x: -1 / 10, d2=lambda h, x: -6 / h**2,
     x2=lambda h, x: -25 * h**4 / 2520 - 84 * h * x + 78 * x**2)

# second table: <b,x^4 b>, <b,x^8 b>
_row("q0", "q0", "x0",
     x4=lambda h, x: h**3 / 6930 * (3 * h**4 + 66 * x**4 + 99 * h * x**3 + 66 * h**2 * x**2 + 22 * h**3 * x),
     x8=lambda h, x: h**3 / 45045 * (429 * x**8 + 1287 * h * x**7 + 2002 * h**2 * x**6 + 2002 * h**3 * x**5
                                     + 1365 * h**4 * x**4 + 637 * h**5 * x**3 + 196 * h**6 * x**2
                                     + 36 * h**7 * x + 3 * h**8))
_row("q_{n+1}", "q_{n+1}", "xn",
     x4=lambda h, x: h**3 / 6930 * (3 * h**4 + 66 * x**4 - 99 * h * x**3 + 66 * h**2 * x**2 - 22 * h**3 * x),
     x8=lambda h, x: h**3 / 45045 * (429 * x**8 - 1287 * h * x**7 + 2002 * h**2 * x**6 - 2002 * h**3 * x**5
                                     + 1365 * h**4 * x**4 - 637 * h**5 * x**3 + 196 * h**6 * x**2
                                     - 36 * h**7 * x + 3 * h**8))
_row("q0", "p1", "x0",
     x4=lambda h, x: h**2 / 27720 * (119 * h**4 + 858 * x**4 + 1848 * h * x**3 + 1650 * h**2 * x**2
                                     + 704 * h**3 * x),
     x8=lambda h, x: h**2 / 180180 * (5577 * x**8 + 24024 * h * x**7 + 50050 * h**2 * x**6
                                      + 64064 * h**3 * x**5 + 54145 * h**4 * x**4 + 30576 * h**5 * x**3
                                      + 11172 * h**6 * x**2 + 2400 * h**7 * x + 231 * h**8))
_row("q0", "q1", "x0",
     x4=lambda h, x: (-h**7 / 1320 - h**3 * x**4 / 140 - h**4 * x**3 / 70 - h**5 * x**2 / 84
                      - h**6 * x / 210),
     x8=lambda h, x: -h**3 / 180180 * (1287 * x**8 + 5148 * h * x**7 + 10010 * h**2 * x**6
                                       + 12012 * h**3 * x**5 + 9555 * h**4 * x**4 + 5096 * h**5 * x**3
                                       + 1764 * h**6 * x**2 + 360 * h**7 * x + 33 * h**8))
_row("q_{n+1}", "p_n", "xn",
     x4=lambda h, x: -h**2 / 27720 * (119 * h**4 + 858 * x**4 + 1848 * h * x**3 + 1650 * h**2 * x**2
                                      + 704 * h**3 * x),
     x8=lambda h, x: -h**2 / 180180 * (5577 * x**8 - 24024 * h * x**7 + 50050 * h**2 * x**6
                                       - 64064 * h**3 * x**5 + 54145 * h**4 * x**4 - 30576 * h**5 * x**3
                                       + 11172 * h**6 * x**2 - 2400 * h**7 * x + 231 * h**8))
_row("q_{n+1}", "q_n", "xn",
     x4=lambda h, x: (-h**7 / 1320 - h**3 * x**4 / 140 + h**4 * x**3 / 70 - h**5 * x**2 / 84
                      + h**6 * x / 210),
     x8=lambda h, x: -h**3 / 180180 * (1287 * x**8 - 5148 * h * x**7 + 10010 * h**2 * x**6
                                       - 12012 * h**3 * x**5 + 9555 * h**4 * x**4 - 5096 * h**5 * x**3
                                       + 1764 * h**6 * x**2 - 360 * h**7 * x + 33 * h**8))
_row("p_j", "p_j", "xj",
     x4=lambda h, x: h**5 / 77 + 38 * h**3 * x**2 / 105 + 26 * h * x**4 / 35,
     x8=lambda h, x: (10 * h**5 * x**4 / 11 + 248 * h**7 * x**2 / 2145 + 26 * h * x**8 / 35
                      + 76 * h**3 * x**6 / 45 + 74 * h**9 / 45045))
_row("q_j", "p_j", "xj", variant=1,
     x4=lambda h, x: h**7 / 1155 + 2 * h**3 * x**4 / 105 + 2 * h**5 * x**2 / 105,
     x8=lambda h, x: (2 * h**3 * x**8 / 105 + 56 * h**9 * x**2 / 6435 + 4 * h**5 * x**6 / 45
                      + 2 * h**7 * x**4 / 33 + 2 * h**11 / 15015))
_row("q_j", "p_j", "xj", variant=2,
     x4=lambda h, x: 8 * h**5 * x / 315 + 2 * h**3 * x**3 / 15,
     x8=lambda h, x: (256 * h**9 * x / 45045 + 52 * h**7 * x**3 / 495 + 4 * h**3 * x**7 / 15
                      + 16 * h**5 * x**5 / 45))
_row("p_j", "p_{j+1}", "xj+1",
     x4=lambda h, x: h / 4620 * (69 * h**4 - 418 * h**3 * x + 1012 * h**2 * x**2 - 1188 * h * x**3
                                 + 594 * x**4),
     x8=lambda h, x: h / 90090 * (11583 * x**8 - 46332 * h * x**7 + 92092 * h**2 * x**6
                                  - 114114 * h**3 * x**5 + 94185 * h**4 * x**4 - 52234 * h**5 * x**3
                                  + 18816 * h**6 * x**2 - 3996 * h**7 * x + 381 * h**8))
_row("q_j", "q_{j+1}", "xj+1",
     x4=lambda h, x: (-h**7 / 1320 + h**6 * x / 210 - h**5 * x**2 / 84 + h**4 * x**3 / 70
                      - h**3 * x**4 / 140),
     x8=lambda h, x: (-h**3 * x**8 / 140 + h**4 * x**7 / 35 - h**5 * x**6 / 18 + h**6 * x**5 / 15
                      - 7 * h**7 * x**4 / 130 + 2 * h**10 * x / 1001 - 7 * h**9 * x**2 / 715
                      + 14 * h**8 * x**3 / 495 - h**11 / 5460))
_row("p_j", "q_{j+1}", "xj+1",
     x4=lambda h, x: h**2 / 27720 * (75 * h**4 - 484 * h**3 * x + 1254 * h**2 * x**2 - 1584 * h * x**3
                                     + 858 * x**4),
     x8=lambda h, x: -h**2 / 180180 * (5577 * x**8 - 24024 * h * x**7 + 50050 * h**2 * x**6
                                       - 64064 * h**3 * x**5 + 54145 * h**4 * x**4 - 30576 * h**5 * x**3
                                       + 11172 * h**6 * x**2 - 2400 * h**7 * x + 231 * h**8))
_row("p_j", "q_{j-1}", "xj+1",
     x4=lambda h, x: -h**2 / 27720 * (119 * h**4 - 704 * h**3 * x + 1650 * h**2 * x**2 - 1848 * h * x**3
                                      + 858 * x**4),
     x8=lambda h, x: h**2 / 180180 * (5577 * x**8 - 20592 * h * x**7 + 38038 * h**2 * x**6
                                      - 44044 * h**3 * x**5 + 34125 * h**4 * x**4 - 17836 * h**5 * x**3
                                      + 6076 * h**6 * x**2 - 1224 * h**7 * x + 111 * h**8))

# third table: <b''_j, x^2 b_k>, <b''_j, x^4 b_k>
_row("q0", "q0", "x0",
     d2x2=lambda h, x: -h / 105 * (h**2 + 7 * h * x + 14 * x**2),
     d2x4=lambda h, x: h * x / 105 * (-14 * x**3 - 14 * h * x**2 - 6 * h**2 * x - h**3))
_row("q_{n+1}", "q_{n+1}", "xn",
     d2x2=lambda h, x: -h / 105 * (h**2 - 7 * h * x + 14 * x**2),
     d2x4=lambda h, x: h * x / 105 * (14 * x**3 - 14 * h * x**2 + 6 * h**2 * x - h**3))
_row("q0", "p1", "x0",
     d2x2=lambda h, x: x**2 / 10 + 2 * h * x / 5 + 23 * h**2 / 105,
     d2x4=lambda h, x: (17 * h**4 / 84 + x**4 / 10 + 4 * h * x**3 / 5 + 46 * h**2 * x**2 / 35
                        + 6 * h**3 * x / 7))
_row("p1", "q0", "x0",
     d2x2=lambda h, x: x**2 / 10 - h**2 / 70,
     d2x4=lambda h, x: -h**4 / 84 + x**4 / 10 - 3 * h**2 * x**2 / 35 - 2 * h**3 * x / 35)
_row("q0", "q1", "x0",
     d2x2=lambda h, x: h / 210 * (7 * x**2 - 2 * h**2),
     d2x4=lambda h, x: h / 420 * (-5 * h**4 + 14 * x**4 - 24 * h**2 * x**2 - 20 * h**3 * x))
_row("q1", "q0", "x0",
     d2x2=lambda h, x: h / 210 * (5 * h**2 + 14 * h * x + 7 * x**2),
     d2x4=lambda h, x: h / 420 * (5 * h**4 + 28 * h**3 * x + 60 * h**2 * x**2 + 56 * h * x**3 + 14 * x**4))
_row("p_n", "q_{n+1}", "xn",
     d2x2=lambda h, x: -x**2 / 10 + h**2 / 70,
     d2x4=lambda h, x: h**4 / 84 - x**4 / 10 + 3 * h**2 * x**2 / 35 - 2 * h**3 * x / 35)
_row("q_{n+1}", "p_n", "xn",
     d2x2=lambda h, x: -x**2 / 10 + 2 * h * x / 5 - 23 * h**2 / 105,
     d2x4=lambda h, x: (-17 * h**4 / 84 - x**4 / 10 + 4 * h * x**3 / 5 - 46 * h**2 * x**2 / 35
                        + 6 * h**3 * x / 7))
_row("q_n", "q_{n+1}", "xn",
     d2x2=lambda h, x: h / 210 * (5 * h**2 - 14 * h * x + 7 * x**2),
     d2x4=lambda h, x: h / 420 * (5 * h**4 - 28 * h**3 * x + 60 * h**2 * x**2 - 56 * h * x**3 + 14 * x**4))
_row("q_{n+1}", "q_n", "xn",
     d2x2=lambda h, x: h / 210 * (7 * x**2 - 2 * h**2),
     d2x4=lambda h, x: h / 420 * (-5 * h**4 + 14 * x**4 - 24 * h**2 * x**2 + 20 * h**3 * x))
_row("p_j", "p_j", "xj",
     d2x2=lambda h, x: -2 / (35 * h) * (-h**2 + 42 * x**2),
     d2x4=lambda h, x: -4 / (105 * h) * (-2 * h**4 - 9 * h**2 * x**2 + 63 * x**4))
_row("q_j", "q_j", "xj",
     d2x2=lambda h, x: -4 / 15 * (h * x**2 - 2 * h**3 / 105),
     d2x4=lambda h, x: -4 * h**3 * x**2 / 35 - 4 * h * x**4 / 15)
_row("p_j", "q_j", "xj",
     d2x2=lambda h, x: 0.0,
     d2x4=lambda h, x: 4 * h**3 * x**4 / 35)
_row("q_j", "p_j", "xj",
     d2x2=lambda h, x: -4 * h * x / 5,
     d2x4=lambda h, x: -4 * h**3 * x / 35 + 8 * h * x**3 / 5)
_row("p_j", "p_{j+1}", "xj+1",
     d2x2=lambda h, x: 1 / (35 * h) * (-h**2 - 7 * h * x + 42 * x**2),
     d2x4=lambda h, x: 2 / (105 * h) * (-2 * h**4 + 9 * h**3 * x - 9 * h**2 * x**2 - 21 * h * x**3
                                         + 63 * x**4))
_row("p_j", "p_{j-1}", "xj+1",
     d2x2=lambda h, x: 1 / (35 * h) * (34 * h**2 - 77 * h * x + 42 * x**2),
     d2x4=lambda h, x: 2 / (105 * h) * (40 * h**4 - 180 * h**3 * x + 306 * h**2 * x**2 - 231 * h * x**3
                                         + 63 * x**4))
_row("q_j", "q_{j+1}", "xj+1",
     d2x2=lambda h, x: h / 210 * (5 * h**2 - 14 * h * x + 7 * x**2),
     d2x4=lambda h, x: h / 420 * (5 * h**4 - 28 * h**3 * x + 60 * h**2 * x**2 - 56 * h * x**3 + 14 * x**4))
_row("q_j", "q_{j-1}", "xj+1",
     d2x2=lambda h, x: h / 210 * (-2 * h**2 + 7 * x**2),
     d2x4=lambda h, x: h / 420 * (-5 * h**4 + 20 * h**3 * x - 24 * h**2 * x**2 + 14 * x**4))
_row("p_j", "q_{j+1}", "xj+1",
     d2x2=lambda h, x: h**2 / 70 - x**2 / 10,
     d2x4=lambda h, x: -h**4 / 84 - 2 * h**3 * x / 35 + 3 * h**2 * x**2 / 35 - x**4 / 10)
_row("q_j", "p_{j-1}", "xj+1",
     d2x2=lambda h, x: -23 * h**2 / 105 + 2 * h * x / 5 - x**2 / 10,
     d2x4=lambda h, x: (-17 * h**4 / 84 + 6 * h**3 * x / 7 - 46 * h**2 * x**2 / 35 + 4 * h * x**3 / 5
                        - x**4 / 10))
_row("q_j", "p_{j+1}", "xj+1",
     d2x2=lambda h, x: -17 * h**2 / 210 + h * x / 5 + x**2 / 10,
     d2x4=lambda h, x: (-17 * h**4 / 420 + 8 * h**3 * x / 35 - 17 * h**2 * x**2 / 35 + 2 * h * x**3 / 5
                        + x**4 / 10))
_row("p_j", "q_{j-1}", "xj+1",
     d2x2=lambda h, x: 3 * h**2 / 35 - h * x / 5 + x**2 / 10,
     d2x4=lambda h, x: (-5 * h**4 / 84 - 2 * h**3 * x / 7 + 18 * h**2 * x**2 / 35 - 2 * h * x**3 / 5
                        + x**4 / 10))


# rows whose closed forms the rest of the package relies on
REQUIRED_ROWS = (
    LocalIntegralKey("<b,b>", "q_j", "q_j"),
    LocalIntegralKey("<b,b>", "p_j", "p_j"),
    LocalIntegralKey("<b,b>", "p_j", "p_{j+1}"),
    LocalIntegralKey("<b,b>", "q_j", "q_{j+1}"),
    LocalIntegralKey("<b,x2b>", "q0", "q0"),
)


def table_keys() -> list[LocalIntegralKey]:
    return list(_TABLE)


def closed_form_literal(key: LocalIntegralKey, h: float, node_coord: float) -> float | None:
    """Value of the printed formula, or None for an unknown key."""
    entry = _TABLE.get(key)
    if entry is None:
        return None
    return float(entry[1](h, node_coord))


def closed_form_entry(key: LocalIntegralKey, h: float, node_coord: float) -> float | None:
    """Printed formula value for rows that pass verification; None otherwise."""
    if key not in _TABLE or key not in _verified_keys():
        return None
    return closed_form_literal(key, h, node_coord)


@dataclass(frozen=True)
class RowCheck:
    key: LocalIntegralKey
    status: str            # "verified" or "inconsistent"
    max_rel_deviation: float
    samples: tuple[tuple[float, float, float, float], ...]  # (h, coord, closed form, quadrature)


def _sample_row(key: LocalIntegralKey, L: float, n: int):
    mesh = build_mesh(MeshSpec(L=L, n=n))
    coord_name, fn = _TABLE[key]
    js = (2, n - 3) if coord_name in ("xj", "xj+1") else (2,)
    out = []
    for j in js:
        ka, na = _DOF_LABELS[key.left](n, j)
        kb, nb = _DOF_LABELS[key.right](n, j)
        coord = {"x0": mesh.nodes[0], "xn": mesh.nodes[n], "xj": mesh.nodes[j],
                 "xj+1": mesh.nodes[j + 1]}[coord_name]
        a, b = Dof(ka, na), Dof(kb, nb)
        exact = local_moment(mesh, a, b, key.deriv_left, key.deriv_right, key.moment)
        # rounding scale: integral of the absolute integrand
        scale = _abs_moment(mesh, a, b, key)
        printed = float(fn(mesh.h, coord))
        out.append((mesh.h, float(coord), printed, exact, max(abs(exact), scale)))
    return out


def _abs_moment(mesh, a, b, key) -> float:
    t, w = gauss_legendre_unit(12)
    total = 0.0
    for e in sorted({a.node_index - 1, a.node_index} & {b.node_index - 1, b.node_index}):
        if not 0 <= e < mesh.n:
            continue
        x = mesh.nodes[e] + t * mesh.h
        sa = (0 if a.node_index == e else 2) + (a.kind is DofKind.DERIVATIVE)
        sb = (0 if b.node_index == e else 2) + (b.kind is DofKind.DERIVATIVE)
        fa = reference_shapes(t, mesh.h, key.deriv_left)[sa]
        fb = reference_shapes(t, mesh.h, key.deriv_right)[sb]
        total += mesh.h * float(np.sum(w * np.abs(fa * x**key.moment * fb)))
    return total


def check_row(key: LocalIntegralKey, tol: float = VERIFY_TOL) -> RowCheck:
    samples = []
    worst = 0.0
    for L, n in SAMPLE_MESHES:
        for h, coord, printed, exact, scale in _sample_row(key, L, n):
            dev = abs(printed - exact) / scale if scale > 0 else abs(printed - exact)
            worst = max(worst, dev)
            samples.append((h, coord, printed, exact))
    status = "verified" if worst <= tol else "inconsistent"
    return RowCheck(key=key, status=status, max_rel_deviation=worst, samples=tuple(samples))


def verify_closed_forms(tol: float = VERIFY_TOL) -> list[RowCheck]:
    """Check every tabulated row against quadrature at h = 0.1, 0.5 and 1."""
    return [check_row(key, tol) for key in _TABLE]


@lru_cache(maxsize=1)
def _verified_keys() -> frozenset:
    return frozenset(r.key for r in verify_closed_forms() if r.status == "verified")


def format_report(rows: list[RowCheck]) -> str:
    lines = []
    for r in rows:
        line = f"{r.status:12s} {r.key.label:40s} max rel dev {r.max_rel_deviation:.3e}"
        if r.status != "verified":
            h, x, printed, exact = max(r.samples, key=lambda s: abs(s[2] - s[3]))
            line += f"  (h={h:g}, x={x:g}: printed {printed:.12g} vs quadrature {exact:.12g})"
        lines.append(line)
    return "\n".join(lines)
