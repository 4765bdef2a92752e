"""Uniform mesh on [-L, L] and the C1 cubic Hermite basis with Dirichlet ends.

Each interior node ``x_j`` carries a value function ``p_j`` (``p_j(x_j) = 1``,
``p_j'(x_j) = 0``) and a slope function ``q_j`` (``q_j(x_j) = 0``,
``q_j'(x_j) = 1``).  The boundary nodes keep only their slope function, so a
mesh with ``n`` subintervals has ``2n`` degrees of freedom.

Global ordering interleaves the DOFs node by node::

    q_0, p_1, q_1, p_2, q_2, ..., p_{n-1}, q_{n-1}, q_n

which gives every assembled matrix a half-bandwidth of 3.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidMeshError

HALF_BANDWIDTH = 3


class DofKind(enum.Enum):
    VALUE = "p"
    DERIVATIVE = "q"


@dataclass(frozen=True)
class MeshSpec:
    L: float
    n: int
    r: int = 3
    k: int = 1

    def __post_init__(self):
        if not np.isfinite(self.L) or self.L <= 0:
            raise InvalidMeshError(f"half-length L must be positive, got {self.L}")
        if int(self.n) != self.n or self.n < 2:
            raise InvalidMeshError(f"need at least 2 subintervals, got n={self.n}")
        if self.r != 3 or self.k != 1:
            raise InvalidMeshError(
                f"only C1 cubic Hermite elements (r=3, k=1) are supported, got r={self.r}, k={self.k}"
            )

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n


@dataclass(frozen=True)
class Dof:
    kind: DofKind
    node_index: int


@dataclass(frozen=True)
class DofTable:
    n: int
    dofs: tuple[Dof, ...]
    half_bandwidth: int = HALF_BANDWIDTH

    @classmethod
    def for_intervals(cls, n: int) -> "DofTable":
        dofs = [Dof(DofKind.DERIVATIVE, 0)]
        for j in range(1, n):
            dofs.append(Dof(DofKind.VALUE, j))
            dofs.append(Dof(DofKind.DERIVATIVE, j))
        dofs.append(Dof(DofKind.DERIVATIVE, n))
        return cls(n=n, dofs=tuple(dofs))

    def __len__(self):
        return len(self.dofs)

    @cached_property
    def _index(self) -> dict:
        return {dof: i for i, dof in enumerate(self.dofs)}

    def index(self, dof: Dof) -> int:
        try:
            return self._index[dof]
        except KeyError:
            raise KeyError(f"{dof} is not a degree of freedom of this mesh") from None

    @cached_property
    def element_map(self) -> np.ndarray:
        """Global indices of the local DOFs ``(p_l, q_l, p_r, q_r)`` per element.

        Entries are -1 where a boundary value DOF was removed.
        """
        n = self.n
        e = np.arange(n)
        p_left = 2 * e - 1
        q_left = 2 * e
        p_right = 2 * e + 1
        q_right = 2 * e + 2
        p_left[0] = -1
        p_right[-1] = -1
        q_right[-1] = 2 * n - 1
        return np.stack([p_left, q_left, p_right, q_right], axis=1)


@dataclass(frozen=True)
class Mesh:
    spec: MeshSpec
    nodes: np.ndarray = field(repr=False)
    h: float
    dofs: DofTable = field(repr=False)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def L(self) -> float:
        return self.spec.L

    @property
    def size(self) -> int:
        return len(self.dofs)


def build_mesh(spec: MeshSpec) -> Mesh:
    h = spec.h
    nodes = -spec.L + h * np.arange(spec.n + 1, dtype=float)
    nodes[-1] = spec.L
    nodes.setflags(write=False)
    return Mesh(spec=spec, nodes=nodes, h=h, dofs=DofTable.for_intervals(spec.n))


def reference_shapes(t, h, deriv=0):
    """Local cubic Hermite shapes on an element of width ``h``.

    ``t`` is the local coordinate in [0, 1].  Returns an array of shape
    ``(4,) + t.shape`` ordered ``(p_left, q_left, p_right, q_right)``; the
    derivative is taken with respect to the physical coordinate.
    """
    t = np.asarray(t, dtype=float)
    if deriv == 0:
        return np.array([
            1 - 3 * t**2 + 2 * t**3,
            h * (t - 2 * t**2 + t**3),
            3 * t**2 - 2 * t**3,
            h * (t**3 - t**2),
        ])
    if deriv == 1:
        return np.array([
            (6 * t**2 - 6 * t) / h,
            1 - 4 * t + 3 * t**2,
            (6 * t - 6 * t**2) / h,
            3 * t**2 - 2 * t,
        ])
    if deriv == 2:
        return np.array([
            (12 * t - 6) / h**2,
            (6 * t - 4) / h,
            (6 - 12 * t) / h**2,
            (6 * t - 2) / h,
        ])
    raise ValueError(f"deriv must be 0, 1 or 2, got {deriv}")


def eval_basis(mesh: Mesh, dof: Dof, x: float, deriv: int = 0) -> float:
    """Value (or first/second derivative) of a global basis function at ``x``.

    Evaluation goes through the reference element to avoid cancellation for
    large ``|x|``.  At a node the right-hand element is used; second
    derivatives are one-sided there.
    """
    if deriv not in (0, 1, 2):
        raise ValueError(f"deriv must be 0, 1 or 2, got {deriv}")
    if not -mesh.L <= x <= mesh.L:
        raise ValueError(f"x={x} outside [-{mesh.L}, {mesh.L}]")
    mesh.dofs.index(dof)

    h = mesh.h
    # closed support boundary counts as outside, also for one-sided second derivatives
    if abs(x - mesh.nodes[dof.node_index]) >= h * (1 - 1e-12):
        return 0.0
    e = min(int(np.floor((x + mesh.L) / h)), mesh.n - 1)
    # floor() can land one element off near a node
    if x < mesh.nodes[e]:
        e -= 1
    elif e + 1 < mesh.n and x >= mesh.nodes[e + 1]:
        e += 1
    j = dof.node_index
    if j == e:
        local = 0
    elif j == e + 1:
        local = 2
    else:
        return 0.0
    if dof.kind is DofKind.DERIVATIVE:
        local += 1
    t = (x - mesh.nodes[e]) / h
    return float(reference_shapes(t, h, deriv)[local])
