"""Conjugate pairing of second-order spectral points and eigenvalue enclosures.

A point mu of the second-order spectrum gives the interval
``[Re mu - |Im mu|, Re mu + |Im mu|]``, which meets the spectrum of the
operator whenever mu is exact.  Floating-point points only earn the
``certified`` flag below a residual gate; real points are never certified
because a conjugate pair pushed onto the real axis by rounding cannot be
told apart from a genuine real point.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .pencil import SecondOrderPoint

DEFAULT_PAIR_TOL = 1e-8
DEFAULT_IM_MAX = 1.0
DEFAULT_RESIDUAL_GATE = 1e-6


class PairKind(enum.Enum):
    PAIR = "pair"
    REAL = "real"
    UNMATCHED = "unmatched"


@dataclass(frozen=True)
class ConjugatePair:
    mu: complex
    residual: float
    kind: PairKind
    members: tuple[complex, ...]

    @property
    def diagnostic(self) -> str:
        if self.kind is PairKind.UNMATCHED:
            return f"no conjugate partner for {self.members[0]!r}"
        return ""


@dataclass(frozen=True)
class Window:
    center: float
    d: float

    def __post_init__(self):
        if not np.isfinite(self.d) or self.d <= 0:
            raise ValueError(f"window half-width must be positive, got {self.d}")

    def contains(self, x: float) -> bool:
        return abs(x - self.center) <= self.d


@dataclass(frozen=True)
class Enclosure:
    mu: complex
    low: float
    up: float
    width: float
    source_residual: float
    certified: bool
    kind: PairKind = PairKind.PAIR

    @classmethod
    def from_mu(cls, mu: complex, residual: float, residual_gate: float = DEFAULT_RESIDUAL_GATE,
                kind: PairKind = PairKind.PAIR) -> "Enclosure":
        mu = complex(mu.real, abs(mu.imag))
        low = mu.real - mu.imag
        up = mu.real + mu.imag
        certified = (kind is PairKind.PAIR and mu.imag > 0
                     and np.isfinite(residual) and residual <= residual_gate)
        return cls(mu, low, up, 2 * mu.imag, float(residual), bool(certified), kind)

    def contains(self, x: float) -> bool:
        return self.low <= x <= self.up

    def format(self, digits: int = 5) -> str:
        return f"[{self.low:.{digits}f}, {self.up:.{digits}f}]"


def pair_conjugates(points: Iterable[SecondOrderPoint | complex],
                    tol: float = DEFAULT_PAIR_TOL) -> list[ConjugatePair]:
    """Match points with their conjugates within ``tol * (1 + |z|)``.

    Near-real points pair with themselves.  Remaining upper and lower points
    are matched greedily by increasing distance, which yields a maximal
    matching; whatever is left is reported as unmatched.
    """
    if not tol > 0:
        raise ValueError("pairing tolerance must be positive")
    zs, res = [], []
    for p in points:
        if isinstance(p, SecondOrderPoint):
            zs.append(p.z)
            res.append(p.residual)
        else:
            zs.append(complex(p))
            res.append(float("nan"))
    zs = np.asarray(zs, dtype=complex)
    res = np.asarray(res, dtype=float)
    thresh = tol * (1 + np.abs(zs))

    out: list[ConjugatePair] = []
    real = np.abs(zs.imag) <= thresh
    for i in np.flatnonzero(real):
        out.append(ConjugatePair(complex(zs[i].real, abs(zs[i].imag)), res[i], PairKind.REAL, (zs[i],)))

    upper = np.flatnonzero(~real & (zs.imag > 0))
    lower = np.flatnonzero(~real & (zs.imag < 0))
    matched_u, matched_l = set(), set()
    if upper.size and lower.size:
        dist = np.abs(zs[upper][:, None] - np.conj(zs[lower])[None, :])
        ok = dist <= np.minimum(thresh[upper][:, None], thresh[lower][None, :])
        iu, il = np.nonzero(ok)
        order = np.lexsort((il, iu, dist[iu, il]))
        for k in order:
            a, b = upper[iu[k]], lower[il[k]]
            if a in matched_u or b in matched_l:
                continue
            matched_u.add(a)
            matched_l.add(b)
            r = np.fmax(res[a], res[b])
            out.append(ConjugatePair(complex(zs[a]), float(r), PairKind.PAIR, (zs[a], zs[b])))
    for i in list(upper) + list(lower):
        if i not in matched_u and i not in matched_l:
            out.append(ConjugatePair(complex(zs[i].real, abs(zs[i].imag)), res[i],
                                     PairKind.UNMATCHED, (zs[i],)))
    out.sort(key=lambda p: (p.mu.real, p.mu.imag, p.kind.value))
    return out


def make_enclosures(pairs: Sequence[ConjugatePair], window: Window, im_max: float = DEFAULT_IM_MAX,
                    residual_gate: float = DEFAULT_RESIDUAL_GATE, merge: bool = False) -> list[Enclosure]:
    """Enclosures for pairs with ``Re mu`` in the window and ``|Im mu| <= im_max``."""
    if not im_max > 0:
        raise ValueError("im_max must be positive")
    encs = [Enclosure.from_mu(p.mu, p.residual, residual_gate, p.kind)
            for p in pairs if window.contains(p.mu.real) and abs(p.mu.imag) <= im_max]
    encs.sort(key=lambda e: (e.mu.real, e.mu.imag))
    if merge:
        encs = merge_overlapping(encs)
    return encs


def merge_overlapping(encs: Sequence[Enclosure]) -> list[Enclosure]:
    """Replace chains of overlapping intervals by their hull.

    The hull keeps the representative of its narrowest member and is
    certified only if every member is.
    """
    out: list[list[Enclosure]] = []
    for e in sorted(encs, key=lambda e: e.low):
        if out and e.low <= max(m.up for m in out[-1]):
            out[-1].append(e)
        else:
            out.append([e])
    merged = []
    for group in out:
        if len(group) == 1:
            merged.append(group[0])
            continue
        best = min(group, key=lambda e: e.width)
        low = min(e.low for e in group)
        up = max(e.up for e in group)
        merged.append(Enclosure(best.mu, low, up, up - low,
                                max(e.source_residual for e in group),
                                all(e.certified for e in group), best.kind))
    merged.sort(key=lambda e: (e.mu.real, e.mu.imag))
    return merged


def narrowest_certified(encs: Sequence[Enclosure]) -> Enclosure | None:
    cands = [e for e in encs if e.certified]
    return min(cands, key=lambda e: (e.width, e.mu.real)) if cands else None
