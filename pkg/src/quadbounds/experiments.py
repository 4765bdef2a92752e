"""Experiment harness: single cases, mesh sweeps, truncation sweeps and CSV/JSON output.

Windows are centred on Galerkin upper bounds with half-width
``d_fraction * gap``, where ``gap`` is the distance to the nearest
neighbouring Galerkin value.  By default every point of the second-order
spectrum that falls in a window is polished by extended-precision Newton
before the enclosure is formed; ``refine=False`` reports the raw companion
eigenvalues instead, which is what exposes the rounding floor.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .assembly import AssembledForms, Potential, assemble_forms
from .enclosure import (DEFAULT_IM_MAX, DEFAULT_PAIR_TOL, DEFAULT_RESIDUAL_GATE, ConjugatePair,
                        Enclosure, PairKind, Window, make_enclosures, narrowest_certified,
                        pair_conjugates)
from .errors import ConvergenceFailure, QuadBoundsError
from .galerkin import galerkin_eigenvalues
from .hermite_fem import MeshSpec, build_mesh
from .pencil import (QuadraticPencil, SecondOrderPoint, distance_bound, orthonormal_min_singular,
                     refine_point, second_order_spectrum)

DEFAULT_N_GRID = (100, 150, 200, 250, 300, 350, 400)
THRESHOLD_FACTOR = 1.5
# Newton starts at least this far (relative) above the real axis
MIN_START_IM = 1e-3


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


@dataclass(frozen=True)
class CaseConfig:
    potential: Potential = field(default_factory=Potential.harmonic)
    L: float = 6.0
    n: int = 400
    targets: tuple[int, ...] = (1, 2, 3, 4, 5)
    d_fraction: float = 0.4
    im_max: float = DEFAULT_IM_MAX
    residual_gate: float = DEFAULT_RESIDUAL_GATE
    pair_tol: float = DEFAULT_PAIR_TOL
    balance: bool = True
    refine: bool = True

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(j) for j in self.targets))
        if not self.targets or min(self.targets) < 1:
            raise ValueError("targets must be a non-empty list of indices >= 1")
        if not 0 < self.d_fraction < 1:
            raise ValueError("d_fraction must lie in (0, 1)")
        if self.im_max <= 0 or self.residual_gate <= 0 or self.pair_tol <= 0:
            raise ValueError("im_max, residual_gate and pair_tol must be positive")
        MeshSpec(self.L, self.n)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["potential"] = self.potential.name if not self.potential.name.startswith("poly:") else \
            "poly:" + ",".join(repr(c) for c in self.potential.coeffs)
        d["targets"] = list(self.targets)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "CaseConfig":
        data = dict(data)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown configuration keys: {sorted(unknown)}")
        if isinstance(data.get("potential"), str):
            data["potential"] = Potential.parse(data["potential"])
        return cls(**data)

    def with_(self, **changes) -> "CaseConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class TargetResult:
    j: int
    galerkin: float
    window: Window
    enclosure: Enclosure | None
    candidates: tuple[Enclosure, ...]

    @property
    def r(self) -> float:
        return self.enclosure.width if self.enclosure is not None else float("nan")


@dataclass(frozen=True)
class CaseResult:
    config: CaseConfig
    galerkin_values: tuple[float, ...]
    targets: tuple[TargetResult, ...]
    points: tuple[SecondOrderPoint, ...] = field(repr=False)
    warnings: tuple[str, ...] = ()
    timing: dict = field(default_factory=dict, compare=False)

    @property
    def enclosures(self) -> list[Enclosure | None]:
        return [t.enclosure for t in self.targets]

    @property
    def residuals(self) -> dict[int, float]:
        return {t.j: t.r for t in self.targets}

    def target(self, j: int) -> TargetResult:
        for t in self.targets:
            if t.j == j:
                return t
        raise KeyError(j)


def windows_from_galerkin(values: Sequence[float], targets: Iterable[int], d_fraction: float) -> dict[int, Window]:
    """Window per target centred on its Galerkin value; needs one extra value above."""
    out = {}
    for j in targets:
        g = values[j - 1]
        gaps = []
        if j >= 2:
            gaps.append(g - values[j - 2])
        if j < len(values):
            gaps.append(values[j] - g)
        out[j] = Window(g, d_fraction * min(gaps))
    return out


def _refined_pairs(P: QuadraticPencil, points: Sequence[SecondOrderPoint], window: Window,
                   cfg: CaseConfig) -> list[ConjugatePair]:
    starts = [p.z for p in points
              if window.contains(p.real) and p.imag >= 0 and p.imag <= cfg.im_max]
    seen: list[complex] = []
    pairs = []
    for z in starts:
        z0 = complex(z.real, max(z.imag, MIN_START_IM * (1 + abs(z.real))))
        try:
            rp = refine_point(P, z0)
        except ConvergenceFailure:
            continue
        mu = complex(rp.z.real, abs(rp.z.imag))
        if any(abs(mu - s) <= 1e-6 * (1 + abs(s)) for s in seen):
            continue
        seen.append(mu)
        kind = PairKind.REAL if mu.imag <= cfg.pair_tol * (1 + abs(mu)) else PairKind.PAIR
        pairs.append(ConjugatePair(mu, rp.residual, kind, (mu, mu.conjugate())))
    return pairs


def run_case(cfg: CaseConfig, forms: AssembledForms | None = None) -> CaseResult:
    timing = {}
    t0 = time.perf_counter()
    try:
        if forms is None:
            forms = assemble_forms(build_mesh(MeshSpec(cfg.L, cfg.n)), cfg.potential)
        timing["assembly"] = time.perf_counter() - t0
        t = time.perf_counter()
        gal = galerkin_eigenvalues(forms, max(cfg.targets) + 1)
        timing["galerkin"] = time.perf_counter() - t
        P = QuadraticPencil.from_forms(forms)
        t = time.perf_counter()
        points = second_order_spectrum(P, balance=cfg.balance)
        timing["spectrum"] = time.perf_counter() - t
    except QuadBoundsError as exc:
        raise type(exc)(f"{exc} [potential={cfg.potential.name}, L={cfg.L}, n={cfg.n}]") from exc

    t = time.perf_counter()
    windows = windows_from_galerkin(gal, cfg.targets, cfg.d_fraction)
    raw_pairs = None if cfg.refine else pair_conjugates(points, cfg.pair_tol)
    results = []
    for j in cfg.targets:
        w = windows[j]
        pairs = _refined_pairs(P, points, w, cfg) if cfg.refine else raw_pairs
        encs = make_enclosures(pairs, w, cfg.im_max, cfg.residual_gate)
        results.append(TargetResult(j, gal[j - 1], w, narrowest_certified(encs), tuple(encs)))
    timing["enclosures"] = time.perf_counter() - t
    timing["total"] = time.perf_counter() - t0
    return CaseResult(cfg, tuple(gal), tuple(results), tuple(points), forms.warnings, timing)


# --- sweeps ------------------------------------------------------------------


def fit_slope(points: Sequence[tuple[float, float]]) -> float:
    """Ordinary least-squares slope of ``log r`` against ``log n``."""
    pts = list(points)
    if len(pts) < 2:
        raise ValueError("need at least two points to fit a slope")
    n = np.array([p[0] for p in pts], dtype=float)
    r = np.array([p[1] for p in pts], dtype=float)
    if np.any(~(r > 0)) or np.any(~(n > 0)):
        raise ValueError("fit_slope needs strictly positive n and r")
    x = np.log(n)
    y = np.log(r)
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))


@dataclass(frozen=True)
class SweepRow:
    j: int
    n: int
    h: float
    r: float

    @property
    def missing(self) -> bool:
        return not (self.r > 0)


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    slopes: dict
    config: CaseConfig

    def series(self, j: int) -> list[tuple[int, float]]:
        return [(row.n, row.r) for row in self.rows if row.j == j]

    @property
    def flagged(self) -> list[SweepRow]:
        return [row for row in self.rows if row.missing]


def residual_sweep(template: CaseConfig, n_list: Sequence[int], j: int | Sequence[int]) -> SweepResult:
    """r(j, n) over ``n_list`` and the log-log slope per target."""
    n_list = [int(n) for n in n_list]
    if len(n_list) < 3 or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be ascending with at least three entries")
    targets = (j,) if isinstance(j, (int, np.integer)) else tuple(j)
    cfg = template.with_(targets=targets)
    rows = []
    for n in n_list:
        res = run_case(cfg.with_(n=n))
        for t in res.targets:
            rows.append(SweepRow(t.j, n, 2.0 * cfg.L / n, t.r))
    slopes = {}
    for jj in targets:
        pts = [(row.n, row.r) for row in rows if row.j == jj and not row.missing]
        slopes[jj] = fit_slope(pts) if len(pts) >= 2 else float("nan")
    return SweepResult(tuple(rows), slopes, cfg)


@dataclass(frozen=True)
class TruncationRow:
    j: int
    L: float
    n: int
    h: float
    galerkin: float
    difference: float


def truncation_sweep(template: CaseConfig, L_list: Sequence[float], j: int | Sequence[int],
                     h: float = 0.03) -> list[TruncationRow]:
    """Galerkin values at fixed mesh width for growing L.

    ``difference`` is measured against the value for the largest L.  The
    number of subintervals is ``round(2 L / h)``, so ``h`` is matched as
    closely as the mesh allows.
    """
    L_list = [float(L) for L in L_list]
    if any(b <= a for a, b in zip(L_list, L_list[1:])):
        raise ValueError("L_list must be ascending")
    targets = (j,) if isinstance(j, (int, np.integer)) else tuple(j)
    vals = []
    for L in L_list:
        n = max(2, int(round(2 * L / h)))
        forms = assemble_forms(build_mesh(MeshSpec(L, n)), template.potential)
        vals.append((L, n, 2 * L / n, galerkin_eigenvalues(forms, max(targets))))
    ref = vals[-1][3]
    return [TruncationRow(jj, L, n, hh, g[jj - 1], g[jj - 1] - ref[jj - 1])
            for jj in targets for (L, n, hh, g) in vals]


@dataclass(frozen=True)
class ThresholdResult:
    j: int
    threshold: int | None
    exceeded_at: int | None
    rows: tuple[SweepRow, ...]


def threshold_exploration(template: CaseConfig, j: int, n_list: Sequence[int],
                          factor: float = THRESHOLD_FACTOR) -> ThresholdResult:
    """Walk up ``n_list`` until r(j, n) exceeds ``factor`` times its running minimum.

    The reported threshold is the grid point before the first exceedance.
    Grid points without a certified enclosure are recorded and skipped.
    Results depend on the eigensolver and arithmetic; this is exploratory.
    """
    cfg = template.with_(targets=(j,))
    rows = []
    running = math.inf
    prev_n = None
    for n in n_list:
        r = run_case(cfg.with_(n=int(n))).target(j).r
        rows.append(SweepRow(j, int(n), 2.0 * cfg.L / n, r))
        if r > 0:
            if r > factor * running:
                return ThresholdResult(j, prev_n, int(n), tuple(rows))
            running = min(running, r)
        prev_n = int(n)
    return ThresholdResult(j, None, None, tuple(rows))


# --- invariant suite -----------------------------------------------------------


def invariant_checks(L: float = 6.0, n: int = 100, seed: int = 0) -> list[tuple[str, bool, str]]:
    """Quick numerical checks of the pencil identities on the harmonic oscillator."""
    rng = np.random.default_rng(seed)
    forms = assemble_forms(build_mesh(MeshSpec(L, n)), Potential.harmonic())
    P = QuadraticPencil.from_forms(forms)
    points = second_order_spectrum(P)
    out = []

    pairs = pair_conjugates(points, DEFAULT_PAIR_TOL)
    unmatched = sum(p.kind is PairKind.UNMATCHED for p in pairs)
    out.append(("conjugate symmetry", unmatched == 0, f"{unmatched} unmatched of {len(points)}"))

    idx = rng.choice(len(points), size=10, replace=False)
    worst = max(points[i].residual for i in idx)
    out.append(("linearization residual", worst <= 1e-8, f"max {worst:.2e} over 10 points"))

    xs = np.linspace(0.0, 10.0, 50)
    odd = np.arange(1, 40, 2)
    slack = min(distance_bound(P, x) - np.min(np.abs(x - odd)) for x in xs)
    out.append(("distance bound >= dist to spectrum", slack >= -1e-8, f"min slack {slack:.2e}"))

    xs = rng.uniform(0.0, 10.0, size=10)
    rel = max(abs(orthonormal_min_singular(P, x) - distance_bound(P, x) ** 2)
              / max(distance_bound(P, x) ** 2, 1e-300) for x in xs)
    out.append(("orthonormal reduction G = F^2", rel <= 1e-8, f"max rel dev {rel:.2e}"))

    worst = 0.0
    for a in (-1.0, 0.0, 0.5, 2.0):
        for b in (-0.5, 1.0, 3.0):
            for c in (0.3, 0.7):
                v = np.array([np.sqrt(c), np.sqrt(1 - c)])
                T = QuadraticPencil.from_operator(np.diag([a, b]), v)
                a0, a1, a2 = T.A0[0, 0], T.A1[0, 0], T.A2[0, 0]
                exact = np.roots([a0, -2 * a1, a2])
                got = np.array([p.z for p in second_order_spectrum(T)])
                worst = max(worst, _multiset_distance(got, exact))
    out.append(("2x2 toy brute force", worst <= 1e-12, f"max dev {worst:.2e}"))
    return out


def _multiset_distance(a, b) -> float:
    a = sorted(np.asarray(a, dtype=complex), key=lambda z: (z.real, z.imag))
    b = sorted(np.asarray(b, dtype=complex), key=lambda z: (z.real, z.imag))
    return float(max(abs(x - y) for x, y in zip(a, b)))


# --- output ------------------------------------------------------------------

CASE_COLUMNS = ("j", "galerkin", "mu_re", "mu_im", "low", "up", "width", "residual", "certified")
SWEEP_COLUMNS = ("j", "n", "h", "r", "slope")
TRUNCATION_COLUMNS = ("j", "L", "n", "h", "galerkin", "difference")
POINT_COLUMNS = ("re", "im", "residual")
THRESHOLD_COLUMNS = ("j", "n", "h", "r")


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def case_rows(result: CaseResult):
    for t in result.targets:
        e = t.enclosure
        if e is None:
            yield (t.j, t.galerkin, None, None, None, None, None, None, False)
        else:
            yield (t.j, t.galerkin, e.mu.real, e.mu.imag, e.low, e.up, e.width, e.source_residual,
                   e.certified)


def case_to_csv(result: CaseResult) -> str:
    return _csv(CASE_COLUMNS, case_rows(result))


def points_to_csv(result: CaseResult) -> str:
    return _csv(POINT_COLUMNS, ((p.real, p.imag, p.residual) for p in result.points))


def sweep_to_csv(result: SweepResult) -> str:
    return _csv(SWEEP_COLUMNS, ((r.j, r.n, r.h, r.r, result.slopes[r.j]) for r in result.rows))


def truncation_to_csv(rows: Sequence[TruncationRow]) -> str:
    return _csv(TRUNCATION_COLUMNS, ((r.j, r.L, r.n, r.h, r.galerkin, r.difference) for r in rows))


def threshold_to_csv(results: Sequence[ThresholdResult]) -> str:
    return _csv(THRESHOLD_COLUMNS, ((r.j, r.n, r.h, r.r) for res in results for r in res.rows))


def _num(x):
    if x is None:
        return None
    x = float(x)
    return None if math.isnan(x) else x


def _enc_json(e: Enclosure | None):
    if e is None:
        return None
    return {"mu_re": e.mu.real, "mu_im": e.mu.imag, "low": e.low, "up": e.up, "width": e.width,
            "residual": _num(e.source_residual), "certified": e.certified, "kind": e.kind.value}


def case_to_json(result: CaseResult, timing: bool = False) -> str:
    doc = {
        "config": result.config.to_dict(),
        "policy": {"window": "galerkin-centred", "refine": result.config.refine,
                   "selection": "narrowest certified enclosure in window"},
        "galerkin_values": list(result.galerkin_values),
        "targets": [{"j": t.j, "galerkin": t.galerkin,
                     "window": {"center": t.window.center, "d": t.window.d},
                     "enclosure": _enc_json(t.enclosure),
                     "candidates": [_enc_json(c) for c in t.candidates]} for t in result.targets],
        "warnings": list(result.warnings),
    }
    if timing:
        doc["timing"] = result.timing
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def sweep_to_json(result: SweepResult) -> str:
    doc = {"config": result.config.to_dict(),
           "rows": [{"j": r.j, "n": r.n, "h": r.h, "r": _num(r.r)} for r in result.rows],
           "slopes": {str(k): _num(v) for k, v in sorted(result.slopes.items())}}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_config(path) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: configuration must be a JSON object")
    return data
