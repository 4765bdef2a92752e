import json

import pytest
from hypothesis import given, settings, strategies as st

from quadbounds import experiments
from quadbounds.assembly import Potential
from quadbounds.experiments import (CASE_COLUMNS, CaseConfig, SweepRow, case_to_csv, case_to_json,
                                    fit_slope, points_to_csv, residual_sweep, run_case,
                                    sweep_to_csv, threshold_exploration, truncation_sweep,
                                    windows_from_galerkin)


@pytest.fixture(scope="module")
def small_case():
    return run_case(CaseConfig(n=100, targets=(1, 2, 3)))


def test_fit_slope_examples():
    assert fit_slope([(100, 1e-2), (200, 2.5e-3)]) == pytest.approx(-2.0, abs=1e-12)
    assert fit_slope([(1, 5), (10, 5)]) == pytest.approx(0.0, abs=1e-15)
    assert fit_slope([(100, 1e-2), (200, 2.6e-3), (400, 6.2e-4)]) == pytest.approx(-2.0, abs=0.05)


def test_fit_slope_rejects_bad_input():
    with pytest.raises(ValueError):
        fit_slope([(100, 1e-2)])
    with pytest.raises(ValueError):
        fit_slope([(100, 1e-2), (200, 0.0)])
    with pytest.raises(ValueError):
        fit_slope([(100, 1e-2), (200, float("nan"))])


@settings(max_examples=60, deadline=None)
@given(p=st.sampled_from([-1, -2, -3]), c=st.floats(1e-3, 1e3),
       ns=st.lists(st.integers(10, 5000), min_size=3, max_size=8, unique=True))
def test_fit_slope_recovers_power_laws(p, c, ns):
    ns = sorted(ns)
    assert fit_slope([(n, c * float(n) ** p) for n in ns]) == pytest.approx(p, abs=1e-12)


def test_windows():
    w = windows_from_galerkin([1.0, 3.0, 5.0, 7.5], [1, 2, 3], 0.4)
    assert (w[1].center, w[1].d) == (1.0, pytest.approx(0.8))
    assert w[3].d == pytest.approx(0.8)


def test_case_consistency(small_case):
    assert [t.j for t in small_case.targets] == [1, 2, 3]
    for t in small_case.targets:
        e = t.enclosure
        assert e is not None and e.certified
        assert e.low <= t.galerkin <= e.up + 1e-10
        assert t.r == e.width >= 0
        assert abs(e.mu.real - (2 * t.j - 1)) < 1e-6


def test_case_csv_schema_and_determinism(small_case):
    text = case_to_csv(small_case)
    lines = text.splitlines()
    assert lines[0] == ",".join(CASE_COLUMNS)
    assert len(lines) == 4
    again = case_to_csv(run_case(CaseConfig(n=100, targets=(1, 2, 3))))
    assert again == text
    fields = lines[1].split(",")
    assert len(fields[1].replace(".", "").lstrip("0")) >= 16


def test_case_json_and_points(small_case):
    doc = json.loads(case_to_json(small_case))
    assert doc["config"]["n"] == 100
    assert len(doc["targets"]) == 3
    assert doc["targets"][0]["enclosure"]["certified"] is True
    pts = points_to_csv(small_case).splitlines()
    assert pts[0] == "re,im,residual" and len(pts) == 401


def test_raw_mode_reports_companion_points():
    res = run_case(CaseConfig(n=100, targets=(1,), refine=False))
    e = res.target(1).enclosure
    # unrefined companion eigenvalues carry rounding noise of order 1e-8 here
    assert e is not None and abs(e.width - 2 * 0.0013735342249551492) < 1e-6


def test_config_roundtrip():
    cfg = CaseConfig(potential=Potential.parse("poly:0,0,1,0,0.5"), n=50, targets=(2, 4), balance=False)
    again = CaseConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg
    with pytest.raises(ValueError):
        CaseConfig.from_dict({"bogus": 1})
    with pytest.raises(ValueError):
        CaseConfig(targets=())
    with pytest.raises(ValueError):
        CaseConfig(d_fraction=1.5)


def test_residual_sweep_small():
    res = residual_sweep(CaseConfig(), [60, 80, 100, 120], [1, 2])
    assert len(res.rows) == 8 and not res.flagged
    for j in (1, 2):
        assert 1.7 <= abs(res.slopes[j]) <= 2.3
    text = sweep_to_csv(res).splitlines()
    assert text[0] == "j,n,h,r,slope"
    with pytest.raises(ValueError):
        residual_sweep(CaseConfig(), [100, 50, 200], 1)


def test_truncation_sweep_harmonic():
    rows = truncation_sweep(CaseConfig(), [3.0, 4.0, 5.0, 6.0], 1, h=0.03)
    assert [r.n for r in rows] == [200, 267, 333, 400]
    errs = [r.galerkin - 1.0 for r in rows]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert rows[-1].difference == 0.0
    assert all(r.difference >= 0 for r in rows)


def test_threshold_rule(monkeypatch):
    series = {100: 4e-3, 150: 2e-3, 200: 1e-3, 250: float("nan"), 300: 1.2e-3, 350: 1.6e-3, 400: 9e-4}

    class Fake:
        def __init__(self, r):
            self.r = r

        def target(self, j):
            return self

    monkeypatch.setattr(experiments, "run_case", lambda cfg: Fake(series[cfg.n]))
    res = threshold_exploration(CaseConfig(), 1, sorted(series))
    assert res.exceeded_at == 350 and res.threshold == 300
    assert [r.n for r in res.rows] == [100, 150, 200, 250, 300, 350]
    assert isinstance(res.rows[3], SweepRow) and res.rows[3].missing


def test_errors_carry_case_context():
    with pytest.raises(Exception) as info:
        run_case(CaseConfig(n=10, targets=(25,)))
    assert "count must be" in str(info.value) or "n=10" in str(info.value)
