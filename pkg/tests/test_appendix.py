import pytest

from quadbounds import appendix
from quadbounds.appendix import LocalIntegralKey as K


@pytest.fixture(scope="module")
def report():
    return {r.key: r for r in appendix.verify_closed_forms()}


def test_required_rows_verified(report):
    for key in appendix.REQUIRED_ROWS:
        row = report[key]
        assert row.status == "verified", key.label
        assert row.max_rel_deviation <= 1e-12


def test_stiffness_value_rows_inconsistent(report):
    # printed 12h/5 and -6h/5 where the integral is 12/(5h) and -6/(5h)
    for key in (K("<b',b'>", "p_j", "p_j"), K("<b',b'>", "p_j", "p_{j+1}")):
        row = report[key]
        assert row.status == "inconsistent"
        hs = {s[0] for s in row.samples}
        assert hs == {0.1, 0.5, 1.0}
        for h, _, printed, exact in row.samples:
            assert printed == pytest.approx(exact * h * h, rel=1e-12)


def test_mixed_order_x2_row_unavailable(report):
    key = K("<b,x2b>", "p_j", "p_{j+1}")
    assert report[key].status == "inconsistent"
    assert appendix.closed_form_entry(key, 0.5, 1.0) is None
    assert appendix.closed_form_literal(key, 0.5, 1.0) is not None


def test_closed_form_values():
    q0 = K("<b,x2b>", "q0", "q0")
    assert appendix.closed_form_entry(q0, 1.0, -6.0) == pytest.approx(1 / 630 - 6 / 140 + 36 / 105)
    assert appendix.closed_form_entry(q0, 1.0, -6.0) == pytest.approx(0.3015873015873016, rel=1e-14)
    qq = K("<b,b>", "q_j", "q_{j+1}")
    assert appendix.closed_form_entry(qq, 0.5, 0.0) == pytest.approx(-3 * 0.125 / 420)


def test_unknown_key_unavailable():
    bogus = K("<b,b>", "p_j", "q_{j+7}")
    assert appendix.closed_form_literal(bogus, 1.0, 0.0) is None
    assert appendix.closed_form_entry(bogus, 1.0, 0.0) is None


def test_report_lists_both_values(report):
    text = appendix.format_report(list(report.values()))
    bad = [line for line in text.splitlines() if line.startswith("inconsistent")]
    assert bad and all("printed" in line and "quadrature" in line for line in bad)
