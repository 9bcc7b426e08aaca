import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fastescape.bigeval import exp_wide
from fastescape.logmag import LogMag, WideFloat, fmt_logmag

finite = st.floats(min_value=-1e300, max_value=1e300, allow_nan=False)
positive = st.floats(min_value=1e-300, max_value=1e300, allow_nan=False)


def test_widefloat_roundtrip():
    for x in (0.0, 1.0, -2.5, 1e-300, 7e250, -3e-200):
        assert WideFloat(x).to_float() == x


def test_widefloat_wide_exponent_ordering():
    a = WideFloat(0.9, 100000)
    b = WideFloat(0.6, 100001)
    assert a < b
    assert b - a > WideFloat(0.0)
    assert (a + a) == WideFloat(0.9, 100001)


@settings(max_examples=200, deadline=None)
@given(finite, finite)
def test_widefloat_order_matches_floats(x, y):
    assert (WideFloat(x) < WideFloat(y)) == (x < y)


@settings(max_examples=100, deadline=None)
@given(finite, finite)
def test_widefloat_add_matches_floats(x, y):
    got = (WideFloat(x) + WideFloat(y)).to_float()
    want = x + y
    if math.isinf(want):
        assert got == want or abs(got) > 1e307
    else:
        assert got == pytest.approx(want, rel=1e-12, abs=1e-290)


def test_widefloat_absorbs_tiny():
    big = WideFloat(1.0, 5000)
    assert (big + 1.0) == big
    assert (big + WideFloat(1.0, -5000)) == big


def test_exp_and_ln():
    from fastescape.errors import EvaluationRange

    for x in (0.0, 1.0, 700.0, 1e6, 1e18):
        w = WideFloat.exp_of(x)
        assert w.ln() == pytest.approx(x, rel=1e-14, abs=1e-14)
    huge = exp_wide(WideFloat(1e40))
    assert huge.ln() == pytest.approx(1e40, rel=1e-14)
    with pytest.raises(EvaluationRange):
        exp_wide(huge)  # exponent field would need ~1e40 bits: the horizon


def test_ln_wide_exact_for_towers():
    t = exp_wide(WideFloat(2.5e20))
    back = t.ln_wide().to_float()
    assert back == pytest.approx(2.5e20, rel=1e-13)


@settings(max_examples=200, deadline=None)
@given(positive, positive)
def test_logmag_order_matches_magnitudes(x, y):
    assert (LogMag.from_value(x) < LogMag.from_value(y)) == (x < y)


def test_logmag_requires_positive():
    with pytest.raises(ValueError):
        LogMag.from_value(0.0)
    with pytest.raises(ValueError):
        LogMag.from_value(-1.0)
    with pytest.raises(ValueError):
        LogMag.from_value(math.inf)


def test_logmag_arithmetic():
    a = LogMag.from_value(8.0)
    assert (a * 2.0).value() == pytest.approx(16.0)
    assert (a / 4.0).value() == pytest.approx(2.0)
    assert (a**2).value() == pytest.approx(64.0)
    assert a.log_float() == pytest.approx(math.log(8.0))


def test_logmag_tower_ordering():
    # magnitudes exp(exp(60)) < exp(exp(61)) stay ordered far beyond doubles
    a = LogMag.from_log(exp_wide(WideFloat(60.0)))
    b = LogMag.from_log(exp_wide(WideFloat(61.0)))
    assert a < b
    assert a.value() == math.inf  # not representable directly
    assert a.log_log() == pytest.approx(60.0)


def test_fmt_logmag_ranges():
    assert fmt_logmag(LogMag.from_value(2.0)) == "2"
    assert fmt_logmag(LogMag.from_log(5000.0)) == "exp(5000)"
    nested = fmt_logmag(LogMag.from_log(exp_wide(WideFloat(3000.0))))
    assert nested.startswith("exp(exp(")
