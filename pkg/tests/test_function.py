import cmath
import math

import numpy as np
import pytest

from conftest import log_cosh_sqrt, tanh_sqrt_over
from fastescape.errors import SectorViolation, UnknownFamily, ZeroOfF
from fastescape.frame import SectorFrame
from fastescape.function import (
    GenusZeroFunction,
    canonical,
    f_value,
    log_derivative,
    log_f,
    validate_sector,
)
from fastescape.zeros import GeneratorZeros, PowerZeros


def test_log_f_closed_form_values(cosh_fn):
    # log cosh 1 and log cosh 2 via the product representation
    assert log_f(cosh_fn, 1.0).real == pytest.approx(0.4337808, abs=1e-7)
    assert log_f(cosh_fn, 4.0).real == pytest.approx(1.3250027, abs=1e-7)
    assert log_f(cosh_fn, 1.0).imag == 0.0


def test_log_f_at_origin():
    fn = canonical("positive-real-zeros", c=3.0 + 4.0j)
    assert log_f(fn, 0.0) == pytest.approx(cmath.log(3 + 4j))
    fn_q = canonical("positive-real-zeros", q=2)
    with pytest.raises(ZeroOfF):
        log_f(fn_q, 0.0)


@pytest.mark.parametrize(
    "z", [1.0, 4.0, 100.0, 1e6, 2 + 1j, 50 + 20j, -3 + 0.5j, 1e7 * cmath.exp(0.4j)]
)
def test_log_f_matches_oracle_up_to_branch(cosh_fn, z):
    got = log_f(cosh_fn, z, eps=1e-13)
    want = log_cosh_sqrt(z)
    d = got - want
    d -= 2j * math.pi * round(d.imag / (2 * math.pi))
    assert abs(d) < 1e-10


def test_log_f_truncation_invariant(cosh_fn):
    # doubling the summed head beyond the certified cut moves the value < 4 eps
    eps = 1e-10
    zs = np.array([3.0 + 1j, 120.0, 2000.0 * cmath.exp(0.3j)])
    base = log_f(cosh_fn, zs, eps=eps)
    N = cosh_fn.zeros.head_cut(float(np.max(np.abs(zs))))
    idx = np.arange(1, 2 * N + 1)
    a = cosh_fn.zeros.values(idx)
    partial = np.log1p(zs[:, None] / a[None, :]).sum(axis=1)
    tail_bound = 2.0 * cosh_fn.zeros.tail_bound(2 * N, float(np.max(np.abs(zs))))
    assert np.all(np.abs(base - partial) <= 4 * eps + tail_bound)


def test_log_f_zero_proximity(cosh_fn):
    a1 = math.pi**2 / 4.0
    with pytest.raises(ZeroOfF):
        log_f(cosh_fn, -a1 * (1.0 + 1e-14))
    masked = log_f(cosh_fn, np.array([-a1, 1.0]), on_zero="mask")
    assert masked[0].real == -math.inf
    assert masked[1].real == pytest.approx(0.4337808, abs=1e-6)


def test_log_derivative_closed_form(cosh_fn):
    assert log_derivative(cosh_fn, 1.0).real == pytest.approx(0.3807971, abs=1e-7)
    got = log_derivative(cosh_fn, 100.0)
    assert got == pytest.approx(math.tanh(10.0) / 20.0, rel=1e-10)
    for z in (3 + 2j, 1e5 * cmath.exp(0.2j)):
        assert log_derivative(cosh_fn, z) == pytest.approx(tanh_sqrt_over(z), rel=1e-9)


def test_log_derivative_real_positive_on_axis():
    fn = canonical("positive-real-zeros", q=1)
    vals = log_derivative(fn, np.linspace(0.5, 50.0, 7).astype(complex))
    assert np.all(vals.real > 0)
    assert np.allclose(vals.imag, 0.0)


def test_log_derivative_matches_finite_difference(cosh_fn):
    h = 1e-6
    rng = np.random.default_rng(7)
    pts = 5.0 + 40.0 * rng.random(12) + 1j * (rng.random(12) - 0.5) * 10.0
    for z in pts:
        fd = (log_f(cosh_fn, z + h) - log_f(cosh_fn, z - h)) / (2 * h)
        assert abs(log_derivative(cosh_fn, z) - fd) < 1e-6 * max(1.0, abs(fd))


def test_reflection_symmetry(cosh_fn):
    rng = np.random.default_rng(3)
    zs = 50.0 * (rng.random(16) + 1j * (rng.random(16) - 0.5))
    a = np.abs(np.exp(log_f(cosh_fn, zs)))
    b = np.abs(np.exp(log_f(cosh_fn, np.conj(zs))))
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_f_value(cosh_fn):
    assert f_value(cosh_fn, 4.0) == pytest.approx(math.cosh(2.0), rel=1e-12)


def test_canonical_families():
    fn = canonical("cosh-sqrt")
    assert fn.zeros.values(np.array([1]))[0] == pytest.approx(math.pi**2 / 4.0)
    assert fn.axis_max and fn.axis_positive

    fn2 = canonical("positive-real-zeros", coeff=2.0, exponent=2.0)
    assert fn2.zeros.values(np.array([3]))[0] == pytest.approx(18.0)

    with pytest.raises(UnknownFamily):
        canonical("no-such-family")
    with pytest.raises(ValueError):
        canonical("custom", zeros=[2.0, 1.0, 3.0], tail_coeff=1.0)  # decreasing moduli


def test_validate_sector(cosh_fn, frame):
    rep = validate_sector(cosh_fn, frame)
    assert rep.n0 == 1

    head_neg = canonical("custom", zeros=[1.0 * cmath.exp(3.0j), 2.0, 3.0],
                         tail_coeff=1.0, tail_exponent=2.0, sector_from=2)
    rep2 = validate_sector(head_neg, SectorFrame(0.1, 0.6, 0.8))
    assert rep2.n0 == 2

    bad = GenusZeroFunction(
        c=1.0, q=0, zeros=GeneratorZeros(lambda n: (n**2) * 1j, all_real_positive=False)
    )
    with pytest.raises(SectorViolation):
        validate_sector(bad, SectorFrame(0.1, 0.6, 0.8))


def test_frame_membership(frame):
    r = 10.0
    assert frame.in_S(r, 10.0) and frame.in_T(r, 10.0)
    assert frame.in_S(r, 30.0) and not frame.in_T(r, 30.0)
    edge = r * cmath.exp(1j * frame.psi)
    assert not frame.in_S(r, edge) and not frame.in_T(r, edge)
    inside = 15.0 * cmath.exp(1j * (frame.half_opening * 0.99))
    assert frame.in_T(r, inside)
    assert not frame.in_S(r, 0.0)


def test_frame_validation():
    with pytest.raises(ValueError):
        SectorFrame(theta2=0.7, psi=0.6, psi_prime=0.8)
    with pytest.raises(ValueError):
        SectorFrame(theta2=0.1, psi=0.6, psi_prime=1.6)
    assert SectorFrame().sigma == pytest.approx(math.cos(0.8))
