import cmath
import math

import numpy as np
import pytest

from conftest import tanh_sqrt_over
from fastescape import islands
from fastescape.errors import (
    LeftDisc,
    PackingImpossible,
    ThresholdViolation,
    TooFewIslands,
)
from fastescape.function import log_f
from fastescape.modulus import max_modulus_log


def test_t_of_r_closed_form(cosh_fn, frame):
    # |f/f'|(r) = 2 sqrt(r)/tanh(sqrt r); at r = 1e6 that is 2000.0...
    t = islands.t_of_r(cosh_fn, frame, 1e6, nu=1.0)
    want = 8.0 / frame.sigma**4 * abs(1.0 / tanh_sqrt_over(1e6))
    assert t == pytest.approx(want, rel=1e-10)
    assert t == pytest.approx(6.79e4, rel=2e-3)
    # linear in nu
    assert islands.t_of_r(cosh_fn, frame, 1e6, nu=2.0) == pytest.approx(2 * t, rel=1e-12)
    with pytest.raises(ThresholdViolation):
        islands.t_of_r(cosh_fn, frame, 10.0, nu=1.0, r1=20.0)


def test_t_of_r_upper_bound(cosh_fn, frame, thresholds):
    # t(r) <= (64 nu log r / (sigma^6 log M(r))) r on a grid
    for r in thresholds.r1.value() * 4.0 ** np.arange(8):
        t = islands.t_of_r(cosh_fn, frame, float(r), nu=1.0)
        log_M = max_modulus_log(cosh_fn, float(r)).log_float()
        bound = 64.0 * math.log(r) / (frame.sigma**6 * log_M) * r
        assert t <= bound * (1 + 1e-9)


def test_m_of_r(cosh_fn, frame):
    m = islands.m_of_r(cosh_fn, frame, 1e7, c1=1e-3, nu=1.0)
    assert m == 2
    with pytest.raises(TooFewIslands):
        islands.m_of_r(cosh_fn, frame, 1e7, c1=0.0, nu=1.0)
    with pytest.raises(TooFewIslands):
        islands.m_of_r(cosh_fn, frame, 1e6, c1=1e-3, nu=1.0)
    # nondecreasing in r on a grid
    ms = [islands.m_of_r(cosh_fn, frame, r, 1e-3, 1.0) for r in (5e6, 1e7, 4e7, 1e8)]
    assert all(b >= a for a, b in zip(ms, ms[1:]))


def test_m_of_r_zero_c1_raises(cosh_fn, frame):
    with pytest.raises((TooFewIslands, ValueError)):
        islands.m_of_r(cosh_fn, frame, 1e7, c1=-1e-3, nu=1.0)


def test_pack_discs_geometry(frame):
    r, t = 1e7, 1e5
    pack = islands.pack_discs(frame, r, t, want=10)
    assert len(pack) >= 10
    c = pack.centers
    d = np.abs(c[:, None] - c[None, :])
    np.fill_diagonal(d, np.inf)
    assert np.min(d) > 6 * t
    mods = np.abs(c)
    assert np.all((mods >= r + 3 * t * 0.99) & (mods <= 2 * r - 3 * t * 0.99))
    assert np.all(np.abs(np.angle(c)) <= frame.half_opening)
    # area-ratio sanity: a thin strip still packs dozens at t = r/100
    pack2 = islands.pack_discs(frame, 1e4, 1e2, want=50)
    assert len(pack2) >= 50


def test_pack_discs_impossible(frame):
    with pytest.raises(PackingImpossible):
        islands.pack_discs(frame, 10.0, 20.0, want=1)   # t > r


def test_find_positive_point_immediate(cosh_fn):
    b = islands.find_positive_point(cosh_fn, complex(1e7, 0.0), 1e5)
    assert b == complex(1e7, 0.0)


def test_find_positive_point_offaxis(cosh_fn, frame):
    beta = 1e7 * cmath.exp(0.05j)
    t = islands.t_of_r(cosh_fn, frame, 1e7, 1.0)
    b = islands.find_positive_point(cosh_fn, beta, t)
    assert abs(b - beta) < t
    res = log_f(cosh_fn, b).imag
    assert abs(res - 2 * math.pi * round(res / (2 * math.pi))) < 1e-10


def test_find_positive_point_left_disc(cosh_fn):
    with pytest.raises(LeftDisc):
        islands.find_positive_point(cosh_fn, 1e7 * cmath.exp(0.05j), 1e-9)


def test_island_records(cosh_fn, frame, islands_at_1e7):
    records, pack = islands_at_1e7
    assert len(records) >= 2
    c2 = islands.c2_constant(frame, 1.0)
    assert c2 == pytest.approx(frame.half_opening * frame.sigma**16 * math.log(2) / 512.0)
    for rec in records:
        assert rec.kappa in (1, 2, 3)
        assert rec.winding == 1
        assert rec.forward_residual < 1e-8
        assert rec.max_dist_from_b < rec.t
        assert rec.c2_ratio >= c2
        assert rec.diameter() <= 2.0 * rec.t          # level-1 diameter bound echo
        assert rec.min_abs_logderiv > 0.0
    # pairwise disjoint B(b, t)
    for i in range(len(records)):
        for j in range(i + 1, len(records)):
            assert abs(records[i].b - records[j].b) > 2 * records[i].t


def test_island_forward_check(cosh_fn, frame, islands_at_1e7):
    records, _ = islands_at_1e7
    frac = islands.forward_check(cosh_fn, records[0], frame)
    assert frac >= 0.99


def test_trace_determinism(cosh_fn, frame, islands_at_1e7):
    records, _ = islands_at_1e7
    rec = records[0]
    again = islands.trace_island(
        cosh_fn, rec.b, rec.kappa, frame, mesh=rec.meta["mesh"],
        t=rec.t, r=rec.r, beta=rec.beta,
    )
    assert again.vertices.shape == rec.vertices.shape
    np.testing.assert_allclose(
        again.vertices, rec.vertices, rtol=1e-9, atol=1e-9 * abs(rec.b)
    )


def test_distortion_and_koebe(cosh_fn, islands_at_1e7):
    records, _ = islands_at_1e7
    rep = islands.distortion_constant(cosh_fn, records, samples=16)
    assert rep.C >= 1.0
    assert rep.koebe_passed and rep.koebe_max <= 12.0
    # the log-derivative barely moves across these tiny discs
    assert rep.C < 1.5


def test_measure_level0(cosh_fn, frame, islands_at_1e7):
    records, pack = islands_at_1e7
    rep = islands.distortion_constant(cosh_fn, records, samples=9)
    level = islands.measure_level(
        cosh_fn, frame, 1e7, records, total_m=len(pack), C=rep.C
    )
    meta = dict(level.provenance)
    # density definition: m * mean area / area(T(rho))
    areas = [rec.area for rec in records]
    want = len(pack) * np.mean(areas) / frame.t_sector_area(1e7)
    assert level.delta == pytest.approx(want, rel=1e-12)
    assert meta["delta_vs_c3_margin"] > 0.0
    assert level.d == pytest.approx(max(r.diameter() for r in records), rel=1e-12)


def test_target_box_geometry(frame):
    box = islands.TargetBox(kappa=1, log_fb=100.0, im_half=frame.half_opening)
    assert box.im_center == pytest.approx(8 * math.pi)
    assert box.in_Q(complex(100.3, 8 * math.pi))
    assert not box.in_Q(complex(101.0, 8 * math.pi))
    assert box.in_omega(complex(100.9, 8 * math.pi + 3.0))
    # exp maps Q onto the sector band [f(b), 2 f(b)] x [-alpha, alpha]
    w = complex(100.0 + math.log(2.0), 8 * math.pi + frame.half_opening)
    img = cmath.exp(w - 100.0)        # scaled by f(b)
    assert abs(img) == pytest.approx(2.0, rel=1e-12)
    assert cmath.phase(img) == pytest.approx(frame.half_opening, rel=1e-9)
    targets = box.boundary_targets(0.01)
    assert targets[0] == targets[-1]
    assert np.all(np.abs(np.diff(targets)) <= 0.01 + 1e-12)
