import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fastescape import dimension as dim
from fastescape.errors import DegenerateDiameter, InsufficientScales
from fastescape.logmag import LogMag, WideFloat


def test_mcmullen_quarter_fixture():
    levels = [dim.NestingLevel(n=n, delta=0.25, d=4.0**-n) for n in range(1, 11)]
    rep = dim.mcmullen_bound(levels)
    assert rep.bound == pytest.approx(1.0, abs=1e-9)
    for _n, ratio in rep.ratios:
        assert ratio == pytest.approx(1.0, abs=1e-9)


def test_mcmullen_full_density():
    levels = [dim.NestingLevel(n=n, delta=1.0, d=2.0**-n) for n in range(1, 6)]
    rep = dim.mcmullen_bound(levels)
    assert rep.bound == 2.0


def test_mcmullen_constant_density_trend():
    # Delta constant, d_n collapsing doubly fast: ratios -> 0, bound -> 2
    levels = [
        dim.NestingLevel(n=n, delta=0.3, d=LogMag.from_log(-(4.0**n))) for n in range(1, 8)
    ]
    rep = dim.mcmullen_bound(levels)
    assert all(b < a for a, b in zip(rep.trend, rep.trend[1:]))
    assert rep.bound > 2.0 - 0.5


def test_mcmullen_validation():
    with pytest.raises(DegenerateDiameter):
        dim.mcmullen_bound([dim.NestingLevel(n=1, delta=0.5, d=1.5)])
    with pytest.raises(ValueError):
        dim.mcmullen_bound([])
    with pytest.raises(ValueError):
        dim.mcmullen_bound([
            dim.NestingLevel(n=1, delta=0.5, d=0.25),
            dim.NestingLevel(n=2, delta=0.5, d=0.5),
        ])
    with pytest.raises(ValueError):
        dim.NestingLevel(n=1, delta=1.5, d=0.5)
    with pytest.raises(ValueError):
        dim.NestingLevel(n=1, delta=0.5, d=0.0)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=2, max_size=6),
    st.integers(min_value=0, max_value=4),
    st.floats(min_value=1.01, max_value=2.0),
)
def test_mcmullen_monotone_in_density(deltas, bump_idx, factor):
    n = len(deltas)
    ds = [2.0 ** -(k + 1) for k in range(n)]
    levels = [dim.NestingLevel(n=k + 1, delta=d, d=ds[k]) for k, d in enumerate(deltas)]
    base = dim.mcmullen_bound(levels).bound
    bumped = list(deltas)
    i = bump_idx % n
    bumped[i] = min(1.0, bumped[i] * factor)
    levels2 = [dim.NestingLevel(n=k + 1, delta=d, d=ds[k]) for k, d in enumerate(bumped)]
    assert dim.mcmullen_bound(levels2).bound >= base - 1e-12


def test_mcmullen_prefix_counts_in_numerator():
    levels = [dim.NestingLevel(n=3, delta=0.5, d=0.125)]
    plain = dim.mcmullen_bound(levels).bound
    with_prefix = dim.mcmullen_bound(levels, delta_prefix=[0.5, 0.5]).bound
    assert with_prefix < plain
    want_ratio = 3 * abs(math.log(0.5)) / abs(math.log(0.125))
    assert with_prefix == pytest.approx(2.0 - want_ratio, rel=1e-12)


def test_dn_model_constants(cosh_fn, frame, thresholds):
    model = dim.dn_model(cosh_fn, frame, 1.0, thresholds.rho0.value(), thresholds.R1, 4)
    assert model.c4 == pytest.approx(frame.sigma**6 / 64.0)
    assert model.c4 == pytest.approx(0.001786, abs=2e-6)
    assert model.c5 == pytest.approx(1536.0 * model.rho0_used / frame.sigma**6, rel=1e-12)
    assert model.c6 == pytest.approx(math.log(model.c4 * model.c5 * math.log(model.R1_used)),
                                     rel=1e-12)
    assert model.R1_used >= thresholds.R1.value()
    # diameters strictly decreasing after the enlargement
    logs = [d.log for d in model.values]
    assert all(b < a for a, b in zip(logs, logs[1:]))


def test_model_trend_ratios_decreasing(cosh_fn, frame, thresholds):
    trend = dim.model_trend(cosh_fn, frame, 1.0, thresholds.rho0.value(),
                            thresholds.R1, 4, c3=8.2e-6)
    tail = [r for n, r, _v in trend.ratios if n >= 2]
    assert len(tail) == 3
    assert all(b < a for a, b in zip(tail, tail[1:]))
    # the dominating term: -n log c4 grows, but log log M^n wins
    growth = [abs(d.log.to_float()) for d in trend.model.values[2:]]
    assert growth[-1] > -4 * math.log(trend.model.c4)


def test_box_counting_square():
    g = np.linspace(0.0, 1.0, 1000)
    pts = np.stack(np.meshgrid(g, g), axis=-1).reshape(-1, 2)
    fit = dim.box_counting(points=pts)
    assert fit.dimension == pytest.approx(2.0, abs=0.05)


def test_box_counting_segment():
    t = np.linspace(0.0, 1.0, 200_000)
    pts = np.column_stack([t, 0.5 * t])
    fit = dim.box_counting(points=pts)
    assert fit.dimension == pytest.approx(1.0, abs=0.05)


def test_box_counting_cantor_dust():
    pts = dim.cantor_dust(8)
    assert pts.shape[0] == 4**8
    # ten dyadic octaves average out the log-periodic wobble of dyadic
    # covers of a triadic set; the finest scale stays above 3^-8
    fit = dim.box_counting(points=pts, n_scales=10)
    assert 1.0 / np.min(fit.scales) < 3.0**8
    assert fit.dimension == pytest.approx(math.log(4.0) / math.log(3.0), abs=0.05)


def test_box_counting_union_dominates():
    g = np.linspace(0.0, 1.0, 500)
    sq = np.stack(np.meshgrid(g, g), axis=-1).reshape(-1, 2)
    seg = np.column_stack([np.linspace(0, 1, 100_000), np.zeros(100_000)])
    d_union = dim.box_counting(points=np.vstack([sq, seg + 2.0]), n_scales=7).dimension
    d_seg = dim.box_counting(points=seg, n_scales=7).dimension
    assert d_union >= d_seg - 0.1


def test_box_counting_raster_floor():
    raster = np.zeros((512, 512), dtype=bool)
    raster[64:448, 64:448] = True
    fit = dim.box_counting(raster=raster, pixel_floor=4)
    assert np.min(fit.scales) >= 4.0 / 512.0 - 1e-12
    assert fit.dimension == pytest.approx(2.0, abs=0.05)


def test_box_counting_validation():
    with pytest.raises(ValueError):
        dim.box_counting()
    with pytest.raises(ValueError):
        dim.box_counting(points=np.empty((0, 2)))
    with pytest.raises(InsufficientScales):
        dim.box_counting(points=np.array([[0.0, 0.0], [1.0, 1.0]]), n_scales=3)
