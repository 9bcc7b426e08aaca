"""Dimension lower bounds: the nested-collection estimate from density and
diameter data, the model diameter sequence for the canonical construction,
and plain box counting on point sets or rasters.

The nested-collection bound is

    dim >= 2 - limsup_n  (sum_{k<=n} |log Delta_k|) / |log d_n|,

reported over finite data as the max over the provided levels together with
the per-level ratio sequence; nothing is extrapolated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDiameter, HorizonExceeded, InsufficientScales
from .logmag import LogMag, WideFloat


@dataclass
class NestingLevel:
    """Per-level measurement: density of the next level inside this one,
    and the max diameter of this level's pieces."""

    n: int
    delta: float
    d: float | LogMag
    provenance: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not (0.0 < self.delta <= 1.0):
            raise ValueError(f"density must be in (0, 1], got {self.delta!r}")
        if not isinstance(self.d, LogMag):
            d = float(self.d)
            if not (d > 0.0) or not math.isfinite(d):
                raise ValueError(f"diameter must be finite positive, got {d!r}")

    def log_d(self) -> WideFloat:
        if isinstance(self.d, LogMag):
            return self.d.log
        return WideFloat(math.log(self.d))


@dataclass
class McMullenReport:
    bound: float
    ratios: list[tuple[int, float]]     # (n, ratio_n)
    levels: int

    @property
    def trend(self) -> list[float]:
        return [r for _, r in self.ratios]


def mcmullen_bound(levels: list[NestingLevel], delta_prefix=()) -> McMullenReport:
    """Finite-data dimension lower bound 2 - max_n ratio_n with

        ratio_n = (sum_{k<=n} |log Delta_k|) / |log d_n|.

    Levels must come ordered with strictly decreasing diameters; any
    diameter >= 1 makes the denominator degenerate and is rejected.
    ``delta_prefix`` supplies the densities of levels preceding the first
    provided one (whose diameters carry no information), so the numerator
    still counts every level of the collection.
    """
    if not levels:
        raise ValueError("need at least one level")
    prev = None
    for lv in levels:
        if lv.log_d().sign >= 0:
            raise DegenerateDiameter(f"level {lv.n} has diameter >= 1")
        if prev is not None and not (lv.log_d() < prev):
            raise ValueError("diameters must decrease across levels")
        prev = lv.log_d()

    ratios = []
    acc = 0.0
    for delta in delta_prefix:
        acc += abs(math.log(delta))
    for lv in levels:
        acc += abs(math.log(lv.delta))
        denom = abs(lv.log_d())
        ratio = (WideFloat(acc) / denom).to_float()
        ratios.append((lv.n, float(ratio)))
    worst = max(r for _, r in ratios)
    return McMullenReport(bound=2.0 - worst, ratios=ratios, levels=len(levels))


@dataclass
class DnModel:
    """Model diameter sequence with the parameters actually used.

    values[k] is d_(k+1); the base radius may have been enlarged from the
    seed threshold until the requested level contracts below 1 (the source
    construction only fixes the base radius up to "sufficiently large").
    """

    values: list
    R1_used: float
    rho0_used: float
    c4: float
    c5: float
    c6: float

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k):
        return self.values[k]

    def __iter__(self):
        return iter(self.values)


def _model_loglogs(fn, R1_val: float, n_max: int) -> list[WideFloat]:
    """ln(log M^n(R1)) for n = 1..n_max, in wide arithmetic.

    One level past the last materialisable iterate is recovered from the
    axis asymptotics (log M^(n+1) = pi sqrt(M^n / C) up to negligible
    corrections), since only its log is needed here.
    """
    from . import bigeval
    from .errors import EvaluationRange
    from .modulus import max_modulus_log

    out: list[WideFloat] = []
    ell = WideFloat(math.log(R1_val))
    for n in range(1, n_max + 1):
        try:
            ell = max_modulus_log(fn, LogMag.from_log(ell)).log
        except EvaluationRange:
            out.append(bigeval.axis_loglog_f(fn, ell))
            if n < n_max:
                raise HorizonExceeded(f"M^{n + 1}(R1) beyond the wide-exponent horizon")
            return out
        if ell.sign <= 0:
            raise ValueError(f"log M^{n}(R1) <= 0; R1 too small for the model")
        out.append(ell.ln_wide())
    return out


def dn_model(
    fn,
    frame,
    nu: float,
    rho0: float,
    R1,
    n_max: int,
    auto_enlarge: bool = True,
    max_doublings: int = 40,
) -> DnModel:
    """Model diameter sequence d_n = exp(c6 - n log c4 - log log M^n(R1))
    with c4 = sigma^6/64, c5 = 1536 nu rho0 / sigma^6, c6 = log(c4 c5 log R1).

    Values are LogMag because d_n underflows doubles within a few levels.
    The base radius is only pinned up to "sufficiently large"; with
    ``auto_enlarge`` R1 doubles (rho0 following, keeping sigma^2 rho0 >= R1)
    until the diameter sequence is strictly decreasing, and the used values
    are reported on the result.
    """
    sigma = frame.sigma
    R1_val = R1.value() if isinstance(R1, LogMag) else float(R1)
    if not (R1_val > 1.0):
        raise ValueError("R1 must exceed 1")
    rho0 = max(float(rho0), R1_val / sigma**2)
    c4 = sigma**6 / 64.0

    for _ in range(max_doublings + 1):
        c5 = 1536.0 * nu * rho0 / sigma**6
        c6 = math.log(c4 * c5 * math.log(R1_val))
        loglogs = _model_loglogs(fn, R1_val, n_max)
        log_d = [WideFloat(c6 - n * math.log(c4)) - ll for n, ll in enumerate(loglogs, start=1)]
        decreasing = all(b < a for a, b in zip(log_d, log_d[1:]))
        if not auto_enlarge or decreasing:
            values = [LogMag.from_log(ld) for ld in log_d]
            return DnModel(values=values, R1_used=R1_val, rho0_used=rho0, c4=c4, c5=c5, c6=c6)
        R1_val *= 2.0
        rho0 = max(rho0, R1_val / sigma**2)
    raise ValueError(f"model diameters not decreasing after {max_doublings} doublings of R1")


@dataclass
class ModelTrend:
    model: DnModel
    ratios: list                  # (n, ratio, diameter_valid) per level
    levels: list                  # NestingLevel for the d < 1 suffix
    delta_prefix: list            # densities of the degenerate leading levels

    @property
    def trend(self) -> list:
        return [r for _n, r, _v in self.ratios]


def model_trend(fn, frame, nu: float, rho0: float, R1, n_max: int, c3: float) -> ModelTrend:
    """Constant-density levels with the model diameters, plus the per-level
    ratio sequence (sum_k |log Delta|) / |log d_n|.

    Leading levels whose model diameter has not contracted below 1 carry a
    False validity flag and enter the dimension bound only through the
    density prefix.
    """
    if not (0.0 < c3 <= 1.0):
        raise ValueError("c3 must be a density in (0, 1]")
    model = dn_model(fn, frame, nu, rho0, R1, n_max)
    levels, prefix, ratios = [], [], []
    for k, d in enumerate(model.values):
        n = k + 1
        ratio = (WideFloat(n * abs(math.log(c3))) / abs(d.log)).to_float()
        valid = d.log.sign < 0
        ratios.append((n, float(ratio), valid))
        if valid:
            levels.append(NestingLevel(n=n, delta=c3, d=d))
        elif not levels:
            prefix.append(c3)
    return ModelTrend(model=model, ratios=ratios, levels=levels, delta_prefix=prefix)


# ---------------------------------------------------------------------------
# box counting


@dataclass
class BoxCountFit:
    dimension: float
    intercept: float
    scales: np.ndarray
    counts: np.ndarray
    residual: float

    def table(self) -> np.ndarray:
        return np.column_stack([self.scales, self.counts])


def box_counting(
    points: np.ndarray | None = None,
    raster: np.ndarray | None = None,
    n_scales: int = 8,
    coarsest_boxes: int = 4,
    pixel_floor: int = 4,
) -> BoxCountFit:
    """Least-squares box-counting dimension over dyadic scales.

    ``points`` is an (N, 2) array; ``raster`` a 2-d boolean array whose True
    pixels are converted to centre points, with scales finer than
    ``pixel_floor`` pixels excluded to avoid the discretisation floor.
    """
    if (points is None) == (raster is None):
        raise ValueError("pass exactly one of points or raster")
    if raster is not None:
        raster = np.asarray(raster, dtype=bool)
        ny, nx = raster.shape
        iy, ix = np.nonzero(raster)
        if ix.size == 0:
            raise ValueError("raster has no set pixels")
        scale = 1.0 / max(nx, ny)
        points = np.column_stack([(ix + 0.5) * scale, (iy + 0.5) * scale])
        min_eps = pixel_floor * scale
    else:
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] == 0:
            raise ValueError("points must be a nonempty (N, 2) array")
        min_eps = 0.0

    lo = points.min(axis=0)
    extent = float(np.max(points.max(axis=0) - lo))
    if extent <= 0.0:
        raise ValueError("point set is degenerate (zero extent)")

    epss = []
    counts = []
    for k in range(n_scales):
        m = coarsest_boxes * 2**k
        eps = extent / m
        if eps <= min_eps:
            break
        cells = np.floor((points - lo) / eps).astype(np.int64)
        np.clip(cells, 0, m - 1, out=cells)     # points on the top edge
        n = np.unique(cells, axis=0).shape[0]
        epss.append(eps)
        counts.append(n)
    if len(epss) < 4:
        raise InsufficientScales(f"only {len(epss)} usable dyadic scales (need >= 4)")
    epss = np.array(epss)
    counts = np.array(counts, dtype=float)
    x = np.log(1.0 / epss)
    y = np.log(counts)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return BoxCountFit(
        dimension=float(slope), intercept=float(intercept),
        scales=epss, counts=counts, residual=resid,
    )


def cantor_dust(depth: int) -> np.ndarray:
    """Corner points of the middle-thirds Cantor dust C x C at given depth."""
    xs = np.array([0.0])
    for _ in range(depth):
        xs = np.concatenate([xs / 3.0, xs / 3.0 + 2.0 / 3.0])
    g = np.stack(np.meshgrid(xs, xs), axis=-1).reshape(-1, 2)
    return g
