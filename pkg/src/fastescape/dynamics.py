"""Orbit iteration, escape classification, the orbit-derivative criterion,
and deterministic raster rendering.

Orbits are recorded as complex points while |f| stays within double range;
for functions that map the positive axis into itself, exactly real orbits
continue in log scale afterwards.  Certification of fast escape rides on
that invariant ray: once a real orbit point passes the verified modulus
threshold, the modulus-comparison induction applies step by step, and is
additionally re-checked on the recorded iterates.  Points whose orbits
merely look escaping within the horizon are labelled empirically, never
certified; "bounded-window" is a horizon label, not a claim about the
asymptotic orbit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bigeval
from .errors import EvaluationRange, ZeroOfF
from .function import GenusZeroFunction, log_derivative, log_f
from .logmag import LogMag, WideFloat
from .modulus import Thresholds, iterate_mu, max_modulus_log

# complex continuation stops once log|f| exceeds this
REAL_EXP_GUARD = 690.0

# off-ray points are not followed past this modulus (pointwise evaluation
# cost grows like sqrt|z|; certification never needs to chase them)
COMPLEX_LOG_CAP = math.log(1e10)

# vectorised tiles retire pixels to the scalar path a bit earlier
_TILE_LOG_CAP = math.log(1e8)

CLASS_CODES = {"A-certified": 0, "escape-empirical": 1, "bounded-window": 2, "unknown": 3}


@dataclass
class OrbitRecord:
    z0: complex
    points: list            # complex entries while in range, None afterwards
    log_moduli: list        # LogMag per step (None exactly at the origin)
    deriv_scale: list       # |z_n f'(z_n)/f(z_n)| per step (math.inf if huge)
    zero_hit: list          # True where f(z_n) = 0 (or z_n sits on a zero)
    ray_flag: list          # True where the step is exactly on the positive ray
    termination: str        # horizon | escaped-certified | bounded-window | left-domain
    axis_from: int | None   # first index from which the orbit is exactly positive real

    def __len__(self):
        return len(self.log_moduli)


def iterate_orbit(
    fn: GenusZeroFunction,
    z0: complex,
    n_max: int = 64,
    *,
    eps: float = 1e-12,
    escape_radius: float = 1e8,
    thresholds: Thresholds | None = None,
    frame=None,
) -> OrbitRecord:
    """Iterate z -> f(z) for up to n_max steps, recording moduli and the
    derivative quantities |z_n f'(z_n)/f(z_n)|; overflow is never wrapped.

    With ``thresholds`` given, a positive-real orbit point at or beyond the
    verified comparison radius terminates the record early as
    escaped-certified (the ray is forward-invariant for such functions).
    """
    axis_ok = fn.axis_positive
    cert_log = None
    if thresholds is not None:
        cert_log = WideFloat(math.log(max(thresholds.r1.value(), thresholds.r0.value())))

    points: list = []
    log_moduli: list = []
    deriv_scale: list = []
    zero_hit: list = []
    ray_flag: list = []
    axis_from: int | None = None
    termination = "bounded-window"

    z = complex(z0)
    ell: WideFloat | None = None      # set once the orbit continues on the ray in log scale
    for n in range(n_max + 1):
        if ell is not None:
            # log-scale ray phase
            if axis_from is None:
                axis_from = n
            points.append(None)
            log_moduli.append(LogMag.from_log(ell))
            try:
                lnlam, _ = bigeval.axis_log_log_derivative(fn, ell)
                lf = lnlam.to_float()
                deriv_scale.append(math.exp(lf) if lf < 700.0 else math.inf)
            except EvaluationRange:
                deriv_scale.append(0.0)    # unverifiable: fail the criterion, not fake it
            zero_hit.append(False)
            ray_flag.append(True)
            if cert_log is not None and ell >= cert_log:
                termination = "escaped-certified"
                break
            if n == n_max:
                break
            try:
                ell = max_modulus_log(fn, LogMag.from_log(ell)).log
            except EvaluationRange:
                termination = "horizon"
                break
            continue

        on_ray = axis_ok and z.imag == 0.0 and z.real > 0.0
        if on_ray and axis_from is None:
            axis_from = n

        points.append(z)
        ray_flag.append(on_ray)
        if z == 0.0 and fn.q > 0:
            # f(0) = 0: the orbit is fixed at the origin
            log_moduli.append(None)
            deriv_scale.append(float(fn.q))
            zero_hit.append(True)
            if n == n_max:
                break
            continue
        try:
            L = log_f(fn, z, eps=eps)
            ld = z * log_derivative(fn, z, eps=1e-9, on_fail="nan")
            log_moduli.append(LogMag.from_value(abs(z)))
            deriv_scale.append(abs(ld))
            zero_hit.append(False)
        except ZeroOfF:
            log_moduli.append(None)
            deriv_scale.append(0.0)
            zero_hit.append(True)
            termination = "left-domain"
            break
        except EvaluationRange:
            termination = "horizon"
            break

        if cert_log is not None and on_ray and z.real >= math.exp(min(cert_log.to_float(), 700.0)):
            termination = "escaped-certified"
            break
        if n == n_max:
            break
        if on_ray and L.real > REAL_EXP_GUARD:
            ell = WideFloat(L.real)
            continue
        if not on_ray and L.real > COMPLEX_LOG_CAP:
            # record the known next modulus before stopping
            points.append(None)
            log_moduli.append(LogMag.from_log(L.real))
            deriv_scale.append(math.nan)
            zero_hit.append(False)
            ray_flag.append(False)
            termination = "horizon"
            break
        z_next = complex(np.exp(L))
        if on_ray:
            z_next = complex(abs(z_next), 0.0)   # keep the invariant ray exact
        z = z_next

    return OrbitRecord(
        z0=complex(z0),
        points=points,
        log_moduli=log_moduli,
        deriv_scale=deriv_scale,
        zero_hit=zero_hit,
        ray_flag=ray_flag,
        termination=termination,
        axis_from=axis_from,
    )


_MU_CACHE: dict = {}


def _mu_iterates_cached(fn, frame, seed: LogMag, depth: int):
    lf = seed.log_float()
    if not math.isfinite(lf):
        return iterate_mu(fn, frame, seed, depth)
    key = (id(fn), id(frame), lf)
    hit = _MU_CACHE.get(key)
    if hit is None or len(hit.values) <= depth:
        if len(_MU_CACHE) > 4096:
            _MU_CACHE.clear()
        hit = iterate_mu(fn, frame, seed, max(depth, 8))
        _MU_CACHE[key] = hit
    return hit


def _mu_domination_holds(fn, frame, orbit: OrbitRecord, ell_idx: int,
                         seed: LogMag, max_depth: int = 8) -> bool:
    """Check |f^(l+n)(z)| >= mu^n(seed) over the recorded horizon."""
    depth = min(len(orbit.log_moduli) - 1 - ell_idx, max_depth)
    if depth <= 0:
        return True
    mu_it = _mu_iterates_cached(fn, frame, seed, depth)
    for n in range(1, depth + 1):
        if n >= len(mu_it.values) or not mu_it.certified[n]:
            break
        lm = orbit.log_moduli[ell_idx + n]
        if lm is None or lm < mu_it.values[n]:
            return False
    return True


def classify_fast_escaping(
    fn: GenusZeroFunction,
    frame,
    orbit: OrbitRecord,
    thresholds: Thresholds,
) -> str:
    """Classify an orbit record.

    A-certified needs an exactly real orbit point at or beyond the verified
    comparison radius: the positive ray is the forward-invariant part of
    the sector, where the modulus-comparison induction is actually valid.
    The recorded continuation is re-checked against iterated mu.  Orbits
    that dominate the mu-iteration from the base radius over at least two
    recorded steps without certification are escape-empirical.
    """
    n_rec = len(orbit.log_moduli)
    r_star = LogMag.from_value(max(thresholds.r1.value(), thresholds.r0.value()))

    if fn.axis_positive:
        for idx in range(n_rec):
            lm = orbit.log_moduli[idx]
            if lm is None or lm < r_star:
                continue
            if orbit.ray_flag[idx] and _mu_domination_holds(fn, frame, orbit, idx, lm):
                return "A-certified"

    base = LogMag.of(thresholds.r0.value())
    for idx in range(n_rec):
        lm = orbit.log_moduli[idx]
        if lm is None or lm < base:
            continue
        if n_rec - 1 - idx >= 1 and _mu_domination_holds(fn, frame, orbit, idx, base):
            return "escape-empirical"

    if orbit.termination == "bounded-window":
        return "bounded-window"
    return "unknown"


def julia_criterion(orbit: OrbitRecord, lam: float = 2.0, N: int = 0) -> bool:
    """True when f(z_n) != 0 and |z_n f'(z_n)/f(z_n)| >= lam for every
    recorded n >= N.  The dichotomy this feeds (Julia membership versus a
    multiply connected Fatou component) is the caller's to interpret."""
    if lam <= 1.0:
        raise ValueError("lam must exceed 1")
    idxs = range(N, len(orbit.deriv_scale))
    if not idxs:
        return False
    for n in idxs:
        if orbit.zero_hit[n]:
            return False
        d = orbit.deriv_scale[n]
        if math.isnan(d):
            continue     # trailing modulus-only entry: no recorded derivative
        if not d >= lam:
            return False
    return True


# ---------------------------------------------------------------------------
# raster rendering


@dataclass
class RenderConfig:
    n_max: int = 24
    escape_radius: float = 1e8
    eps: float = 1e-10
    tile: int = 64
    resolution_cap: int = 2048


@dataclass
class ClassGrid:
    rect: tuple                    # (x_min, x_max, y_min, y_max)
    codes: np.ndarray              # uint8 class code per pixel (row 0 = y_min)
    escape_time: np.ndarray        # int32, first step with |z| > escape_radius (-1 none)

    @property
    def resolution(self) -> tuple:
        return self.codes.shape[::-1]


def render_grid(
    fn: GenusZeroFunction,
    frame,
    rect,
    resolution,
    thresholds: Thresholds,
    config: RenderConfig | None = None,
) -> ClassGrid:
    """Classify pixel centres of a rectangle, tile by tile, deterministically.

    Codes: 0 A-certified, 1 escape-empirical, 2 bounded-window, 3 unknown.
    The per-step product evaluations are vectorised across each tile.
    """
    config = config or RenderConfig()
    nx, ny = int(resolution[0]), int(resolution[1])
    if nx < 1 or ny < 1 or max(nx, ny) > config.resolution_cap:
        raise ValueError(f"resolution {resolution} outside (1, {config.resolution_cap})")
    x_min, x_max, y_min, y_max = rect
    xs = x_min + (np.arange(nx) + 0.5) * (x_max - x_min) / nx
    ys = y_min + (np.arange(ny) + 0.5) * (y_max - y_min) / ny

    codes = np.empty((ny, nx), dtype=np.uint8)
    etime = np.full((ny, nx), -1, dtype=np.int32)
    for ty in range(0, ny, config.tile):
        for tx in range(0, nx, config.tile):
            c, e = _render_tile(fn, frame, xs[tx : tx + config.tile],
                                ys[ty : ty + config.tile], thresholds, config)
            codes[ty : ty + c.shape[0], tx : tx + c.shape[1]] = c
            etime[ty : ty + c.shape[0], tx : tx + c.shape[1]] = e
    return ClassGrid(rect=tuple(rect), codes=codes, escape_time=etime)


def _render_tile(fn, frame, xs, ys, thresholds, config):
    """Vectorised complex-phase iteration for one tile; pixels that leave
    the vectorised phase (ray overflow, zero hits) finish individually."""
    z0 = (xs[None, :] + 1j * ys[:, None]).ravel()
    n_pix = z0.size
    n_steps = config.n_max + 1
    z_hist = np.full((n_steps, n_pix), np.nan, dtype=complex)
    log_mod = np.full((n_steps, n_pix), np.nan)
    deriv = np.full((n_steps, n_pix), np.nan)
    zero_hit = np.zeros((n_steps, n_pix), dtype=bool)
    term = np.array(["bounded-window"] * n_pix, dtype=object)
    fallback = np.zeros(n_pix, dtype=bool)

    z = z0.astype(complex)
    active = np.ones(n_pix, dtype=bool)
    origin_fixed = (z0 == 0.0) & (fn.q > 0)
    if np.any(origin_fixed):
        z_hist[:, origin_fixed] = 0.0
        zero_hit[:, origin_fixed] = True
        deriv[:, origin_fixed] = float(fn.q)
        active &= ~origin_fixed
    for n in range(n_steps):
        if not np.any(active):
            break
        idx = np.nonzero(active)[0]
        za = z[idx]
        L = log_f(fn, za, eps=config.eps, on_zero="mask")
        ld = log_derivative(fn, za, eps=1e-6, on_zero="mask", on_fail="nan")
        z_hist[n, idx] = za
        with np.errstate(divide="ignore"):
            log_mod[n, idx] = np.where(za == 0.0, -np.inf, np.log(np.abs(za)))
        deriv[n, idx] = np.abs(za * ld)
        hit = np.isinf(L.real)
        if np.any(hit):
            hit_idx = idx[hit]
            zero_hit[n, hit_idx] = True
            term[hit_idx] = "left-domain"
            active[hit_idx] = False
        if n == config.n_max:
            break
        over = ~hit & (L.real > _TILE_LOG_CAP)
        if np.any(over):
            over_idx = idx[over]
            fallback[over_idx] = True     # finish individually (ray or horizon)
            active[over_idx] = False
        keep = ~over & ~hit
        keep_idx = idx[keep]
        z[keep_idx] = np.exp(L[keep])
        if fn.axis_positive:
            ray = keep_idx[(z0[keep_idx].imag == 0.0) & (z0[keep_idx].real > 0.0)]
            z[ray] = np.abs(z[ray])       # keep the invariant ray exact

    codes = np.empty(n_pix, dtype=np.uint8)
    etimes = np.full(n_pix, -1, dtype=np.int32)
    lim = math.log(config.escape_radius)
    for i in range(n_pix):
        if fallback[i]:
            orbit = iterate_orbit(
                fn, complex(z0[i]), n_max=config.n_max, eps=config.eps,
                escape_radius=config.escape_radius, thresholds=thresholds, frame=frame,
            )
        else:
            orbit = _orbit_from_arrays(
                fn, z_hist[:, i], log_mod[:, i], deriv[:, i], zero_hit[:, i], term[i]
            )
        codes[i] = CLASS_CODES[classify_fast_escaping(fn, frame, orbit, thresholds)]
        for n, lm in enumerate(orbit.log_moduli):
            if lm is not None and lm.log_float() > lim:
                etimes[i] = n
                break
    return codes.reshape(ys.size, xs.size), etimes.reshape(ys.size, xs.size)


def _orbit_from_arrays(fn, z_hist, log_mod, deriv, zero_hit, term) -> OrbitRecord:
    points, lms, ds, zh, rf = [], [], [], [], []
    for n in range(log_mod.size):
        if np.isnan(log_mod[n]) and not zero_hit[n]:
            break
        pt = complex(z_hist[n])
        points.append(pt)
        lm = float(log_mod[n])
        lms.append(LogMag.from_log(lm) if math.isfinite(lm) else None)
        ds.append(float(deriv[n]) if not np.isnan(deriv[n]) else 0.0)
        zh.append(bool(zero_hit[n]))
        rf.append(fn.axis_positive and pt.imag == 0.0 and pt.real > 0.0)
    z0 = complex(z_hist[0])
    on_ray = fn.axis_positive and z0.imag == 0.0 and z0.real > 0.0
    return OrbitRecord(
        z0=z0, points=points, log_moduli=lms, deriv_scale=ds, zero_hit=zh, ray_flag=rf,
        termination=str(term), axis_from=0 if on_ray else None,
    )


def write_class_pgm(path, grid: ClassGrid) -> None:
    """Class codes as plain PGM (P2), 0..3 scaled onto 0..255."""
    from .reporting import write_pgm

    write_pgm(path, (grid.codes.astype(np.int32) * 85), maxval=255)


def write_escape_pgm(path, grid: ClassGrid, n_max: int) -> None:
    """Escape times as plain PGM (P2); -1 (never) maps to 0."""
    from .reporting import write_pgm

    data = np.where(grid.escape_time < 0, 0, grid.escape_time + 1)
    scale = max(int(data.max()), 1)
    write_pgm(path, (data * (255 // scale)).astype(np.int32), maxval=255)
