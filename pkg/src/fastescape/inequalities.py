"""Sampled verification of the size and logarithmic-derivative inequalities.

Every check sweeps a deterministic low-discrepancy lattice (plus the known
extremal edges), records the worst signed margin in the inequality's natural
scale, and keeps the witness point so the margin can be reproduced later.
These are finite sampled sweeps, not proofs; failures below the thresholds
are informational because the statements claim nothing there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .function import GenusZeroFunction, log_derivative, log_f
from .modulus import max_modulus_log, mu_log

# plastic-constant additive recurrence (R2 sequence)
_PLASTIC = 1.3247179572447460260
_A1 = 1.0 / _PLASTIC
_A2 = 1.0 / _PLASTIC**2


def r2_lattice(n: int) -> tuple[np.ndarray, np.ndarray]:
    """n deterministic low-discrepancy points in [0, 1)^2."""
    i = np.arange(1, n + 1, dtype=float)
    return np.mod(0.5 + _A1 * i, 1.0), np.mod(0.5 + _A2 * i, 1.0)


def sector_lattice(n: int, mod_lo: float, mod_hi: float, ang: float) -> np.ndarray:
    """Lattice over {mod_lo <= |z| <= mod_hi, |arg z| <= ang} in
    (log|z|, arg z) coordinates, with the corner/axis edges appended."""
    u, v = r2_lattice(n)
    logm = math.log(mod_lo) + u * (math.log(mod_hi) - math.log(mod_lo))
    theta = -ang + v * (2.0 * ang)
    pts = np.exp(logm) * np.exp(1j * theta)
    edges = []
    for m in (mod_lo, math.sqrt(mod_lo * mod_hi), mod_hi):
        for t in (-ang, 0.0, ang):
            edges.append(m * complex(math.cos(t), math.sin(t)))
    return np.concatenate([pts, np.array(edges)])


@dataclass
class MarginReport:
    """Worst-case signed margin of one inequality over a sample sweep."""

    check_id: str
    n_samples: int
    min_margin: float
    witness: tuple
    lhs: float
    rhs: float
    meta: dict = field(default_factory=dict)
    table: np.ndarray | None = None

    @property
    def passed(self) -> bool:
        return self.min_margin >= 0.0

    def merge(self, other: "MarginReport") -> "MarginReport":
        if other.check_id != self.check_id:
            raise ValueError("cannot merge reports of different checks")
        keep, other_ = (self, other) if self.min_margin <= other.min_margin else (other, self)
        table = None
        if self.table is not None and other.table is not None:
            table = np.vstack([self.table, other.table])
        return MarginReport(
            check_id=self.check_id,
            n_samples=self.n_samples + other.n_samples,
            min_margin=keep.min_margin,
            witness=keep.witness,
            lhs=keep.lhs,
            rhs=keep.rhs,
            meta={**other_.meta, **keep.meta},
            table=table,
        )


def _report(check_id, margins, witness, lhs, rhs, meta=None, table=None):
    return MarginReport(
        check_id=check_id,
        n_samples=int(margins.size),
        min_margin=float(np.min(margins)),
        witness=witness,
        lhs=float(lhs),
        rhs=float(rhs),
        meta=meta or {},
        table=table,
    )


# ---------------------------------------------------------------------------
# the individual checks


def check_sector_cosine(frame, samples: int = 10_000, keep_table: bool = False) -> MarginReport:
    """sigma |zeta| <= Re(zeta) on |arg zeta| <= psi'; equality on the edge.

    Evaluated in the polar coordinates the lattice lives in, so the edge
    equality (Re zeta = |zeta| cos psi' = sigma |zeta|) is float-exact."""
    u, v = r2_lattice(samples)
    mod = 1.0 + u
    theta = (2.0 * v - 1.0) * frame.psi_prime
    for extra in (-frame.psi_prime, 0.0, frame.psi_prime):
        mod = np.append(mod, (1.0, 1.5, 2.0))
        theta = np.append(theta, (extra, extra, extra))
    margins = mod * (np.cos(theta) - frame.sigma)
    i = int(np.argmin(margins))
    table = None
    if keep_table:
        zeta = mod * np.exp(1j * theta)
        table = np.column_stack([zeta.real, zeta.imag, mod * np.cos(theta), frame.sigma * mod, margins])
    return _report(
        "sector_cosine", margins, (float(mod[i]), float(theta[i])),
        mod[i] * math.cos(theta[i]), frame.sigma * mod[i],
        {"psi_prime": frame.psi_prime}, table,
    )


def check_modulus_lower(
    fn: GenusZeroFunction,
    frame,
    r: float,
    samples: int = 10_000,
    modulus_cap: float = 2.0,
    keep_table: bool = False,
) -> MarginReport:
    """|f(z)| >= mu(|z|) on the sampled part of S(r), in log scale."""
    n_r = max(8, int(math.sqrt(samples / 4.0)))
    n_a = max(4, samples // n_r)
    mods = np.exp(np.linspace(math.log(r), math.log(modulus_cap * r), n_r))
    ang = frame.half_opening
    _, v = r2_lattice(n_a - 3)
    thetas = np.concatenate([-ang + v * (2 * ang), [-ang, 0.0, ang]])
    z = mods[:, None] * np.exp(1j * thetas[None, :])
    log_mu = np.array([mu_log(fn, frame, m).log_float() for m in mods])
    re_log_fz = log_f(fn, z.ravel(), on_zero="mask").real.reshape(z.shape)
    margins = re_log_fz - log_mu[:, None]
    i, j = np.unravel_index(int(np.argmin(margins)), margins.shape)
    table = None
    if keep_table:
        table = np.column_stack(
            [z.ravel().real, z.ravel().imag, re_log_fz.ravel(),
             np.broadcast_to(log_mu[:, None], z.shape).ravel(), margins.ravel()]
        )
    return _report(
        "modulus_lower", margins.ravel(), (complex(z[i, j]),),
        re_log_fz[i, j], log_mu[i], {"r": r, "modulus_cap": modulus_cap}, table,
    )


def _lambda_samples(fn, frame, r, samples):
    z = sector_lattice(samples, r, 2.0 * r, frame.half_opening)
    lam = np.abs(z * log_derivative(fn, z, eps=1e-9))
    return z, lam


def check_logderiv_comparability(
    fn: GenusZeroFunction, frame, r: float, samples: int = 1000, keep_table: bool = False
) -> MarginReport:
    """|z f'/f(z)| >= (sigma^4/4) |w f'/f(w)| over pairs of T(r) points;
    equivalent to comparing the sweep minimum against the sweep maximum."""
    z, lam = _lambda_samples(fn, frame, r, samples)
    c = frame.sigma**4 / 4.0
    i_min, i_max = int(np.argmin(lam)), int(np.argmax(lam))
    margins = lam - c * lam[i_max]
    table = None
    if keep_table:
        table = np.column_stack([z.real, z.imag, lam, np.full_like(lam, c * lam[i_max]), margins])
    return _report(
        "logderiv_comparability", margins,
        (complex(z[i_min]), complex(z[i_max])), lam[i_min], c * lam[i_max],
        {"r": r, "factor": c}, table,
    )


def check_logderiv_real(
    fn: GenusZeroFunction, frame, r_grid, keep_table: bool = False
) -> MarginReport:
    """|r f'(r)/f(r)| >= (sigma^2/8) log M(r,f) / log r > 0 on the radius grid."""
    r_grid = np.asarray(r_grid, dtype=float)
    lhs = np.abs(r_grid * log_derivative(fn, r_grid.astype(complex), eps=1e-9))
    log_M = np.array([max_modulus_log(fn, r).log_float() for r in r_grid])
    rhs = (frame.sigma**2 / 8.0) * log_M / np.log(r_grid)
    margins = lhs - rhs
    i = int(np.argmin(margins))
    table = None
    if keep_table:
        table = np.column_stack([r_grid, np.zeros_like(r_grid), lhs, rhs, margins])
    return _report(
        "logderiv_real", margins, (float(r_grid[i]),), lhs[i], rhs[i],
        {"r_min": float(r_grid[0]), "r_max": float(r_grid[-1])}, table,
    )


def check_derivative_lower(
    fn: GenusZeroFunction, frame, r: float, samples: int = 10_000, keep_table: bool = False
) -> MarginReport:
    """|f'(z)| >= (sigma^6/64) (log M(r,f) / (r log r)) |f(z)| on T(r), in log
    scale; the |f(z)| factor cancels against |f'| = |f| |f'/f|."""
    z = sector_lattice(samples, r, 2.0 * r, frame.half_opening)
    lam = np.abs(log_derivative(fn, z, eps=1e-9))
    log_M = max_modulus_log(fn, r).log_float()
    rhs_log = math.log(frame.sigma**6 / 64.0) + math.log(log_M) - math.log(r * math.log(r))
    margins = np.log(lam) - rhs_log
    i = int(np.argmin(margins))
    table = None
    if keep_table:
        table = np.column_stack([z.real, z.imag, np.log(lam), np.full_like(lam, rhs_log), margins])
    return _report(
        "derivative_lower", margins, (complex(z[i]), r), math.log(lam[i]), rhs_log,
        {"r": r, "log_M": log_M}, table,
    )


def check_product_comparison(
    fn: GenusZeroFunction, frame, r1: float, samples: int = 10_000, keep_table: bool = False
) -> MarginReport:
    """Per-factor comparison |1 + w/a_n| <= |1 + z/a_n| for z in the sampled
    S(r1) band and every w with |w| = sigma |z|, over all truncated factors.

    For head indices below the sector start the sufficient condition
    (1 - sigma) r1 / |a_n| >= 2 is verified as well.
    """
    n_z = max(16, int(math.sqrt(samples)))
    n_w = max(8, samples // n_z)
    z = sector_lattice(n_z, r1, 2.0 * r1, frame.half_opening)
    _, v = r2_lattice(n_w - 1)
    phis = np.concatenate([(2.0 * v - 1.0) * math.pi, [0.0]])
    N = fn.zeros.head_cut(2.0 * r1 * (1 + 1e-12))
    N = max(N, fn.zeros.sector_from - 1, 1)
    a = fn.zeros.values(np.arange(1, N + 1))
    lhs = np.abs(1.0 + z[:, None] / a[None, :])                      # (z, n)
    w = (frame.sigma * np.abs(z))[:, None] * np.exp(1j * phis)[None, :]
    rhs = np.abs(1.0 + w[:, :, None] / a[None, None, :])             # (z, w, n)
    margins = lhs[:, None, :] - rhs
    i, j, k = np.unravel_index(int(np.argmin(margins)), margins.shape)
    rep = _report(
        "product_comparison", margins.ravel(),
        (complex(z[i]), complex(w[i, j]), int(k + 1)),
        lhs[i, k], rhs[i, j, k], {"r1": r1, "n_factors": int(N)},
    )
    n0 = fn.zeros.sector_from
    if n0 > 1:
        head_mod = np.abs(fn.zeros.values(np.arange(1, n0)))
        head_margins = (1.0 - frame.sigma) * r1 / head_mod - 2.0
        hm = int(np.argmin(head_margins))
        rep.meta["head_min_margin"] = float(head_margins[hm])
        if head_margins[hm] < rep.min_margin:
            rep = MarginReport(
                check_id=rep.check_id,
                n_samples=rep.n_samples + head_margins.size,
                min_margin=float(head_margins[hm]),
                witness=("head", int(hm + 1)),
                lhs=(1.0 - frame.sigma) * r1 / head_mod[hm],
                rhs=2.0,
                meta=rep.meta,
            )
    if keep_table:
        flat_z = np.repeat(np.repeat(z, n_w), N)
        rep.table = np.column_stack(
            [flat_z.real, flat_z.imag,
             np.repeat(lhs, n_w, axis=0).ravel(), rhs.ravel(), margins.ravel()]
        )
    return rep


def check_log_ratio(
    fn: GenusZeroFunction, r_grid, factor_cap: float = 64.0, keep_table: bool = False
) -> MarginReport:
    """r/(r + |a_n|) >= (1/4) log(1 + r/|a_n|) / log r for r >= 3^(3/2) and
    |a_n| >= 1; factors with |a_n| > factor_cap * r are provably safe and
    are left out of the sweep."""
    r_grid = np.asarray(r_grid, dtype=float)
    r_grid = r_grid[r_grid >= 3.0**1.5 * (1 - 1e-12)]
    if r_grid.size == 0:
        raise ValueError("grid contains no radii >= 3^(3/2)")
    N = fn.zeros.count_at_most(factor_cap * float(r_grid[-1]))
    a = np.abs(fn.zeros.values(np.arange(1, max(N, 1) + 1)))
    a = a[a >= 1.0]
    if a.size == 0:
        raise ValueError("no factors with |a_n| >= 1 below the cap")
    lhs = r_grid[:, None] / (r_grid[:, None] + a[None, :])
    rhs = 0.25 * np.log1p(r_grid[:, None] / a[None, :]) / np.log(r_grid)[:, None]
    margins = lhs - rhs
    i, j = np.unravel_index(int(np.argmin(margins)), margins.shape)
    table = None
    if keep_table:
        rr = np.broadcast_to(r_grid[:, None], margins.shape).ravel()
        aa = np.broadcast_to(a[None, :], margins.shape).ravel()
        table = np.column_stack([rr, aa, lhs.ravel(), rhs.ravel(), margins.ravel()])
    return _report(
        "log_ratio", margins.ravel(), (float(r_grid[i]), float(a[j])),
        lhs[i, j], rhs[i, j], {"factors": int(a.size)}, table,
    )


def h_function(x):
    """h(x) = (1 + x) log(1 + 1/x), decreasing on (0, inf) toward 1."""
    x = np.asarray(x, dtype=float)
    return (1.0 + x) * np.log1p(1.0 / x)


def check_h_decreasing(x_grid=None, keep_table: bool = False) -> MarginReport:
    """Monotone decrease of h on consecutive grid points."""
    if x_grid is None:
        x_grid = np.geomspace(1e-2, 1e2, 10_000)
    x_grid = np.asarray(x_grid, dtype=float)
    h = h_function(x_grid)
    margins = h[:-1] - h[1:]
    i = int(np.argmin(margins))
    table = None
    if keep_table:
        table = np.column_stack([x_grid[:-1], x_grid[1:], h[:-1], h[1:], margins])
    return _report(
        "h_decreasing", margins, (float(x_grid[i]), float(x_grid[i + 1])),
        h[i], h[i + 1], {"x_min": float(x_grid[0]), "x_max": float(x_grid[-1])}, table,
    )


# ---------------------------------------------------------------------------
# reevaluation, suite driver, light probes

SEVEN_CHECKS = (
    "sector_cosine",
    "modulus_lower",
    "logderiv_comparability",
    "logderiv_real",
    "derivative_lower",
    "product_comparison",
    "log_ratio",
)


def reevaluate(report: MarginReport, fn: GenusZeroFunction | None = None, frame=None) -> float:
    """Recompute the stored worst margin from its witness."""
    cid, w = report.check_id, report.witness
    if cid == "sector_cosine":
        mod, theta = w
        return mod * (math.cos(theta) - frame.sigma)
    if cid == "modulus_lower":
        z = w[0]
        return log_f(fn, z).real - mu_log(fn, frame, abs(z)).log_float()
    if cid == "logderiv_comparability":
        z, wpt = w
        lam_z = abs(z * log_derivative(fn, z, eps=1e-9))
        lam_w = abs(wpt * log_derivative(fn, wpt, eps=1e-9))
        return lam_z - frame.sigma**4 / 4.0 * lam_w
    if cid == "logderiv_real":
        r = w[0]
        lhs = abs(r * log_derivative(fn, complex(r), eps=1e-9))
        rhs = (frame.sigma**2 / 8.0) * max_modulus_log(fn, r).log_float() / math.log(r)
        return lhs - rhs
    if cid == "derivative_lower":
        z, r = w
        lam = abs(log_derivative(fn, z, eps=1e-9))
        log_M = max_modulus_log(fn, r).log_float()
        return math.log(lam) - (
            math.log(frame.sigma**6 / 64.0) + math.log(log_M) - math.log(r * math.log(r))
        )
    if cid == "product_comparison":
        if w[0] == "head":
            n = w[1]
            a_n = abs(complex(fn.zeros.values(np.array([n]))[0]))
            return (1.0 - frame.sigma) * report.meta["r1"] / a_n - 2.0
        z, wpt, n = w
        a_n = complex(fn.zeros.values(np.array([n]))[0])
        return abs(1.0 + z / a_n) - abs(1.0 + wpt / a_n)
    if cid == "log_ratio":
        r, a_n = w
        return r / (r + a_n) - 0.25 * math.log1p(r / a_n) / math.log(r)
    if cid == "h_decreasing":
        x0, x1 = w
        return float(h_function(x0) - h_function(x1))
    raise ValueError(f"unknown check id {cid!r}")


def probe_size_inequalities(fn, frame, r: float, samples: int = 128) -> bool:
    """Light-sample probe of the four T(r)/S(r) inequalities at a single r,
    used by the threshold finder before the full-density sweep."""
    try:
        if check_modulus_lower(fn, frame, r, samples=samples).min_margin < 0.0:
            return False
        if check_logderiv_comparability(fn, frame, r, samples=samples).min_margin < 0.0:
            return False
        if check_logderiv_real(fn, frame, np.array([r])).min_margin < 0.0:
            return False
        if check_derivative_lower(fn, frame, r, samples=samples).min_margin < 0.0:
            return False
    except Exception:
        return False
    return True


def run_verify_suite(
    fn: GenusZeroFunction,
    frame,
    r1: float,
    *,
    samples: int = 10_000,
    grid_factor: float = 10.0,
    grid_ratio: float = 1.25,
    checks=None,
    keep_tables: bool = False,
) -> dict[str, MarginReport]:
    """Run the requested checks on a geometric radius grid [r1, grid_factor*r1].

    Per-radius checks are aggregated to their worst margin across the grid.
    """
    wanted = tuple(checks) if checks else SEVEN_CHECKS
    n = int(math.floor(math.log(grid_factor) / math.log(grid_ratio))) + 1
    r_grid = r1 * grid_ratio ** np.arange(n)
    if r_grid[-1] < grid_factor * r1 * (1 - 1e-12):
        r_grid = np.append(r_grid, grid_factor * r1)

    out: dict[str, MarginReport] = {}

    def _put(rep):
        out[rep.check_id] = out[rep.check_id].merge(rep) if rep.check_id in out else rep

    for cid in wanted:
        if cid == "sector_cosine":
            _put(check_sector_cosine(frame, samples, keep_table=keep_tables))
        elif cid == "modulus_lower":
            for r in r_grid:
                _put(check_modulus_lower(fn, frame, float(r), samples, keep_table=keep_tables))
        elif cid == "logderiv_comparability":
            for r in r_grid:
                _put(check_logderiv_comparability(fn, frame, float(r), samples, keep_table=keep_tables))
        elif cid == "logderiv_real":
            _put(check_logderiv_real(fn, frame, r_grid, keep_table=keep_tables))
        elif cid == "derivative_lower":
            for r in r_grid:
                _put(check_derivative_lower(fn, frame, float(r), samples, keep_table=keep_tables))
        elif cid == "product_comparison":
            _put(check_product_comparison(fn, frame, float(r_grid[0]), samples, keep_table=keep_tables))
        elif cid == "log_ratio":
            _put(check_log_ratio(fn, r_grid, keep_table=keep_tables))
        elif cid == "h_decreasing":
            _put(check_h_decreasing(keep_table=keep_tables))
        else:
            raise ValueError(f"unknown check id {cid!r}")
    return out
