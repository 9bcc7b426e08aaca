"""Maximum modulus M(r, f), its shrunken variant mu(r) = M(sigma r, f),
their iterates in extended range, and the threshold radii from which the
verification suites run.

For functions with all zeros positive real the circle maximum sits at
arg z = 0 (every factor modulus |1 + z/a_n| peaks there), so M(r) follows
the positive-axis evaluators at any radius.  Otherwise M is located by a
coarse-to-fine circle scan and is certified only as ">= every scanned
angle", within the directly summable radius range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bigeval
from .errors import EvaluationRange, NotFoundInScanRange
from .function import GenusZeroFunction, log_f
from .logmag import LogMag, WideFloat


def _as_wide_log(r) -> WideFloat:
    if isinstance(r, LogMag):
        return r.log
    if isinstance(r, WideFloat):
        return r
    r = float(r)
    if not (r > 0.0) or not math.isfinite(r):
        raise ValueError(f"radius must be a finite positive real, got {r!r}")
    return WideFloat(math.log(r))


@dataclass
class ScanResult:
    value: LogMag
    theta: float
    n_evals: int
    method: str


def max_modulus_scan(
    fn: GenusZeroFunction,
    r: float,
    *,
    coarse: int = 256,
    angular_tol: float = 1e-8,
    eps: float = 1e-12,
) -> ScanResult:
    """Circle scan for log M(r, f): coarse grid, then golden-section refine.

    The returned value is the max over every angle actually evaluated.
    """
    if coarse < 16:
        raise ValueError("coarse grid must have at least 16 angles")
    thetas = np.linspace(-math.pi, math.pi, coarse, endpoint=False)
    thetas = np.append(thetas, 0.0)
    vals = log_f(fn, r * np.exp(1j * thetas), eps=eps, on_zero="mask").real
    best = int(np.argmax(vals))
    lo = thetas[best] - 2.0 * math.pi / coarse
    hi = thetas[best] + 2.0 * math.pi / coarse
    best_theta, best_val = float(thetas[best]), float(vals[best])
    n_evals = thetas.size

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)

    def _re(theta: float) -> float:
        nonlocal n_evals
        n_evals += 1
        v = log_f(fn, r * complex(math.cos(theta), math.sin(theta)), eps=eps, on_zero="mask")
        return v.real

    fc, fd = _re(c), _re(d)
    while (b - a) > angular_tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = _re(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = _re(d)
        if fc > best_val:
            best_val, best_theta = fc, c
        if fd > best_val:
            best_val, best_theta = fd, d
    return ScanResult(LogMag.from_log(best_val), best_theta, n_evals, "scan")


def max_modulus_log(
    fn: GenusZeroFunction,
    r,
    *,
    coarse: int = 256,
    angular_tol: float = 1e-8,
    eps: float = 1e-12,
    mode: str = "auto",
) -> LogMag:
    """log M(r, f) as a LogMag.  r may be a float, LogMag, or WideFloat.

    ``mode="scan"`` forces the circle scan; ``mode="auto"`` uses the exact
    positive-axis value for functions whose zeros are all positive real.
    """
    if isinstance(r, (int, float)) and float(r) == 0.0:
        if fn.q == 0:
            return LogMag.from_value(abs(complex(fn.c)))
        raise ValueError("M(0, f) = 0 for q > 0; not representable as LogMag")
    ell = _as_wide_log(r)
    ell_f = ell.to_float()

    axis_ok = fn.axis_max and mode in ("auto", "axis")
    if axis_ok:
        if math.isfinite(ell_f) and ell_f <= 690.0:
            rf = math.exp(ell_f)
            if fn.zeros.head_cut(rf) <= bigeval.AXIS_HEAD_BUDGET:
                return LogMag.from_log(log_f(fn, rf, eps=eps).real)
        value, _rel = bigeval.axis_log_f(fn, ell, eps=max(eps, 1e-12))
        return LogMag.from_log(value)

    if mode == "axis":
        raise EvaluationRange("axis mode requires all zeros positive real")
    if not (math.isfinite(ell_f) and ell_f <= 690.0):
        raise EvaluationRange("circle scan limited to radii within double range")
    return max_modulus_scan(
        fn, math.exp(ell_f), coarse=coarse, angular_tol=angular_tol, eps=eps
    ).value


def mu_log(fn: GenusZeroFunction, frame, r, **kw) -> LogMag:
    """log mu(r) = log M(sigma r, f)."""
    ell = _as_wide_log(r)
    return max_modulus_log(fn, LogMag.from_log(ell + math.log(frame.sigma)), **kw)


@dataclass
class IterateRecord:
    """Iterates of an expanding radius map, with a certification horizon.

    values[k] is the k-th iterate (values[0] is the seed); entries with
    certified[k] False are extrapolated for reporting only.
    """

    values: list[LogMag]
    certified: list[bool]
    horizon: int | None

    def certified_depth(self) -> int:
        return sum(self.certified) - 1


def _iterate(step, seed, n_max: int) -> IterateRecord:
    values = [LogMag.of(seed) if not isinstance(seed, LogMag) else seed]
    certified = [True]
    horizon = None
    for k in range(1, n_max + 1):
        try:
            values.append(step(values[-1]))
            certified.append(True)
        except EvaluationRange:
            horizon = k
            break
    if horizon is not None:
        # log-log linear extrapolation for reporting
        xs = [v.log.ln() for v in values if v.log.sign > 0]
        if len(xs) >= 3:
            slope = xs[-1] - xs[-2]
            cur = xs[-1]
            for _ in range(horizon, n_max + 1):
                cur = cur + slope
                values.append(LogMag.from_log(bigeval.exp_wide(WideFloat(cur))))
                certified.append(False)
    return IterateRecord(values, certified, horizon)


def iterate_mu(fn: GenusZeroFunction, frame, r0, n_max: int, **kw) -> IterateRecord:
    """mu^k(r0) for k <= n_max, flagged past the certification horizon."""
    return _iterate(lambda v: mu_log(fn, frame, v, **kw), r0, n_max)


def iterate_max_modulus(fn: GenusZeroFunction, r0, n_max: int, **kw) -> IterateRecord:
    """M^k(r0, f) for k <= n_max."""
    return _iterate(lambda v: max_modulus_log(fn, v, **kw), r0, n_max)


def growth_diagnostic(fn: GenusZeroFunction, R0, n_max: int) -> list[float]:
    """(log log M^n(R0, f)) / n for n = 1..n_max, in overflow-safe arithmetic."""
    rec = iterate_max_modulus(fn, R0, n_max)
    out = []
    for n in range(1, n_max + 1):
        if n >= len(rec.values) or not rec.certified[n]:
            raise EvaluationRange(f"M^{n}(R0) beyond certified horizon")
        ell = rec.values[n].log
        if ell.sign <= 0:
            raise ValueError(f"M^{n}(R0) <= 1; growth diagnostic undefined (R0 too small)")
        out.append(ell.ln() / n)
    return out


# ---------------------------------------------------------------------------
# thresholds


@dataclass
class Thresholds:
    """Radii from which the verified statements hold on the scanned grid.

    r2 is None when the packing predicate never stabilised in range (for
    instance at very large nu); the chain base rho0 then falls back to R1.
    """

    r0: LogMag
    r1: LogMag
    r2: LogMag | None
    R0: LogMag
    R1: LogMag
    R_prime: LogMag
    rho0: LogMag
    meta: dict = field(default_factory=dict)

    def as_floats(self) -> dict:
        return {
            "r0": self.r0.value(),
            "r1": self.r1.value(),
            "r2": self.r2.value() if self.r2 is not None else math.nan,
            "R0": self.R0.value(),
            "R1": self.R1.value(),
            "R_prime": self.R_prime.value(),
            "rho0": self.rho0.value(),
        }


@dataclass
class ScanConfig:
    r_min: float = 1.0
    r_max: float = 1e10
    ratio: float = 1.25
    probe_samples: int = 64
    growth_depth: int = 4
    nu: float = 1.0
    c1: float = 1e-3
    # sampled probes for r1 stop here; the full verifier re-sweeps from r1
    r1_search_cap: float = 1e6
    # depth-growth_depth modulus towers stay representable only below this
    growth_search_cap: float = 256.0

    def grid(self) -> np.ndarray:
        if not (self.r_min > 0 and self.r_max > self.r_min and self.ratio > 1.0):
            raise ValueError("need 0 < r_min < r_max and ratio > 1")
        n = int(math.floor(math.log(self.r_max / self.r_min) / math.log(self.ratio))) + 1
        return self.r_min * self.ratio ** np.arange(n)


def _stable_from(flags: np.ndarray, grid: np.ndarray, name: str) -> int:
    """Index of the first grid point from which the predicate holds onward."""
    if not flags[-1]:
        raise NotFoundInScanRange(name, f"fails at the top of the grid r={grid[-1]:g}")
    idx = np.nonzero(~flags)[0]
    first = int(idx[-1]) + 1 if idx.size else 0
    return first


def find_thresholds(
    fn: GenusZeroFunction, frame, scan: ScanConfig | None = None, require_r2: bool = True
) -> Thresholds:
    """Scan a geometric radius grid for the defining predicate of each
    threshold and return the smallest grid radii that stay valid onward."""
    from . import inequalities as ineq
    from . import islands

    scan = scan or ScanConfig()
    grid = scan.grid()
    sigma = frame.sigma
    c_sigma = max(2.0, 1.0 / sigma**2)

    log_M = np.array([max_modulus_log(fn, r).log_float() for r in grid])
    log_M_sig = np.array([max_modulus_log(fn, sigma * r).log_float() for r in grid])

    mu_gt = log_M_sig > np.log(grid)
    i_r0 = _stable_from(mu_gt, grid, "r0")
    r0 = float(grid[i_r0])

    # growth diagnostic stabilisation for R0
    def _growth_ok(r: float) -> bool:
        try:
            seq = growth_diagnostic(fn, r, scan.growth_depth)
        except (ValueError, EvaluationRange):
            return False
        return all(b > a for a, b in zip(seq, seq[1:]))

    g_sub = np.nonzero(grid <= scan.growth_search_cap)[0]
    if g_sub.size == 0:
        raise NotFoundInScanRange("R0", "growth_search_cap below the grid")
    growth = np.array([_growth_ok(float(grid[i])) for i in g_sub])
    i_R0 = int(g_sub[_stable_from(growth, grid[g_sub], "R0")])
    R0 = float(grid[i_R0])

    doubling = log_M >= np.log(c_sigma) + log_M_sig
    i_R1 = max(_stable_from(doubling, grid, "R1"), i_R0)
    R1 = float(grid[i_R1])

    with np.errstate(divide="ignore", invalid="ignore"):
        zeq = (grid > 1.0) & ((sigma**6 / 64.0) * log_M / np.log(grid) >= 2.0)
    i_Rp = _stable_from(zeq, grid, "R_prime")
    R_prime = float(grid[i_Rp])

    # r1: the base constraints plus light probes of the four T(r) inequalities
    n0 = fn.zeros.sector_from
    base = max(r0, 3.0**1.5)
    if n0 > 1:
        a_last = float(np.abs(fn.zeros.values(np.array([n0 - 1])))[0])
        base = max(base, 2.0 * a_last / (1.0 - sigma))

    def _r1_ok(i: int) -> bool:
        r = float(grid[i])
        if r < base or log_M[i] <= 0.0:
            return False
        return ineq.probe_size_inequalities(fn, frame, r, samples=scan.probe_samples)

    probe_idx = grid <= max(scan.r1_search_cap, grid[min(i_r0 + 1, grid.size - 1)])
    sub = np.nonzero(probe_idx)[0]
    r1_flags = np.array([_r1_ok(int(i)) for i in sub])
    i_r1 = max(int(sub[_stable_from(r1_flags, grid[sub], "r1")]), i_r0)
    r1 = float(grid[i_r1])

    # r2: packing becomes feasible and m(r) >= 1
    def _r2_ok(i: int) -> bool:
        r = float(grid[i])
        if r < r1:
            return False
        try:
            t = islands.t_of_r(fn, frame, r, scan.nu)
            m = islands.m_of_r(fn, frame, r, scan.c1, scan.nu)
            islands.pack_discs(frame, r, t, want=m, cap=m)
            return True
        except Exception:
            return False

    r2_flags = np.array([_r2_ok(i) for i in range(grid.size)])
    try:
        i_r2 = max(_stable_from(r2_flags, grid, "r2"), i_r1)
        r2 = float(grid[i_r2])
    except NotFoundInScanRange:
        if require_r2:
            raise
        r2 = None

    rho0 = max(r2 if r2 is not None else R1, R1) / sigma**2
    return Thresholds(
        r0=LogMag.from_value(r0),
        r1=LogMag.from_value(r1),
        r2=LogMag.from_value(r2) if r2 is not None else None,
        R0=LogMag.from_value(R0),
        R1=LogMag.from_value(R1),
        R_prime=LogMag.from_value(R_prime),
        rho0=LogMag.from_value(rho0),
        meta={
            "grid_min": float(grid[0]),
            "grid_max": float(grid[-1]),
            "grid_ratio": scan.ratio,
            "grid_points": int(grid.size),
            "nu": scan.nu,
            "c1": scan.c1,
        },
    )


def check_rhobig(fn: GenusZeroFunction, frame, thresholds: Thresholds, k_max: int = 3):
    """Margins (in log scale) of the iterated-growth chain

        mu^k(rho0) >= max(2, 1/sigma^2) M^k(sigma^2 rho0) >= 2 M^k(R1)

    for k = 1..k_max, restricted to the certified horizon."""
    sigma = frame.sigma
    c_sigma = max(2.0, 1.0 / sigma**2)
    rho0 = thresholds.rho0
    seed_mid = LogMag.from_log(rho0.log + 2.0 * math.log(sigma))
    mu_it = iterate_mu(fn, frame, rho0, k_max)
    M_mid = _iterate(lambda v: max_modulus_log(fn, v), seed_mid, k_max)
    M_R1 = iterate_max_modulus(fn, thresholds.R1, k_max)

    out = []
    for k in range(1, k_max + 1):
        if not (
            k < len(mu_it.values)
            and mu_it.certified[k]
            and k < len(M_mid.values)
            and M_mid.certified[k]
            and k < len(M_R1.values)
            and M_R1.certified[k]
        ):
            out.append({"k": k, "certified": False})
            continue
        left = (mu_it.values[k].log - (M_mid.values[k].log + math.log(c_sigma))).to_float()
        right = (
            M_mid.values[k].log + math.log(c_sigma) - (M_R1.values[k].log + math.log(2.0))
        ).to_float()
        out.append(
            {
                "k": k,
                "certified": True,
                "left_margin_log": left,
                "right_margin_log": right,
                "ok": left >= 0.0 and right >= 0.0,
            }
        )
    return out
