"""Island construction inside T(r): disc packings, points with f(b) > 0,
and Newton-continuation traces of the compact sets V mapped bijectively by
log f onto the target rectangles Q_kappa(b).

The existence step behind these islands is non-constructive (its constant
nu is a free parameter here, default 1).  The trace replaces it with an
explicit boundary continuation plus a-posteriori checks: closure, winding
number one, f' nonzero along the trace, containment in B(b, t), and the
area bound area(V) >= c2(nu) t^2.

For functions whose zeros are positive reals the factor logs are smooth on
the whole right half-plane, so the local branch of log f needs no cut
bookkeeping anywhere a trace can go.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ContinuationBroke,
    LeftDisc,
    NewtonDiverged,
    NotClosed,
    PackingImpossible,
    ThresholdViolation,
    TooFewIslands,
)
from .function import GenusZeroFunction, log_derivative, log_f

TWO_PI = 2.0 * math.pi


def c2_constant(frame, nu: float) -> float:
    """Area constant: area(V) >= c2 t^2 with c2 = (psi-theta2) sigma^16 log2 / (512 nu^2)."""
    return frame.half_opening * frame.sigma**16 * math.log(2.0) / (512.0 * nu**2)


def c3_constant(frame, c1: float, c2: float, C: float) -> float:
    """Density constant c3 = c1 c2 / (8 C^2 (psi-theta2) log 2)."""
    return c1 * c2 / (8.0 * C * C * frame.half_opening * math.log(2.0))


def t_of_r(fn: GenusZeroFunction, frame, r: float, nu: float, r1: float | None = None) -> float:
    """t(r) = (8 nu / sigma^4) |f(r) / f'(r)|."""
    if r1 is not None and r < r1:
        raise ThresholdViolation(f"t(r) needs r >= r1 = {r1:g}, got r = {r:g}")
    ld = log_derivative(fn, complex(r), eps=1e-10)
    return 8.0 * nu / frame.sigma**4 / abs(ld)


def m_of_r(
    fn: GenusZeroFunction, frame, r: float, c1: float, nu: float, r2: float | None = None
) -> int:
    """m(r) = floor(c1 r^2 / t(r)^2); must be >= 1."""
    if r2 is not None and r < r2:
        raise ThresholdViolation(f"m(r) needs r >= r2 = {r2:g}, got r = {r:g}")
    t = t_of_r(fn, frame, r, nu)
    m = int(math.floor(c1 * (r / t) ** 2))
    if m < 1:
        raise TooFewIslands(f"m(r) = {m} at r = {r:g} (t = {t:g}, c1 = {c1:g})")
    return m


@dataclass
class PackResult:
    centers: np.ndarray          # complex centers beta
    t: float
    r: float
    achieved_c1: float           # count * t^2 / r^2 (lower bound when capped)
    capped: bool = False

    def __len__(self):
        return int(self.centers.size)


def pack_discs(frame, r: float, t: float, want: int = 1, cap: int | None = None) -> PackResult:
    """Deterministic packing of discs B(beta, 3t) inside T(r).

    Rows sit on circles |z| = rho_i spaced just over 6t apart, so any two
    centers in different rows are separated radially; within a row the
    angular pitch keeps chords above 6t.  ``cap`` stops enumeration early
    (threshold probes only need feasibility); the reported packing constant
    is then a lower bound.
    """
    if want < 1:
        raise ValueError("want must be >= 1")
    if not (t > 0.0) or 6.0 * t >= r:
        raise PackingImpossible(f"disc diameter 6t = {6 * t:g} does not fit radially in T({r:g})")
    alpha = frame.half_opening
    slack = 1.02
    rho_lo, rho_hi = r + 3.0 * t * slack, 2.0 * r - 3.0 * t * slack
    if rho_hi < rho_lo:
        raise PackingImpossible("annulus too thin for one disc row")
    pitch_r = 6.0 * t * slack
    n_rows = int(math.floor((rho_hi - rho_lo) / pitch_r)) + 1

    rows = []
    count = 0
    capped = False
    for i in range(n_rows):
        rho = rho_lo + i * pitch_r
        sin_arg = min(3.0 * t * slack / rho, 1.0)
        usable = alpha - math.asin(sin_arg)
        if usable <= 0.0:
            continue
        dphi = 2.0 * math.asin(sin_arg)
        k = int(math.floor(2.0 * usable / dphi)) + 1
        phis = -usable + dphi * np.arange(k)
        rows.append(rho * np.exp(1j * phis))
        count += k
        if cap is not None and count >= cap:
            capped = True
            break
    if not rows:
        raise PackingImpossible(f"no disc of radius 3t = {3 * t:g} fits in T({r:g})")

    # postcondition recheck: same row neighbours and adjacent rows
    for i, row in enumerate(rows):
        if row.size > 1 and np.min(np.abs(np.diff(row))) <= 6.0 * t:
            raise PackingImpossible("internal: same-row separation violated")
        if i + 1 < len(rows):
            gap = abs(abs(rows[i + 1][0]) - abs(row[0]))
            if gap <= 6.0 * t:
                raise PackingImpossible("internal: row separation violated")
    centers = np.concatenate(rows)
    if cap is not None:
        centers = centers[:cap]
    if centers.size < want:
        raise PackingImpossible(
            f"packed {centers.size} discs of radius 3t = {3 * t:g} in T({r:g}), wanted {want}"
        )
    return PackResult(
        centers=centers, t=t, r=r,
        achieved_c1=count * t * t / (r * r),
        capped=capped,
    )


# ---------------------------------------------------------------------------
# Newton machinery


def _branch_log(fn, z, shift: float):
    return log_f(fn, z, eps=1e-12) - 1j * shift


def _solve_target(
    fn: GenusZeroFunction,
    z0: complex,
    w_target: complex,
    shift: float,
    tol: float,
    max_iter: int = 40,
    max_halvings: int = 50,
):
    """Damped Newton solve of log_f(z) - i*shift = w_target from z0."""
    z = complex(z0)
    L = _branch_log(fn, z, shift)
    resid = abs(L - w_target)
    for _ in range(max_iter):
        if resid <= tol:
            return z, resid
        ld = log_derivative(fn, z, eps=1e-10)
        if abs(ld) < 1e-280:
            raise ContinuationBroke(f"f'/f vanished near z = {z!r}")
        step = -(L - w_target) / ld
        halved = 0
        while True:
            trial = z + step
            L_trial = _branch_log(fn, trial, shift)
            r_trial = abs(L_trial - w_target)
            if r_trial < resid or halved >= max_halvings:
                break
            step *= 0.5
            halved += 1
        if halved >= max_halvings and r_trial >= resid:
            raise ContinuationBroke(f"Newton stalled at residual {resid:g} near z = {z!r}")
        z, L, resid = trial, L_trial, r_trial
    raise ContinuationBroke(f"no convergence to {w_target!r} (residual {resid:g})")


def find_positive_point(
    fn: GenusZeroFunction,
    beta: complex,
    t: float,
    max_iter: int = 60,
    residual_tol: float = 1e-12,
) -> complex:
    """A point b in B(beta, t) with f(b) > 0, by Newton on Im log f.

    The iteration z <- z - i g(z) f(z)/f'(z) drives g = Im log f to the
    branch multiple of 2 pi nearest the starting point.
    """
    z = complex(beta)
    g = log_f(fn, z, eps=1e-12).imag
    target = TWO_PI * round(g / TWO_PI)
    resid = g - target
    for _ in range(max_iter):
        if abs(resid) <= residual_tol:
            if abs(z - beta) >= t:
                raise LeftDisc(f"b = {z!r} left B(beta, t)")
            return z
        ld = log_derivative(fn, z, eps=1e-10)
        step = -1j * resid / ld
        halved = 0
        while True:
            trial = z + step
            g_trial = log_f(fn, trial, eps=1e-12).imag - target
            if abs(g_trial) < abs(resid) or halved >= 50:
                break
            step *= 0.5
            halved += 1
        z, resid = trial, g_trial
        if abs(z - beta) >= t:
            raise LeftDisc(f"iterate {z!r} left B(beta, t)")
    raise NewtonDiverged(f"Im log f residual {resid:g} after {max_iter} iterations")


# ---------------------------------------------------------------------------
# target boxes and traced islands


@dataclass(frozen=True)
class TargetBox:
    """Log-plane rectangles around height 8 pi kappa.

    P: |Re w| < 1, |Im w - 8 pi kappa| < 3 pi           (absolute frame)
    Omega(a): |Re w - log f(a)| < 1, same height band
    Q(a): 0 <= Re w - log f(a) <= log 2, |Im w - 8 pi kappa| <= psi - theta2
    exp maps Q(a) onto T(f(a)).
    """

    kappa: int
    log_fb: float
    im_half: float               # psi - theta2

    @property
    def im_center(self) -> float:
        return 8.0 * math.pi * self.kappa

    @property
    def re_span(self) -> float:
        return math.log(2.0)

    def corners(self) -> list[complex]:
        lf, ic, ih = self.log_fb, self.im_center, self.im_half
        return [
            complex(lf, ic - ih),
            complex(lf + self.re_span, ic - ih),
            complex(lf + self.re_span, ic + ih),
            complex(lf, ic + ih),
        ]

    def center(self) -> complex:
        return complex(self.log_fb + 0.5 * self.re_span, self.im_center)

    def in_P(self, w) -> bool:
        return abs(w.real) < 1.0 and abs(w.imag - self.im_center) < 3.0 * math.pi

    def in_omega(self, w) -> bool:
        return abs(w.real - self.log_fb) < 1.0 and abs(w.imag - self.im_center) < 3.0 * math.pi

    def in_Q(self, w, tol: float = 0.0) -> bool:
        return (
            -tol <= w.real - self.log_fb <= self.re_span + tol
            and abs(w.imag - self.im_center) <= self.im_half + tol
        )

    def boundary_targets(self, step: float) -> np.ndarray:
        """Closed counterclockwise polyline along the rectangle boundary."""
        cs = self.corners()
        pts = []
        for a, b in zip(cs, cs[1:] + cs[:1]):
            n = max(1, int(math.ceil(abs(b - a) / step)))
            seg = a + (b - a) * np.arange(n) / n
            pts.append(seg)
        pts.append(np.array([cs[0]]))
        return np.concatenate(pts)


@dataclass
class IslandRecord:
    """One traced island V with its certification evidence."""

    beta: complex
    b: complex
    kappa: int
    t: float
    r: float
    nu: float
    log_fb: float                # Re log f(b) (f(b) = exp of this)
    branch_shift: float          # Im log_f(b), a multiple of 2 pi
    vertices: np.ndarray         # closed z-polyline (last != first)
    targets: np.ndarray          # matching log-plane boundary targets
    area: float
    center_z: complex            # preimage of the box center
    winding: int
    forward_residual: float      # max |branch log f(vertex) - target|, relative
    max_dist_from_b: float
    min_abs_logderiv: float
    meta: dict = field(default_factory=dict)

    @property
    def c2_ratio(self) -> float:
        return self.area / (self.t * self.t)

    def diameter(self) -> float:
        return _diameter(self.vertices)

    def box(self) -> TargetBox:
        return TargetBox(kappa=self.kappa, log_fb=self.log_fb, im_half=self.meta["im_half"])


def _shoelace(v: np.ndarray) -> float:
    x, y = v.real, v.imag
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _hull(points: np.ndarray) -> np.ndarray:
    """Andrew monotone chain on complex points."""
    pts = np.unique(points)
    order = np.lexsort((pts.imag, pts.real))
    pts = pts[order]
    if pts.size <= 2:
        return pts

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and ((out[-1] - out[-2]).conjugate() * (p - out[-2])).imag <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def _diameter(points: np.ndarray) -> float:
    h = _hull(points)
    if h.size < 2:
        return 0.0
    d = np.abs(h[:, None] - h[None, :])
    return float(np.max(d))


def _winding(poly: np.ndarray, z0: complex) -> int:
    ang = np.angle(np.roll(poly, -1) - z0) - np.angle(poly - z0)
    ang = (ang + math.pi) % TWO_PI - math.pi
    return int(round(float(np.sum(ang)) / TWO_PI))


def _boundary_param(pts: np.ndarray) -> np.ndarray:
    """Cumulative arclength along an ordered boundary polyline."""
    return np.concatenate([[0.0], np.cumsum(np.abs(np.diff(pts)))])


def _vector_refine(fn, warm: np.ndarray, targets: np.ndarray, shift: float, tol: float,
                   max_iter: int = 14) -> np.ndarray:
    """Vectorised undamped Newton from good warm starts; stragglers fall
    back to the damped scalar solver."""
    z = warm.astype(complex).copy()
    L = log_f(fn, z, eps=1e-12) - 1j * shift
    resid = np.abs(L - targets)
    for _ in range(max_iter):
        active = resid > tol
        if not np.any(active):
            break
        za = z[active]
        ld = log_derivative(fn, za, eps=1e-10)
        z_new = za - (L[active] - targets[active]) / ld
        L_new = log_f(fn, z_new, eps=1e-12) - 1j * shift
        r_new = np.abs(L_new - targets[active])
        better = r_new < resid[active]
        idx = np.nonzero(active)[0][better]
        z[idx] = z_new[better]
        L[idx] = L_new[better]
        resid[idx] = r_new[better]
        if not np.any(better):
            break
    for i in np.nonzero(resid > tol)[0]:
        z[i], _ = _solve_target(fn, complex(warm[i]), complex(targets[i]), shift, tol)
    return z


def trace_island(
    fn: GenusZeroFunction,
    b: complex,
    kappa: int,
    frame,
    mesh: int = 512,
    t: float | None = None,
    r: float | None = None,
    nu: float = 1.0,
    beta: complex | None = None,
    coarse_step: float = 0.1,
    newton_tol_rel: float = 1e-11,
) -> IslandRecord:
    """Trace the preimage under log f of the boundary of Q_kappa(b).

    A sequential damped march runs from b's branch point up to the
    rectangle and coarsely around it; the fine boundary (steps <=
    log(2)/mesh) is then refined by vectorised Newton, each target
    warm-started from the coarse polyline.  Raises ContinuationBroke when
    a step fails (the island does not exist for this kappa at this b) and
    NotClosed when the final vertex misses the first.
    """
    if mesh < 16:
        raise ValueError("mesh must be >= 16")
    L0 = log_f(fn, b, eps=1e-12)
    shift = TWO_PI * round(L0.imag / TWO_PI)
    if abs(L0.imag - shift) > 1e-8:
        raise ContinuationBroke(f"f(b) is not positive at b = {b!r} (Im log f = {L0.imag:g})")
    log_fb = L0.real
    box = TargetBox(kappa=kappa, log_fb=log_fb, im_half=frame.half_opening)
    tol = newton_tol_rel * (1.0 + abs(box.center()))

    # approach march: straight path from the branch point to the first corner
    start = complex(log_fb, 0.0)
    corner = box.corners()[0]
    n_app = max(1, int(math.ceil(abs(corner - start) / coarse_step)))
    z = complex(b)
    for k in range(1, n_app + 1):
        w = start + (corner - start) * k / n_app
        z, _ = _solve_target(fn, z, w, shift, tol)

    # coarse boundary march, then vectorised fine refinement
    coarse_targets = box.boundary_targets(coarse_step)
    coarse_z = np.empty(coarse_targets.size, dtype=complex)
    for i, w in enumerate(coarse_targets):
        z, _ = _solve_target(fn, z, w, shift, tol)
        coarse_z[i] = z

    step = math.log(2.0) / mesh
    targets = box.boundary_targets(step)
    cum_c = _boundary_param(coarse_targets)
    cum_f = _boundary_param(targets)
    warm_re = np.interp(cum_f, cum_c, coarse_z.real)
    warm_im = np.interp(cum_f, cum_c, coarse_z.imag)
    fine_z = _vector_refine(fn, warm_re + 1j * warm_im, targets, shift, tol)

    vertices = fine_z[:-1]
    z_close = fine_z[-1]
    scale = max(abs(b), 1.0)
    if abs(z_close - vertices[0]) > 1e-7 * scale:
        raise NotClosed(
            f"trace end {z_close!r} misses start {vertices[0]!r} by {abs(z_close - vertices[0]):g}"
        )
    lds = np.abs(log_derivative(fn, vertices, eps=1e-10))
    min_ld = float(np.min(lds))
    if min_ld < 1e-280:
        raise ContinuationBroke("f'/f vanished on the traced boundary")

    # forward residual: fresh evaluation of the whole trace
    L = log_f(fn, vertices, eps=1e-12) - 1j * shift
    fwd = float(np.max(np.abs(L - targets[:-1]))) / (1.0 + abs(log_fb))

    center_z, _ = _solve_target(fn, vertices[0], box.center(), shift, tol)
    winding = _winding(vertices, center_z)
    area = abs(_shoelace(vertices))
    t_val = t if t is not None else float("nan")
    return IslandRecord(
        beta=beta if beta is not None else b,
        b=b,
        kappa=kappa,
        t=t_val,
        r=r if r is not None else abs(b),
        nu=nu,
        log_fb=log_fb,
        branch_shift=shift,
        vertices=vertices,
        targets=targets[:-1],
        area=area,
        center_z=center_z,
        winding=winding,
        forward_residual=fwd,
        max_dist_from_b=float(np.max(np.abs(vertices - b))),
        min_abs_logderiv=min_ld,
        meta={"im_half": frame.half_opening, "mesh": mesh},
    )


def construct_islands(
    fn: GenusZeroFunction,
    frame,
    r: float,
    nu: float = 1.0,
    c1: float = 1e-3,
    mesh: int = 512,
    max_islands: int | None = None,
    r1: float | None = None,
    r2: float | None = None,
    kappas=(1, 2, 3),
) -> tuple[list[IslandRecord], PackResult]:
    """Full workflow: t(r), m(r), packing, positive points, traces.

    Each island tries kappa = 1, 2, 3 in order and keeps the first trace
    that closes inside B(b, t) with winding one.
    """
    t = t_of_r(fn, frame, r, nu, r1=r1)
    m = m_of_r(fn, frame, r, c1, nu, r2=r2)
    pack = pack_discs(frame, r, t, want=m)
    n_trace = m if max_islands is None else min(m, max_islands)

    records: list[IslandRecord] = []
    failures: list[str] = []
    for beta in pack.centers[:n_trace]:
        b = find_positive_point(fn, complex(beta), t)
        rec = None
        for kappa in kappas:
            try:
                cand = trace_island(
                    fn, b, kappa, frame, mesh=mesh, t=t, r=r, nu=nu, beta=complex(beta)
                )
            except (ContinuationBroke, NotClosed) as exc:
                failures.append(f"beta={beta:.6g}, kappa={kappa}: {exc}")
                continue
            if cand.max_dist_from_b < t and cand.winding == 1:
                rec = cand
                break
            failures.append(
                f"beta={beta:.6g}, kappa={kappa}: trace left B(b, t) "
                f"(max dist {cand.max_dist_from_b:.3g} vs t {t:.3g}) or winding {cand.winding}"
            )
        if rec is not None:
            records.append(rec)
    if not records:
        raise ContinuationBroke("no island traced; attempts: " + "; ".join(failures[:4]))
    return records, pack


# ---------------------------------------------------------------------------
# distortion measurements


@dataclass
class DistortionReport:
    C: float                      # max/min inverse-branch derivative over Q samples
    koebe_max: float              # max |h'(z)| / |h'(b)| over B(b, t) samples
    per_island: list[dict]

    @property
    def koebe_passed(self) -> bool:
        return self.koebe_max <= 12.0


def distortion_constant(
    fn: GenusZeroFunction, islands: list[IslandRecord], samples: int = 25
) -> DistortionReport:
    """Empirical distortion constant of the inverse branch g = (log f)^{-1}
    on Q_kappa(b): C = max |g'| / min |g'| over a sample grid, together with
    the Koebe-type check |h'(z)| <= 12 |h'(b)| on B(b, t)."""
    if not islands:
        raise ValueError("need at least one traced island")
    n_side = max(2, int(round(math.sqrt(samples))))
    big_C = 1.0
    koebe_max = 0.0
    per = []
    for rec in islands:
        box = rec.box()
        tol = 1e-11 * (1.0 + abs(box.center()))
        us = np.linspace(0.0, 1.0, n_side)
        gprime = []
        z = rec.center_z
        for u in us:
            for v in us:
                w = complex(box.log_fb + u * box.re_span, box.im_center + (2 * v - 1) * box.im_half)
                z, _ = _solve_target(fn, z, w, rec.branch_shift, tol)
                gprime.append(1.0 / abs(log_derivative(fn, z, eps=1e-10)))
        gprime = np.asarray(gprime)
        C_here = float(np.max(gprime) / np.min(gprime))

        # Koebe samples: sunflower points in B(b, t)
        k = np.arange(1, samples + 1)
        rad = rec.t * 0.999 * np.sqrt(k / samples)
        ang = k * (math.pi * (3.0 - math.sqrt(5.0)))
        pts = rec.b + rad * np.exp(1j * ang)
        ld_b = abs(log_derivative(fn, rec.b, eps=1e-10))
        ld_pts = np.abs(log_derivative(fn, pts, eps=1e-10))
        koebe_here = float(np.max(ld_pts) / ld_b)

        per.append({"kappa": rec.kappa, "C": C_here, "koebe": koebe_here})
        big_C = max(big_C, C_here)
        koebe_max = max(koebe_max, koebe_here)
    return DistortionReport(C=big_C, koebe_max=koebe_max, per_island=per)


# ---------------------------------------------------------------------------
# nesting measurements


def forward_check(fn: GenusZeroFunction, rec: IslandRecord, frame, n_interior: int = 64,
                  rel_tol: float = 1e-6) -> float:
    """Fraction of interior sample points of V that f maps into T(f(b))."""
    box = rec.box()
    tol = 1e-11 * (1.0 + abs(box.center()))
    n_side = max(2, int(round(math.sqrt(n_interior))))
    us = np.linspace(0.05, 0.95, n_side)
    ok = 0
    total = 0
    fb_log = rec.log_fb
    z = rec.center_z
    for u in us:
        for v in us:
            w = complex(box.log_fb + u * box.re_span, box.im_center + (2 * v - 1) * box.im_half * 0.95)
            z, _ = _solve_target(fn, z, w, rec.branch_shift, tol)
            # forward: modulus and argument of f(z) against T(f(b))
            L = log_f(fn, z, eps=1e-12)
            mod_ok = (fb_log - rel_tol) <= L.real <= (fb_log + math.log(2.0) + rel_tol)
            arg = (L.imag - rec.branch_shift - box.im_center + math.pi) % TWO_PI - math.pi
            ang_ok = abs(arg) <= frame.half_opening + rel_tol
            ok += int(mod_ok and ang_ok)
            total += 1
    return ok / total


def pull_back_polyline(
    fn: GenusZeroFunction, parent: IslandRecord, points: np.ndarray
) -> np.ndarray:
    """Preimages in the parent island of points of T(f(b_parent)) under f.

    Points must lie in the closed sector band exp(Q_kappa(b_parent)).
    """
    box = parent.box()
    tol = 1e-11 * (1.0 + abs(box.center()))
    out = np.empty(points.size, dtype=complex)
    z = parent.center_z
    for i, v in enumerate(np.asarray(points, dtype=complex)):
        w = complex(math.log(abs(v)), box.im_center + math.atan2(v.imag, v.real))
        z, _ = _solve_target(fn, z, w, parent.branch_shift, tol)
        out[i] = z
    return out


def measure_level(
    fn: GenusZeroFunction,
    frame,
    parent,
    islands: list[IslandRecord],
    *,
    total_m: int | None = None,
    C: float | None = None,
    level: int = 0,
):
    """Density and diameter data for one nesting level.

    ``parent`` is either a radius rho (the level-0 parent T(rho)) or a
    parent IslandRecord, in which case the children are pulled back through
    the parent's inverse branch before measuring.  When only a subset of the
    level's ``total_m`` islands was traced, the density extrapolates by the
    mean traced area; the density constant comparison uses the matching
    packing constant total_m * t^2 / r^2 so both sides describe the same
    collection.
    """
    from .dimension import NestingLevel

    if not islands:
        raise ValueError("need at least one island")
    if isinstance(parent, IslandRecord):
        area_parent = parent.area
        child_polys = [pull_back_polyline(fn, parent, rec.vertices) for rec in islands]
    else:
        rho = float(parent)
        area_parent = frame.t_sector_area(rho)
        child_polys = [rec.vertices for rec in islands]

    m = total_m if total_m is not None else len(islands)
    areas = np.array([abs(_shoelace(p)) for p in child_polys])
    diams = np.array([_diameter(p) for p in child_polys])
    delta = float(m * np.mean(areas) / area_parent)
    d_max = float(np.max(diams))

    meta = {
        "level": level,
        "n_islands": len(islands),
        "total_m": m,
        "extrapolated": m > len(islands),
        "area_parent": area_parent,
        "min_c2_ratio": float(min(rec.c2_ratio for rec in islands)),
    }
    if C is not None:
        t, r = islands[0].t, islands[0].r
        c1_used = m * t * t / (r * r)
        meta["c1_used"] = c1_used
        meta["c3_measured"] = c3_constant(frame, c1_used, meta["min_c2_ratio"], C)
        meta["delta_vs_c3_margin"] = delta - meta["c3_measured"]
    if isinstance(parent, IslandRecord):
        # diameter-contraction echo: diam(pullback) <= 24 |h'(b_child)| t_child
        margins = []
        for rec, poly in zip(islands, child_polys):
            z_pre = pull_back_polyline(fn, parent, np.array([complex(rec.b)]))[0]
            log_fprime = log_f(fn, z_pre, eps=1e-10).real + math.log(
                abs(log_derivative(fn, z_pre, eps=1e-9))
            )
            bound_log = math.log(24.0) + math.log(rec.t) - log_fprime
            margins.append(bound_log - math.log(_diameter(poly)))
        meta["fdiam_margin_log_min"] = float(min(margins))
    return NestingLevel(n=level, delta=delta, d=d_max, provenance=tuple(meta.items()))
