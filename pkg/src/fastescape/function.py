"""Genus-zero entire functions f(z) = c z^q prod(1 + z/a_n) and their
certified evaluation.

log_f sums principal logs of factors directly up to a cut N with
|a_{N+1}| >= 4|z| and evaluates the remaining tail through the sequence's
scaled power sums, so the certified truncation error stays below the
caller's budget without ever summing O(|z|) terms.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EvaluationRange, TailBoundUnavailable, UnknownFamily, ZeroOfF
from .zeros import (
    MAX_HEAD_TERMS,
    GeneratorZeros,
    ListWithTail,
    PowerZeros,
    ZeroSequence,
    tail_log_sum,
    tail_recip_sum,
)

# Factor proximity |1 + z/a_n| below this counts as sitting on a zero.
ZERO_TOL = 1e-12

_HEAD_BLOCK = 1 << 14


@dataclass(frozen=True)
class GenusZeroFunction:
    """f(z) = c z^q prod_{n>=1} (1 + z/a_n)."""

    c: complex
    q: int
    zeros: ZeroSequence
    label: str = "custom"

    def __post_init__(self):
        if complex(self.c) == 0:
            raise ValueError("c must be nonzero")
        if not (isinstance(self.q, int) and self.q >= 0):
            raise ValueError("q must be a nonnegative integer")
        # leading-prefix monotonicity spot check for non-model sequences
        probe = self.zeros.moduli(np.arange(1, 65))
        if probe[0] <= 0.0 or np.any(np.diff(probe) < 0.0):
            raise ValueError("zero moduli must be positive and nondecreasing")

    @property
    def axis_max(self) -> bool:
        """True when M(r, f) is attained on the positive axis for every r
        (all zeros positive real: each factor modulus peaks at arg z = 0)."""
        return self.zeros.all_real_positive

    @property
    def axis_positive(self) -> bool:
        """True when f maps the positive reals to positive reals."""
        c = complex(self.c)
        return self.zeros.all_real_positive and c.imag == 0.0 and c.real > 0.0


def _as_array(z):
    arr = np.asarray(z, dtype=complex)
    return arr.reshape(-1), arr.shape, np.isscalar(z) or arr.ndim == 0


def log_f(fn: GenusZeroFunction, z, eps: float = 1e-12, on_zero: str = "raise"):
    """Branch-summed log f(z), certified so |result - log f(z)| <= eps.

    The imaginary part is the sum of principal logs of the factors (plus
    the principal log of c z^q).  ``on_zero="mask"`` replaces evaluations
    that hit a zero with real part -inf instead of raising.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    zs, shape, scalar = _as_array(z)
    out = np.zeros(zs.size, dtype=complex)
    dead = np.zeros(zs.size, dtype=bool)

    at_origin = zs == 0.0
    if fn.q > 0 and np.any(at_origin):
        if on_zero == "raise":
            raise ZeroOfF(0.0)
        dead |= at_origin

    zmax = float(np.max(np.abs(zs))) if zs.size else 0.0
    N1 = fn.zeros.head_cut(zmax) if zmax > 0.0 else 0
    frame = fn.zeros.tail_frame(N1)
    if frame is None and zmax > 0.0:
        # no power-sum tail: widen the cut until the crude bound certifies eps
        while True:
            if 2.0 * fn.zeros.tail_bound(N1, zmax) <= eps:
                break
            if N1 >= MAX_HEAD_TERMS:
                raise EvaluationRange(
                    f"cannot certify eps={eps:g} within {MAX_HEAD_TERMS} head terms"
                )
            N1 = min(max(2 * N1, 64), MAX_HEAD_TERMS)
    if N1 > MAX_HEAD_TERMS:
        raise EvaluationRange(f"head needs {N1} terms (cap {MAX_HEAD_TERMS})")

    for lo in range(1, N1 + 1, _HEAD_BLOCK):
        idx = np.arange(lo, min(lo + _HEAD_BLOCK, N1 + 1))
        a = fn.zeros.values(idx)
        w = zs[:, None] / a[None, :]
        bad = np.abs(1.0 + w) < ZERO_TOL
        if np.any(bad):
            if on_zero == "raise":
                i, j = np.argwhere(bad)[0]
                raise ZeroOfF(complex(zs[i]), index=int(idx[j]))
            dead |= bad.any(axis=1)
            w[bad] = 0.0
        out += np.log1p(w).sum(axis=1)

    if frame is not None and zmax > 0.0:
        tail, terr = tail_log_sum(frame, zs, eps)
        if terr > eps:
            raise TailBoundUnavailable(f"tail error {terr:g} exceeds eps={eps:g}")
        out += tail

    out += cmath.log(complex(fn.c))
    if fn.q:
        safe = ~at_origin
        out[safe] += fn.q * np.log(zs[safe])

    if np.any(dead):
        out[dead] = complex(-math.inf, 0.0)
    out = out.reshape(shape)
    return complex(out) if scalar else out


def log_derivative(fn: GenusZeroFunction, z, eps: float = 1e-9, on_zero: str = "raise",
                   on_fail: str = "raise"):
    """f'(z)/f(z) = q/z + sum_n 1/(z + a_n), certified to relative error eps.

    Entries that cannot meet the relative target (heavy cancellation away
    from the sector) raise TailBoundUnavailable, or become NaN with
    ``on_fail="nan"``.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    zs, shape, scalar = _as_array(z)
    out = np.zeros(zs.size, dtype=complex)
    dead = np.zeros(zs.size, dtype=bool)

    at_origin = zs == 0.0
    if fn.q > 0 and np.any(at_origin):
        if on_zero == "raise":
            raise ZeroOfF(0.0)
        dead |= at_origin

    zmax = float(np.max(np.abs(zs))) if zs.size else 0.0
    N1 = fn.zeros.head_cut(zmax) if zmax > 0.0 else 0
    frame = fn.zeros.tail_frame(N1)
    err_abs = 0.0
    if frame is None and zmax > 0.0:
        while True:
            bound = 2.0 * fn.zeros.tail_bound(N1, 1.0)
            if N1 >= MAX_HEAD_TERMS or bound <= eps * 1e-6:
                err_abs = bound
                break
            N1 = min(max(2 * N1, 64), MAX_HEAD_TERMS)
    if N1 > MAX_HEAD_TERMS:
        raise EvaluationRange(f"head needs {N1} terms (cap {MAX_HEAD_TERMS})")

    for lo in range(1, N1 + 1, _HEAD_BLOCK):
        idx = np.arange(lo, min(lo + _HEAD_BLOCK, N1 + 1))
        a = fn.zeros.values(idx)
        s = zs[:, None] + a[None, :]
        bad = np.abs(s) < ZERO_TOL * np.abs(a)[None, :]
        if np.any(bad):
            if on_zero == "raise":
                i, j = np.argwhere(bad)[0]
                raise ZeroOfF(complex(zs[i]), index=int(idx[j]))
            dead |= bad.any(axis=1)
            s[bad] = 1.0
        out += (1.0 / s).sum(axis=1)

    if frame is not None and zmax > 0.0:
        rough = np.abs(out)
        target = eps * max(float(np.min(rough[~dead])) if np.any(~dead) else 1.0, 1e-300)
        tail, err_abs = tail_recip_sum(frame, zs, target)
        out += tail

    if fn.q:
        safe = ~at_origin
        out[safe] += fn.q / zs[safe]

    mags = np.abs(out)
    bad_rel = ~dead & (err_abs > eps * mags)
    if np.any(bad_rel):
        if on_fail == "raise":
            worst = float(np.min(mags[bad_rel]))
            raise TailBoundUnavailable(
                f"relative error {err_abs / max(worst, 1e-300):g} exceeds eps={eps:g}"
            )
        out[bad_rel] = np.nan
    if np.any(dead):
        out[dead] = np.nan
    out = out.reshape(shape)
    return complex(out) if scalar else out


def f_value(fn: GenusZeroFunction, z, eps: float = 1e-12):
    """f(z) itself, for |log f| within double range."""
    L = log_f(fn, z, eps=eps)
    return np.exp(L) if isinstance(L, np.ndarray) else cmath.exp(L)


# ---------------------------------------------------------------------------
# canonical families


def canonical(name: str, **params) -> GenusZeroFunction:
    """Build one of the canonical function families.

    cosh-sqrt            a_n = pi^2 (n - 1/2)^2, c = 1, q = 0; equals cosh(sqrt z).
    positive-real-zeros  a_n = coeff * (n + offset)^exponent (defaults n^2).
    custom               explicit zeros: a ZeroSequence, or head list + tail model.
    """
    if name == "cosh-sqrt":
        seq = PowerZeros(math.pi**2, 2.0, -0.5)
        return GenusZeroFunction(c=1.0 + 0.0j, q=0, zeros=seq, label="cosh-sqrt")
    if name == "positive-real-zeros":
        seq = PowerZeros(
            params.get("coeff", 1.0),
            params.get("exponent", 2.0),
            params.get("offset", 0.0),
        )
        return GenusZeroFunction(
            c=complex(params.get("c", 1.0)),
            q=int(params.get("q", 0)),
            zeros=seq,
            label="positive-real-zeros",
        )
    if name == "custom":
        zeros = params.get("zeros")
        if isinstance(zeros, ZeroSequence):
            seq = zeros
        elif zeros is not None and "tail_coeff" in params:
            seq = ListWithTail(
                zeros,
                tail_coeff=params["tail_coeff"],
                tail_exponent=params.get("tail_exponent", 2.0),
                tail_offset=params.get("tail_offset", 0.0),
                sector_from=params.get("sector_from", 1),
            )
        elif callable(zeros):
            seq = GeneratorZeros(zeros, params.get("tail_bound"))
        else:
            raise UnknownFamily("custom requires zeros= (sequence, list+tail, or callable)")
        return GenusZeroFunction(
            c=complex(params.get("c", 1.0)),
            q=int(params.get("q", 0)),
            zeros=seq,
            label="custom",
        )
    raise UnknownFamily(f"unknown family {name!r}")


# ---------------------------------------------------------------------------
# sector validation


@dataclass
class SectorReport:
    n0: int
    horizon: int
    declared_n0: int
    violations_before_n0: tuple = field(default_factory=tuple)


def validate_sector(fn: GenusZeroFunction, frame, horizon: int = 4096) -> SectorReport:
    """Smallest N0 (within the horizon) with |arg a_n| <= theta2 for n >= N0.

    Raises SectorViolation when violations persist into the last quarter of
    the horizon, since no N0 can then be certified from the scan.
    """
    from .errors import SectorViolation

    theta2 = frame.theta2
    last_bad = 0
    bad_list = []
    for lo in range(1, horizon + 1, _HEAD_BLOCK):
        idx = np.arange(lo, min(lo + _HEAD_BLOCK, horizon + 1))
        vals = fn.zeros.values(idx)
        bad = np.abs(np.angle(vals)) > theta2
        if np.any(bad):
            where = idx[bad]
            bad_list.extend(int(k) for k in where[:16])
            last_bad = int(where[-1])
    if last_bad > horizon - max(horizon // 4, 1):
        witness = complex(fn.zeros.values(np.array([last_bad]))[0])
        raise SectorViolation(last_bad, witness)
    return SectorReport(
        n0=last_bad + 1,
        horizon=horizon,
        declared_n0=fn.zeros.sector_from,
        violations_before_n0=tuple(bad_list),
    )
