"""Zero sequences for genus-zero products, with certified tail machinery.

A sequence must have nondecreasing moduli and a summable reciprocal tail.
Families whose tail follows an exact power law a_n = coeff * (n + offset)**p
additionally expose scaled power sums

    G_k(N) = sum_{n > N} (|a_{N+1}| / |a_n|)**k = Z(p*k, q0),
    Z(s, q) = sum_{m >= 0} (q / (q + m))**s,      q0 = N + 1 + offset,

which let log-product tails be evaluated (not merely bounded) through the
series  sum_{n>N} log(1 + z/a_n) = sum_k (-1)^(k+1) w0^k G_k / k  with
w0 = z / a_{N+1}, valid for |w0| < 1.  Z is computed by a direct head plus
an Euler-Maclaurin tail whose first omitted Bernoulli term bounds the error.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .errors import TailBoundUnavailable

# |z| / |a_{N+1}| is kept at or below this when a tail frame is used.
TAIL_RATIO = 0.25

# Hard cap on directly summed head factors per evaluation.
MAX_HEAD_TERMS = 2_000_000


def pochhammer(s, k: int):
    out = np.ones_like(np.asarray(s, dtype=float))
    for j in range(k):
        out = out * (s + j)
    return out


def scaled_zeta_sum(s, q: float, tol: float = 1e-16):
    """Z(s, q) = sum_{m>=0} (q/(q+m))**s for s > 1, q > 0.

    Returns (values, error_bounds), vectorised over s.  The Euler-Maclaurin
    tail keeps Bernoulli terms through B6; the B8 term bounds the remainder.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s <= 1.0):
        raise ValueError("scaled_zeta_sum requires s > 1")
    if not q > 0.0:
        raise ValueError("scaled_zeta_sum requires q > 0")

    M = 64
    while True:
        x0 = q + M
        rs = np.exp(s * math.log(q / x0))
        err = rs * pochhammer(s, 7) / (1209600.0 * x0**7)
        if np.all(err <= tol) or M >= (1 << 21):
            break
        M *= 2

    tail = rs * (
        x0 / (s - 1.0)
        + 0.5
        + s / (12.0 * x0)
        - pochhammer(s, 3) / (720.0 * x0**3)
        + pochhammer(s, 5) / (30240.0 * x0**5)
    )
    base = q / (q + np.arange(M, dtype=float))
    # head summed in blocks to bound the power-matrix size
    head = np.zeros_like(s)
    step = max(1, (1 << 22) // max(1, s.size))
    for lo in range(0, M, step):
        head += np.power(base[np.newaxis, lo : lo + step], s[:, np.newaxis]).sum(axis=1)
    return head + tail, err


@dataclass
class TailFrame:
    """Scaled power-sum data for the tail n > N of a power-law sequence."""

    N: int
    a_next: float          # |a_{N+1}|
    exponent: float        # p
    q0: float              # N + 1 + offset
    _G: np.ndarray = field(default_factory=lambda: np.empty(0))
    _G_err: np.ndarray = field(default_factory=lambda: np.empty(0))

    def G(self, kmax: int) -> tuple[np.ndarray, np.ndarray]:
        """G_k for k = 1..kmax (1-indexed: result[k-1] = G_k), with error bounds."""
        if self._G.size < kmax:
            ks = np.arange(1, max(kmax, 8) + 1, dtype=float)
            self._G, self._G_err = scaled_zeta_sum(self.exponent * ks, self.q0)
        return self._G[:kmax], self._G_err[:kmax]


def tail_log_sum(frame: TailFrame, z: np.ndarray, eps: float):
    """sum_{n>N} log(1 + z/a_n) for |z| <= TAIL_RATIO * a_{N+1}.

    Returns (values, certified_abs_error).
    """
    w0 = z / frame.a_next
    wmax = float(np.max(np.abs(w0))) if w0.size else 0.0
    if wmax >= 0.5:
        raise TailBoundUnavailable(f"|z|/|a_(N+1)| = {wmax:.3g} >= 0.5 at tail cut")
    if wmax == 0.0:
        return np.zeros_like(w0), 0.0

    G1 = frame.G(1)[0][0]
    K = 4
    while True:
        rem = G1 * wmax ** (K + 1) / ((K + 1) * (1.0 - wmax))
        if rem <= 0.25 * eps or K >= 128:
            break
        K += 4
    G, G_err = frame.G(K)
    ks = np.arange(1, K + 1)
    signs = np.where(ks % 2 == 1, 1.0, -1.0)
    coeff = signs * G / ks
    # Horner in w0 keeps one power array live at a time.
    acc = np.zeros_like(w0)
    for k in range(K, 0, -1):
        acc = (acc + coeff[k - 1]) * w0
    err = rem + float(np.sum(G_err * wmax**ks / ks))
    return acc, err


def tail_recip_sum(frame: TailFrame, z: np.ndarray, eps_abs: float):
    """sum_{n>N} 1/(z + a_n) for |z| <= TAIL_RATIO * a_{N+1}.

    Returns (values, certified_abs_error).
    """
    w0 = z / frame.a_next
    wmax = float(np.max(np.abs(w0))) if w0.size else 0.0
    if wmax >= 0.5:
        raise TailBoundUnavailable(f"|z|/|a_(N+1)| = {wmax:.3g} >= 0.5 at tail cut")

    G1 = frame.G(1)[0][0]
    J = 4
    while True:
        rem = G1 * wmax ** (J + 1) / ((1.0 - wmax) * frame.a_next)
        if rem <= 0.25 * eps_abs or J >= 128:
            break
        J += 4
    G, G_err = frame.G(J + 1)
    acc = np.zeros_like(w0)
    for j in range(J, -1, -1):
        sign = 1.0 if j % 2 == 0 else -1.0
        acc = acc * w0 + sign * G[j]
    acc = acc / frame.a_next
    err = rem + float(np.sum(G_err * wmax ** np.arange(J + 1))) / frame.a_next
    return acc, err


class ZeroSequence:
    """Base interface: 1-indexed zeros a_n with nondecreasing moduli."""

    #: True when every zero is a positive real (enables axis shortcuts).
    all_real_positive: bool = False
    #: Index from which the sector condition is declared to hold.
    sector_from: int = 1

    def values(self, idx: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def moduli(self, idx: np.ndarray) -> np.ndarray:
        return np.abs(self.values(idx))

    def count_at_most(self, R: float) -> int:
        """Number of indices with |a_n| <= R."""
        raise NotImplementedError

    def tail_bound(self, N: int, R: float) -> float:
        """Certified upper bound on sum_{n>N} R/|a_n|."""
        raise TailBoundUnavailable("sequence has no certified tail bound")

    def tail_frame(self, N: int) -> TailFrame | None:
        """Power-sum machinery for the tail n > N, or None."""
        return None

    def head_cut(self, z_abs: float) -> int:
        """A head length N with |a_{N+1}| >= |z| / TAIL_RATIO.

        Rounded up to a power of two so repeated nearby evaluations share
        one cached tail frame.
        """
        n = self.count_at_most(z_abs / TAIL_RATIO)
        if n == 0:
            return 0
        return 1 << (n - 1).bit_length()

    # -- model structure hooks (power-law tails) ---------------------------

    def power_model(self):
        """(coeff, exponent, offset, first_model_index) or None."""
        return None


class PowerZeros(ZeroSequence):
    """a_n = coeff * (n + offset)**exponent, positive reals, for all n >= 1."""

    def __init__(self, coeff: float, exponent: float, offset: float = 0.0):
        if not (coeff > 0.0 and exponent > 1.0 and offset > -1.0):
            raise ValueError("need coeff > 0, exponent > 1, offset > -1")
        self.coeff = float(coeff)
        self.exponent = float(exponent)
        self.offset = float(offset)
        self.all_real_positive = True
        self._frames: dict[int, TailFrame] = {}

    def values(self, idx):
        idx = np.asarray(idx, dtype=float)
        return (self.coeff * (idx + self.offset) ** self.exponent).astype(complex)

    def moduli(self, idx):
        idx = np.asarray(idx, dtype=float)
        return self.coeff * (idx + self.offset) ** self.exponent

    def _mod(self, n: int) -> float:
        return self.coeff * (n + self.offset) ** self.exponent

    def count_at_most(self, R):
        R = float(R)
        if not R > 0.0 or R < self._mod(1):
            return 0
        est = (R / self.coeff) ** (1.0 / self.exponent) - self.offset
        if not math.isfinite(est) or est >= 9e15:
            # beyond exact integer indexing in doubles; +-1 is immaterial here
            return int(min(est, 1e300)) if math.isfinite(est) else int(1e18)
        lo, hi = 1, int(est) + 2
        while self._mod(hi) <= R:
            hi *= 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self._mod(mid) <= R:
                lo = mid
            else:
                hi = mid
        return lo

    def tail_frame(self, N):
        frame = self._frames.get(N)
        if frame is None:
            q0 = N + 1 + self.offset
            a_next = self.coeff * q0**self.exponent
            frame = TailFrame(N=N, a_next=a_next, exponent=self.exponent, q0=q0)
            if len(self._frames) < 256:
                self._frames[N] = frame
        return frame

    def tail_bound(self, N, R):
        frame = self.tail_frame(N)
        G1, G1_err = frame.G(1)
        return R / frame.a_next * float(G1[0] + G1_err[0])

    def power_model(self):
        return (self.coeff, self.exponent, self.offset, 1)


def quadratic_zeros(coeff: float, offset: float = 0.0) -> PowerZeros:
    return PowerZeros(coeff, 2.0, offset)


class ListWithTail(ZeroSequence):
    """Explicit finite head, continued by a power-law model beyond it.

    The model *defines* the sequence for n > len(head); it is not merely a
    bound.  Head zeros may be complex; moduli must be nondecreasing and must
    not exceed the first model value.
    """

    def __init__(self, head, tail_coeff: float, tail_exponent: float,
                 tail_offset: float = 0.0, sector_from: int = 1):
        head = np.asarray(list(head), dtype=complex)
        if head.size == 0:
            raise ValueError("head must be nonempty; use PowerZeros for pure models")
        mods = np.abs(head)
        if mods[0] <= 0.0:
            raise ValueError("|a_1| must be positive")
        if np.any(np.diff(mods) < 0.0):
            k = int(np.argmax(np.diff(mods) < 0.0)) + 2
            raise ValueError(f"zero moduli decrease at n={k}")
        self.head = head
        self.head_moduli = mods
        self.J = head.size
        self.model = PowerZeros(tail_coeff, tail_exponent, tail_offset)
        first_model = self.model.moduli(np.array([self.J + 1.0]))[0]
        if first_model < mods[-1]:
            raise ValueError("model tail starts below the last head modulus")
        self.all_real_positive = bool(np.all(np.isreal(head)) and np.all(head.real > 0))
        self.sector_from = sector_from

    def values(self, idx):
        idx = np.asarray(idx)
        out = np.empty(idx.shape, dtype=complex)
        in_head = idx <= self.J
        out[in_head] = self.head[idx[in_head].astype(int) - 1]
        out[~in_head] = self.model.values(idx[~in_head])
        return out

    def count_at_most(self, R):
        if R >= self.head_moduli[-1]:
            return max(self.J, self.model.count_at_most(R))
        return bisect_right(self.head_moduli.tolist(), R)

    def tail_frame(self, N):
        if N < self.J:
            return None
        return self.model.tail_frame(N)

    def tail_bound(self, N, R):
        if N >= self.J:
            return self.model.tail_bound(N, R)
        head_part = float(np.sum(R / self.head_moduli[N:]))
        return head_part + self.model.tail_bound(self.J, R)

    def head_cut(self, z_abs):
        return max(super().head_cut(z_abs), self.J)

    def power_model(self):
        c, p, off, _ = self.model.power_model()
        return (c, p, off, self.J + 1)


class GeneratorZeros(ZeroSequence):
    """Arbitrary callable n -> a_n.  Certification is limited to what the
    optional tail_bound callable provides."""

    def __init__(self, fn, tail_bound_fn=None, sector_from: int = 1,
                 all_real_positive: bool = False, scan_limit: int = 1 << 22):
        self.fn = fn
        self.tail_bound_fn = tail_bound_fn
        self.sector_from = sector_from
        self.all_real_positive = all_real_positive
        self.scan_limit = scan_limit
        a1 = complex(fn(1))
        if abs(a1) <= 0.0:
            raise ValueError("|a_1| must be positive")

    def values(self, idx):
        idx = np.asarray(idx)
        return np.array([complex(self.fn(int(n))) for n in idx.ravel()]).reshape(idx.shape)

    def count_at_most(self, R):
        if abs(complex(self.fn(1))) > R:
            return 0
        lo, hi = 1, 2
        while abs(complex(self.fn(hi))) <= R:
            lo = hi
            hi *= 2
            if hi > self.scan_limit:
                raise TailBoundUnavailable(f"|a_n| <= {R!r} beyond scan limit")
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if abs(complex(self.fn(mid))) <= R:
                lo = mid
            else:
                hi = mid
        return lo

    def tail_bound(self, N, R):
        if self.tail_bound_fn is None:
            raise TailBoundUnavailable("generator sequence without tail_bound")
        return float(self.tail_bound_fn(N, R))
