"""Extended-range positive reals kept in log scale.

Iterated maximum-modulus values overflow IEEE doubles after two or three
steps, and their *logarithms* overflow a step later.  ``WideFloat`` is a
minimal signed float with an unbounded binary exponent (mantissa in
[0.5, 1), exponent a Python int).  ``LogMag`` wraps one as "the positive
real whose natural log is this number"; ordering and multiplication of
LogMag values follow the represented magnitudes.
"""

from __future__ import annotations

import math

_LN2 = math.log(2.0)

# Exponent gaps beyond this cannot interact at double precision.
_ALIGN_LIMIT = 2200


class WideFloat:
    """Signed float with unbounded binary exponent: value = m * 2**e."""

    __slots__ = ("m", "e")

    def __init__(self, value: float = 0.0, exp2: int = 0):
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"WideFloat requires a finite seed, got {value!r}")
        m, e = math.frexp(value)
        if m == 0.0:
            self.m, self.e = 0.0, 0
        else:
            self.m, self.e = m, e + exp2

    # ---- conversions ----------------------------------------------------

    @classmethod
    def of(cls, x) -> "WideFloat":
        if isinstance(x, WideFloat):
            return x
        return cls(x)

    def to_float(self) -> float:
        if self.m == 0.0:
            return 0.0
        if self.e > 1100:
            return math.inf if self.m > 0 else -math.inf
        if self.e < -1100:
            return 0.0
        return math.ldexp(self.m, self.e)

    def __float__(self) -> float:
        return self.to_float()

    # ---- arithmetic ------------------------------------------------------

    def _align(self, other) -> tuple[float, float, int]:
        other = WideFloat.of(other)
        sm, se, om, oe = self.m, self.e, other.m, other.e
        if sm == 0.0:
            return 0.0, om, oe
        if om == 0.0:
            return sm, 0.0, se
        d = se - oe
        if d >= 0:
            om = math.ldexp(om, -d) if d <= _ALIGN_LIMIT else 0.0
            return sm, om, se
        sm = math.ldexp(sm, d) if -d <= _ALIGN_LIMIT else 0.0
        return sm, om, oe

    def __add__(self, other) -> "WideFloat":
        a, b, e = self._align(other)
        return WideFloat(a + b, e)

    __radd__ = __add__

    def __sub__(self, other) -> "WideFloat":
        a, b, e = self._align(other)
        return WideFloat(a - b, e)

    def __rsub__(self, other) -> "WideFloat":
        a, b, e = self._align(other)
        return WideFloat(b - a, e)

    def __neg__(self) -> "WideFloat":
        out = WideFloat.__new__(WideFloat)
        out.m, out.e = -self.m, self.e
        return out

    def __abs__(self) -> "WideFloat":
        out = WideFloat.__new__(WideFloat)
        out.m, out.e = abs(self.m), self.e
        return out

    def __mul__(self, other) -> "WideFloat":
        other = WideFloat.of(other)
        return WideFloat(self.m * other.m, self.e + other.e)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "WideFloat":
        other = WideFloat.of(other)
        if other.m == 0.0:
            raise ZeroDivisionError("WideFloat division by zero")
        return WideFloat(self.m / other.m, self.e - other.e)

    def __rtruediv__(self, other) -> "WideFloat":
        return WideFloat.of(other) / self

    # ---- ordering --------------------------------------------------------

    def _cmp(self, other) -> int:
        a, b, _ = self._align(other)
        return (a > b) - (a < b)

    def __eq__(self, other) -> bool:
        return self._cmp(other) == 0

    def __lt__(self, other) -> bool:
        return self._cmp(other) < 0

    def __le__(self, other) -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other) -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other) -> bool:
        return self._cmp(other) >= 0

    def __hash__(self):
        return hash((self.m, self.e))

    @property
    def sign(self) -> int:
        return (self.m > 0) - (self.m < 0)

    # ---- transcendental --------------------------------------------------

    def ln(self) -> float:
        """Natural log of a positive WideFloat, as a plain float.

        Returns +/-inf when the log itself leaves double range.
        """
        if self.m <= 0.0:
            raise ValueError("ln of a non-positive WideFloat")
        try:
            scaled = self.e * _LN2
        except OverflowError:
            return math.inf if self.e > 0 else -math.inf
        return math.log(self.m) + scaled

    @classmethod
    def from_int(cls, i: int) -> "WideFloat":
        """Exact-leading-bits WideFloat from an arbitrary Python int."""
        if i == 0:
            return cls(0.0)
        shift = max(i.bit_length() - 53, 0)
        return cls(float(i >> shift) if i > 0 else -float((-i) >> shift), shift)

    def ln_wide(self) -> "WideFloat":
        """Natural log of a positive WideFloat, as a WideFloat (any size)."""
        if self.m <= 0.0:
            raise ValueError("ln of a non-positive WideFloat")
        return WideFloat.from_int(self.e) * _LN2 + WideFloat(math.log(self.m))

    @classmethod
    def exp_of(cls, x: float) -> "WideFloat":
        """e**x as a WideFloat, for any finite float x."""
        x = float(x)
        if not math.isfinite(x):
            raise ValueError(f"exp_of requires finite x, got {x!r}")
        t = x / _LN2
        k = math.floor(t)
        return cls(2.0 ** (t - k), int(k))

    def __repr__(self):
        f = self.to_float()
        if math.isfinite(f):
            return f"WideFloat({f!r})"
        return f"WideFloat(m={self.m!r}, e={self.e})"


class LogMag:
    """A finite positive real represented by its natural logarithm.

    The stored log is a WideFloat, so the magnitude may be towers like
    exp(exp(1e20)) without loss of ordering.
    """

    __slots__ = ("ell",)

    def __init__(self, ell):
        self.ell = WideFloat.of(ell)

    # ---- constructors ----------------------------------------------------

    @classmethod
    def from_value(cls, x: float) -> "LogMag":
        x = float(x)
        if not (x > 0.0) or not math.isfinite(x):
            raise ValueError(f"LogMag requires a finite positive value, got {x!r}")
        return cls(math.log(x))

    @classmethod
    def from_log(cls, ell) -> "LogMag":
        return cls(ell)

    @classmethod
    def of(cls, x) -> "LogMag":
        if isinstance(x, LogMag):
            return x
        return cls.from_value(x)

    # ---- views -----------------------------------------------------------

    @property
    def log(self) -> WideFloat:
        return self.ell

    def log_float(self) -> float:
        """log of the magnitude as a float (+/-inf if out of range)."""
        return self.ell.to_float()

    def value(self) -> float:
        """The magnitude as a float; inf if it overflows, 0.0 if under."""
        lf = self.ell.to_float()
        if lf > 709.0:
            return math.inf
        if lf < -745.0:
            return 0.0
        return math.exp(lf)

    def log_log(self) -> float:
        """log(log(magnitude)); requires magnitude > 1."""
        return self.ell.ln()

    # ---- magnitude arithmetic ---------------------------------------------

    def __mul__(self, other) -> "LogMag":
        return LogMag(self.ell + LogMag.of(other).ell)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "LogMag":
        return LogMag(self.ell - LogMag.of(other).ell)

    def __rtruediv__(self, other) -> "LogMag":
        return LogMag(LogMag.of(other).ell - self.ell)

    def __pow__(self, s: float) -> "LogMag":
        return LogMag(self.ell * float(s))

    # ---- ordering ----------------------------------------------------------

    def _key(self, other) -> WideFloat:
        return LogMag.of(other).ell

    def __eq__(self, other) -> bool:
        return self.ell == self._key(other)

    def __lt__(self, other) -> bool:
        return self.ell < self._key(other)

    def __le__(self, other) -> bool:
        return self.ell <= self._key(other)

    def __gt__(self, other) -> bool:
        return self.ell > self._key(other)

    def __ge__(self, other) -> bool:
        return self.ell >= self._key(other)

    def __hash__(self):
        return hash(("LogMag", self.ell))

    def __repr__(self):
        v = self.value()
        if 0.0 < v < math.inf:
            return f"LogMag({v!r})"
        lf = self.ell.to_float()
        if math.isfinite(lf):
            return f"LogMag(exp({lf!r}))"
        return f"LogMag(exp(~{self.ell.sign}*exp({abs(self.ell).ln()!r})))"


def fmt_logmag(x: LogMag) -> str:
    """Stable textual form for manifests: value when in range, else exp(..)."""
    v = x.value()
    if 0.0 < v < math.inf:
        return f"{v:.17g}"
    lf = x.log_float()
    if math.isfinite(lf):
        return f"exp({lf:.17g})"
    return f"exp({'-' if x.ell.sign < 0 else ''}exp({abs(x.ell).ln():.17g}))"
