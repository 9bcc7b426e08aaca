"""Exception types shared across the package."""


class FastEscapeError(Exception):
    """Base class for all package-specific errors."""


class ZeroOfF(FastEscapeError):
    """Evaluation requested within tolerance of a zero (or pole of log f)."""

    def __init__(self, z, index=None):
        self.z = z
        self.index = index
        where = f" (factor n={index})" if index is not None else ""
        super().__init__(f"z={z!r} is within tolerance of a zero of f{where}")


class TailBoundUnavailable(FastEscapeError):
    """The zero sequence cannot certify the requested truncation error."""


class EvaluationRange(FastEscapeError):
    """Radius outside the range where certified evaluation is possible."""


class SectorViolation(FastEscapeError):
    """Zero arguments leave the declared sector beyond the scan horizon."""

    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(f"arg(a_n) outside sector at n={index}: a_n={value!r}")


class UnknownFamily(FastEscapeError):
    """Unrecognised canonical function family name."""


class NotFoundInScanRange(FastEscapeError):
    """A threshold predicate never stabilised within the scanned radii."""

    def __init__(self, name, detail=""):
        self.name = name
        super().__init__(f"threshold {name!r} not found in scan range{': ' + detail if detail else ''}")


class ThresholdViolation(FastEscapeError):
    """Operation invoked below the radius from which its lemma is valid."""


class TooFewIslands(FastEscapeError):
    """m(r) < 1 for the configured packing constant and nu."""


class PackingImpossible(FastEscapeError):
    """No disjoint disc of the requested radius fits in the target sector."""


class NewtonDiverged(FastEscapeError):
    """Newton iteration failed to reach the requested residual."""


class LeftDisc(FastEscapeError):
    """Newton iterate escaped the disc it was confined to."""


class ContinuationBroke(FastEscapeError):
    """Boundary continuation failed to converge; no island for this kappa."""


class NotClosed(FastEscapeError):
    """Traced boundary did not return to its starting point."""


class DegenerateDiameter(FastEscapeError):
    """A nesting level has diameter >= 1, breaking the log-scale bound."""


class HorizonExceeded(FastEscapeError):
    """Requested iterate count exceeds the certified evaluation horizon."""


class InsufficientScales(FastEscapeError):
    """Box counting needs at least four usable dyadic scales."""


class ConfigError(FastEscapeError):
    """Malformed or inconsistent run configuration."""
