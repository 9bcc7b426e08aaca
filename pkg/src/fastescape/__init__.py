"""Genus-zero entire functions with sector-confined zeros: certified product
evaluation, modulus growth, inequality sweeps, island construction, escape
classification, and dimension lower bounds for the fast escaping set."""

from .errors import (
    ConfigError,
    ContinuationBroke,
    DegenerateDiameter,
    EvaluationRange,
    FastEscapeError,
    HorizonExceeded,
    InsufficientScales,
    LeftDisc,
    NewtonDiverged,
    NotClosed,
    NotFoundInScanRange,
    PackingImpossible,
    SectorViolation,
    TailBoundUnavailable,
    ThresholdViolation,
    TooFewIslands,
    UnknownFamily,
    ZeroOfF,
)
from .frame import SectorFrame
from .function import GenusZeroFunction, canonical, f_value, log_derivative, log_f, validate_sector
from .logmag import LogMag, WideFloat
from .modulus import (
    ScanConfig,
    Thresholds,
    check_rhobig,
    find_thresholds,
    growth_diagnostic,
    iterate_max_modulus,
    iterate_mu,
    max_modulus_log,
    max_modulus_scan,
    mu_log,
)
from .zeros import GeneratorZeros, ListWithTail, PowerZeros, ZeroSequence, quadratic_zeros

__version__ = "0.1.0"
