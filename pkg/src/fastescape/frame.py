"""Sector geometry: the normalised frame angles and the S(r)/T(r) regions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SectorFrame:
    """Angles (theta2, psi, psi_prime) with 0 <= theta2 < psi < psi' < pi/2.

    sigma = cos(psi') is the modulus-shrink factor; the working sector
    S(r) opens to half-angle psi - theta2 around the positive axis.
    """

    theta2: float = 0.1
    psi: float = 0.6
    psi_prime: float = 0.8

    def __post_init__(self):
        if not (0.0 <= self.theta2 < self.psi < self.psi_prime < math.pi / 2):
            raise ValueError(
                f"need 0 <= theta2 < psi < psi' < pi/2, got "
                f"({self.theta2}, {self.psi}, {self.psi_prime})"
            )

    @property
    def sigma(self) -> float:
        return math.cos(self.psi_prime)

    @property
    def half_opening(self) -> float:
        """Half-angle psi - theta2 of S(r) and T(r)."""
        return self.psi - self.theta2

    def in_S(self, r: float, z):
        """Exact membership in S(r) = {|arg z| <= psi - theta2, |z| >= r}."""
        z = np.asarray(z, dtype=complex)
        mod = np.abs(z)
        ang = np.abs(np.angle(z))
        out = (mod >= r) & (ang <= self.half_opening) & (mod > 0.0)
        return bool(out) if out.ndim == 0 else out

    def in_T(self, r: float, z):
        """Exact membership in T(r) = S(r) intersected with {|z| <= 2r}."""
        z = np.asarray(z, dtype=complex)
        mod = np.abs(z)
        ang = np.abs(np.angle(z))
        out = (mod >= r) & (mod <= 2.0 * r) & (ang <= self.half_opening) & (mod > 0.0)
        return bool(out) if out.ndim == 0 else out

    def t_sector_area(self, r: float) -> float:
        """Lebesgue area of T(r): an annular sector of total angle 2(psi-theta2)."""
        return 3.0 * self.half_opening * r * r


DEFAULT_FRAME = SectorFrame()
