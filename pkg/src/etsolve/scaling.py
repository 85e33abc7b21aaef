"""Time-scaling schedule R(t), the exterior coordinate map and phase transform.

The scaling factor follows the pulse envelope: R(0) = 1, Rdot(0) = 0 and

    R(t) = (R_inf / 2T) { t^2 + (T^2 / 2 pi^2) [cos(2 pi t / T) - 1] } + 1

for 0 <= t <= T, continuing linearly with slope R_inf afterwards, so that
Rddot(t) = (2 R_inf / T) sin^2(pi t / T) is nonzero only while the field is
on.  R_inf = 0 disables scaling (R == 1).

The exterior map stretches only the region beyond r_sigma:
r = xi for xi <= r_sigma, r = r_sigma + R(t)(xi - r_sigma) outside.  With
r_sigma = 0 this reduces to global scaling xi = r / R(t).

The outer-region radial functions are related by the phase transform
phi = sqrt(R) exp[-i R Rdot (xi - r_sigma)^2 / 2] psi, which removes the
outward-growing phase gradient of the freely spreading wave packet.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfDomainError


@dataclass(frozen=True)
class ScalingSchedule:
    """Scaling velocity R_inf >= 0 and the pulse duration the ramp follows."""

    r_inf: float
    pulse_T: float

    def __post_init__(self):
        if self.r_inf < 0.0:
            raise ValueError("r_inf must be nonnegative")
        if self.pulse_T <= 0.0:
            raise ValueError("pulse_T must be positive")

    @classmethod
    def disabled(cls, pulse_T=1.0):
        """R == 1 for all t (non-scaled limit)."""
        return cls(0.0, pulse_T)

    @property
    def active(self):
        return self.r_inf > 0.0

    def scale(self, t):
        """(R, Rdot, Rddot) at time t >= 0."""
        if t < 0.0:
            raise ValueError(f"schedule evaluated at negative time {t}")
        if self.r_inf == 0.0:
            return 1.0, 0.0, 0.0
        T = self.pulse_T
        if t <= T:
            c = 2.0 * math.pi * t / T
            R = (self.r_inf / (2.0 * T)) * (
                t * t + (T * T / (2.0 * math.pi ** 2)) * (math.cos(c) - 1.0)) + 1.0
            Rdot = (self.r_inf / T) * (t - (T / (2.0 * math.pi)) * math.sin(c))
            Rddot = (self.r_inf / T) * (1.0 - math.cos(c))
            return R, Rdot, Rddot
        return self.r_inf * (t - T) + 0.5 * T * self.r_inf + 1.0, self.r_inf, 0.0


def map_xi_to_r(xi, t, r_sigma, schedule):
    """Unscaled radius r(xi, t); identity inside r_sigma."""
    R = schedule.scale(t)[0]
    xi = np.asarray(xi, dtype=float)
    return np.where(xi <= r_sigma, xi, r_sigma + R * (xi - r_sigma))


def map_r_to_xi(r, t, r_sigma, schedule):
    """Inverse map xi(r, t)."""
    R = schedule.scale(t)[0]
    r = np.asarray(r, dtype=float)
    return np.where(r <= r_sigma, r, r_sigma + (r - r_sigma) / R)


def phase_transform(xi, t, r_sigma, schedule, direction="forward"):
    """Multiplier linking psi and phi beyond the scaling surface.

    forward: psi -> phi, i.e. sqrt(R) exp[-i R Rdot (xi - r_sigma)^2 / 2];
    inverse is its reciprocal.  Only defined for xi > r_sigma.
    """
    xi = np.asarray(xi, dtype=float)
    if np.any(xi <= r_sigma):
        raise OutOfDomainError("phase transform is defined only beyond r_sigma")
    R, Rdot, _ = schedule.scale(t)
    mult = math.sqrt(R) * np.exp(-0.5j * R * Rdot * (xi - r_sigma) ** 2)
    if direction == "forward":
        return mult
    if direction == "inverse":
        return 1.0 / mult
    raise ValueError(f"unknown direction {direction!r}")
