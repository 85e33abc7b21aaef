"""Laser pulses: sin^2 envelope, vector potential / electric field, gauges.

Atomic units throughout.  The carrier frequency follows from the wavelength
via omega = 2 pi / (alpha * lambda) with alpha the fine-structure constant;
peak field F0 = sqrt(I) for intensity I in a.u.

Two pulse shapes are supported:

* ``vector_potential``: A(t) = (F0/omega) f_N(t) sin(omega t), with
  F = -dA/dt taken analytically.  A(0) = A(T) = 0, so int F dt = 0.
* ``field``: F(t) = -F0 f_N(t) sin(omega t), A obtained by analytic
  integration with A(0) = 0.  A does not vanish after the pulse, so this
  shape is restricted to the length gauge.
"""

import math
from dataclasses import dataclass

from .errors import ConfigError

FINE_STRUCTURE = 1.0 / 137.036
#: 1 a.u. of intensity in W/cm^2 (for converting lab intensities)
INTENSITY_AU_WCM2 = 3.50944506e16

SHAPE_VECTOR_POTENTIAL = "vector_potential"
SHAPE_FIELD = "field"
SHAPE_NONE = "none"

GAUGE_LENGTH = "length"
GAUGE_VELOCITY = "velocity"


@dataclass(frozen=True)
class PulseSpec:
    """Pulse parameters; pass either wavelength or omega (a.u.)."""

    intensity: float = 0.0
    cycles: float = 1.0
    wavelength: float | None = None
    omega: float | None = None
    shape: str = SHAPE_VECTOR_POTENTIAL
    gauge: str = GAUGE_LENGTH

    def __post_init__(self):
        if (self.wavelength is None) == (self.omega is None):
            raise ConfigError("specify exactly one of wavelength or omega")
        if self.omega is None:
            object.__setattr__(self, "omega", 2.0 * math.pi / (FINE_STRUCTURE * self.wavelength))
        if self.shape not in (SHAPE_VECTOR_POTENTIAL, SHAPE_FIELD, SHAPE_NONE):
            raise ConfigError(f"unknown pulse shape {self.shape!r}")
        if self.gauge not in (GAUGE_LENGTH, GAUGE_VELOCITY):
            raise ConfigError(f"unknown gauge {self.gauge!r}")
        if self.shape == SHAPE_FIELD and self.gauge != GAUGE_LENGTH:
            raise ConfigError(
                "the field-defined shape leaves a residual vector potential "
                "and requires the length gauge")
        if self.intensity < 0.0:
            raise ConfigError("intensity must be nonnegative")
        if self.cycles <= 0.0:
            raise ConfigError("cycles must be positive")

    @property
    def f0(self):
        """Peak electric field sqrt(I)."""
        return math.sqrt(self.intensity)

    @property
    def duration(self):
        """Pulse length T = 2 pi N / omega."""
        return 2.0 * math.pi * self.cycles / self.omega

    @property
    def optical_cycle(self):
        return 2.0 * math.pi / self.omega

    @property
    def ponderomotive_energy(self):
        """U_p = F0^2 / (4 omega^2)."""
        return self.f0 ** 2 / (4.0 * self.omega ** 2)


def envelope(spec, t):
    """sin^2(pi t / T) inside [0, T], zero outside."""
    T = spec.duration
    if t < 0.0 or t > T:
        return 0.0
    return math.sin(math.pi * t / T) ** 2


def _envelope_derivative(spec, t):
    T = spec.duration
    if t < 0.0 or t > T:
        return 0.0
    return (math.pi / T) * math.sin(2.0 * math.pi * t / T)


def field_and_potential(spec, t):
    """(F, A) at time t >= 0 for the configured shape."""
    if spec.shape == SHAPE_NONE or spec.intensity == 0.0:
        return 0.0, 0.0
    w = spec.omega
    T = spec.duration
    if spec.shape == SHAPE_VECTOR_POTENTIAL:
        if t <= 0.0 or t >= T:
            return 0.0, 0.0
        f = envelope(spec, t)
        df = _envelope_derivative(spec, t)
        A = (spec.f0 / w) * f * math.sin(w * t)
        F = -(spec.f0 / w) * (df * math.sin(w * t) + f * w * math.cos(w * t))
        return F, A
    # field-defined shape: F = -F0 f_N sin(wt), A(t) = -int_0^t F dt'
    a = math.pi / T  # envelope half-frequency: f_N = sin^2(a t)
    if t >= T:
        F = 0.0
        tt = T
    else:
        F = -spec.f0 * envelope(spec, t) * math.sin(w * t)
        tt = max(t, 0.0)
    # int_0^t sin^2(a t') sin(w t') dt' =
    #   (1 - cos w t)/(2w) - [ (1-cos((w+2a)t))/(w+2a) + (1-cos((w-2a)t))/(w-2a) ] / 4
    term = (1.0 - math.cos(w * tt)) / (2.0 * w)
    term -= (1.0 - math.cos((w + 2 * a) * tt)) / (4.0 * (w + 2 * a))
    if abs(w - 2 * a) > 1e-12 * w:
        term -= (1.0 - math.cos((w - 2 * a) * tt)) / (4.0 * (w - 2 * a))
    # w = 2a (half-cycle pulse): the last antiderivative is identically zero
    A = spec.f0 * term
    return F, A
