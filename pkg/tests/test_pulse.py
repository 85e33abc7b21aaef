import math

import numpy as np
import pytest

from etsolve.errors import ConfigError
from etsolve.pulse import (INTENSITY_AU_WCM2, PulseSpec, envelope,
                           field_and_potential)

# the mid-IR test pulse: lambda = 3 um, I = 1e14 W/cm^2
LAMBDA_3UM = 5.669e4
I_1E14 = 1e14 / INTENSITY_AU_WCM2


def test_carrier_frequency_from_wavelength():
    spec = PulseSpec(intensity=I_1E14, cycles=3, wavelength=LAMBDA_3UM)
    assert spec.omega == pytest.approx(0.01519, abs=2e-6)
    assert spec.optical_cycle == pytest.approx(413.7, abs=0.05)
    assert spec.duration == pytest.approx(3 * 413.7, abs=0.15)


def test_peak_field_and_ponderomotive_energy():
    spec = PulseSpec(intensity=I_1E14, cycles=3, wavelength=LAMBDA_3UM)
    assert I_1E14 == pytest.approx(2.849e-3, rel=2e-4)
    assert spec.f0 == pytest.approx(5.338e-2, rel=2e-4)
    assert spec.ponderomotive_energy == pytest.approx(3.088, rel=2e-3)


def test_envelope_endpoints_and_peak():
    spec = PulseSpec(intensity=1e-3, cycles=3, omega=0.5)
    T = spec.duration
    assert envelope(spec, 0.0) == 0.0
    assert envelope(spec, T) == pytest.approx(0.0, abs=1e-30)
    assert envelope(spec, T / 2) == pytest.approx(1.0)
    assert envelope(spec, 1.5 * T) == 0.0
    ts = np.linspace(0, T, 200)
    assert all(0.0 <= envelope(spec, t) <= 1.0 for t in ts)


def test_vector_potential_shape_endpoints():
    spec = PulseSpec(intensity=1e-3, cycles=3, omega=0.5)
    for t in (0.0, spec.duration, 2 * spec.duration):
        F, A = field_and_potential(spec, t)
        assert F == 0.0 and A == 0.0


def test_field_is_minus_dA_dt():
    # finite differences at random times, relative 1e-8
    rng = np.random.default_rng(42)
    for shape, gauge in (("vector_potential", "velocity"), ("field", "length")):
        spec = PulseSpec(intensity=2.8e-3, cycles=3 if shape != "field" else 0.5,
                         omega=0.057, shape=shape, gauge=gauge)
        T = spec.duration
        h = 1e-6
        ts = rng.uniform(2 * h, T - 2 * h, size=10_000)
        scale = spec.f0
        for t in ts:
            F = field_and_potential(spec, t)[0]
            Am = field_and_potential(spec, t - h)[1]
            Ap = field_and_potential(spec, t + h)[1]
            dAdt = (Ap - Am) / (2 * h)
            assert abs(F + dAdt) < 1e-8 * scale + 1e-7 * abs(F)


def test_vector_potential_shape_has_zero_field_area():
    spec = PulseSpec(intensity=2.8e-3, cycles=3, omega=0.057)
    ts = np.linspace(0.0, spec.duration, 20001)
    F = np.array([field_and_potential(spec, t)[0] for t in ts])
    area = np.trapezoid(F, ts)
    assert abs(area) < 1e-10 * spec.f0 * spec.duration


def test_field_defined_shape_leaves_residual_potential():
    spec = PulseSpec(intensity=2.8e-3, cycles=0.5, omega=0.057,
                     shape="field", gauge="length")
    T = spec.duration
    F_end, A_end = field_and_potential(spec, T)
    assert F_end == 0.0
    assert abs(A_end) > 0.1 * spec.f0 / spec.omega   # non-vanishing after the pulse
    # A stays frozen afterwards
    assert field_and_potential(spec, 3 * T)[1] == pytest.approx(A_end, rel=1e-14)
    # and its value matches direct numerical integration of -F
    ts = np.linspace(0.0, T, 200001)
    F = np.array([field_and_potential(spec, t)[0] for t in ts])
    assert A_end == pytest.approx(-np.trapezoid(F, ts), rel=1e-8)


def test_half_cycle_field_shape():
    spec = PulseSpec(intensity=2.8e-3, cycles=0.5, omega=0.057,
                     shape="field", gauge="length")
    t = 0.3 * spec.duration
    F = field_and_potential(spec, t)[0]
    expected = -spec.f0 * envelope(spec, t) * math.sin(spec.omega * t)
    assert F == pytest.approx(expected, rel=1e-14)


def test_field_shape_requires_length_gauge():
    with pytest.raises(ConfigError):
        PulseSpec(intensity=1e-3, cycles=0.5, omega=0.5,
                  shape="field", gauge="velocity")


def test_single_cycle_degenerate_antiderivative():
    # N = 1: the (omega - 2a) term in the analytic integral vanishes identically
    spec = PulseSpec(intensity=2.8e-3, cycles=1.0, omega=0.057,
                     shape="field", gauge="length")
    T = spec.duration
    ts = np.linspace(0.0, T, 100001)
    F = np.array([field_and_potential(spec, t)[0] for t in ts])
    A_num = -np.trapezoid(F, ts)
    assert field_and_potential(spec, T)[1] == pytest.approx(A_num, abs=1e-8 * spec.f0 / spec.omega)


def test_wavelength_or_omega_exactly_one():
    with pytest.raises(ConfigError):
        PulseSpec(intensity=1e-3, cycles=1)
    with pytest.raises(ConfigError):
        PulseSpec(intensity=1e-3, cycles=1, wavelength=100.0, omega=0.5)
