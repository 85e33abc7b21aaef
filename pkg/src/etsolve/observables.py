"""Physical outputs: norm, radial density, per-l waves, dipole acceleration,
harmonic spectrum.

Densities are reported in the unscaled coordinate r on a caller-supplied
grid, so snapshots at different times are directly comparable.  Outer-region
values are reconstructed from the scaled functions: the density needs only
the 1/sqrt(R) modulus factor, the full wave additionally restores the
quadratic phase.

Expectation values of multiplicative operators use the DVR quadrature with
r = xi inside, r = r_sigma + R (xi - r_sigma) outside; the bridge point
enters with unit weight, consistent with the norm decomposition.
"""

from dataclasses import dataclass

import numpy as np

from .errors import OutOfDomainError
from .grid import CLS_OUTER
from .pulse import field_and_potential
from .scaling import map_r_to_xi, map_xi_to_r


@dataclass
class DensitySnapshot:
    t: float
    r: np.ndarray
    rho: np.ndarray


@dataclass
class Spectrum:
    omega: np.ndarray
    s: np.ndarray
    omega_over_up: np.ndarray | None = None


def norm(state):
    """Squared coefficient norm = the physical normalization integral."""
    return state.norm2()


def block_norms(state):
    """Per-l partial norms; they sum to norm(state)."""
    return np.sum(np.abs(state.coeffs) ** 2, axis=1)


def _g_up(n_ell):
    ell = np.arange(n_ell - 1, dtype=float)
    return (ell + 1.0) / np.sqrt((2 * ell + 1.0) * (2 * ell + 3.0))


def _eval_waves(state, grid, schedule, t, xi):
    """Per-l function values at scaled points xi.

    Returns phi-convention values beyond r_sigma and psi values inside
    (the two agree at r_sigma up to the stored-coefficient convention).
    """
    R = schedule.scale(t)[0]
    B = grid.eval_matrix(xi)
    C = state.coeffs
    if grid.i_bridge is not None:
        C = C.copy()
        u = np.sqrt(2.0 / (1.0 + R))
        a_b = C[:, grid.i_bridge].copy()
        C[:, grid.i_bridge] = u * a_b  # psi-convention bridge coefficient
        vals = B.dot(C.T)  # (npts, n_ell)
        outer_pts = xi > grid.spec.r_sigma
        if np.any(outer_pts):
            corr = (u * (np.sqrt(R) - 1.0)) * a_b  # b_l - u a_l
            vals[outer_pts] += np.outer(
                B[outer_pts, grid.i_bridge].toarray().ravel(), corr)
    else:
        vals = B.dot(C.T)
    return vals


def density(state, grid, schedule, t, r_samples):
    """Radial density rho(r, t) = sum_l |psi_l|^2 at unscaled radii."""
    r = np.atleast_1d(np.asarray(r_samples, dtype=float))
    r_sigma = grid.spec.r_sigma
    r_edge = float(map_xi_to_r(grid.spec.xi_max, t, r_sigma, schedule))
    if np.any(r < 0.0) or np.any(r > r_edge * (1 + 1e-12)):
        raise OutOfDomainError(
            f"density requested beyond the simulated radius {r_edge:.6g}")
    xi = np.asarray(map_r_to_xi(r, t, r_sigma, schedule))
    vals = _eval_waves(state, grid, schedule, t, xi)
    rho = np.sum(np.abs(vals) ** 2, axis=1)
    R = schedule.scale(t)[0]
    rho = np.where(xi > r_sigma, rho / R, rho)
    return DensitySnapshot(t=t, r=r, rho=rho)


def radial_function(state, grid, schedule, t, ell, representation="unscaled",
                    xi_samples=None):
    """Sampled complex radial function for one l.

    representation "unscaled" returns psi_l(r, t) with the full phase
    restored; "scaled" returns phi_l(xi, t)/sqrt(R) (inside r_sigma the two
    coincide).  Returns (r_positions, values) on the xi sample points
    (defaults to the grid nodes).
    """
    if not 0 <= ell < state.coeffs.shape[0]:
        raise ValueError(f"l={ell} outside the expanded range")
    xi = grid.nodes if xi_samples is None else \
        np.atleast_1d(np.asarray(xi_samples, dtype=float))
    r_sigma = grid.spec.r_sigma
    vals = _eval_waves(state, grid, schedule, t, xi)[:, ell].astype(complex)
    R, Rdot, _ = schedule.scale(t)
    outer = xi > r_sigma
    if representation == "scaled":
        vals[outer] /= np.sqrt(R)
    elif representation == "unscaled":
        phase = np.exp(0.5j * R * Rdot * (xi[outer] - r_sigma) ** 2)
        vals[outer] *= phase / np.sqrt(R)
    else:
        raise ValueError(f"unknown representation {representation!r}")
    r = np.asarray(map_xi_to_r(xi, t, r_sigma, schedule))
    return r, vals


def dipole_acceleration(state, grid, schedule, pulse, t):
    """<(d/dz)(1/r)> - F(t) <1>, the source term of the harmonic spectrum.

    (d/dz)(1/r) = -cos(theta)/r^2 couples l <-> l+1 with the dipole factor;
    evaluated as a DVR-diagonal quadrature in the working coordinates (the
    outer phases and Jacobian factors cancel between bra and ket).
    """
    C = state.coeffs
    n_ell = C.shape[0]
    R = schedule.scale(t)[0]
    r_sigma = grid.spec.r_sigma
    outer = grid.cls == CLS_OUTER
    r_eff = np.where(outer, r_sigma + R * (grid.nodes - r_sigma), grid.nodes)
    acc = 0.0
    if n_ell > 1:
        g = _g_up(n_ell)
        cross = 2.0 * np.real(
            np.sum(g[:, None] * np.conj(C[:-1]) * C[1:], axis=0))
        acc = -np.sum(cross / r_eff ** 2)
    F = field_and_potential(pulse, t)[0]
    return float(acc - F * state.norm2())


def hhg_spectrum(times, accel, omega_grid, u_p=None, window=None):
    """S(Omega) = | int a(t) exp(i Omega t) dt |^2 on a uniform time grid.

    Trapezoidal quadrature of the Fourier integral at the requested
    frequencies.  No window is applied by default (a sin^2 pulse already
    vanishes at both ends); window="hann" is available for truncated traces.
    """
    times = np.asarray(times, dtype=float)
    accel = np.asarray(accel, dtype=float)
    if times.size == 0 or accel.size != times.size:
        raise ValueError("need a nonempty acceleration trace matching the times")
    omega = np.atleast_1d(np.asarray(omega_grid, dtype=float))
    a = accel
    if window == "hann":
        a = accel * np.hanning(len(accel))
    elif window is not None:
        raise ValueError(f"unknown window {window!r}")
    phases = np.exp(1j * omega[:, None] * times[None, :])
    amp = np.trapezoid(phases * a[None, :], times, axis=1)
    s = np.abs(amp) ** 2
    over_up = omega / u_p if u_p else None
    return Spectrum(omega=omega, s=s, omega_over_up=over_up)
