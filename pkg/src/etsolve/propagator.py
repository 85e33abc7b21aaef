"""Short-time iterative Lanczos propagation with adaptive Krylov dimension.

One step advances psi by exp(-i H dt) psi with H frozen by the caller
(conventionally at the step midpoint).  The Krylov subspace grows until the
error product criterion

    | beta_1 ... beta_{K-1} dt^{K-1} / (K-1)! |^2  <  eps

is met; the reduced exponential is evaluated by spectral decomposition of
the K x K symmetric tridiagonal matrix, which preserves the norm to
round-off for a Hermitian generator.  The product criterion is accumulated
in log space (the raw product overflows long before K reaches the cap).

A breakdown beta_k ~ 0 means the start vector spans an exact invariant
subspace and terminates the step successfully.  Hitting ``max_k`` without
satisfying the criterion raises StiffnessError carrying the attained error
estimate.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import StiffnessError
from .hamiltonian import StateVector

DEFAULT_EPS = 1e-15
DEFAULT_MAX_K = 1000
REORTH_TOL = 1e-10


@dataclass
class StepReport:
    k_used: int
    error_estimate: float
    norm_after: float


class KrylovWorkspace:
    """Reusable storage for the Lanczos basis and tridiagonal coefficients."""

    def __init__(self, max_k=DEFAULT_MAX_K, eps=DEFAULT_EPS):
        self.max_k = max_k
        self.eps = eps
        self._basis = None
        self.alphas = np.empty(max_k)
        self.betas = np.empty(max_k)

    def basis(self, dim):
        if self._basis is None or self._basis.shape != (self.max_k, dim):
            self._basis = np.empty((self.max_k, dim), dtype=complex)
        return self._basis


def lanczos_step(matvec, v, dt, eps=DEFAULT_EPS, max_k=DEFAULT_MAX_K,
                 workspace=None, reorth_tol=REORTH_TOL):
    """One adaptive step; returns (v_next, StepReport).

    ``v`` must be normalized to 1e-8.  ``dt`` should be much smaller than
    the fastest external time scale; the criterion only controls the
    Krylov truncation error of exp(-i H dt) for the frozen H.
    """
    v = np.asarray(v, dtype=complex).ravel()
    nrm = np.linalg.norm(v)
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"start vector norm {nrm} deviates from 1")
    if dt <= 0.0:
        raise ValueError("dt must be positive")

    ws = workspace if workspace is not None else KrylovWorkspace(max_k, eps)
    if ws.max_k < max_k:
        ws = KrylovWorkspace(max_k, eps)
    V = ws.basis(v.size)
    alphas, betas = ws.alphas, ws.betas

    V[0] = v
    w = np.asarray(matvec(v), dtype=complex).ravel()
    alphas[0] = np.vdot(V[0], w).real
    w -= alphas[0] * V[0]

    k = 1
    sum_log_beta = 0.0
    log_dt = math.log(dt)
    log_eps = math.log(eps)
    err_est = 1.0  # K = 1: empty product, dt^0/0! = 1
    scale = abs(alphas[0])

    while True:
        beta = np.linalg.norm(w)
        if beta <= 1e-14 * max(1.0, scale):
            err_est = 0.0  # exact invariant subspace
            break
        log_err = 2.0 * (sum_log_beta + math.log(beta) + k * log_dt
                         - math.lgamma(k + 1))
        q = w / beta
        if abs(np.vdot(V[0], q)) > reorth_tol:
            q -= V[:k].T @ (V[:k].conj() @ q)
            q /= np.linalg.norm(q)
        V[k] = q
        betas[k - 1] = beta
        w = np.asarray(matvec(q), dtype=complex).ravel()
        w -= beta * V[k - 1]
        alphas[k] = np.vdot(q, w).real
        w -= alphas[k] * q
        sum_log_beta += math.log(beta)
        scale = max(scale, abs(alphas[k]), beta)
        k += 1
        if log_err < log_eps:
            err_est = math.exp(max(log_err, -745.0))
            break
        if k >= max_k:
            raise StiffnessError(
                f"Krylov dimension cap {max_k} reached with error estimate "
                f"{math.exp(min(log_err, 700.0)):.3e} > {eps:.1e}",
                k_reached=k,
                error_estimate=math.exp(min(log_err, 700.0)))

    theta, S = eigh_tridiagonal(alphas[:k], betas[:k - 1])
    coef = S @ (np.exp(-1j * theta * dt) * S[0, :])
    v_next = V[:k].T @ coef
    return v_next, StepReport(k_used=k, error_estimate=err_est,
                              norm_after=float(np.linalg.norm(v_next)))


def step(matvec, state, dt, eps=DEFAULT_EPS, max_k=DEFAULT_MAX_K, workspace=None):
    """StateVector-level wrapper around lanczos_step; advances the timestamp."""
    flat, report = lanczos_step(matvec, state.ravel(), dt, eps, max_k, workspace)
    out = StateVector(flat.reshape(state.coeffs.shape), state.t + dt)
    return out, report


def krylov_dimension(matvec, v, dt, eps=DEFAULT_EPS, max_k=DEFAULT_MAX_K):
    """Smallest K satisfying the error product criterion, without storing
    the basis (two-vector recurrence; no propagated state is produced).

    This is what the K_max scans measure; it matches lanczos_step's adapted
    dimension whenever orthogonality holds.  Raises StiffnessError at the cap.
    """
    v = np.asarray(v, dtype=complex).ravel()
    q_prev = np.zeros_like(v)
    q = v / np.linalg.norm(v)
    w = np.asarray(matvec(q), dtype=complex).ravel()
    alpha = np.vdot(q, w).real
    w -= alpha * q
    k = 1
    sum_log_beta = 0.0
    log_dt = math.log(dt)
    log_eps = math.log(eps)
    scale = abs(alpha)
    while True:
        beta = np.linalg.norm(w)
        if beta <= 1e-14 * max(1.0, scale):
            return k
        log_err = 2.0 * (sum_log_beta + math.log(beta) + k * log_dt
                         - math.lgamma(k + 1))
        if log_err < log_eps:
            return k + 1
        if k + 1 >= max_k:
            raise StiffnessError(
                f"Krylov dimension cap {max_k} reached",
                k_reached=k + 1,
                error_estimate=math.exp(min(log_err, 700.0)))
        q_prev, q = q, w / beta
        w = np.asarray(matvec(q), dtype=complex).ravel()
        w -= beta * q_prev
        alpha = np.vdot(q, w).real
        w -= alpha * q
        sum_log_beta += math.log(beta)
        scale = max(scale, abs(alpha), beta)
        k += 1


def estimate_kmax(l_max, xi_1, dt, eps=DEFAULT_EPS, k_cap=10000):
    """Smallest K satisfying the Stirling-form stiffness bound.

    (K-1)/dt > e [2 pi (K-1) eps]^(-1/(2(K-1))) l_max(l_max+1)/(2 xi_1^2).
    A deliberate overestimate of the measured K (worst-case assumption that
    the Krylov recurrence reaches the top of the spectrum); returns None if
    no K <= k_cap satisfies the bound.
    """
    if xi_1 <= 0.0 or dt <= 0.0 or eps <= 0.0:
        raise ValueError("xi_1, dt and eps must be positive")
    stiff = l_max * (l_max + 1) / (2.0 * xi_1 ** 2)
    for k in range(2, k_cap + 1):
        bound = math.e * (2.0 * math.pi * (k - 1) * eps) ** (-0.5 / (k - 1)) * stiff
        if (k - 1) / dt > bound:
            return k
    return None


def kmax_scan(assembly, dt_grid, l_max_grid, trials=100, eps=DEFAULT_EPS,
              max_k=DEFAULT_MAX_K, seed=0):
    """Measured K_max over random normalized start vectors.

    For each (l_max, dt) pair the start vector populates only blocks
    l <= l_max with seeded Gaussian entries; K_max is the largest adapted
    dimension over ``trials`` vectors, or math.inf when the cap is hit.
    Meant for a field-free (or fixed-field) assembly, with the operator
    state frozen by the caller.
    """
    rng = np.random.default_rng(seed)
    n_ell, n_rad = assembly.n_ell, assembly.n_rad
    table = {}
    for l_sub in l_max_grid:
        if l_sub + 1 > n_ell:
            raise ValueError(f"scan l_max {l_sub} exceeds assembly l_max {n_ell - 1}")
        for dt in dt_grid:
            k_max = 0
            for _ in range(trials):
                c = np.zeros((n_ell, n_rad), dtype=complex)
                blk = rng.standard_normal((l_sub + 1, n_rad)) \
                    + 1j * rng.standard_normal((l_sub + 1, n_rad))
                c[:l_sub + 1] = blk
                v = c.ravel()
                v /= np.linalg.norm(v)
                try:
                    k_max = max(k_max, krylov_dimension(assembly.apply, v, dt,
                                                        eps, max_k))
                except StiffnessError:
                    k_max = math.inf
                    break
            table[(l_sub, dt)] = k_max
    return table
