"""Independent reference implementations used as test oracles.

Everything here is written in plain-loop style, directly from the working
equations, so that a bug in the vectorized production code cannot hide in a
shared implementation.
"""

import numpy as np

from etsolve.grid import CLS_BRIDGE, CLS_INNER, CLS_OUTER
from etsolve.pulse import GAUGE_LENGTH, field_and_potential


def lagrange_value(x, nodes, i):
    v = 1.0
    for m, xm in enumerate(nodes):
        if m != i:
            v *= (x - xm) / (nodes[i] - xm)
    return v


def lagrange_derivative(x, nodes, i):
    total = 0.0
    for k, xk in enumerate(nodes):
        if k == i:
            continue
        term = 1.0 / (nodes[i] - xk)
        for m, xm in enumerate(nodes):
            if m != i and m != k:
                term *= (x - xm) / (nodes[i] - xm)
        total += term
    return total


def basis_on_quad(grid, n_quad=60):
    """Evaluate every basis function and derivative on a dense Gauss-Legendre
    grid per element.  Returns (points, gauss weights, values, derivatives)."""
    spec = grid.spec
    xg, wg = np.polynomial.legendre.leggauss(n_quad)
    pts, wts = [], []
    vals = np.zeros((grid.n_basis, spec.n_fe * n_quad))
    ders = np.zeros_like(vals)
    bounds = np.linspace(0.0, spec.xi_max, spec.n_fe + 1)
    for e in range(spec.n_fe):
        a, b = bounds[e], bounds[e + 1]
        x = 0.5 * (a + b) + 0.5 * (b - a) * xg
        pts.append(x)
        wts.append(0.5 * (b - a) * wg)
        loc_nodes = 0.5 * (a + b) + 0.5 * (b - a) * grid._x_ref
        for j in range(spec.n_dvr):
            gidx = e * (spec.n_dvr - 1) + j - 1
            if gidx < 0 or gidx >= grid.n_basis:
                continue
            scale = 1.0 / np.sqrt(grid.weights[gidx])
            col = slice(e * n_quad, (e + 1) * n_quad)
            for q, xq in enumerate(x):
                vals[gidx, col][q] += scale * lagrange_value(xq, loc_nodes, j)
                ders[gidx, col][q] += scale * lagrange_derivative(xq, loc_nodes, j)
    return np.concatenate(pts), np.concatenate(wts), vals, ders


def dense_hamiltonian(grid, coupling, schedule, pulse, t, filt=None):
    """Dense H(t) assembled entry by entry from the working equations."""
    R, Rdot, Rddot = schedule.scale(t)
    F, A = field_and_potential(pulse, t)
    r_sigma = grid.spec.r_sigma
    n = grid.n_basis
    L = coupling.n_ell
    K = grid.kinetic.toarray()
    Da = grid.antisym.toarray()
    cls = grid.cls
    xi = grid.nodes

    def kin_factor(ci, cj):
        pair = {ci, cj}
        if pair == {CLS_INNER}:
            return 0.5
        if pair == {CLS_INNER, CLS_BRIDGE}:
            return 1.0 / np.sqrt(2.0 * (1.0 + R))
        if pair == {CLS_BRIDGE}:
            return 1.0 / (2.0 * R)
        if pair == {CLS_OUTER, CLS_BRIDGE}:
            return 1.0 / np.sqrt(2.0 * R ** 3 * (1.0 + R))
        return 1.0 / (2.0 * R * R)

    def anti_factor(ci, cj):
        pair = {ci, cj}
        if pair == {CLS_INNER}:
            return 1.0
        if pair == {CLS_INNER, CLS_BRIDGE}:
            return np.sqrt(2.0 / (1.0 + R))
        if pair == {CLS_OUTER, CLS_BRIDGE}:
            return np.sqrt(2.0 / (R * (1.0 + R)))
        if pair == {CLS_OUTER}:
            return 1.0 / R
        return 1.0

    def r_of(k):
        if cls[k] == CLS_OUTER:
            return r_sigma + R * (xi[k] - r_sigma)
        return xi[k]

    H = np.zeros((L, n, L, n), dtype=complex)
    for ell in range(L):
        for i in range(n):
            for j in range(n):
                if K[i, j] != 0.0:
                    H[ell, i, ell, j] += kin_factor(cls[i], cls[j]) * K[i, j]
            r = r_of(i)
            v = ell * (ell + 1) / (2 * r * r) - 1.0 / r
            if cls[i] == CLS_OUTER:
                v += 0.5 * R * Rddot * (xi[i] - r_sigma) ** 2
            H[ell, i, ell, i] += v

    for ell in range(L - 1):
        g = coupling.g(ell, ell + 1)
        lam = (ell + 1) * (ell + 2) - ell * (ell + 1)  # l'(l'+1) - l(l+1), l' = l+1
        for i in range(n):
            if pulse.gauge == GAUGE_LENGTH:
                w = F * g * r_of(i)
                H[ell, i, ell + 1, i] += w
                H[ell + 1, i, ell, i] += w
            else:
                H[ell, i, ell + 1, i] += -0.5j * A * g * lam / r_of(i)
                H[ell + 1, i, ell, i] += -0.5j * A * g * (-lam) / r_of(i)
                if cls[i] == CLS_OUTER:
                    extra = g * A * Rdot * (xi[i] - r_sigma)
                    H[ell, i, ell + 1, i] += extra
                    H[ell + 1, i, ell, i] += extra
                for j in range(n):
                    if Da[i, j] != 0.0:
                        d = anti_factor(cls[i], cls[j]) * Da[i, j]
                        H[ell, i, ell + 1, j] += -0.5j * A * g * d
                        H[ell + 1, i, ell, j] += -0.5j * A * g * d

    if filt is not None:
        nf = filt.n_filter
        for ell in range(L):
            H[ell, :nf, ell, :nf] += filt.h_delta[ell]
        G = F if pulse.gauge == GAUGE_LENGTH else A
        for ell in range(L - 1):
            H[ell, :nf, ell + 1, :nf] += G * filt.w_delta_up[ell]
            H[ell + 1, :nf, ell, :nf] += G * filt.w_delta_dn[ell]

    return H.reshape(L * n, L * n)


def dense_expm_step(H, v, dt):
    """exp(-i H dt) v by full eigen-decomposition (Hermitian H)."""
    evals, evecs = np.linalg.eigh(H)
    return evecs @ (np.exp(-1j * evals * dt) * (evecs.conj().T @ v))
