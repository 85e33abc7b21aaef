"""Time-dependent block Hamiltonian for the scaled radial equations.

The state holds, for each angular momentum l, the inner coefficients
a_{k,l}, one bridge coefficient a_l (stored with the sqrt(2/(1+R))
convention, which keeps the matrix Hermitian and the plain Euclidean norm
equal to the physical norm) and the outer coefficients b_{k,l}.

Per l-block the operator reads:

    inner rows:   (1/2) K  +  V_l(xi)              (+ dipole coupling)
    bridge row:   (1/2R) K_bb + V_l(r_sigma), couplings K_b,inner /
                  sqrt(2(1+R)) and K_b,outer / sqrt(2 R^3 (1+R))
    outer rows:   K/(2R^2) + V_l(r_sigma + R(xi-r_sigma))
                  + (R Rddot / 2)(xi - r_sigma)^2

with K the derivative-overlap matrix of the FEDVR basis.  The dipole
coupling between neighboring l is F(t) g r(xi, t) in the length gauge; in
the velocity gauge it is built from the antisymmetrized first-derivative
matrix (scaled per region), the (l'(l'+1) - l(l+1))/r diagonal, and the
extra A Rdot (xi - r_sigma) term specific to exterior scaling.  With R == 1
everything reduces to the untransformed radial equations.

``apply`` is read-only and may be called concurrently; ``update_time``
mutates cached factors and requires exclusive access.
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from . import pulse as pulse_mod
from .errors import ConfigError, DimensionError
from .grid import CLS_BRIDGE, CLS_INNER, CLS_OUTER


@dataclass
class StateVector:
    """Complex coefficients ordered by l-block, plus their timestamp."""

    coeffs: np.ndarray  # (n_ell, n_rad) complex
    t: float = 0.0

    @classmethod
    def zero(cls, n_ell, n_rad, t=0.0):
        return cls(np.zeros((n_ell, n_rad), dtype=complex), t)

    @classmethod
    def from_flat(cls, flat, n_ell, n_rad, t=0.0):
        return cls(np.asarray(flat, dtype=complex).reshape(n_ell, n_rad).copy(), t)

    def ravel(self):
        return self.coeffs.ravel()

    def norm2(self):
        return float(np.vdot(self.coeffs, self.coeffs).real)

    def normalize(self):
        self.coeffs /= np.sqrt(self.norm2())
        return self

    def copy(self):
        return StateVector(self.coeffs.copy(), self.t)


def coulomb_potential(r, ell):
    """V_l(r) = l(l+1)/(2 r^2) - 1/r."""
    r = np.asarray(r, dtype=float)
    return ell * (ell + 1) / (2.0 * r * r) - 1.0 / r


def field_free_block(grid, ell):
    """Unscaled field-free radial block (1/2) K + V_l, as CSR."""
    H = 0.5 * grid.kinetic
    H = H + sparse.diags(coulomb_potential(grid.nodes, ell))
    return H.tocsr()


# class-pair codes indexing the time-dependent scale factors
_PAIR_II, _PAIR_IB, _PAIR_BB, _PAIR_OB, _PAIR_OO = range(5)
_PAIR_TABLE = {
    (CLS_INNER, CLS_INNER): _PAIR_II,
    (CLS_INNER, CLS_BRIDGE): _PAIR_IB,
    (CLS_BRIDGE, CLS_INNER): _PAIR_IB,
    (CLS_BRIDGE, CLS_BRIDGE): _PAIR_BB,
    (CLS_OUTER, CLS_BRIDGE): _PAIR_OB,
    (CLS_BRIDGE, CLS_OUTER): _PAIR_OB,
    (CLS_OUTER, CLS_OUTER): _PAIR_OO,
}


def _pair_codes(grid, mat):
    coo = mat.tocoo()
    codes = np.empty(coo.nnz, dtype=np.int8)
    for k, (i, j) in enumerate(zip(coo.row, coo.col)):
        codes[k] = _PAIR_TABLE[(grid.cls[i], grid.cls[j])]
    return codes


class HamiltonianAssembly:
    """Static matrix pieces plus per-step refresh of R(t)/field factors."""

    def __init__(self, grid, coupling, schedule, pulse, gauge=None):
        if gauge is None:
            gauge = pulse.gauge
        elif gauge != pulse.gauge:
            raise ConfigError(
                f"assembly gauge {gauge!r} conflicts with pulse gauge {pulse.gauge!r}")
        self.grid = grid
        self.coupling = coupling
        self.schedule = schedule
        self.pulse = pulse
        self.gauge = gauge
        self.n_rad = grid.n_basis
        self.n_ell = coupling.n_ell
        self.dim = self.n_ell * self.n_rad

        self._kin = grid.kinetic
        self._kin_codes = _pair_codes(grid, grid.kinetic)
        self._T = grid.kinetic.copy()
        self._anti = grid.antisym
        self._anti_codes = _pair_codes(grid, grid.antisym)
        self._Da = grid.antisym.copy()

        self._outer = (grid.cls == CLS_OUTER)
        self._ximr = np.where(self._outer, grid.nodes - grid.spec.r_sigma, 0.0)
        self._ll1 = np.arange(self.n_ell, dtype=float)
        self._ll1 *= self._ll1 + 1.0
        self._g_up = coupling.g_up  # g_{l,l+1}, length n_ell - 1

        self.filter = None  # set via stiffness.patch
        self._fdeltas = None

        self.update_time(0.0)

    # -- per-step refresh ---------------------------------------------------

    def update_time(self, t):
        """Refresh the R(t)-dependent entries and field factors; static
        integrals are untouched."""
        R, Rdot, Rddot = self.schedule.scale(t)
        F, A = pulse_mod.field_and_potential(self.pulse, t)
        self.t = t
        self.R, self.Rdot, self.Rddot = R, Rdot, Rddot
        self.F, self.A = F, A

        kin_fac = np.array([
            0.5,
            1.0 / np.sqrt(2.0 * (1.0 + R)),
            1.0 / (2.0 * R),
            1.0 / np.sqrt(2.0 * R ** 3 * (1.0 + R)),
            1.0 / (2.0 * R * R),
        ])
        self._T.data = self._kin.data * kin_fac[self._kin_codes]

        nodes = self.grid.nodes
        self._r_eff = np.where(self._outer,
                               self.grid.spec.r_sigma + R * self._ximr, nodes)
        self._inv_r = 1.0 / self._r_eff
        self._inv_2r2 = 0.5 * self._inv_r * self._inv_r
        self._harm = 0.5 * R * Rddot * self._ximr ** 2

        if self.gauge == pulse_mod.GAUGE_VELOCITY:
            anti_fac = np.array([
                1.0,
                np.sqrt(2.0 / (1.0 + R)),
                1.0,
                np.sqrt(2.0 / (R * (1.0 + R))),
                1.0 / R,
            ])
            self._Da.data = self._anti.data * anti_fac[self._anti_codes]
            self._ets_vel = A * Rdot * self._ximr

    # -- operator application ------------------------------------------------

    def apply(self, psi):
        """H(t) . psi (or the filtered operator when a filter is attached).

        ``psi`` is flat with ``self.dim`` complex entries; a same-shaped
        array is returned.
        """
        psi = np.asarray(psi)
        if psi.size != self.dim:
            raise DimensionError(f"state has {psi.size} entries, expected {self.dim}")
        C = psi.reshape(self.n_ell, self.n_rad)
        if not np.iscomplexobj(C):
            C = C.astype(complex)

        Y = self._T.dot(C.T).T.copy()
        Y += (self._harm - self._inv_r)[None, :] * C
        Y += self._ll1[:, None] * (self._inv_2r2[None, :] * C)
        if self._fdeltas is not None:
            dh, _, _, nf = self._fdeltas
            Y[:, :nf] += np.einsum("lij,lj->li", dh, C[:, :nf])
        self._add_interaction(C, Y)
        return Y.reshape(psi.shape)

    def _add_interaction(self, C, Y):
        """Add the dipole-coupling contribution of the current gauge to Y."""
        if self.n_ell < 2:
            return
        g = self._g_up
        if self.gauge == pulse_mod.GAUGE_LENGTH:
            if self.F != 0.0:
                mix = np.zeros_like(C)
                mix[:-1] += g[:, None] * C[1:]
                mix[1:] += g[:, None] * C[:-1]
                Y += self.F * self._r_eff[None, :] * mix
        elif self.A != 0.0:
            DC = self._Da.dot(C.T).T
            lam_up = 2.0 * np.arange(1, self.n_ell)  # l'(l'+1)-l(l+1) for l'=l+1
            pref = -0.5j * self.A
            Y[:-1] += pref * g[:, None] * (
                DC[1:] + lam_up[:, None] * self._inv_r[None, :] * C[1:])
            Y[1:] += pref * g[:, None] * (
                DC[:-1] - lam_up[:, None] * self._inv_r[None, :] * C[:-1])
            if self.Rdot != 0.0:
                mix = np.zeros_like(C)
                mix[:-1] += g[:, None] * C[1:]
                mix[1:] += g[:, None] * C[:-1]
                Y += (self.A * self.Rdot) * self._ximr[None, :] * mix
        if self._fdeltas is not None:
            _, dw_up, dw_dn, nf = self._fdeltas
            G = self.F if self.gauge == pulse_mod.GAUGE_LENGTH else self.A
            if G != 0.0:
                W = C[:, :nf]
                Y[:-1, :nf] += G * np.einsum("lij,lj->li", dw_up, W[1:])
                Y[1:, :nf] += G * np.einsum("lij,lj->li", dw_dn, W[:-1])

    def apply_interaction(self, psi):
        """Only the light-atom coupling part of the operator action."""
        psi = np.asarray(psi)
        if psi.size != self.dim:
            raise DimensionError(f"state has {psi.size} entries, expected {self.dim}")
        C = psi.reshape(self.n_ell, self.n_rad).astype(complex)
        Y = np.zeros_like(C)
        self._add_interaction(C, Y)
        return Y.reshape(psi.shape)

    def matvec(self, x):
        return self.apply(x)

    # -- introspection helpers ----------------------------------------------

    def to_dense(self, t=None, max_dim=20000):
        """Dense matrix of the current operator (small systems only)."""
        if t is not None:
            self.update_time(t)
        if self.dim > max_dim:
            raise DimensionError(f"refusing to densify a {self.dim}-dim operator")
        H = np.empty((self.dim, self.dim), dtype=complex)
        e = np.zeros(self.dim, dtype=complex)
        for j in range(self.dim):
            e[j] = 1.0
            H[:, j] = self.apply(e)
            e[j] = 0.0
        return H

    def nnz_estimate(self):
        """Structural nonzero count of the assembled sparse operator,
        including the dense filter windows."""
        kin = self._kin.copy()
        kin.eliminate_zeros()
        base = kin.nnz
        n = self.n_rad
        if self.filter is not None:
            nf = self.filter.n_filter
            win = kin[:nf, :nf]
            win_base = win.nnz
            removed = [bool(np.any(~m)) for m in self.filter.retained]
        else:
            nf = 0
            win_base = 0
            removed = [False] * self.n_ell

        total = 0
        for ell in range(self.n_ell):
            total += base + ((nf * nf - win_base) if removed[ell] else 0)
        for ell in range(self.n_ell - 1):
            dense = removed[ell] or removed[ell + 1]
            if self.gauge == pulse_mod.GAUGE_LENGTH:
                blk = n + ((nf * nf - nf) if dense else 0)
            else:
                blk = base + ((nf * nf - win_base) if dense else 0)
            total += 2 * blk
        return total


def assemble(grid, coupling, schedule, pulse, gauge=None):
    """Build the operator with all static pieces precomputed."""
    return HamiltonianAssembly(grid, coupling, schedule, pulse, gauge)


def velocity_gauge_terms(assembly, psi):
    """Velocity-gauge coupling contribution H_int . psi (zero when A = 0)."""
    if assembly.gauge != pulse_mod.GAUGE_VELOCITY:
        raise ConfigError("assembly is not in the velocity gauge")
    return assembly.apply_interaction(psi)
