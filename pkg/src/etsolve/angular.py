"""Dipole angular couplings for linear polarization (m = 0).

g_{l,l'} = sqrt(4 pi / 3) * int Y*_{l0} Y_{10} Y_{l'0} dOmega, which is the
matrix element of cos(theta) between m = 0 spherical harmonics.  The
selection rule |l - l'| = 1 holds exactly; the closed form is

    g_{l,l+1} = (l + 1) / sqrt((2l + 1)(2l + 3)).

Each table is verified at build time against a Gauss-Legendre quadrature of
the defining integral (exact for polynomial integrands).
"""

import numpy as np
from numpy.polynomial import legendre as npleg


def _coupling_by_quadrature(l_max):
    """g_{l,l+1} from polar-angle quadrature of the defining integral."""
    # integrand x * Pbar_l(x) * Pbar_{l+1}(x) is a polynomial of degree 2l+2
    x, w = np.polynomial.legendre.leggauss(l_max + 3)
    g = np.empty(l_max + 1) if l_max >= 0 else np.empty(0)
    for ell in range(l_max + 1):
        pl = npleg.legval(x, [0.0] * ell + [1.0]) * np.sqrt((2 * ell + 1) / 2.0)
        pl1 = npleg.legval(x, [0.0] * (ell + 1) + [1.0]) * np.sqrt((2 * ell + 3) / 2.0)
        g[ell] = np.sum(w * x * pl * pl1)
    return g


class AngularCoupling:
    """Table of g_{l,l'} for 0 <= l, l' <= l_max, plus fast accessors."""

    def __init__(self, l_max, verify_tol=1e-12):
        if l_max < 0:
            raise ValueError(f"l_max must be >= 0, got {l_max}")
        self.l_max = l_max
        ell = np.arange(l_max, dtype=float)  # couplings l <-> l+1
        self.g_up = (ell + 1.0) / np.sqrt((2 * ell + 1.0) * (2 * ell + 3.0))
        if verify_tol is not None and l_max >= 1:
            ref = _coupling_by_quadrature(l_max - 1)
            err = np.max(np.abs(self.g_up - ref)) if l_max >= 1 else 0.0
            if err > verify_tol:
                raise AssertionError(
                    f"closed-form coupling deviates from quadrature by {err:.3e}")

    def g(self, l1, l2):
        """g_{l1,l2}; zero unless |l1 - l2| = 1."""
        lo, hi = min(l1, l2), max(l1, l2)
        if hi - lo != 1 or lo < 0 or hi > self.l_max:
            return 0.0
        return float(self.g_up[lo])

    @property
    def n_ell(self):
        return self.l_max + 1


def coupling_table(l_max):
    """Build the verified coupling table up to l_max."""
    return AngularCoupling(l_max)
