"""Spectral stiffness filter for the near-nucleus block.

The large eigenvalues that force tiny Lanczos steps come from the
centrifugal potential at the innermost quadrature point; they grow like
l_max(l_max+1)/(2 xi_1^2).  The cure: diagonalize the field-free block
h_l restricted to the first n_fe_filter elements, drop every eigenvector
with e_{n,l} > e_cut, and reconstruct the block (and the interaction
window, with the time-dependent field factor divided out) inside the
retained subspace:

    h~_l    = P_l h_l P_l,          P_l = sum of retained |u><u|
    w~_ll'  = P_l w_ll' P_l'

Both become dense inside the window; everything else keeps the FEDVR
sparsity.  Removed states must localize near the nucleus - a removed state
with more than ``edge_threshold`` of its norm in the outermost filter
element triggers a hard error (enlarge n_fe_filter or e_cut).

Filtering is refused in the globally scaled limit (no inner region: every
matrix element would be time dependent).
"""

from dataclasses import dataclass, field

import numpy as np

from . import pulse as pulse_mod
from .errors import DimensionError, InvalidSpecError, LocalizationError
from .grid import CLS_INNER
from .hamiltonian import coulomb_potential

DEFAULT_EDGE_THRESHOLD = 0.10


def filter_window_size(n_dvr, n_fe_filter):
    """Number of basis functions in the filter window."""
    return (n_dvr - 1) * n_fe_filter - 1


def inner_blocks(grid, l_max, n_fe_filter):
    """Field-free blocks h_l over the first n_fe_filter elements.

    Restricting to the first (n_dvr-1)*n_fe_filter - 1 functions imposes a
    hard wall at the window edge automatically.
    """
    nf = filter_window_size(grid.spec.n_dvr, n_fe_filter)
    _check_window(grid, n_fe_filter, nf)
    kin = 0.5 * grid.kinetic[:nf, :nf].toarray()
    xi = grid.nodes[:nf]
    return [kin + np.diag(coulomb_potential(xi, ell)) for ell in range(l_max + 1)]


def interaction_windows(grid, coupling, gauge, n_fe_filter):
    """w_{l,l+1} inside the window, field factor divided out.

    Length gauge: g * diag(xi).  Velocity gauge: -i g [Da/2 + Lam/(2 xi)]
    with Lam = l'(l'+1) - l(l+1); the result is Hermitian per block pair.
    """
    nf = filter_window_size(grid.spec.n_dvr, n_fe_filter)
    _check_window(grid, n_fe_filter, nf)
    xi = grid.nodes[:nf]
    out = []
    if gauge == pulse_mod.GAUGE_LENGTH:
        for ell in range(coupling.l_max):
            out.append(coupling.g_up[ell] * np.diag(xi))
    else:
        half_da = 0.5 * grid.antisym[:nf, :nf].toarray()
        for ell in range(coupling.l_max):
            lam = 2.0 * (ell + 1.0)
            out.append(-1j * coupling.g_up[ell] * (half_da + np.diag(lam / (2.0 * xi))))
    return out


def _check_window(grid, n_fe_filter, nf):
    if grid.n_inner == 0:
        raise InvalidSpecError(
            "stiffness filtering needs an unscaled inner region "
            "(not applicable in the globally scaled limit)")
    if n_fe_filter < 1 or n_fe_filter > grid.spec.n_fe_inner:
        raise InvalidSpecError(
            f"n_fe_filter must lie in [1, {grid.spec.n_fe_inner}], got {n_fe_filter}")
    if nf < 1:
        raise InvalidSpecError("filter window holds no basis function")
    if np.any(grid.cls[:nf] != CLS_INNER):
        raise InvalidSpecError("filter window extends beyond the inner region")


@dataclass
class StiffnessFilter:
    """Per-l truncated eigenbases and reconstructed window blocks."""

    n_fe_filter: int
    n_filter: int
    e_cut: float
    eigenvalues: list          # (nf,) arrays, ascending
    eigenvectors: list         # (nf, nf) arrays, columns are eigenvectors
    retained: list             # (nf,) bool masks, e <= e_cut
    h_delta: np.ndarray        # (n_ell, nf, nf): h~_l - h_l
    w_delta_up: np.ndarray     # (n_ell-1, nf, nf): w~_{l,l+1} - w_{l,l+1}
    w_delta_dn: np.ndarray     # (n_ell-1, nf, nf): w~_{l+1,l} - w_{l+1,l}
    localization: list = field(default_factory=list)  # (l, n, e, edge_fraction)
    gauge: str = pulse_mod.GAUGE_LENGTH

    @property
    def n_ell(self):
        return len(self.eigenvalues)

    def n_removed(self, ell):
        return int(np.sum(~self.retained[ell]))


def build_filter(grid, coupling, gauge, n_fe_filter, e_cut,
                 edge_threshold=DEFAULT_EDGE_THRESHOLD):
    """Diagonalize the window blocks, apply the cutoff, run the
    localization safety check and precompute the reconstruction deltas.

    Raises LocalizationError if any removed state leaks to the window edge.
    """
    blocks = inner_blocks(grid, coupling.l_max, n_fe_filter)
    nf = blocks[0].shape[0]
    wins = interaction_windows(grid, coupling, gauge, n_fe_filter) \
        if coupling.l_max >= 1 else []

    evals, evecs, retained = [], [], []
    projectors = []
    loc_rows = []
    edge_lo = (n_fe_filter - 1) * grid.spec.delta_xi
    edge_nodes = grid.nodes[:nf] >= edge_lo * (1.0 - 1e-12)
    flagged = []
    for ell, h in enumerate(blocks):
        e, u = np.linalg.eigh(h)
        keep = e <= e_cut
        evals.append(e)
        evecs.append(u)
        retained.append(keep)
        projectors.append(None if keep.all() else u[:, keep] @ u[:, keep].T)
        for n in np.nonzero(~keep)[0]:
            frac = float(np.sum(np.abs(u[edge_nodes, n]) ** 2))
            loc_rows.append((ell, int(n), float(e[n]), frac))
            if frac > edge_threshold:
                flagged.append((ell, int(n), float(e[n]), frac))
    if flagged:
        worst = max(flagged, key=lambda r: r[3])
        raise LocalizationError(
            f"{len(flagged)} removed states keep >{edge_threshold:.0%} of their "
            f"norm in the last filter element (worst: l={worst[0]}, "
            f"e={worst[2]:.1f}, edge fraction {worst[3]:.2f}); "
            "n_fe_filter and/or e_cut must be set larger")

    n_ell = coupling.n_ell
    cdtype = float if gauge == pulse_mod.GAUGE_LENGTH else complex
    h_delta = np.zeros((n_ell, nf, nf))
    w_delta_up = np.zeros((n_ell - 1, nf, nf), dtype=cdtype) if n_ell > 1 else \
        np.zeros((0, nf, nf), dtype=cdtype)
    w_delta_dn = np.zeros_like(w_delta_up)
    for ell in range(n_ell):
        if projectors[ell] is not None:
            P = projectors[ell]
            h_delta[ell] = P @ blocks[ell] @ P - blocks[ell]
    for ell in range(n_ell - 1):
        Pl = projectors[ell]
        Pr = projectors[ell + 1]
        if Pl is None and Pr is None:
            continue
        w = wins[ell]
        left = w if Pl is None else Pl @ w
        wtil = left if Pr is None else left @ Pr
        w_delta_up[ell] = wtil - w
        w_delta_dn[ell] = w_delta_up[ell].conj().T

    return StiffnessFilter(
        n_fe_filter=n_fe_filter, n_filter=nf, e_cut=float(e_cut),
        eigenvalues=evals, eigenvectors=evecs, retained=retained,
        h_delta=h_delta, w_delta_up=w_delta_up, w_delta_dn=w_delta_dn,
        localization=loc_rows, gauge=gauge)


def patch(assembly, filt):
    """Attach the filter to the assembly; apply() then acts with the
    stiffness-free operator.  Re-patching with the same filter is a no-op."""
    if filt.n_ell != assembly.n_ell:
        raise DimensionError(
            f"filter covers {filt.n_ell} angular blocks, assembly has {assembly.n_ell}")
    if filt.n_filter > assembly.grid.n_inner:
        raise DimensionError("filter window larger than the inner region")
    if filt.gauge != assembly.gauge:
        raise DimensionError(
            f"filter built for {filt.gauge} gauge, assembly uses {assembly.gauge}")
    assembly.filter = filt
    assembly._fdeltas = (filt.h_delta, filt.w_delta_up, filt.w_delta_dn,
                         filt.n_filter)


def unpatch(assembly):
    assembly.filter = None
    assembly._fdeltas = None


def format_localization_report(filt):
    """Plain-text table of removed states: l, n, e_{nl}, edge fraction."""
    lines = [f"removed states (e_cut = {filt.e_cut:g}, window = "
             f"{filt.n_fe_filter} elements / {filt.n_filter} functions)",
             f"{'l':>5} {'n':>5} {'e_nl':>14} {'edge_fraction':>14}"]
    for ell, n, e, frac in filt.localization:
        lines.append(f"{ell:>5} {n:>5} {e:>14.6g} {frac:>14.3e}")
    if not filt.localization:
        lines.append("  (none)")
    return "\n".join(lines)
