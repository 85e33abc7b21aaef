"""FEDVR radial basis on [0, xi_max] split at r_sigma.

The interval is divided into equal-width finite elements, ``n_fe_inner`` of
them covering [0, r_sigma] and ``n_fe_outer`` covering (r_sigma, xi_max].
Each element carries a Gauss-Lobatto rule with ``n_dvr`` points; basis
functions are the weight-normalized Lobatto shape functions, with element
boundaries joined by bridge-style functions and the two domain-edge
functions removed (every basis function vanishes at 0 and xi_max).

All static one-dimensional integrals needed elsewhere are assembled here:
the derivative overlaps  int chi'_k chi'_k' dxi  (kinetic structure) and the
antisymmetrized first-derivative couplings  int (chi_k chi'_k' - chi'_k
chi_k') dxi  (velocity gauge).  Multiplicative operators are diagonal at the
nodes by the DVR quadrature rule.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import InvalidSpecError, SingularityError

_NEWTON_TOL = 1e-14

# basis-function class labels
CLS_INNER = 0
CLS_BRIDGE = 1
CLS_OUTER = 2


def _legendre_and_derivative(m, x):
    """P_m(x) and P'_m(x) by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if m == 0:
        return p_prev, np.zeros_like(x)
    p = x.copy()
    for k in range(2, m + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    # (1 - x^2) P'_m = m (P_{m-1} - x P_m), endpoints handled by caller
    with np.errstate(divide="ignore", invalid="ignore"):
        dp = m * (p_prev - x * p) / (1.0 - x * x)
    return p, dp


def lobatto_rule(n, a, b):
    """Gauss-Lobatto nodes and weights on [a, b].

    The n nodes include both endpoints; interior nodes are the roots of
    P'_{n-1}, found by Newton iteration to 1e-14 in position.  The rule
    integrates polynomials up to degree 2n-3 exactly; weights are positive
    and sum to b - a.
    """
    if n < 2:
        raise InvalidSpecError(f"a Lobatto rule needs at least 2 points, got {n}")
    if not a < b:
        raise InvalidSpecError(f"empty interval [{a}, {b}]")
    m = n - 1
    x = np.empty(n)
    x[0], x[-1] = -1.0, 1.0
    if n > 2:
        # Chebyshev-Gauss-Lobatto interior points as the initial guess
        xi = -np.cos(np.pi * np.arange(1, m) / m)
        for _ in range(100):
            p, dp = _legendre_and_derivative(m, xi)
            # d/dx P'_m = (2x P'_m - m(m+1) P_m) / (1 - x^2)
            d2p = (2.0 * xi * dp - m * (m + 1) * p) / (1.0 - xi * xi)
            step = dp / d2p
            xi = xi - step
            if np.max(np.abs(step)) < _NEWTON_TOL:
                break
        x[1:-1] = xi
    x = 0.5 * (x - x[::-1])  # enforce exact symmetry about 0
    p, _ = _legendre_and_derivative(m, x)
    w = 2.0 / (m * (m + 1) * p * p)
    nodes = 0.5 * (a + b) + 0.5 * (b - a) * x
    nodes[0], nodes[-1] = a, b
    return nodes, 0.5 * (b - a) * w


def _barycentric_weights(x):
    lam = np.ones_like(x)
    for i in range(len(x)):
        lam[i] = 1.0 / np.prod(x[i] - np.delete(x, i))
    return lam


def _differentiation_matrix(x, lam):
    """D[q, i] = f_i'(x_q) for the Lagrange cardinal functions on nodes x."""
    n = len(x)
    D = np.zeros((n, n))
    for q in range(n):
        for i in range(n):
            if i != q:
                D[q, i] = (lam[i] / lam[q]) / (x[q] - x[i])
        D[q, q] = -np.sum(D[q, :])
    return D


@dataclass(frozen=True)
class GridSpec:
    """Geometry of the radial FEDVR basis.

    r_sigma must sit exactly on an element boundary:
    r_sigma = n_fe_inner * delta_xi with delta_xi = xi_max / (n_fe_inner +
    n_fe_outer).  n_fe_inner = 0 selects the globally scaled limit (no inner
    region, no bridge); n_fe_outer = 0 leaves everything inner.
    """

    r_sigma: float
    xi_max: float
    n_dvr: int
    n_fe_inner: int
    n_fe_outer: int
    delta_xi: float = field(init=False)

    def __post_init__(self):
        if self.n_dvr < 2:
            raise InvalidSpecError(f"n_dvr must be >= 2, got {self.n_dvr}")
        if self.n_fe_inner < 0 or self.n_fe_outer < 0:
            raise InvalidSpecError("element counts must be nonnegative")
        n_fe = self.n_fe_inner + self.n_fe_outer
        if n_fe < 1:
            raise InvalidSpecError("need at least one finite element")
        if not (0.0 <= self.r_sigma <= self.xi_max):
            raise InvalidSpecError(
                f"need 0 <= r_sigma <= xi_max, got r_sigma={self.r_sigma}, "
                f"xi_max={self.xi_max}"
            )
        if self.r_sigma == self.xi_max and self.n_fe_outer > 0:
            raise InvalidSpecError("r_sigma = xi_max requires n_fe_outer = 0")
        if self.xi_max <= 0.0:
            raise InvalidSpecError("xi_max must be positive")
        dxi = self.xi_max / n_fe
        if abs(self.r_sigma - self.n_fe_inner * dxi) > 1e-9 * max(1.0, self.xi_max):
            raise InvalidSpecError(
                f"r_sigma={self.r_sigma} is not on an element boundary "
                f"(expected {self.n_fe_inner * dxi} for {self.n_fe_inner} "
                f"inner elements of width {dxi})"
            )
        object.__setattr__(self, "delta_xi", dxi)

    @property
    def n_fe(self):
        return self.n_fe_inner + self.n_fe_outer

    @property
    def n_basis(self):
        return (self.n_dvr - 1) * self.n_fe - 1


class RadialGrid:
    """Assembled FEDVR basis: nodes, weights, labels and static integrals.

    Immutable after construction; safe to share between workers.

    Attributes
    ----------
    nodes, weights : (n_basis,) float arrays
        Global DVR points (domain edges excluded) and their composite
        quadrature weights (element-boundary points carry the sum of both
        sides).
    cls : (n_basis,) int8 array
        CLS_INNER / CLS_BRIDGE / CLS_OUTER per basis function.  Exactly one
        bridge exists when both regions hold elements.
    kinetic : CSR matrix
        int chi'_k chi'_k' dxi, symmetric, block-structured per element.
    antisym : CSR matrix
        int (chi_k chi'_k' - chi'_k chi_k') dxi, antisymmetric.
    """

    def __init__(self, spec):
        self.spec = spec
        n_dvr, n_fe = spec.n_dvr, spec.n_fe
        x_ref, w_ref = lobatto_rule(n_dvr, -1.0, 1.0)
        lam_ref = _barycentric_weights(x_ref)
        D_ref = _differentiation_matrix(x_ref, lam_ref)

        # reference element integrals (exact: integrands of degree <= 2n-3)
        kin_ref = (w_ref[:, None, None] * D_ref[:, :, None] * D_ref[:, None, :]).sum(axis=0)
        anti_ref = w_ref[:, None] * D_ref - (w_ref[:, None] * D_ref).T

        bounds = np.linspace(0.0, spec.xi_max, n_fe + 1)
        if spec.n_fe_inner > 0:
            bounds[spec.n_fe_inner] = spec.r_sigma  # exact boundary at the scaling surface
        half = 0.5 * spec.delta_xi

        n_nodes_all = n_fe * (n_dvr - 1) + 1      # shared boundaries counted once
        nodes_all = np.empty(n_nodes_all)
        weights_all = np.zeros(n_nodes_all)
        for e in range(n_fe):
            lo = e * (n_dvr - 1)
            nodes_all[lo:lo + n_dvr] = bounds[e] + half * (x_ref + 1.0)
            weights_all[lo:lo + n_dvr] += half * w_ref
        nodes_all[0], nodes_all[-1] = 0.0, spec.xi_max

        self.n_basis = spec.n_basis
        self.nodes = nodes_all[1:-1].copy()
        self.weights = weights_all[1:-1].copy()

        cls = np.full(self.n_basis, CLS_OUTER, dtype=np.int8)
        self.i_bridge = None
        if spec.n_fe_inner > 0:
            if spec.n_fe_outer > 0:
                ib = (n_dvr - 1) * spec.n_fe_inner - 1  # 0-based global index
                cls[:ib] = CLS_INNER
                cls[ib] = CLS_BRIDGE
                self.i_bridge = ib
            else:
                cls[:] = CLS_INNER
        self.cls = cls
        self.n_inner = int(np.sum(cls == CLS_INNER))
        self.n_outer = int(np.sum(cls == CLS_OUTER))

        # scatter element integrals into global matrices, normalization 1/sqrt(W_i W_j)
        inv_sqrt_w = 1.0 / np.sqrt(self.weights)
        rows, cols, kvals, avals = [], [], [], []
        kin_elem = kin_ref * (2.0 / spec.delta_xi)
        for e in range(n_fe):
            gidx = np.arange(e * (n_dvr - 1), e * (n_dvr - 1) + n_dvr) - 1
            keep = (gidx >= 0) & (gidx < self.n_basis)
            loc = np.nonzero(keep)[0]
            g = gidx[keep]
            scal = inv_sqrt_w[g]
            rows.append(np.repeat(g, len(g)))
            cols.append(np.tile(g, len(g)))
            kvals.append((kin_elem[np.ix_(loc, loc)] * np.outer(scal, scal)).ravel())
            avals.append((anti_ref[np.ix_(loc, loc)] * np.outer(scal, scal)).ravel())
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        shape = (self.n_basis, self.n_basis)
        self.kinetic = sparse.csr_matrix(
            (np.concatenate(kvals), (rows, cols)), shape=shape)
        self.antisym = sparse.csr_matrix(
            (np.concatenate(avals), (rows, cols)), shape=shape)
        self.kinetic.sum_duplicates()
        self.antisym.sum_duplicates()

        # kept for pointwise basis evaluation
        self._bounds = bounds
        self._x_ref = x_ref
        self._lam_ref = lam_ref
        self._inv_sqrt_w = inv_sqrt_w

    @property
    def xi1(self):
        """First interior node; sets the centrifugal stiffness scale 1/(2 xi1^2)."""
        return self.nodes[0]

    def quadrature_diag(self, f):
        """Diagonal DVR representation of a multiplicative operator.

        ``f`` may be a callable of xi or an array of node values.  The bridge
        point at r_sigma is included like any other node (unit weight in the
        operator sense).
        """
        vals = np.asarray(f(self.nodes) if callable(f) else f, dtype=float)
        if vals.shape != self.nodes.shape:
            raise InvalidSpecError("diagonal values must match the node count")
        if not np.all(np.isfinite(vals)):
            bad = self.nodes[~np.isfinite(vals)]
            raise SingularityError(f"operator non-finite at nodes {bad[:3]}...")
        return vals

    def eval_matrix(self, xi_points):
        """Sparse matrix B with B[p, k] = chi_k(xi_p) for arbitrary points.

        Lagrange interpolation through the element nodes; points outside
        [0, xi_max] are rejected.  Intended for plotting and wave-function
        reconstruction, not for inner loops.
        """
        xi = np.atleast_1d(np.asarray(xi_points, dtype=float))
        if np.any(xi < 0.0) or np.any(xi > self.spec.xi_max * (1 + 1e-12)):
            raise InvalidSpecError("evaluation points outside [0, xi_max]")
        n_dvr = self.spec.n_dvr
        n_fe = self.spec.n_fe
        elem = np.minimum((xi / self.spec.delta_xi).astype(int), n_fe - 1)
        pt_idx, basis_idx, vals = [], [], []
        for e in np.unique(elem):
            pts = np.nonzero(elem == e)[0]
            x_loc = (xi[pts] - self._bounds[e]) / (0.5 * self.spec.delta_xi) - 1.0
            # barycentric cardinal evaluation, exact at the nodes
            diff = x_loc[:, None] - self._x_ref[None, :]
            card = np.empty((len(pts), n_dvr))
            on_node = np.abs(diff) < 1e-14
            regular = ~on_node.any(axis=1)
            if np.any(regular):
                ratio = self._lam_ref[None, :] / diff[regular]
                card[regular] = ratio / ratio.sum(axis=1, keepdims=True)
            for p in np.nonzero(~regular)[0]:
                card[p] = on_node[p].astype(float)
            gidx = np.arange(e * (n_dvr - 1), e * (n_dvr - 1) + n_dvr) - 1
            keep = (gidx >= 0) & (gidx < self.n_basis)
            for j in np.nonzero(keep)[0]:
                g = gidx[j]
                pt_idx.append(pts)
                basis_idx.append(np.full(len(pts), g))
                vals.append(card[:, j] * self._inv_sqrt_w[g])
        B = sparse.csr_matrix(
            (np.concatenate(vals), (np.concatenate(pt_idx), np.concatenate(basis_idx))),
            shape=(len(xi), self.n_basis))
        B.sum_duplicates()
        return B


def build_grid(spec):
    """Assemble the FEDVR basis for ``spec`` (see RadialGrid)."""
    return RadialGrid(spec)
