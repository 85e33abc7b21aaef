import numpy as np
import pytest

from etsolve.errors import InvalidSpecError, SingularityError
from etsolve.grid import (CLS_BRIDGE, CLS_INNER, CLS_OUTER, GridSpec,
                          build_grid, lobatto_rule)

from oracles import basis_on_quad


def test_lobatto_two_points():
    nodes, weights = lobatto_rule(2, 0.0, 1.0)
    assert np.allclose(nodes, [0.0, 1.0])
    assert np.allclose(weights, [0.5, 0.5])


def test_lobatto_three_points_classical():
    nodes, weights = lobatto_rule(3, -1.0, 1.0)
    assert np.allclose(nodes, [-1.0, 0.0, 1.0], atol=1e-15)
    assert np.allclose(weights, [1 / 3, 4 / 3, 1 / 3], rtol=1e-14)


def test_lobatto_first_interior_node_sets_stiffness_scale():
    # N_dvr = 10 on a width-1.5 element: (2 xi_1^2)^-1 = 137.28
    nodes, _ = lobatto_rule(10, 0.0, 1.5)
    assert abs(1.0 / (2.0 * nodes[1] ** 2) - 137.28) / 137.28 < 1e-3
    assert abs(nodes[1] - 0.06035) < 1e-5


@pytest.mark.parametrize("n", [2, 3, 5, 8, 10, 15])
def test_lobatto_exact_for_low_degree_monomials(n):
    # exact up to degree 2n - 3 against analytic integrals on [0, 2]
    nodes, weights = lobatto_rule(n, 0.0, 2.0)
    assert np.all(weights > 0)
    assert abs(weights.sum() - 2.0) < 1e-13
    for k in range(2 * n - 2):
        quad = np.sum(weights * nodes ** k)
        exact = 2.0 ** (k + 1) / (k + 1)
        assert abs(quad - exact) < 1e-12 * max(1.0, exact), f"degree {k}"


def test_lobatto_rejects_single_point():
    with pytest.raises(InvalidSpecError):
        lobatto_rule(1, 0.0, 1.0)


def test_gridspec_derives_width_and_validates_boundary():
    spec = GridSpec(30.0, 450.0, 10, 20, 280)
    assert spec.delta_xi == pytest.approx(1.5)
    with pytest.raises(InvalidSpecError):
        GridSpec(31.0, 450.0, 10, 20, 280)  # off an element boundary
    with pytest.raises(InvalidSpecError):
        GridSpec(30.0, 450.0, 1, 20, 280)   # n_dvr too small


def test_paper_scale_grid_size():
    grid = build_grid(GridSpec(30.0, 450.0, 10, 20, 280))
    assert grid.n_basis == 2699
    assert grid.i_bridge == (10 - 1) * 20 - 1
    assert grid.cls[grid.i_bridge] == CLS_BRIDGE
    assert np.all(grid.cls[:grid.i_bridge] == CLS_INNER)
    assert np.all(grid.cls[grid.i_bridge + 1:] == CLS_OUTER)
    assert grid.nodes[grid.i_bridge] == pytest.approx(30.0, abs=1e-12)
    # no node at the domain edges
    assert grid.nodes[0] > 0.0 and grid.nodes[-1] < 450.0


def test_smallest_legal_grid_is_the_bridge_alone():
    grid = build_grid(GridSpec(0.75, 1.5, 2, 1, 1))
    assert grid.n_basis == 1
    assert grid.cls[0] == CLS_BRIDGE


def test_all_inner_grid_has_no_bridge():
    grid = build_grid(GridSpec(60.0, 60.0, 10, 40, 0))
    assert grid.n_basis == 359
    assert grid.i_bridge is None
    assert np.all(grid.cls == CLS_INNER)


def test_gts_grid_is_all_outer():
    grid = build_grid(GridSpec(0.0, 60.0, 10, 0, 40))
    assert grid.i_bridge is None
    assert np.all(grid.cls == CLS_OUTER)


def test_quadrature_gram_matrix_is_identity():
    grid = build_grid(GridSpec(3.0, 7.5, 6, 2, 3))
    # <chi_i, chi_j> under the composite rule: sum_q W_q chi_i(q) chi_j(q)
    B = grid.eval_matrix(grid.nodes).toarray()
    gram = (B * grid.weights[:, None]).T @ B
    assert np.max(np.abs(gram - np.eye(grid.n_basis))) < 1e-13


def test_derivative_integrals_against_reference_quadrature():
    grid = build_grid(GridSpec(3.0, 7.5, 5, 2, 3))
    pts, wts, vals, ders = basis_on_quad(grid, n_quad=40)
    K_ref = (ders * wts) @ ders.T
    A_ref = (vals * wts) @ ders.T - (ders * wts) @ vals.T
    assert np.max(np.abs(grid.kinetic.toarray() - K_ref)) < 1e-10
    assert np.max(np.abs(grid.antisym.toarray() - A_ref)) < 1e-10


def test_kinetic_block_structure_and_symmetry():
    grid = build_grid(GridSpec(3.0, 7.5, 5, 2, 3))
    K = grid.kinetic.toarray()
    A = grid.antisym.toarray()
    assert np.max(np.abs(K - K.T)) < 1e-12
    assert np.max(np.abs(A + A.T)) < 1e-14
    # inner-outer entries vanish except through the bridge
    ib = grid.i_bridge
    inner = grid.cls == CLS_INNER
    outer = grid.cls == CLS_OUTER
    assert np.max(np.abs(K[np.ix_(inner, outer)])) == 0.0
    assert abs(K[ib - 1, ib + 1]) == 0.0


def test_bridge_kinetic_split_identity():
    # 2 int_0^{r_sigma} (chi_b')^2 = int_0^{xi_max} (chi_b')^2 for equal widths
    grid = build_grid(GridSpec(3.0, 7.5, 5, 2, 3))
    pts, wts, vals, ders = basis_on_quad(grid, n_quad=40)
    ib = grid.i_bridge
    left = pts <= grid.spec.r_sigma
    half = np.sum(wts[left] * ders[ib, left] ** 2)
    full = np.sum(wts * ders[ib] ** 2)
    assert abs(2 * half - full) < 1e-10 * abs(full)
    assert abs(full - grid.kinetic[ib, ib]) < 1e-10 * abs(full)


def test_quadrature_diag():
    grid = build_grid(GridSpec(3.0, 7.5, 5, 2, 3))
    ones = grid.quadrature_diag(lambda xi: np.ones_like(xi))
    assert np.allclose(ones, 1.0)
    coord = grid.quadrature_diag(lambda xi: xi)
    assert np.allclose(coord, grid.nodes)
    with pytest.raises(SingularityError):
        grid.quadrature_diag(lambda xi: 1.0 / (xi - grid.nodes[3]))


def test_bridge_region_quadrature_rule():
    # Under the composite DVR rule, 2 int_0^{r_sigma} chi_b f chi_b evaluates
    # to exactly f(r_sigma): the bridge point carries half its weight on each
    # side.  The analytic integral approaches this value as n_dvr grows.
    f = lambda xi: 2.0 * xi + 0.7
    grid = build_grid(GridSpec(3.0, 7.5, 5, 2, 3))
    ib = grid.i_bridge
    w_left = grid.weights[ib] / 2.0  # equal widths: half the composite weight
    chi_b_at_node = 1.0 / np.sqrt(grid.weights[ib])
    quad_half = w_left * chi_b_at_node ** 2 * f(grid.nodes[ib])
    assert 2.0 * quad_half == pytest.approx(f(grid.spec.r_sigma), rel=1e-14)

    defects = []
    for n_dvr in (5, 10):
        g = build_grid(GridSpec(3.0, 7.5, n_dvr, 2, 3))
        pts, wts, vals, _ = basis_on_quad(g, n_quad=40)
        full = np.sum(wts * vals[g.i_bridge] ** 2 * f(pts))
        defects.append(abs(full / f(g.spec.r_sigma) - 1.0))
    assert defects[0] < 0.15 and defects[1] < 0.06
    assert defects[1] < defects[0]


def test_eval_matrix_reproduces_dvr_cardinality():
    grid = build_grid(GridSpec(3.0, 7.5, 5, 2, 3))
    B = grid.eval_matrix(grid.nodes).toarray()
    expected = np.diag(1.0 / np.sqrt(grid.weights))
    assert np.max(np.abs(B - expected)) < 1e-12
    # basis functions vanish at the domain edges
    edges = grid.eval_matrix(np.array([0.0, grid.spec.xi_max])).toarray()
    assert np.max(np.abs(edges)) < 1e-12
