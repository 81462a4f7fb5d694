import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unigrid.discretization import (ELEMENT_STIFFNESS, assemble_fd_1d, assemble_fem_2d,
                                    assemble_picard_1d, mesh_density_a, sigma_1d_jump,
                                    sigma_2d_region, sigma_checkerboard)
from unigrid.sparse import diagonal_dominance_violations, is_irreducible, is_z_matrix, to_dense


def one(x):
    return np.ones_like(np.asarray(x, dtype=float))


def zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def q1_stiffness_oracle():
    """Gradient products of the Q1 basis on the unit square by 2x2 Gauss quadrature."""
    g = np.array([0.5 - 0.5 / np.sqrt(3), 0.5 + 0.5 / np.sqrt(3)])
    corners = [(0, 0), (1, 0), (1, 1), (0, 1)]
    K = np.zeros((4, 4))
    for x in g:
        for y in g:
            grads = []
            for cx, cy in corners:
                sx, sy = 2 * cx - 1, 2 * cy - 1
                fx = x if cx else 1 - x
                fy = y if cy else 1 - y
                grads.append((sx * fy, sy * fx))
            grads = np.array(grads)
            K += 0.25 * grads @ grads.T
    return K


class TestFd1d:
    def test_constant_coefficient_n4(self):
        p = assemble_fd_1d(one, zero, 4)
        assert np.allclose(to_dense(p.A), 16 * np.array([[2, -1, 0], [-1, 2, -1], [0, -1, 2]]))
        assert np.array_equal(p.b, np.zeros(3))

    def test_single_unknown_with_lift(self):
        p = assemble_fd_1d(one, zero, 2, left_bc=0.0, right_bc=1.0)
        assert to_dense(p.A).tolist() == [[8.0]] and p.b.tolist() == [4.0]
        assert np.linalg.solve(to_dense(p.A), p.b)[0] == pytest.approx(0.5)

    def test_jump_sampling(self):
        assert sigma_1d_jump(0.375) == 1e12
        assert sigma_1d_jump(0.4375) == 1.0
        p = assemble_fd_1d(sigma_1d_jump, zero, 8)
        # node 3 (x = 3/8) couples to node 4 through the midpoint 7/16 > 0.4
        assert to_dense(p.A)[2, 3] == pytest.approx(-64.0)
        assert to_dense(p.A)[1, 2] == pytest.approx(-64e12)

    def test_reaction_term(self):
        p = assemble_fd_1d(one, zero, 4, b_coef=lambda x: 3 * np.ones_like(x))
        assert np.allclose(to_dense(p.A).diagonal(), 32 + 3)

    def test_errors(self):
        with pytest.raises(ValueError):
            assemble_fd_1d(one, zero, 1)
        with pytest.raises(ValueError):
            assemble_fd_1d(lambda x: -one(x), zero, 4)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 64), st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=6),
           st.integers(0, 10**6))
    def test_matrix_properties_and_positivity(self, N, levels, seed):
        vals = np.array(levels)
        sigma = lambda x: vals[np.minimum((np.asarray(x) * len(vals)).astype(int), len(vals) - 1)]
        rng = np.random.default_rng(seed)
        f_vals = rng.uniform(0, 1, N - 1) * (rng.uniform(size=N - 1) < 0.5)
        f_vals[rng.integers(N - 1)] = 1.0
        p = assemble_fd_1d(sigma, zero, N)
        assert is_z_matrix(p.A)[0]
        assert is_irreducible(p.A)
        viol, strict = diagonal_dominance_violations(p.A)
        assert viol == [] and 0 in strict and N - 2 in strict
        u = np.linalg.solve(to_dense(p.A), f_vals)
        assert np.all(u > 0)

    def test_second_order_convergence(self):
        exact = lambda x: np.sin(np.pi * x) * np.exp(x)
        sigma = lambda x: 1 + x**2
        # f = -(sigma u')'
        def f(x):
            du = np.exp(x) * (np.sin(np.pi * x) + np.pi * np.cos(np.pi * x))
            d2u = np.exp(x) * ((1 - np.pi**2) * np.sin(np.pi * x) + 2 * np.pi * np.cos(np.pi * x))
            return -(2 * x * du + sigma(x) * d2u)
        errs = []
        for N in (16, 32, 64):
            p = assemble_fd_1d(sigma, f, N)
            u = np.linalg.solve(to_dense(p.A), p.b)
            errs.append(np.abs(u - exact(p.coords)).max())
        rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(rates > 1.9)


class TestPicard1d:
    def test_constant_coefficient(self):
        p = assemble_picard_1d(lambda u: one(u), np.array([0.3, 0.1, 0.9]), 4)
        assert np.allclose(to_dense(p.A), 16 * np.array([[2, -1, 0], [-1, 2, -1], [0, -1, 2]]))
        assert np.array_equal(p.b, [0.0, 0.0, 16.0])

    def test_density_sampling(self):
        u = np.array([0.25, 0.5, 0.75])
        mids = 0.5 * (np.r_[0, u] + np.r_[u, 1])
        assert np.allclose(mids, [0.125, 0.375, 0.625, 0.875])
        assert mesh_density_a(mids).tolist() == [1000.0, 1000.0, 1.0, 1.0]
        p = assemble_picard_1d(mesh_density_a, u, 4)
        A = to_dense(p.A)
        assert A[0, 0] == pytest.approx(16 * 2000) and A[1, 2] == pytest.approx(-16)
        assert np.all(np.linalg.solve(A, p.b) > 0)
        assert np.count_nonzero(p.b) == 1 and p.b[-1] > 0

    def test_length_check(self):
        with pytest.raises(ValueError):
            assemble_picard_1d(mesh_density_a, np.ones(4), 4)


class TestFem2d:
    def test_element_stiffness_oracle(self):
        assert np.allclose(ELEMENT_STIFFNESS, q1_stiffness_oracle(), atol=1e-15)

    def test_single_node(self):
        p = assemble_fem_2d(lambda x, y: one(x), lambda x, y: one(x), 2)
        assert to_dense(p.A)[0, 0] == pytest.approx(8 / 3)
        # four elements, each adding f(center) h^2 / 4 = 1/16
        assert p.b[0] == pytest.approx(0.25)

    def test_interior_row_sums_vanish(self):
        p = assemble_fem_2d(lambda x, y: one(x), lambda x, y: one(x), 8)
        A = to_dense(p.A)
        m = 7
        for i in range(m * m):
            iy, ix = divmod(i, m)
            if 0 < ix < m - 1 and 0 < iy < m - 1:
                assert abs(A[i].sum()) < 1e-13

    @pytest.mark.parametrize("sigma", [
        sigma_2d_region,
        lambda x, y: sigma_checkerboard(x, y, 1),
        lambda x, y: 1 + 50 * x * y,
    ])
    def test_symmetric_z_matrix(self, sigma):
        p = assemble_fem_2d(sigma, lambda x, y: np.sin(np.pi * x * y), 16)
        A = p.A
        assert abs(A - A.T).max() <= 1e-13 * abs(A).max()
        assert is_z_matrix(A)[0]
        assert p.A.shape == (225, 225)

    def test_ordering(self):
        p = assemble_fem_2d(lambda x, y: one(x), lambda x, y: one(x), 4)
        assert np.allclose(p.coords[:4], [[0.25, 0.25], [0.5, 0.25], [0.75, 0.25], [0.25, 0.5]])


class TestCoefficients:
    def test_values(self):
        assert sigma_1d_jump(0.2) == 1e12 and sigma_1d_jump(0.7) == 1.0
        assert sigma_2d_region(0.5, 0.5) == 1e6 and sigma_2d_region(0.9, 0.9) == 1.0
        assert sigma_checkerboard(0.125, 0.125, 4) == 1.0
        assert sigma_checkerboard(0.125, 0.01, 4) == 1000.0
        assert mesh_density_a(0.49) == 1000.0 and mesh_density_a(0.51) == 1.0
