import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from unigrid.amg import build_hierarchy
from unigrid.cycles import (SolveOptions, gauss_seidel_sweep, jacobi_sweep, unigrid_cycle,
                            unigrid_cycle_reference, unigrid_delta, unigrid_pass, vcycle)
from unigrid.discretization import assemble_fd_1d, assemble_fem_2d, sigma_checkerboard
from unigrid.solve import solve
from unigrid.sparse import as_csr, residual, to_dense


def lap1d(N):
    return assemble_fd_1d(lambda x: np.ones_like(x), lambda x: np.ones_like(x), N)


def lap2d(N):
    return assemble_fem_2d(lambda x, y: np.ones_like(x), lambda x, y: np.sin(np.pi * x * y), N)


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


class TestOptions:
    @pytest.mark.parametrize("kw", [{"nu1": -1}, {"omega": 0.0}, {"omega": 1.5},
                                    {"rel_tol": 0.0}, {"smoother": "sor"},
                                    {"ordering": "random"}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SolveOptions(**kw)


class TestGaussSeidel:
    def test_diagonal_exact(self):
        A = as_csr(sp.diags([2.0, 4.0, 5.0]))
        u = gauss_seidel_sweep(A, np.zeros(3), np.array([2.0, 2.0, 10.0]))
        assert np.array_equal(u, [1.0, 0.5, 2.0])

    def test_hand_2x2(self):
        A = as_csr(np.array([[2.0, -1.0], [-1.0, 2.0]]))
        u = gauss_seidel_sweep(A, np.zeros(2), np.ones(2))
        assert np.allclose(u, [0.5, 0.75])

    def test_directional_equivalence(self):
        p = lap1d(8)
        A, b = p.A, p.b
        u = np.linspace(0.1, 1, 7)
        v = u.copy()
        gauss_seidel_sweep(A, u, b)
        for j in range(7):
            e = np.zeros(7)
            e[j] = 1.0
            v += unigrid_delta(residual(A, v, b), e, A[j, j]) * e
        assert np.allclose(u, v, rtol=1e-14)

    def test_zero_diagonal(self):
        A = as_csr(np.array([[0.0, 1.0], [1.0, 2.0]]))
        with pytest.raises(ValueError):
            gauss_seidel_sweep(A, np.zeros(2), np.ones(2))

    def test_jacobi_converges(self):
        p = lap1d(8)
        u = np.zeros(7)
        r0 = np.linalg.norm(p.b)
        for _ in range(50):
            jacobi_sweep(p.A, u, p.b)
        assert np.linalg.norm(residual(p.A, u, p.b)) < 0.5 * r0


class TestVcycle:
    def test_single_level(self):
        p = lap1d(8)
        h = build_hierarchy(p.A, max_levels=1)
        assert h.n_levels == 1
        u = np.zeros(7)
        vcycle(h, u, p.b, SolveOptions(nu1=1, nu2=1))
        ref = gauss_seidel_sweep(p.A, np.zeros(7), p.b, 2)
        assert np.array_equal(u, ref)

    def test_zero_fixed_point(self):
        p = lap1d(16)
        h = build_hierarchy(p.A)
        u = np.zeros(15)
        vcycle(h, u, np.zeros(15), SolveOptions())
        assert np.all(u == 0)

    def test_reduction_rate(self):
        p = lap1d(64)
        h = build_hierarchy(p.A)
        u = np.zeros(63)
        norms = [np.linalg.norm(p.b)]
        for _ in range(12):
            vcycle(h, u, p.b, SolveOptions())
            norms.append(np.linalg.norm(residual(p.A, u, p.b)))
        assert norms[-1] / norms[-2] <= 0.5

    def test_dimension_mismatch(self):
        p = lap1d(8)
        with pytest.raises(ValueError):
            vcycle(build_hierarchy(p.A), np.zeros(5), np.zeros(5), SolveOptions())


class TestDelta:
    def test_unit_direction(self):
        r = np.array([1.0, 4.0, 2.0])
        e = np.array([0.0, 1.0, 0.0])
        assert unigrid_delta(r, e, 2.0) == 2.0

    def test_orthogonal(self):
        assert unigrid_delta(np.array([1.0, -1.0]), np.array([1.0, 1.0]), 3.0) == 0.0

    def test_sparse_column(self):
        d = sp.csc_matrix(np.array([[1.0], [0.5]]))
        assert unigrid_delta(np.array([2.0, 2.0]), d, 3.0) == pytest.approx(1.0)

    def test_nonpositive_denominator(self):
        with pytest.raises(ValueError):
            unigrid_delta(np.ones(2), np.ones(2), 0.0)

    def test_residual_orthogonal_after_step(self):
        p = lap2d(8)
        A, b = p.A, p.b
        h = build_hierarchy(A)
        rng = np.random.default_rng(1)
        u = rng.uniform(size=A.shape[0])
        r = residual(A, u, b)
        for k in range(h.n_levels):
            I = h.composite[k].tocsc()
            for j in range(I.shape[1]):
                d = I[:, j].toarray().ravel()
                Ad = A @ d
                delta = unigrid_delta(r, d, h.galerkin_diagonals[k][j])
                u += delta * d
                r -= delta * Ad
                assert abs(r @ d) <= 1e-13 * np.linalg.norm(r) * np.linalg.norm(d) + 1e-300
        assert rel(r, residual(A, u, b)) <= 1e-12


class TestUnigrid:
    def test_one_level_is_gauss_seidel(self):
        p = lap1d(16)
        h = build_hierarchy(p.A, max_levels=1)
        u = np.full(15, 0.3)
        unigrid_cycle(p.A, p.b, u, h, SolveOptions(nu1=2))
        assert np.allclose(u, gauss_seidel_sweep(p.A, np.full(15, 0.3), p.b, 2), rtol=1e-13)

    def test_zero_weight(self):
        # SolveOptions validates omega at construction only
        p = lap1d(16)
        h = build_hierarchy(p.A)
        u = np.full(15, 0.3)
        r = residual(p.A, u, p.b)
        opts = SolveOptions()
        opts.omega = 0.0
        unigrid_pass(h, u, r, p.b, opts)
        assert np.all(u == 0.3)

    @pytest.mark.parametrize("problem", ["1d", "2d"])
    @pytest.mark.parametrize("nu", [1, 2])
    def test_matches_vcycle(self, problem, nu):
        p = lap1d(16) if problem == "1d" else lap2d(8)
        h = build_hierarchy(p.A)
        opts = SolveOptions(nu1=nu, nu2=0)
        u_mg = np.full(p.n, 0.5)
        u_ug = u_mg.copy()
        for _ in range(5):
            vcycle(h, u_mg, p.b, opts)
            unigrid_cycle(p.A, p.b, u_ug, h, opts)
            assert rel(u_ug, u_mg) <= 1e-10

    def test_matches_reference(self):
        p = assemble_fem_2d(lambda x, y: sigma_checkerboard(x, y, 1), lambda x, y: x + y, 16)
        h = build_hierarchy(p.A)
        u1 = np.ones(p.n)
        u2 = u1.copy()
        for _ in range(2):
            unigrid_cycle(p.A, p.b, u1, h, SolveOptions())
            unigrid_cycle_reference(p.A, p.b, u2, h, SolveOptions())
        assert rel(u1, u2) <= 1e-12

    def test_incremental_residual_consistency(self):
        p = assemble_fem_2d(lambda x, y: sigma_checkerboard(x, y, 2), lambda x, y: x * y, 32)
        h = build_hierarchy(p.A)
        u = np.ones(p.n)
        for _ in range(3):
            r = residual(p.A, u, p.b)
            unigrid_pass(h, u, r, p.b, SolveOptions(nu1=2))
            assert rel(r, residual(p.A, u, p.b)) <= 1e-12

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 10**6))
    def test_energy_monotone(self, seed):
        rng = np.random.default_rng(seed)
        N = 8
        p = assemble_fem_2d(lambda x, y: 1 + 99 * (x < 0.5), lambda x, y: np.ones_like(x), N)
        A = to_dense(p.A)
        u_star = np.linalg.solve(A, p.b)
        h = build_hierarchy(p.A)
        u = rng.standard_normal(p.n)
        r = p.b - A @ u

        def energy(v):
            e = v - u_star
            return e @ A @ e

        prev = energy(u)
        for k in range(h.n_levels):
            I = h.composite[k].toarray()
            for j in range(I.shape[1]):
                d = I[:, j]
                delta = unigrid_delta(r, d, h.galerkin_diagonals[k][j])
                u = u + delta * d
                r = r - delta * (A @ d)
                cur = energy(u)
                assert cur <= prev * (1 + 1e-12) + 1e-14
                prev = cur


class TestSolve:
    def test_amg_converges(self):
        p = lap1d(64)
        h = build_hierarchy(p.A)
        u, rec, _ = solve(p.A, p.b, np.zeros(p.n), h, "amg", SolveOptions(rel_tol=1e-12))
        assert rec.converged and rec.rel_residuals[-1] <= 1e-12
        assert len(rec.rel_residuals) == len(rec.problematic_fractions) == rec.iters

    def test_plain_unigrid_converges(self):
        p = lap2d(16)
        h = build_hierarchy(p.A)
        u, rec, _ = solve(p.A, p.b, np.zeros(p.n), h, "ug-plain", SolveOptions(rel_tol=1e-12))
        assert rec.converged

    def test_unknown_method(self):
        p = lap1d(8)
        with pytest.raises(ValueError):
            solve(p.A, p.b, np.zeros(7), build_hierarchy(p.A), "cg")

    def test_exact_start(self):
        p = lap1d(8)
        u0 = np.linalg.solve(to_dense(p.A), p.b)
        _, rec, _ = solve(p.A, p.b, u0, build_hierarchy(p.A), "amg",
                          SolveOptions(abs_tol=1e-8))
        assert rec.converged and rec.iters == 0
