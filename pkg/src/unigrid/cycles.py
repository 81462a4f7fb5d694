"""Smoothers, the multigrid V-cycle and the plain unigrid cycle."""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kern
from .sparse import as_csr, residual

__all__ = [
    "SolveOptions",
    "ConvergenceRecord",
    "gauss_seidel_sweep",
    "jacobi_sweep",
    "vcycle",
    "unigrid_delta",
    "unigrid_pass",
    "unigrid_cycle",
    "unigrid_cycle_reference",
]


@dataclass
class SolveOptions:
    nu1: int = 1
    nu2: int = 0
    omega: float = 1.0
    smoother: str = "gauss_seidel"
    jacobi_weight: float = 2.0 / 3.0
    max_iters: int = 200
    rel_tol: float = 1e-15
    abs_tol: float = 0.0
    ordering: str = "lexicographic"

    def __post_init__(self):
        if self.nu1 < 0 or self.nu2 < 0:
            raise ValueError("sweep counts must be non-negative")
        if not 0.0 < self.omega <= 1.0:
            raise ValueError("omega must lie in (0, 1]")
        if not self.rel_tol > 0.0:
            raise ValueError("rel_tol must be positive")
        if self.smoother not in ("gauss_seidel", "weighted_jacobi"):
            raise ValueError(f"unknown smoother {self.smoother!r}")
        if self.ordering != "lexicographic":
            raise ValueError("only lexicographic ordering is supported")

    @property
    def nu(self):
        return self.nu1


@dataclass
class ConvergenceRecord:
    rel_residuals: list = field(default_factory=list)
    problematic_fractions: list = field(default_factory=list)
    iters: int = 0
    converged: bool = False


def gauss_seidel_sweep(A, u, b, sweeps=1):
    """Lexicographic Gauss-Seidel, in place on ``u`` (also returned)."""
    A = as_csr(A)
    kern.gauss_seidel(A.indptr, A.indices, A.data, u, np.asarray(b, dtype=np.float64), sweeps)
    return u


def jacobi_sweep(A, u, b, weight=2.0 / 3.0, sweeps=1):
    d = A.diagonal()
    if np.any(d == 0):
        raise ValueError("zero diagonal entry in Jacobi sweep")
    for _ in range(sweeps):
        u += weight * residual(A, u, b) / d
    return u


def _smooth(A, u, b, opts, sweeps):
    if sweeps == 0:
        return u
    if opts.smoother == "gauss_seidel":
        return gauss_seidel_sweep(A, u, b, sweeps)
    return jacobi_sweep(A, u, b, opts.jacobi_weight, sweeps)


def vcycle(h, u, b, opts):
    """One V(nu1, nu2) cycle, in place on ``u``.

    The coarsest level is relaxed with ``nu1 + nu2`` sweeps from a zero guess
    instead of being solved exactly.
    """
    levels = h.levels
    if len(u) != levels[0].A.shape[0] or len(b) != len(u):
        raise ValueError("vector sizes do not match the finest level")
    L = len(levels) - 1
    us = [u] + [None] * L
    bs = [np.asarray(b, dtype=np.float64)] + [None] * L
    for k in range(L):
        _smooth(levels[k].A, us[k], bs[k], opts, opts.nu1)
        bs[k + 1] = levels[k].R @ residual(levels[k].A, us[k], bs[k])
        us[k + 1] = np.zeros(levels[k + 1].A.shape[0])
    _smooth(levels[L].A, us[L], bs[L], opts, opts.nu1 + opts.nu2)
    for k in range(L - 1, -1, -1):
        us[k] += levels[k].P @ us[k + 1]
        _smooth(levels[k].A, us[k], bs[k], opts, opts.nu2)
    return u


def unigrid_delta(r, d, galerkin_diag_entry):
    """Step length ``<r, d> / <A d, d>`` making the new residual orthogonal to ``d``.

    ``d`` may be a dense vector or a sparse column.
    """
    if not galerkin_diag_entry > 0:
        raise ValueError("Galerkin diagonal entry must be positive")
    if hasattr(d, "toarray"):
        d = d.toarray().ravel()
    return float(np.dot(r, d)) / galerkin_diag_entry


def unigrid_pass(h, u, r, b, opts, mode=kern.PLAIN, epsilon=1e-4, coords=None,
                 boundary=(0.0, 0.0), check_positive=False, cap_factor=100,
                 counters=None):
    """Run the fine-to-coarse unigrid loop once over every level.

    ``u`` and the maintained residual ``r = b - A u`` are updated in place.
    Returns the counter array (see ``_kernels``).
    """
    if counters is None:
        counters = np.zeros(kern.N_COUNTERS, dtype=np.int64)
    A0 = h.applied[0]
    Ar = h.levels[0].A
    b = np.asarray(b, dtype=np.float64)
    a_diag = h.galerkin_diagonals[0]
    if coords is None or np.ndim(coords) != 1:
        x = np.zeros(0)
    else:
        x = np.asarray(coords, dtype=np.float64)
    x_left, x_right = 0.0, 1.0
    for D, AD, diag in zip(h.composite_csc, h.applied, h.galerkin_diagonals):
        kern.unigrid_level(D.indptr, D.indices, D.data, AD.indptr, AD.indices, AD.data,
                           diag, u, r, b, opts.omega, opts.nu1, mode, epsilon,
                           Ar.indptr, Ar.indices, Ar.data, A0.indptr, A0.indices, a_diag,
                           x, boundary[0], boundary[1], x_left, x_right,
                           check_positive, cap_factor, counters)
    return counters


def unigrid_cycle(A, b, u, h, opts):
    """Plain unigrid analogue of a V(nu, 0) cycle, in place on ``u``."""
    r = residual(A, u, b)
    unigrid_pass(h, u, r, b, opts)
    return u


def unigrid_cycle_reference(A, b, u, h, opts):
    """Direction-by-direction Python version of :func:`unigrid_cycle`.

    Slow; used to cross-check the compiled loop on small problems.
    """
    A = as_csr(A)
    r = residual(A, u, b)
    for I in h.composite:
        I = I.tocsc()
        for _ in range(opts.nu1):
            for j in range(I.shape[1]):
                d = I[:, j].toarray().ravel()
                Ad = A @ d
                delta = unigrid_delta(r, d, float(Ad @ d))
                u += opts.omega * delta * d
                r -= opts.omega * delta * Ad
    return u
