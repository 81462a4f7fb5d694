"""Model-problem assembly: 1D finite differences and 2D bilinear elements.

Unknowns are interior nodes only; Dirichlet data is moved to the right-hand
side.  1D nodes are ordered left to right, 2D nodes lexicographically with
``x`` varying fastest.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .sparse import as_csr

__all__ = [
    "LinearProblem",
    "assemble_fd_1d",
    "assemble_picard_1d",
    "assemble_fem_2d",
    "element_stiffness",
    "sigma_1d_jump",
    "sigma_2d_region",
    "sigma_checkerboard",
    "mesh_density_a",
]


@dataclass
class LinearProblem:
    A: sp.csr_matrix
    b: np.ndarray
    coords: np.ndarray
    n_elements: int
    dimension: int
    # Dirichlet values at (left, right) ends; 1D only
    boundary_values: tuple = field(default=(0.0, 0.0))

    @property
    def n(self):
        return self.A.shape[0]


# Exact Q1 stiffness of -laplace on a square, corners ordered SW, SE, NE, NW.
# Independent of h in 2D.
ELEMENT_STIFFNESS = np.array([
    [4.0, -1.0, -2.0, -1.0],
    [-1.0, 4.0, -1.0, -2.0],
    [-2.0, -1.0, 4.0, -1.0],
    [-1.0, -2.0, -1.0, 4.0],
]) / 6.0


def element_stiffness(sigma=1.0):
    return sigma * ELEMENT_STIFFNESS


def _tridiag(sig_half, h, diag_extra=None):
    """Matrix with rows (1/h^2)(-s_{j-1/2}, s_{j-1/2}+s_{j+1/2}, -s_{j+1/2})."""
    sig_half = np.asarray(sig_half, dtype=np.float64)
    if np.any(~(sig_half > 0)):
        raise ValueError("diffusion coefficient must be positive at every midpoint")
    n = len(sig_half) - 1
    main = (sig_half[:-1] + sig_half[1:]) / h**2
    if diag_extra is not None:
        main = main + diag_extra
    off = -sig_half[1:-1] / h**2
    return as_csr(sp.diags([off, main, off], [-1, 0, 1], shape=(n, n)))


def _check_n(N):
    if int(N) != N or N < 2:
        raise ValueError(f"need N >= 2 elements, got {N}")
    return int(N)


def assemble_fd_1d(sigma, f, N, left_bc=0.0, right_bc=0.0, b_coef=None):
    """Centered differences for ``-(sigma u')' + b_coef u = f`` on (0, 1).

    ``sigma`` is sampled at cell midpoints, ``f`` and ``b_coef`` at nodes.
    All callables must accept numpy arrays.
    """
    N = _check_n(N)
    h = 1.0 / N
    x = np.arange(1, N) * h
    x_half = (np.arange(N) + 0.5) * h
    sig = np.broadcast_to(np.asarray(sigma(x_half), dtype=np.float64), (N,))
    extra = None
    if b_coef is not None:
        extra = np.broadcast_to(np.asarray(b_coef(x), dtype=np.float64), x.shape)
    A = _tridiag(sig, h, extra)
    b = np.array(np.broadcast_to(np.asarray(f(x), dtype=np.float64), x.shape))
    b[0] += sig[0] / h**2 * left_bc
    b[-1] += sig[-1] / h**2 * right_bc
    return LinearProblem(A, b, x, N, 1, (float(left_bc), float(right_bc)))


def assemble_picard_1d(a, u_prev, N, theta0=0.0, theta1=1.0):
    """Frozen-coefficient system ``A(u_prev) u = b(u_prev)`` for ``(a(u) u')' = 0``.

    Midpoint coefficients are ``a((u_j + u_{j+1}) / 2)`` with the boundary
    values ``theta0``, ``theta1`` appended to ``u_prev``.
    """
    N = _check_n(N)
    u_prev = np.asarray(u_prev, dtype=np.float64)
    if u_prev.shape != (N - 1,):
        raise ValueError(f"u_prev must have length N-1 = {N - 1}")
    h = 1.0 / N
    u_ext = np.concatenate([[theta0], u_prev, [theta1]])
    sig = np.asarray(a(0.5 * (u_ext[:-1] + u_ext[1:])), dtype=np.float64)
    sig = np.broadcast_to(sig, (N,))
    A = _tridiag(sig, h)
    b = np.zeros(N - 1)
    b[0] += sig[0] / h**2 * theta0
    b[-1] += sig[-1] / h**2 * theta1
    x = np.arange(1, N) * h
    return LinearProblem(A, b, x, N, 1, (float(theta0), float(theta1)))


def assemble_fem_2d(sigma, f, N):
    """Bilinear elements for ``-div(sigma grad u) = f`` with zero Dirichlet data.

    ``sigma(x, y)`` is evaluated once per element at its center; the load uses
    midpoint quadrature, ``f(center) h^2 / 4`` to each corner.
    """
    N = _check_n(N)
    h = 1.0 / N
    m = N - 1
    ex, ey = np.meshgrid(np.arange(N), np.arange(N), indexing="xy")
    ex, ey = ex.ravel(), ey.ravel()
    cx, cy = (ex + 0.5) * h, (ey + 0.5) * h
    sig = np.broadcast_to(np.asarray(sigma(cx, cy), dtype=np.float64), cx.shape)
    if np.any(~(sig > 0)):
        raise ValueError("diffusion coefficient must be positive on every element")
    load = np.broadcast_to(np.asarray(f(cx, cy), dtype=np.float64), cx.shape) * h**2 / 4

    # corner node grid indices (SW, SE, NE, NW)
    gx = np.stack([ex, ex + 1, ex + 1, ex], axis=1)
    gy = np.stack([ey, ey, ey + 1, ey + 1], axis=1)
    interior = (gx > 0) & (gx < N) & (gy > 0) & (gy < N)
    dof = np.where(interior, (gy - 1) * m + (gx - 1), -1)

    rows = np.repeat(dof, 4, axis=1)
    cols = np.tile(dof, (1, 4))
    vals = sig[:, None] * ELEMENT_STIFFNESS.ravel()[None, :]
    keep = (rows >= 0) & (cols >= 0)
    A = sp.coo_matrix((vals[keep], (rows[keep], cols[keep])), shape=(m * m, m * m))
    A = as_csr(A)

    b = np.zeros(m * m)
    np.add.at(b, dof[interior], np.broadcast_to(load[:, None], dof.shape)[interior])

    iy, ix = np.divmod(np.arange(m * m), m)
    coords = np.column_stack([(ix + 1) * h, (iy + 1) * h])
    return LinearProblem(A, b, coords, N, 2)


def sigma_1d_jump(x):
    x = np.asarray(x, dtype=np.float64)
    return np.where((x > 0) & (x < 0.4), 1e12, 1.0)


def sigma_2d_region(x, y):
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    return np.where((x > 0) & (x < 0.8) & (y > 0) & (y < 0.6), 1e6, 1.0)


def sigma_checkerboard(x, y, p):
    """Checkerboard coefficient: 1 inside the centered cell of each tile, 1000 elsewhere.

    ``[p x]`` is the fractional part of ``p x``.
    """
    fx = np.mod(p * np.asarray(x, dtype=np.float64), 1.0)
    fy = np.mod(p * np.asarray(y, dtype=np.float64), 1.0)
    lo, hi = 5.0 / 16.0, 11.0 / 16.0
    inside = (fx > lo) & (fx < hi) & (fy > lo) & (fy < hi)
    return np.where(inside, 1.0, 1000.0)


def mesh_density_a(u):
    u = np.asarray(u, dtype=np.float64)
    return np.where(u < 0.5, 1000.0, 1.0)
