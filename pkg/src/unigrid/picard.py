"""Picard iteration for the 1D equidistribution problem ``-(a(u) u')' = 0``."""

from dataclasses import dataclass, field

import numpy as np

from .amg import build_hierarchy
from .cycles import SolveOptions
from .discretization import assemble_picard_1d, mesh_density_a
from .positivity import PositivityStats
from .solve import solve
from .sparse import residual

__all__ = ["PicardOptions", "PicardRecord", "PicardError", "picard_solve"]


class PicardError(RuntimeError):
    """The outer iteration did not reach its tolerance."""


@dataclass
class PicardOptions:
    tau_nl: float = 1e-10
    inner_rel_tol: float = 1e-8
    inner_abs_factor: float = 0.1
    max_picard: int = 50

    def __post_init__(self):
        for name in ("tau_nl", "inner_rel_tol", "inner_abs_factor"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_picard < 1:
            raise ValueError("max_picard must be at least 1")


@dataclass
class PicardRecord:
    nonlinear_residuals: list = field(default_factory=list)  # relative to the initial one
    linear_iterations: list = field(default_factory=list)
    problematic_fractions: list = field(default_factory=list)
    stats: list = field(default_factory=list)
    inner_converged: list = field(default_factory=list)
    converged: bool = False

    @property
    def iters(self):
        return len(self.nonlinear_residuals)


def _nonlinear_residual(a, u, N, theta0, theta1):
    p = assemble_picard_1d(a, u, N, theta0, theta1)
    return np.linalg.norm(residual(p.A, u, p.b))


def picard_solve(N, method="amg", opts=None, inner=None, a=mesh_density_a,
                 theta0=0.0, theta1=1.0, u0=None, epsilon=1e-4, gs_cap=100,
                 hierarchy_kw=None):
    """Solve ``A(u_{k-1}) u_k = b(u_{k-1})`` until the nonlinear residual drops
    by ``opts.tau_nl``.

    Each linear solve starts from the previous iterate and stops once its
    residual falls by ``inner_rel_tol`` or below
    ``inner_abs_factor * tau_nl * ||r_nl(u_0)||``.  The AMG hierarchy is rebuilt
    for every frozen operator.

    Parameters
    ----------
    N : int
        Number of elements; the unknowns are the ``N - 1`` interior nodes.
    method : str
        Any method accepted by :func:`unigrid.solve.solve`.
    inner : SolveOptions, optional
        Cycle settings; the tolerances are overwritten per Picard step.
    u0 : array_like, optional
        Starting mesh map, defaults to the uniform grid ``x_i = i / N``.

    Returns
    -------
    u : ndarray
    record : PicardRecord

    Raises
    ------
    PicardError, PositivityError
        The history so far is attached as ``exc.picard_partial = (u, record)``.
    """
    opts = opts or PicardOptions()
    inner = inner or SolveOptions()
    hierarchy_kw = hierarchy_kw or {}
    u = np.arange(1, N) / N if u0 is None else np.array(u0, dtype=np.float64)

    nl0 = _nonlinear_residual(a, u, N, theta0, theta1)
    record = PicardRecord()
    if nl0 == 0.0:
        record.converged = True
        return u, record
    target = opts.tau_nl * nl0
    lin_opts = SolveOptions(**{**inner.__dict__, "rel_tol": opts.inner_rel_tol,
                               "abs_tol": opts.inner_abs_factor * target})

    for _ in range(opts.max_picard):
        p = assemble_picard_1d(a, u, N, theta0, theta1)
        h = build_hierarchy(p.A, **hierarchy_kw)
        try:
            u, rec, stats = solve(p.A, p.b, u, h, method, lin_opts, epsilon=epsilon,
                                  coords=p.coords, boundary=p.boundary_values,
                                  gs_cap=gs_cap)
        except RuntimeError as exc:
            exc.picard_partial = (u, record)
            raise
        nl = _nonlinear_residual(a, u, N, theta0, theta1)
        record.nonlinear_residuals.append(nl / nl0)
        record.linear_iterations.append(rec.iters)
        record.problematic_fractions.append(float(sum(rec.problematic_fractions)))
        record.stats.append(stats)
        record.inner_converged.append(rec.converged)
        if nl <= target:
            record.converged = True
            return u, record
    exc = PicardError(f"no convergence in {opts.max_picard} Picard iterations")
    exc.picard_partial = (u, record)
    raise exc
