"""Outer iteration shared by the AMG baseline and the unigrid variants."""

import numpy as np

from .cycles import ConvergenceRecord, SolveOptions, unigrid_cycle, vcycle
from .positivity import CorrectionPolicy, PositivityError, PositivityStats, _cycle
from .sparse import residual

__all__ = ["METHODS", "POLICIES", "solve"]

METHODS = ("amg", "ug-plain", "ug-threshold", "ug-lininterp", "ug-gs")
POLICIES = {
    "ug-threshold": "uniform_threshold",
    "ug-lininterp": "local_linear_interp",
    "ug-gs": "local_gauss_seidel",
}


def solve(A, b, u0, h, method, opts=None, epsilon=1e-4, coords=None,
          boundary=(0.0, 0.0), check_positive=True, gs_cap=100):
    """Iterate ``method`` from ``u0`` until the residual test passes.

    Stops when ``||r_k|| <= rel_tol * ||r_0||`` or ``||r_k|| <= abs_tol``,
    measured once per cycle with the residual recomputed from scratch.

    Returns
    -------
    u : ndarray
    record : ConvergenceRecord
        Per-cycle relative residuals and problematic-point fractions; for the
        AMG baseline the fraction counts negative entries after the cycle,
        for unigrid variants the positivity work done during it.
    stats : PositivityStats

    Raises
    ------
    PositivityError
        When a correction cannot restore positivity; the exception carries
        the history so far as ``exc.partial = (u, record, stats)``.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    opts = opts or SolveOptions()
    u = np.array(u0, dtype=np.float64)
    n = len(u)
    policy = (CorrectionPolicy(POLICIES[method], epsilon, gs_cap)
              if method in POLICIES else None)
    stats = PositivityStats()
    record = ConvergenceRecord()

    r0 = np.linalg.norm(residual(A, u, b))
    if r0 == 0.0 or r0 <= opts.abs_tol:
        record.converged = True
        return u, record, stats

    for _ in range(opts.max_iters):
        if method == "amg":
            vcycle(h, u, b, opts)
            frac = np.count_nonzero(u < 0) / n
        elif method == "ug-plain":
            unigrid_cycle(A, b, u, h, opts)
            frac = 0.0
        else:
            before = stats.work
            try:
                _cycle(A, b, u, h, opts, policy, coords=coords, boundary=boundary,
                       check_positive=check_positive, stats=stats)
            except PositivityError as exc:
                exc.partial = (u, record, stats)
                raise
            frac = (stats.work - before) / n
        rnorm = np.linalg.norm(residual(A, u, b))
        record.rel_residuals.append(rnorm / r0)
        record.problematic_fractions.append(frac)
        record.iters += 1
        if rnorm <= opts.rel_tol * r0 or rnorm <= opts.abs_tol:
            record.converged = True
            break
    return u, record, stats
