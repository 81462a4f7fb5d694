"""Positivity-preserving unigrid cycles.

Two mechanisms keep the finest-grid iterate strictly positive after every
directional step: damping the whole correction by one factor (uniform
thresholding), or taking the step and then repairing non-positive entries
locally, by linear interpolation between positive neighbours (1D only) or by
Gauss-Seidel relaxation restricted to the non-positive points.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kern
from .cycles import unigrid_delta, unigrid_pass
from .sparse import as_csr, residual

__all__ = [
    "PositivityStats",
    "CorrectionPolicy",
    "PositivityError",
    "threshold_weight",
    "find_nonpositive_groups",
    "linear_interp_correction",
    "gs_positivity_correction",
    "unigrid_threshold_cycle",
    "unigrid_local_correction_cycle",
    "positive_cycle_reference",
]

VARIANTS = ("uniform_threshold", "local_linear_interp", "local_gauss_seidel")


class PositivityError(RuntimeError):
    """A positivity correction could not restore a strictly positive iterate."""


@dataclass
class PositivityStats:
    points_recovered: int = 0
    gs_point_updates: int = 0
    violations: int = 0
    steps: int = 0
    per_cycle: list = field(default_factory=list)

    def add_counters(self, counters):
        c = [int(v) for v in counters]
        self.points_recovered += c[kern.RECOVERED]
        self.gs_point_updates += c[kern.GS_UPDATES]
        self.violations += c[kern.VIOLATIONS]
        self.steps += c[kern.STEPS]
        self.per_cycle.append(c[kern.RECOVERED] + c[kern.GS_UPDATES])

    @property
    def work(self):
        return self.points_recovered + self.gs_point_updates

    def fraction(self, n):
        return self.work / n


@dataclass
class CorrectionPolicy:
    variant: str = "uniform_threshold"
    epsilon: float = 1e-4
    cap_factor: int = 100

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown correction variant {self.variant!r}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")

    @property
    def mode(self):
        return {"uniform_threshold": kern.THRESHOLD,
                "local_linear_interp": kern.LININTERP,
                "local_gauss_seidel": kern.GS}[self.variant]


def threshold_weight(u, correction, epsilon=1e-4):
    """Largest safe damping of ``correction`` (up to 1) and the points it rescued.

    Returns ``(omega, affected)`` with ``u + omega * correction > 0`` in
    floating point; ``omega`` is 0 if rounding would defeat the damping.
    """
    u = np.asarray(u, dtype=np.float64)
    c = np.asarray(correction, dtype=np.float64)
    if np.any(~(u > 0)):
        raise ValueError("threshold_weight needs a strictly positive iterate")
    hit = u + c <= 0
    affected = int(np.count_nonzero(hit))
    if affected == 0:
        return 1.0, 0
    # entries not hit have ratio > 1, so they never set the minimum
    omega = (1.0 - epsilon) * float(np.min(-u[hit] / c[hit]))
    if np.any(~(u + omega * c > 0)):
        # only reachable when some u_m is near the underflow threshold
        omega = 0.0
    return omega, affected


def find_nonpositive_groups(u):
    """Maximal runs of consecutive indices with ``u_i <= 0``, as ``range`` objects."""
    bad = np.concatenate([[False], np.asarray(u) <= 0, [False]])
    edges = np.flatnonzero(np.diff(bad.astype(np.int8)))
    return [range(s, e) for s, e in zip(edges[::2], edges[1::2])]


def linear_interp_correction(u, coords, group, boundary=None, domain=(0.0, 1.0)):
    """Replace ``u`` on ``group`` by the line through its two bracketing values.

    Without ``boundary`` values a group touching either end is an error.  With
    ``boundary = (left, right)`` the Dirichlet values at the ``domain`` ends
    act as brackets, provided the interpolant stays strictly positive.
    """
    u = np.asarray(u, dtype=np.float64)
    x = np.asarray(coords, dtype=np.float64)
    s, e = group[0], group[-1]
    n = len(u)
    if (s == 0 or e == n - 1) and boundary is None:
        raise ValueError("group touches the boundary; no positive bracket")
    ul, xl = (boundary[0], domain[0]) if s == 0 else (u[s - 1], x[s - 1])
    ur, xr = (boundary[1], domain[1]) if e == n - 1 else (u[e + 1], x[e + 1])
    if ul < 0 or ur < 0 or (ul <= 0 and ur <= 0):
        raise ValueError("brackets must be positive")
    idx = np.arange(s, e + 1)
    new = ul + (ur - ul) / (xr - xl) * (x[idx] - xl)
    if np.any(~(new > 0)):
        raise ValueError("interpolant is not strictly positive on the group")
    u[idx] = new
    return u


def gs_positivity_correction(A, b, u, stats=None, cap_factor=100):
    """Gauss-Seidel on the non-positive points only, until all are positive.

    The set of non-positive points is re-examined after each sweep.  Raises
    ``PositivityError`` after ``cap_factor * |M|`` point updates.
    """
    A = as_csr(A)
    b = np.asarray(b, dtype=np.float64)
    bad = np.flatnonzero(u <= 0)
    cap = cap_factor * len(bad)
    updates = 0
    d = A.diagonal()
    while len(bad):
        for i in bad:
            lo, hi = A.indptr[i], A.indptr[i + 1]
            cols, vals = A.indices[lo:hi], A.data[lo:hi]
            off = cols != i
            u[i] = (b[i] - vals[off] @ u[cols[off]]) / d[i]
        updates += len(bad)
        if updates > cap:
            raise PositivityError("Gauss-Seidel positivity correction did not terminate")
        bad = bad[u[bad] <= 0]
    if stats is not None:
        stats.gs_point_updates += updates
    return u


def _cycle(A, b, u, h, opts, policy, coords=None, boundary=(0.0, 0.0),
           check_positive=True, stats=None):
    if np.any(~(u > 0)):
        raise ValueError("positivity-preserving cycles need a strictly positive start")
    if policy.variant == "local_linear_interp" and (coords is None or np.ndim(coords) != 1):
        raise ValueError("linear-interpolation correction is only defined for 1D problems")
    stats = PositivityStats() if stats is None else stats
    r = residual(A, u, b)
    counters = np.zeros(kern.N_COUNTERS, dtype=np.int64)
    try:
        unigrid_pass(h, u, r, b, opts, mode=policy.mode, epsilon=policy.epsilon,
                     coords=coords, boundary=boundary, check_positive=check_positive,
                     cap_factor=policy.cap_factor, counters=counters)
    except RuntimeError as exc:
        # the work done before the failure still counts
        stats.add_counters(counters)
        raise PositivityError(str(exc)) from exc
    stats.add_counters(counters)
    return u, stats


def unigrid_threshold_cycle(A, b, u, h, opts, policy=None, **kw):
    """Unigrid V(nu, 0) cycle with each step damped to keep ``u > 0``."""
    policy = policy or CorrectionPolicy("uniform_threshold")
    if policy.variant != "uniform_threshold":
        raise ValueError("threshold cycle needs the uniform_threshold policy")
    return _cycle(A, b, u, h, opts, policy, **kw)


def unigrid_local_correction_cycle(A, b, u, h, opts, policy, **kw):
    """Unigrid V(nu, 0) cycle with local repair of non-positive entries."""
    if policy.variant == "uniform_threshold":
        raise ValueError("local correction cycle needs a local_* policy")
    return _cycle(A, b, u, h, opts, policy, **kw)


def positive_cycle_reference(A, b, u, h, opts, policy, coords=None, boundary=(0.0, 0.0)):
    """Slow Python version of the positivity-preserving cycles.

    Built from the standalone primitives above; checks ``u > 0`` after every
    step and returns ``(u, stats)``.
    """
    A = as_csr(A)
    stats = PositivityStats()
    r = residual(A, u, b)
    for I in h.composite:
        I = I.tocsc()
        for _ in range(opts.nu1):
            for j in range(I.shape[1]):
                d = I[:, j].toarray().ravel()
                Ad = A @ d
                step = opts.omega * unigrid_delta(r, d, float(Ad @ d))
                if policy.variant == "uniform_threshold":
                    w, affected = threshold_weight(u, step * d, policy.epsilon)
                    step *= w
                    stats.points_recovered += affected
                u += step * d
                if policy.variant == "local_linear_interp" and u.min() <= 0:
                    for g in find_nonpositive_groups(u):
                        linear_interp_correction(u, coords, g, boundary)
                        stats.points_recovered += len(g)
                elif policy.variant == "local_gauss_seidel" and u.min() <= 0:
                    gs_positivity_correction(A, b, u, stats, policy.cap_factor)
                r = residual(A, u, b)
                stats.steps += 1
                if u.min() <= 0:
                    stats.violations += 1
    stats.per_cycle.append(stats.work)
    return u, stats
