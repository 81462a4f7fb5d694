"""The four model experiments, their runner and CSV/JSON output."""

import csv
import json
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .amg import build_hierarchy
from .cycles import SolveOptions
from .discretization import (assemble_fd_1d, assemble_fem_2d, assemble_picard_1d,
                             mesh_density_a, sigma_1d_jump, sigma_2d_region,
                             sigma_checkerboard)
from .picard import PicardError, PicardOptions, picard_solve
from .positivity import PositivityError, PositivityStats
from .solve import METHODS, solve

__all__ = [
    "EXPERIMENTS",
    "ExperimentSpec",
    "RunResult",
    "build_problem",
    "initial_guess",
    "run_experiment",
    "compare",
    "write_csv",
    "read_csv",
    "write_hierarchy",
]

EXPERIMENTS = ("1d-linear", "1d-meshgen", "2d-piecewise", "2d-checkerboard")
DIMENSION = {"1d-linear": 1, "1d-meshgen": 1, "2d-piecewise": 2, "2d-checkerboard": 2}
DEFAULT_N = {"1d-linear": 256, "1d-meshgen": 256, "2d-piecewise": 32, "2d-checkerboard": 128}
# constant starting values; the mesh problem starts from the uniform grid
START_VALUE = {"1d-linear": 1.0, "2d-piecewise": 0.1, "2d-checkerboard": 1.0}
DEFAULT_TOL = {"1d-linear": 1e-15, "1d-meshgen": 1e-10, "2d-piecewise": 1e-15,
               "2d-checkerboard": 1e-15}

LINEAR_HEADER = ("iteration", "rel_residual", "problematic_fraction")
PICARD_HEADER = ("picard_iter", "nonlinear_rel_residual", "linear_iters", "problematic_fraction")


def _rhs_1d(x):
    return np.sin(np.pi * x)


def _rhs_2d(x, y):
    return np.sin(np.pi * x * y)


@dataclass
class ExperimentSpec:
    """One experiment run.

    ``tol`` is the relative residual reduction for the linear experiments and
    the nonlinear tolerance for ``1d-meshgen``; ``None`` picks the
    experiment's default.  ``gs_cap`` bounds Gauss-Seidel positivity work at
    ``gs_cap * |M|`` point updates per correction.
    """
    name: str
    N: int = None
    method: str = "amg"
    tol: float = None
    nu: int = 2
    epsilon: float = 1e-4
    max_iters: int = 200
    gs_cap: int = 100
    theta: float = 0.25

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.name!r}; choose from {', '.join(EXPERIMENTS)}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.method == "ug-lininterp" and DIMENSION[self.name] != 1:
            raise ValueError("ug-lininterp is only available for 1D experiments")
        if self.N is None:
            self.N = DEFAULT_N[self.name]
        if self.tol is None:
            self.tol = DEFAULT_TOL[self.name]
        N = self.N
        if int(N) != N or N < 4 or (int(N) & (int(N) - 1)):
            raise ValueError(f"N must be a power of two >= 4, got {N}")
        self.N = int(N)
        if self.name == "2d-checkerboard" and self.N < 16:
            raise ValueError("2d-checkerboard needs N >= 16 (period N / 16)")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.nu < 1 or self.max_iters < 1 or self.gs_cap < 1:
            raise ValueError("nu, max_iters and gs_cap must be positive")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown experiment fields: {', '.join(sorted(extra))}")
        return cls(**d)


@dataclass
class RunResult:
    spec: ExperimentSpec
    converged: bool
    iterations: int
    rel_residuals: list
    problematic_fractions: list
    linear_iterations: list = None  # per Picard step, mesh problem only
    positivity: dict = field(default_factory=dict)
    hierarchy: dict = field(default_factory=dict)
    wall_clock: float = 0.0
    min_value: float = None
    error: str = None

    @property
    def kind(self):
        return "picard" if self.spec.name == "1d-meshgen" else "linear"

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["spec"] = ExperimentSpec.from_dict(d["spec"])
        return cls(**d)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def build_problem(spec):
    """Assemble the linear system of ``spec`` (the first frozen system for the mesh problem)."""
    N = spec.N
    if spec.name == "1d-linear":
        return assemble_fd_1d(sigma_1d_jump, _rhs_1d, N)
    if spec.name == "1d-meshgen":
        return assemble_picard_1d(mesh_density_a, initial_guess(spec), N)
    if spec.name == "2d-piecewise":
        return assemble_fem_2d(sigma_2d_region, _rhs_2d, N)
    p = N // 16
    return assemble_fem_2d(lambda x, y: sigma_checkerboard(x, y, p), _rhs_2d, N)


def initial_guess(spec):
    N = spec.N
    if spec.name == "1d-meshgen":
        return np.arange(1, N) / N
    n = (N - 1) ** DIMENSION[spec.name]
    return np.full(n, START_VALUE[spec.name])


def _stats_dict(stats):
    return {
        "points_recovered": stats.points_recovered,
        "gs_point_updates": stats.gs_point_updates,
        "violations": stats.violations,
        "steps": stats.steps,
    }


def _merge_stats(items):
    total = PositivityStats()
    for s in items:
        total.points_recovered += s.points_recovered
        total.gs_point_updates += s.gs_point_updates
        total.violations += s.violations
        total.steps += s.steps
    return total


def run_experiment(spec, hierarchy=None, problem=None):
    """Run one experiment to convergence or ``max_iters``.

    A prebuilt ``hierarchy`` (and its ``problem``) may be passed so that
    several methods share one AMG setup.  A positivity failure does not
    raise; it ends the run with ``converged=False`` and ``error`` set.
    """
    t0 = time.perf_counter()
    if spec.name == "1d-meshgen":
        return _run_picard(spec, t0)

    problem = problem if problem is not None else build_problem(spec)
    if hierarchy is None:
        hierarchy = build_hierarchy(problem.A, theta=spec.theta)
    opts = SolveOptions(nu1=spec.nu, rel_tol=spec.tol, max_iters=spec.max_iters)
    coords = problem.coords if problem.dimension == 1 else None
    error = None
    try:
        u, record, stats = solve(problem.A, problem.b, initial_guess(spec), hierarchy,
                                 spec.method, opts, epsilon=spec.epsilon, coords=coords,
                                 boundary=problem.boundary_values, gs_cap=spec.gs_cap)
    except PositivityError as exc:
        u, record, stats = exc.partial
        error = str(exc)
    return RunResult(
        spec=spec,
        converged=record.converged,
        iterations=record.iters,
        rel_residuals=[float(v) for v in record.rel_residuals],
        problematic_fractions=[float(v) for v in record.problematic_fractions],
        positivity=_stats_dict(stats),
        hierarchy=hierarchy.summary(),
        wall_clock=time.perf_counter() - t0,
        min_value=float(u.min()),
        error=error,
    )


def _run_picard(spec, t0):
    problem = build_problem(spec)
    summary = build_hierarchy(problem.A, theta=spec.theta).summary()
    inner = SolveOptions(nu1=spec.nu, max_iters=spec.max_iters)
    popts = PicardOptions(tau_nl=spec.tol)
    error = None
    try:
        u, rec = picard_solve(spec.N, spec.method, popts, inner, epsilon=spec.epsilon,
                              gs_cap=spec.gs_cap, hierarchy_kw={"theta": spec.theta})
    except (PicardError, PositivityError) as exc:
        error = str(exc)
        u, rec = exc.picard_partial
    converged = rec.converged
    return RunResult(
        spec=spec,
        converged=converged,
        iterations=rec.iters,
        rel_residuals=[float(v) for v in rec.nonlinear_residuals],
        problematic_fractions=[float(v) for v in rec.problematic_fractions],
        linear_iterations=[int(v) for v in rec.linear_iterations],
        positivity=_stats_dict(_merge_stats(rec.stats)),
        hierarchy=summary,
        wall_clock=time.perf_counter() - t0,
        min_value=float(u.min()),
        error=error,
    )


def methods_for(name):
    return tuple(m for m in METHODS if m != "ug-plain"
                 and not (m == "ug-lininterp" and DIMENSION[name] != 1))


def compare(base, methods=None):
    """Run every applicable method on one experiment.

    Linear experiments share one problem and one hierarchy across methods.
    Returns ``(results, hierarchy)``; ``hierarchy`` is ``None`` for the mesh
    problem, whose operator changes every Picard step.
    """
    methods = methods or methods_for(base.name)
    specs = [ExperimentSpec(**{**asdict(base), "method": m}) for m in methods]
    if base.name == "1d-meshgen":
        return [run_experiment(s) for s in specs], None
    problem = build_problem(base)
    h = build_hierarchy(problem.A, theta=base.theta)
    return [run_experiment(s, hierarchy=h, problem=problem) for s in specs], h


def _fmt(v):
    return "%.17g" % v


def write_csv(result, path):
    """Per-iteration history, floats written with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if result.kind == "picard":
            w.writerow(PICARD_HEADER)
            for k, (res, lin, frac) in enumerate(zip(result.rel_residuals,
                                                     result.linear_iterations,
                                                     result.problematic_fractions), 1):
                w.writerow((k, _fmt(res), lin, _fmt(frac)))
        else:
            w.writerow(LINEAR_HEADER)
            for k, (res, frac) in enumerate(zip(result.rel_residuals,
                                                result.problematic_fractions), 1):
                w.writerow((k, _fmt(res), _fmt(frac)))
    return path


def read_csv(path):
    """Return ``(header, rows)`` with numeric fields parsed."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = tuple(rows[0]), rows[1:]
    parsed = [tuple(int(v) if c in ("iteration", "picard_iter", "linear_iters") else float(v)
                    for c, v in zip(header, row)) for row in body]
    return header, parsed


def write_hierarchy(result, path):
    with open(path, "w") as fh:
        json.dump(result.hierarchy, fh, indent=2, sort_keys=True)
    return path
