"""Space-time error norms, observed convergence orders, and study drivers.

Errors against separable exact solutions are measured in L1(L1), L2(L2)
and Linf(Linf) over the space-time cylinder.  The spatial reference is
the nodal interpolant of the analytic profile on the fixed mesh, so a
spatial error floor shows up at fine time steps and is reported rather
than subtracted.  Time integration uses 5-point Gauss per interval of
whichever partition the approximation lives on, spatial L1 uses lumped
vertex quadrature, and the sup norm is sampled at Gauss points plus
interval endpoints.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .adjoint import solve_adjoint
from .control import control_norms
from .fem import (build_mesh, interpolate, l1_norm, linf_norm, mass_matrix,
                  stiffness_matrix)
from .linalg import matvec
from .optimizer import FixedPointError, discretize_problem, fixed_point_solve
from .quadrature import gauss_points
from .state import RhsTerm, solve_state
from .timegrid import (PiecewiseConstantField, PiecewiseLinearField,
                       dual_linear_projection, uniform_grid)

NORM_KEYS = ("L1", "L2", "Linf")


def field_error_norms(exact_terms, approx, mesh, M_h):
    """L1(L1), L2(L2), Linf(Linf) distance of a discrete field from a sum
    of separable terms (theta, interior coefficient vector)."""
    if isinstance(approx, PiecewiseConstantField):
        edges = approx.grid.t
    else:
        edges = approx.times
    l1 = l2sq = linf = 0.0
    for m in range(len(edges) - 1):
        t0, t1 = edges[m], edges[m + 1]
        pts, wts = gauss_points(t0, t1)
        sample = np.concatenate([[t0], pts, [t1]])
        exact = np.zeros((len(sample), M_h.n_rows))
        for theta, g in exact_terms:
            exact += (np.asarray(theta(sample), dtype=float)[:, None]
                      * g[None, :])
        if isinstance(approx, PiecewiseConstantField):
            approx_vals = np.broadcast_to(approx.values[m], exact.shape)
        else:
            approx_vals = approx.value(sample)
        err = exact - approx_vals
        for q in range(len(pts)):
            e = err[1 + q]
            l2sq += wts[q] * float(e @ matvec(M_h, e))
            l1 += wts[q] * l1_norm(mesh, e)
        linf = max(linf, max(linf_norm(e) for e in err))
    return {"L1": l1, "L2": float(np.sqrt(max(l2sq, 0.0))), "Linf": linf}


@dataclass
class ConvergenceRow:
    level: int
    M: int
    k: float
    err: dict
    eoc: dict


def eoc_table(entries):
    """Attach observed orders to (level, M, k, err-dict) entries.

    eoc = log(e_prev / e_cur) / log(k_prev / k_cur); the first row and any
    row with a non-positive error on either side gets None.
    """
    rows = []
    for i, (level, M, k, err) in enumerate(entries):
        eoc = {}
        for key in err:
            if i == 0:
                eoc[key] = None
                continue
            e_prev = entries[i - 1][3][key]
            k_prev = entries[i - 1][2]
            if e_prev > 0 and err[key] > 0 and k_prev != k:
                eoc[key] = float(np.log(e_prev / err[key])
                                 / np.log(k_prev / k))
            else:
                eoc[key] = None
        rows.append(ConvergenceRow(level, M, float(k), dict(err), eoc))
    return rows


@dataclass
class StudyResult:
    problem: str
    n_per_side: int
    threshold: float
    levels: list
    tables: dict = field(default_factory=dict)
    iterations: list = field(default_factory=list)
    wall_times: list = field(default_factory=list)
    failures: dict = field(default_factory=dict)

    @property
    def ok(self):
        return not self.failures


def _exact_pairs(mesh, terms):
    return [(t.theta, interpolate(mesh, t.profile)) for t in terms]


def run_study(problem, levels, n_per_side=65, threshold=1e-5, max_iters=100,
              cg_tol=1e-12, verbose=False):
    """Optimal-control convergence study over a list of interval counts.

    Solves the full fixed-point problem per level and tabulates control,
    state, post-processed state, and adjoint errors with observed orders.
    Solver failures are recorded per level and remaining levels continue.
    """
    mesh = build_mesh(n_per_side)
    M_h, K_h = mass_matrix(mesh), stiffness_matrix(mesh)
    dp = discretize_problem(problem, mesh, M_h, K_h)
    ex = problem.exact
    y_pairs = _exact_pairs(mesh, ex.y)
    p_pairs = _exact_pairs(mesh, ex.p)
    exact_u = (ex.u_funcs, ex.u_breaks)

    entries = {key: [] for key in ("control", "state", "state_projected",
                                   "adjoint")}
    result = StudyResult(problem.name, n_per_side, threshold, list(levels))
    for level, M in enumerate(levels, start=1):
        grid = uniform_grid(problem.T, M)
        tic = time.perf_counter()
        try:
            report = fixed_point_solve(dp, grid, threshold=threshold,
                                       max_iters=max_iters, cg_tol=cg_tol)
        except FixedPointError as exc:
            result.failures[M] = str(exc)
            result.iterations.append(exc.report.iterations)
            result.wall_times.append(time.perf_counter() - tic)
            continue
        errs = {
            "control": control_norms(exact_u, report.control, problem.T),
            "state": field_error_norms(y_pairs, report.state, mesh, M_h),
            "state_projected": field_error_norms(
                y_pairs, dual_linear_projection(report.state, grid), mesh,
                M_h),
            "adjoint": field_error_norms(p_pairs, report.adjoint, mesh, M_h),
        }
        for key in entries:
            entries[key].append((level, M, grid.k_max, errs[key]))
        result.iterations.append(report.iterations)
        result.wall_times.append(time.perf_counter() - tic)
        if verbose:
            print(f"  M={M}: {report.iterations} sweeps, "
                  f"control L2 {errs['control']['L2']:.3e}")
    result.tables = {key: eoc_table(rows) for key, rows in entries.items()}
    return result


def run_state_study(problem, levels, n_per_side=65, cg_tol=1e-12,
                    verbose=False):
    """Pure discretization study without the optimizer.

    Solves the state equation (and the adjoint equation for the problem's
    chosen right-hand side) per level; tabulates raw, post-processed and
    adjoint errors.  Used for manufactured problems.
    """
    mesh = build_mesh(n_per_side)
    M_h, K_h = mass_matrix(mesh), stiffness_matrix(mesh)
    y0 = interpolate(mesh, problem.y0)
    f_terms = [RhsTerm(interpolate(mesh, s.profile), s.theta,
                       breaks=np.asarray(s.breaks, dtype=float), kind=s.kind)
               for s in problem.g0]
    h_terms = [RhsTerm(interpolate(mesh, s.profile), s.theta,
                       breaks=np.asarray(s.breaks, dtype=float), kind=s.kind)
               for s in problem.exact.p_rhs]
    y_pairs = _exact_pairs(mesh, problem.exact.y)
    p_pairs = _exact_pairs(mesh, problem.exact.p)

    entries = {key: [] for key in ("state", "state_projected", "adjoint")}
    result = StudyResult(problem.name, n_per_side, 0.0, list(levels))
    for level, M in enumerate(levels, start=1):
        grid = uniform_grid(problem.T, M)
        tic = time.perf_counter()
        y_k = solve_state(M_h, K_h, grid, f_terms, y0, tol=cg_tol)
        p_k = solve_adjoint(M_h, K_h, grid, terms=h_terms, tol=cg_tol)
        errs = {
            "state": field_error_norms(y_pairs, y_k, mesh, M_h),
            "state_projected": field_error_norms(
                y_pairs, dual_linear_projection(y_k, grid), mesh, M_h),
            "adjoint": field_error_norms(p_pairs, p_k, mesh, M_h),
        }
        for key in entries:
            entries[key].append((level, M, grid.k_max, errs[key]))
        result.iterations.append(0)
        result.wall_times.append(time.perf_counter() - tic)
        if verbose:
            print(f"  M={M}: state L2 {errs['state']['L2']:.3e}")
    result.tables = {key: eoc_table(rows) for key, rows in entries.items()}
    return result
