"""Fixed-point solution of the discrete optimality system.

Each sweep solves the state equation for the current control, solves the
adjoint equation driven by the tracking misfit, and replaces the control
by the exact clamp of -(1/alpha) times the adjoint pairing.  The sweep is
a contraction for the regularizations considered here, and the iteration
stops once the adjoint pairing moves less than the threshold in the
maximum norm over grid nodes and components.  Because the stopping test
compares consecutive pairings, the count never drops below two sweeps.
"""

from dataclasses import dataclass, field

import numpy as np

from .adjoint import solve_adjoint
from .control import (apply_B_adjoint, clamp_control, constant_control,
                      control_to_rhs_terms)
from .fem import interpolate
from .linalg import matvec
from .quadrature import gauss_points
from .state import (RhsTerm, StepMatrixCache, interval_time_integrals,
                    solve_state)


class FixedPointError(RuntimeError):
    """Iteration budget exhausted; carries the partial report."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


@dataclass
class SolveReport:
    control: object          # ClampedLinearControl
    state: object            # PiecewiseConstantField
    adjoint: object          # PiecewiseLinearField
    iterations: int
    final_criterion: float
    converged: bool
    objective: float
    objective_history: list = field(default_factory=list)


def _tracking_misfit_sq(y_k, yd_terms, M_h, grid):
    """Integral over (0,T) of ||y_k(t) - y_d(t)||^2 in L2(Omega).

    Exact in the piecewise-constant factor, 5-point Gauss in the smooth
    target factors.
    """
    Mg = [matvec(M_h, t.spatial) for t in yd_terms]
    gram = np.array([[float(ti.spatial @ Mgj) for Mgj in Mg]
                     for ti in yd_terms]) if yd_terms else np.zeros((0, 0))
    pts, wts = gauss_points(grid.t[:-1], grid.t[1:])
    total = 0.0
    if yd_terms:
        theta = np.array([np.asarray(t.temporal(pts), dtype=float)
                          for t in yd_terms])
        total += float(np.einsum("ipq,jpq,ij,pq->", theta, theta, gram, wts))
        th_ints = np.array([interval_time_integrals(t, grid)
                            for t in yd_terms])          # (terms, M)
    for m in range(grid.M):
        a = y_k.values[m]
        total += grid.k[m] * float(a @ matvec(M_h, a))
        if yd_terms:
            cross = np.array([a @ Mgj for Mgj in Mg])
            total -= 2.0 * float(cross @ th_ints[:, m])
    return max(total, 0.0)


@dataclass
class DiscreteProblem:
    """Mesh-resolved problem data shared by all fixed-point sweeps."""
    M_h: object
    K_h: object
    alpha: float
    box: object
    shapes: list             # interior coefficients of the g_i
    y0: np.ndarray
    source_terms: list       # RhsTerm list for the control-independent load
    yd_terms: list           # RhsTerm list for the tracking target


def discretize_problem(problem, mesh, M_h, K_h):
    """Interpolate all spatial profiles of a ProblemSpec once."""
    shapes = [interpolate(mesh, g) for g in problem.g]
    y0 = interpolate(mesh, problem.y0)
    source_terms = [
        RhsTerm(interpolate(mesh, s.profile), s.theta,
                breaks=np.asarray(s.breaks, dtype=float), kind=s.kind)
        for s in problem.g0]
    yd_terms = [
        RhsTerm(interpolate(mesh, s.profile), s.theta,
                breaks=np.asarray(s.breaks, dtype=float), kind=s.kind)
        for s in problem.y_d]
    return DiscreteProblem(M_h, K_h, problem.alpha, problem.uad, shapes, y0,
                           source_terms, yd_terms)


def fixed_point_solve(dp, grid, threshold=1e-5, max_iters=100, u_init=None,
                      cg_tol=1e-12):
    """Run the clamp fixed-point iteration on one time grid.

    ``dp`` is a DiscreteProblem.  The initial control defaults to the
    constant lower bound.  Returns a SolveReport; raises FixedPointError
    (with the partial report attached) when max_iters sweeps do not meet
    the threshold.
    """
    cache = StepMatrixCache(dp.M_h, dp.K_h)
    u = u_init if u_init is not None else constant_control(
        grid, dp.box.lower, dp.box)
    neg_yd = [RhsTerm(-t.spatial, t.temporal, t.breaks, t.kind)
              for t in dp.yd_terms]
    w_old = None
    history = []
    for sweep in range(1, max_iters + 1):
        terms = control_to_rhs_terms(u, dp.shapes) + dp.source_terms
        y_k = solve_state(dp.M_h, dp.K_h, grid, terms, dp.y0, tol=cg_tol,
                          cache=cache)
        p_k = solve_adjoint(dp.M_h, dp.K_h, grid, pc_part=y_k, terms=neg_yd,
                            tol=cg_tol, cache=cache)
        w = apply_B_adjoint(p_k, dp.shapes, dp.M_h)
        misfit = _tracking_misfit_sq(y_k, dp.yd_terms, dp.M_h, grid)
        history.append(0.5 * misfit + 0.5 * dp.alpha * u.squared_l2())
        crit = np.inf if w_old is None else float(np.max(np.abs(w - w_old)))
        u = clamp_control(grid.t, -w / dp.alpha, dp.box)
        if crit < threshold:
            return SolveReport(u, y_k, p_k, sweep, crit, True, history[-1],
                               history)
        w_old = w
    report = SolveReport(u, y_k, p_k, max_iters, crit, False, history[-1],
                         history)
    raise FixedPointError(
        f"no convergence in {max_iters} sweeps "
        f"(last criterion {crit:.3e}, threshold {threshold:.1e})", report)
