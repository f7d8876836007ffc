import numpy as np
import pytest

from parapt.control import (AdmissibleSet, apply_B_adjoint, clamp_control,
                            constant_control)
from parapt.fem import build_mesh, interpolate, mass_matrix, stiffness_matrix
from parapt.optimizer import (DiscreteProblem, FixedPointError,
                              discretize_problem, fixed_point_solve)
from parapt.problems import example1
from parapt.quadrature import gauss_points, split_at
from parapt.timegrid import uniform_grid


@pytest.fixture(scope="module")
def coarse_setup():
    prob = example1()
    mesh = build_mesh(17)
    Mh, Kh = mass_matrix(mesh), stiffness_matrix(mesh)
    return prob, mesh, discretize_problem(prob, mesh, Mh, Kh)


def test_huge_regularization_collapses_to_zero_control():
    mesh = build_mesh(9)
    Mh, Kh = mass_matrix(mesh), stiffness_matrix(mesh)
    g = interpolate(mesh, lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y))
    box = AdmissibleSet(np.array([-1.0]), np.array([1.0]))
    dp = DiscreteProblem(Mh, Kh, 1e6, box, [g], np.zeros(Mh.n_rows), [], [])
    grid = uniform_grid(1.0, 4)
    rep = fixed_point_solve(dp, grid,
                            u_init=constant_control(grid, np.zeros(1), box))
    assert rep.iterations <= 2
    assert np.abs(np.concatenate(rep.control.vals)).max() <= 1e-9


def test_iteration_count_small_and_mesh_insensitive(coarse_setup):
    prob, _, dp = coarse_setup
    counts = []
    for M in (5, 10, 20):
        rep = fixed_point_solve(dp, uniform_grid(prob.T, M))
        assert rep.converged and rep.final_criterion < 1e-5
        counts.append(rep.iterations)
    assert all(3 <= c <= 5 for c in counts)
    assert max(counts) - min(counts) <= 1


def test_default_start_is_constant_lower_bound(coarse_setup):
    prob, _, dp = coarse_setup
    grid = uniform_grid(prob.T, 5)
    a = fixed_point_solve(dp, grid)
    b = fixed_point_solve(dp, grid,
                          u_init=constant_control(grid, prob.uad.lower,
                                                  prob.uad))
    assert a.iterations == b.iterations
    np.testing.assert_array_equal(np.concatenate(a.control.vals),
                                  np.concatenate(b.control.vals))


def test_objective_history_decreases(coarse_setup):
    prob, _, dp = coarse_setup
    rep = fixed_point_solve(dp, uniform_grid(prob.T, 10))
    hist = np.asarray(rep.objective_history)
    assert rep.objective == hist[-1]
    assert np.all(np.diff(hist) <= 1e-12)


def test_reported_pair_satisfies_clamp_consistency(coarse_setup):
    """One extra sweep from the reported control moves the pairing by no
    more than the stopping threshold."""
    prob, _, dp = coarse_setup
    grid = uniform_grid(prob.T, 8)
    rep = fixed_point_solve(dp, grid)
    w = apply_B_adjoint(rep.adjoint, dp.shapes, dp.M_h)
    again = fixed_point_solve(dp, grid, u_init=rep.control, max_iters=3)
    w2 = apply_B_adjoint(again.adjoint, dp.shapes, dp.M_h)
    assert np.abs(w2 - w).max() <= 1e-5


def test_variational_inequality_for_reported_pair(coarse_setup, rng):
    """alpha*u + B'p paired against v - u is nonnegative for admissible v:
    the discrete first-order optimality condition."""
    prob, _, dp = coarse_setup
    grid = uniform_grid(prob.T, 8)
    rep = fixed_point_solve(dp, grid, threshold=1e-11)
    u = rep.control
    w = apply_B_adjoint(rep.adjoint, dp.shapes, dp.M_h)
    for _ in range(5):
        v = clamp_control(grid.t,
                          rng.uniform(-30.0, 5.0, size=(1, grid.M + 1)),
                          dp.box)
        edges = split_at(np.array([0.0, prob.T]),
                         np.concatenate([u.breaks[0], v.breaks[0], grid.t]))
        pts, wts = gauss_points(edges[:-1], edges[1:])
        grad = dp.alpha * u.value(0, pts) + np.interp(pts, grid.t, w[0])
        integral = float((wts * grad * (v.value(0, pts) - u.value(0, pts))).sum())
        assert integral >= -1e-8


def test_failure_report_carries_last_state(coarse_setup):
    prob, _, dp = coarse_setup
    with pytest.raises(FixedPointError) as info:
        fixed_point_solve(dp, uniform_grid(prob.T, 5), max_iters=2)
    rep = info.value.report
    assert rep.converged is False
    assert rep.iterations == 2
    assert np.isfinite(rep.final_criterion) and rep.final_criterion > 1e-5
    assert rep.control is not None and rep.adjoint is not None
