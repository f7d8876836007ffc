"""Forward state solver: piecewise-constant ansatz, piecewise-linear tests.

Testing the space-time weak form with the nodal hat functions decouples
into a sweep that looks like Crank-Nicolson between interval values with
a damped (implicit-Euler-like) first step and a mass-matrix solve that
produces the terminal value:

    (M + k_1/2 K) a_1      = M y0 + F_0
    (M + k_{m+1}/2 K) a_{m+1} = (M - k_m/2 K) a_m + F_m
    M a_{M+1}              = (M - k_M/2 K) a_M + F_M

where F_m integrates the load against the hat at t_m.  The first step
damps rough initial data, which is what rescues second-order accuracy of
the interval values in the mean-square sense.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .linalg import add_scaled, cg_solve, matvec
from .quadrature import gauss_points, split_at
from .timegrid import PiecewiseConstantField


@dataclass
class RhsTerm:
    """Separable load theta(t) * g(x).

    ``spatial`` holds interior nodal coefficients of g.  ``temporal`` must
    accept numpy arrays.  ``breaks`` lists interior kink locations of
    theta (clamp crossings); integration splits there, so piecewise-smooth
    factors are integrated essentially exactly.  ``kind`` is a label:
    "smooth", "clamped" or "const".
    """
    spatial: np.ndarray
    temporal: Callable
    breaks: np.ndarray = field(default_factory=lambda: np.zeros(0))
    kind: str = "smooth"


def constant_term(spatial, c=1.0):
    return RhsTerm(spatial, lambda t: np.full_like(np.asarray(t, float), c),
                   kind="const")


def _pieces(grid, breaks):
    """Quadrature pieces: edges refined by breaks, with parent intervals."""
    edges = split_at(grid.t, np.asarray(breaks, dtype=float))
    parents = grid.interval_index(0.5 * (edges[:-1] + edges[1:]))
    return edges, parents


def hat_time_integrals(term, grid):
    """w_j = integral of theta(t) * hat_j(t) dt for j = 0..M."""
    edges, parents = _pieces(grid, term.breaks)
    pts, wts = gauss_points(edges[:-1], edges[1:], rule=10)
    theta = np.asarray(term.temporal(pts), dtype=float)
    t0 = grid.t[parents][:, None]
    t1 = grid.t[parents + 1][:, None]
    up = (pts - t0) / (t1 - t0)           # hat at the right end of I_m
    w = np.zeros(grid.M + 1)
    np.add.at(w, parents + 1, (wts * theta * up).sum(axis=1))
    np.add.at(w, parents, (wts * theta * (1.0 - up)).sum(axis=1))
    return w


def interval_time_integrals(term, grid):
    """Plain integrals of theta over each interval I_m."""
    edges, parents = _pieces(grid, term.breaks)
    pts, wts = gauss_points(edges[:-1], edges[1:], rule=10)
    theta = np.asarray(term.temporal(pts), dtype=float)
    out = np.zeros(grid.M)
    np.add.at(out, parents, (wts * theta).sum(axis=1))
    return out


def _load_vectors(M_h, terms, grid):
    """Hat-weighted load vectors F_0..F_M."""
    n = M_h.n_rows
    F = np.zeros((grid.M + 1, n))
    for term in terms:
        w = hat_time_integrals(term, grid)
        F += np.outer(w, matvec(M_h, term.spatial))
    return F


class StepMatrixCache:
    """Per-interval matrices M + (k/2) K, shared across solves on a grid."""

    def __init__(self, M_h, K_h):
        self.M_h = M_h
        self.K_h = K_h
        self._cache = {}

    def get(self, k):
        key = float(k)
        if key not in self._cache:
            self._cache[key] = add_scaled(self.M_h, self.K_h, 1.0, 0.5 * key)
        return self._cache[key]


def solve_state(M_h, K_h, grid, terms, y0, tol=1e-12, cache=None):
    """March the damped scheme forward; returns the interval-value field."""
    y0 = np.asarray(y0, dtype=float)
    F = _load_vectors(M_h, terms, grid)
    cache = cache or StepMatrixCache(M_h, K_h)
    M = grid.M
    alphas = np.zeros((M + 1, M_h.n_rows))

    a, _ = cg_solve(cache.get(grid.k[0]), matvec(M_h, y0) + F[0], tol=tol,
                    x0=y0)
    alphas[0] = a
    for m in range(1, M):
        rhs = matvec(M_h, a) - 0.5 * grid.k[m - 1] * matvec(K_h, a) + F[m]
        a, _ = cg_solve(cache.get(grid.k[m]), rhs, tol=tol, x0=a)
        alphas[m] = a
    rhs = matvec(M_h, a) - 0.5 * grid.k[M - 1] * matvec(K_h, a) + F[M]
    terminal, _ = cg_solve(M_h, rhs, tol=tol, x0=a)
    alphas[M] = terminal
    return PiecewiseConstantField(grid, alphas)


def state_l2_stability_check(y_k, terms, y0, M_h, grid):
    """Ratio ||y_k|| / (||f|| + ||y0||) in L2(L2); bounded uniformly in k."""
    num = np.sqrt(sum(
        grid.k[m] * float(y_k.values[m] @ matvec(M_h, y_k.values[m]))
        for m in range(grid.M)))
    Mg = [matvec(M_h, term.spatial) for term in terms]
    gram = np.array([[float(term.spatial @ Mgj) for Mgj in Mg]
                     for term in terms])
    pts, wts = gauss_points(grid.t[:-1], grid.t[1:])
    sq = 0.0
    if terms:
        theta = np.array([np.asarray(t.temporal(pts), dtype=float)
                          for t in terms])
        # integral of sum_ij theta_i theta_j (g_i, g_j), cross terms included
        sq = float(np.einsum("ipq,jpq,ij,pq->", theta, theta, gram, wts))
    f_norm = np.sqrt(max(sq, 0.0))
    y0_norm = np.sqrt(max(float(np.asarray(y0) @ matvec(M_h, y0)), 0.0))
    return num / (f_norm + y0_norm)
