import numpy as np
import pytest

from parapt.problems import (example1, example2, find_crossings,
                             manufactured_smooth, self_test, sin_profile)


@pytest.mark.parametrize("factory", [example1, example2, manufactured_smooth])
def test_exact_solutions_satisfy_their_equations(factory):
    """State equation, adjoint equation, clamp optimality and initial
    condition residuals, sampled over the space-time cylinder."""
    residuals = self_test(factory())
    assert max(residuals.values()) <= 1e-8


def test_example1_setup():
    spec = example1()
    assert spec.T == 0.1
    assert spec.alpha == pytest.approx(np.pi ** -4)
    assert spec.n_controls == 1
    np.testing.assert_allclose(spec.uad.lower, [-25.0])
    np.testing.assert_allclose(spec.uad.upper, [-1.0])
    # the upper bound becomes active on a single trailing interval
    assert len(spec.exact.u_breaks[0]) == 1
    assert 0.08 < spec.exact.u_breaks[0][0] < 0.09


def test_example1_control_is_clamped_pairing():
    spec = example1()
    t = np.linspace(0.0, spec.T, 200)
    raw = -spec.exact.pairing(t) / spec.alpha
    clamped = np.clip(raw, spec.uad.lower[0], spec.uad.upper[0])
    np.testing.assert_allclose(spec.exact.u_funcs[0](t), clamped, rtol=1e-12)
    np.testing.assert_allclose(spec.exact.u_args[0](t), raw, rtol=1e-12)


def test_example2_control_feasible_and_oscillating():
    spec = example2()
    assert spec.T == 0.5 and spec.alpha == 1.0
    t = np.linspace(0.0, spec.T, 2000)
    u = spec.exact.u_funcs[0](t)
    assert u.min() >= 0.2 - 1e-14 and u.max() <= 0.4 + 1e-14
    # two full periods crossing each bound twice per period
    assert len(spec.exact.u_breaks[0]) == 8


def test_example_initial_states_match_exact_state():
    for spec in (example1(), example2(), manufactured_smooth()):
        x, y = 0.3, 0.7
        from_terms = sum(term.theta(0.0) * term.profile(x, y)
                         for term in spec.exact.y)
        assert spec.y0(x, y) == pytest.approx(from_terms, rel=1e-12, abs=1e-14)


def test_manufactured_force_and_terminal_condition():
    spec = manufactured_smooth()
    lam = 2.0 * np.pi ** 2
    for t in (0.0, 0.2, spec.T):
        ratio = spec.g0[0].theta(t) / spec.exact.y[0].theta(t)
        assert ratio == pytest.approx(lam - 1.0, rel=1e-12)
    assert spec.exact.p[0].theta(spec.T) == 0.0
    assert spec.uad.dim == 0 and spec.n_controls == 0


def test_find_crossings_locates_level_sets():
    hits = find_crossings(lambda t: np.cos(2.0 * np.pi * t), -0.5, 0.5, 1.0)
    np.testing.assert_allclose(sorted(hits), [1 / 6, 1 / 3, 2 / 3, 5 / 6],
                               atol=1e-10)
    assert find_crossings(lambda t: np.zeros_like(t), -1.0, 1.0, 1.0).size == 0


def test_sin_profile_peaks_at_center():
    f = sin_profile(1, 1)
    assert f(0.5, 0.5) == pytest.approx(1.0)
    assert f(0.0, 0.3) == pytest.approx(0.0, abs=1e-15)
    g = sin_profile(2, 1)
    assert g(0.25, 0.5) == pytest.approx(1.0)
