import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splitac.functionals import norm
from splitac.grid import FIVE_POINT, NEUMANN, PERIODIC, SPECTRAL, Grid, laplacian_symbol
from splitac.oracle import dense_propagators, ode_rk4
from splitac.problems import random_bandlimited, random_ternary
from splitac.propagators import (
    Logarithmic,
    Polynomial,
    PreconditionError,
    SdirkTableau,
    SolverError,
    linear_propagate,
    log_reaction,
    nonlinear_exact,
    nonlinear_log_rk,
    nonlinear_ternary_rk,
    q_defect,
)

from .conftest import random_field

# Equilibrium of u = (theta/theta_c) atanh(u) for theta = 1/4, theta_c = 1,
# by bisection (scipy.optimize.bisect, xtol 1e-15).
LOG_EQUILIBRIUM = 0.9993256730151083
# RK4 with dt = 1e-6 on u' = u - atanh(u)/4 from 0.5 over 0.01
LOG_RK4_REFERENCE = 0.5036388408141032


# ---------------------------------------------------------------- linear flow


def test_linear_identity_and_constants(any_grid):
    v = random_field(any_grid, 0)
    assert np.array_equal(linear_propagate(any_grid, v, 0.0, 0.01), v)
    c = np.full(any_grid.shape, -0.3)
    np.testing.assert_allclose(linear_propagate(any_grid, c, 5.0, 0.01), c, atol=1e-15)


def test_linear_negative_time_rejected():
    with pytest.raises(ValueError):
        linear_propagate(Grid(8, 8), np.zeros((8, 8)), -1e-3, 0.01)


def test_linear_heat_decay_of_cos_x():
    g = Grid(16, 16, NEUMANN, SPECTRAL)
    X, _ = g.mesh()
    out = linear_propagate(g, np.cos(X), 1.0, 0.01)
    np.testing.assert_allclose(out, math.exp(-0.01) * np.cos(X), atol=1e-14)
    assert math.exp(-0.01) == pytest.approx(0.990050, abs=5e-7)


def test_linear_matches_dense_expm_for_stencil_symbol():
    # same operator, independent construction (matrix exponential)
    for b in (NEUMANN, PERIODIC):
        fd, spec = dense_propagators(Grid(8, 8, b, FIVE_POINT), 0.1, 0.1)
        assert np.max(np.abs(fd - spec)) < 1e-13


def test_stencil_heat_kernel_is_stochastic():
    fd, spec = dense_propagators(Grid(8, 8, NEUMANN, FIVE_POINT), 1.0, 0.3)
    assert spec.min() > -1e-15
    np.testing.assert_allclose(spec.sum(axis=1), 1.0, atol=1e-13)


def test_spectral_heat_kernel_has_negative_entries():
    # why the spectral symbol cannot keep the maximum principle
    _, spec = dense_propagators(Grid(8, 8, NEUMANN, SPECTRAL), 0.1, 0.01)
    assert spec.min() < -1e-6


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    t=st.floats(0.0, 50.0),
    boundary=st.sampled_from([NEUMANN, PERIODIC]),
)
def test_linear_maxnorm_contraction(seed, t, boundary):
    g = Grid(16, 16, boundary)
    v = random_field(g, seed)
    out = linear_propagate(g, v, t, 0.01)
    assert np.max(np.abs(out)) <= np.max(np.abs(v)) + 1e-12


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    t=st.floats(0.0, 10.0),
    k=st.sampled_from([0, 1, 2]),
    grid=st.sampled_from([Grid(16, 16, b, s) for b in (NEUMANN, PERIODIC) for s in (FIVE_POINT, SPECTRAL)]),
)
def test_linear_hk_contraction(seed, t, k, grid):
    v = random_field(grid, seed)
    assert norm(grid, linear_propagate(grid, v, t, 0.01), k) <= norm(grid, v, k) * (1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), s=st.floats(0.0, 3.0), t=st.floats(0.0, 3.0))
def test_linear_semigroup(seed, s, t):
    g = Grid(16, 16, PERIODIC)
    v = random_field(g, seed)
    two = linear_propagate(g, linear_propagate(g, v, t, 0.01), s, 0.01)
    one = linear_propagate(g, v, s + t, 0.01)
    assert np.max(np.abs(two - one)) <= 1e-12


# ---------------------------------------------------------------- Q defect


def test_q_defect_constant_is_zero(any_grid):
    q = q_defect(any_grid, np.full(any_grid.shape, 0.4), 0.5, 0.01)
    assert np.max(np.abs(q)) < 1e-15


def test_q_defect_cos_x_amplitude():
    g = Grid(16, 16, NEUMANN, SPECTRAL)
    X, _ = g.mesh()
    q = q_defect(g, np.cos(X), 0.1, 0.01)
    z = -0.01 * 0.1 / 2
    amp = math.exp(z) - 1 - z
    assert amp == pytest.approx(1.2498e-7, rel=1e-4)
    np.testing.assert_allclose(q, amp * np.cos(X), atol=1e-20)


def _l2_of_l_squared(grid, v, eps2):
    from splitac.grid import forward, inverse

    mu = laplacian_symbol(grid)
    return norm(grid, inverse(grid, (eps2 * mu) ** 2 * forward(grid, v)), "L2")


@pytest.mark.parametrize("tau", [1.0, 0.1, 0.01])
def test_q_defect_bound(tau):
    for b in (NEUMANN, PERIODIC):
        g = Grid(32, 32, b)
        for seed in range(10):
            v = random_bandlimited(g, seed, 8, 0.9)
            lhs = norm(g, q_defect(g, v, tau, 0.01), "L2")
            assert lhs <= tau**2 / 8 * _l2_of_l_squared(g, v, 0.01) * (1 + 1e-10)


# ----------------------------------------------------------- polynomial flow


def test_nonlinear_exact_equilibria():
    for c in (0.0, 1.0, -1.0):
        v = np.full((4, 4), c)
        assert np.array_equal(nonlinear_exact(v, 0.7), v)


def test_nonlinear_exact_closed_form_value():
    out = nonlinear_exact(np.array([0.5]), math.log(2))
    assert out[0] == pytest.approx(1 / math.sqrt(1.75), abs=1e-15)
    assert out[0] == pytest.approx(0.7559289, abs=1e-7)
    ref = ode_rk4(0.5, Polynomial(), math.log(2), 1e-6)
    assert abs(out[0] - ref) <= 1e-10


def test_nonlinear_exact_tiny_tau_no_cancellation():
    v = np.array([0.3])
    out = nonlinear_exact(v, 1e-10)
    # u' = u - u^3 at 0.3 is 0.273
    assert (out[0] - 0.3) / 1e-10 == pytest.approx(0.273, rel=1e-5)


def test_nonlinear_exact_precondition_names_node():
    v = np.zeros((4, 5))
    v[2, 3] = 1.0 + 1e-9
    with pytest.raises(PreconditionError, match=r"\(.*2.*3.*\)"):
        nonlinear_exact(v, 0.1)
    v[2, 3] = 1.0 + 1e-13
    nonlinear_exact(v, 0.1)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), tau=st.floats(1e-6, 5.0))
def test_nonlinear_exact_maxnorm_and_h1_growth(seed, tau):
    g = Grid(16, 16)
    v = random_bandlimited(g, seed, 6, 1.0)
    out = nonlinear_exact(v, tau)
    assert np.max(np.abs(out)) <= 1.0
    assert norm(g, out, "H1") <= math.exp(tau) * norm(g, v, "H1") * (1 + 1e-10)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), tau=st.floats(1e-6, 2.0))
def test_nonlinear_exact_l2_lipschitz(seed, tau):
    g = Grid(16, 16)
    v1 = random_field(g, seed)
    v2 = random_field(g, seed + 1)
    d_out = norm(g, nonlinear_exact(v1, tau) - nonlinear_exact(v2, tau), "L2")
    assert d_out <= math.exp(4 * tau) * norm(g, v1 - v2, "L2")


# ---------------------------------------------------------- logarithmic flow


def test_tableau():
    tab = SdirkTableau()
    assert tab.a == 1 + math.sqrt(2) / 2
    A = tab.matrix
    assert A[0, 1] == 0 and A[0, 0] == A[1, 1] == tab.a
    assert A[1, 0] == pytest.approx(1 - 2 * tab.a)
    assert tab.weights.tolist() == [0.5, 0.5]
    np.testing.assert_allclose(tab.nodes, A.sum(axis=1))


def test_log_rk_zero_equilibrium():
    assert np.array_equal(nonlinear_log_rk(np.zeros((3, 3)), 0.1, Logarithmic()), np.zeros((3, 3)))


def test_log_equilibrium_fixed_point():
    assert abs(log_reaction(LOG_EQUILIBRIUM, 0.25, 1.0)) < 1e-12
    v = np.array([LOG_EQUILIBRIUM, -LOG_EQUILIBRIUM])
    out = nonlinear_log_rk(v, 0.01, Logarithmic())
    np.testing.assert_allclose(out, v, atol=1e-11)


def test_log_rk_matches_rk4_to_its_local_error():
    ref = ode_rk4(0.5, Logarithmic(), 0.01, 1e-6)
    assert ref == pytest.approx(LOG_RK4_REFERENCE, abs=1e-13)
    gap = abs(nonlinear_log_rk(np.array([0.5]), 0.01, Logarithmic())[0] - ref)
    # a = 1 + sqrt(2)/2 gives a large error constant: ~2.7e-7 at tau = 0.01
    assert gap <= 1e-6
    # second order: local error shrinks ~8x per halving
    gaps = []
    for tau in (0.02, 0.01, 0.005):
        r = ode_rk4(0.5, Logarithmic(), tau, tau / 1e4)
        gaps.append(abs(nonlinear_log_rk(np.array([0.5]), tau, Logarithmic())[0] - r))
    ratios = [gaps[i] / gaps[i + 1] for i in range(2)]
    assert all(7.0 < r < 9.0 for r in ratios), ratios


def test_log_rk_stays_inside_near_the_walls():
    v = np.array([0.999999, -0.999999, 0.9999999999])
    out = nonlinear_log_rk(v, 0.5, Logarithmic())
    assert np.all(np.abs(out) < 1)


def test_log_rk_precondition():
    with pytest.raises(PreconditionError):
        nonlinear_log_rk(np.array([1.0]), 0.1, Logarithmic())


def test_log_rk_solver_failure(monkeypatch):
    import splitac.propagators as P

    monkeypatch.setattr(P, "NEWTON_MAXITER", 1)
    with pytest.raises(SolverError, match="node"):
        nonlinear_log_rk(np.array([0.5, 0.9]), 1.0, Logarithmic())


def test_logarithmic_params_validated():
    with pytest.raises(ValueError):
        Logarithmic(theta=0.0)


# -------------------------------------------------------------- ternary flow


def test_ternary_pure_phase_is_fixed():
    s = np.zeros((3, 8, 8))
    s[0] = 1.0
    np.testing.assert_array_equal(nonlinear_ternary_rk(s, 0.1), s)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("tau", [0.001, 0.05, 0.1])
def test_ternary_conservation(seed, tau):
    g = Grid(16, 16, PERIODIC)
    s = random_ternary(g, seed)
    out = nonlinear_ternary_rk(s, tau)
    np.testing.assert_allclose(out.mean(axis=(1, 2)), s.mean(axis=(1, 2)), rtol=0, atol=1e-12)
    assert np.max(np.abs(out.sum(axis=0) - 1.0)) <= 1e-10


def test_ternary_stage_residual_is_solved():
    # one stage against the defining equation, evaluated independently
    import splitac.propagators as P

    g = Grid(8, 8, PERIODIC)
    rhs = random_ternary(g, 4)
    c = 0.05
    u = P._ternary_stage(rhs, c)
    f = u * (1 - u) * (1 - 2 * u)
    beta = f.mean(axis=(1, 2))[:, None, None]
    lam = -(f - beta).sum(axis=0) / 3
    np.testing.assert_allclose(u + c * (f - beta + lam), rhs, atol=1e-11)


def test_ternary_shape_checked():
    with pytest.raises(ValueError):
        nonlinear_ternary_rk(np.zeros((2, 4, 4)), 0.1)
