"""Unit tests for the extremal dynamics and trajectory diagnostics.

Tests for dynamics.py - vector field, RK4 integration, conserved quantities,
cost quadrature and the convergence-order study.
"""

import numpy as np
import pytest

from src.core.dynamics import (
    coercivity_gap,
    constant_control_trajectory,
    convergence_study,
    cost_quadrature,
    integrate,
    lyapunov_control,
    spectrum_drift,
    stationarity_residuals,
    vector_field,
)
from src.core.exceptions import IntegrationError
from src.core.spectral_cost import momentum_from_control
from src.core.symmat import frobenius, relative_error
from src.models.params import CostParams, IntegratorConfig
from src.models.trajectory import ExtremalState
from tests.factories import make_orthogonal, make_spd, make_traceless

G_DIAG_ONE = 2.0 * np.log(np.e + 1.0 / np.e)


@pytest.fixture
def random_extremal(rng):
    """Initial data (sigma0, m0, omega) for a 3x3 extremal with moderate momentum.

    Returns:
        Tuple of (sigma0, m0, omega)
    """
    sigma0 = make_spd(rng, 3, spread=0.5)
    m0 = make_traceless(rng, 3, scale=0.5)
    w = rng.standard_normal((3, 3)) * 0.5
    return sigma0, m0, 0.5 * (w - w.T)


class TestVectorField:
    """Test cases for the right-hand side of the extremal system."""

    def test_outputs_are_symmetric_and_traceless(self, rng):
        """Test dSigma symmetric and dM traceless symmetric."""
        w = rng.standard_normal((3, 3))
        state = ExtremalState(sigma=make_spd(rng, 3), m=make_traceless(rng, 3), omega=0.5 * (w - w.T))
        d_sigma, d_m = vector_field(state, CostParams(theta=2.0))
        assert np.allclose(d_sigma, d_sigma.T)
        assert np.allclose(d_m, d_m.T)
        assert abs(np.trace(d_m)) < 1e-12

    def test_momentum_frozen_without_rotation(self, rng):
        """Test dM = 0 when Omega = 0."""
        state = ExtremalState(sigma=make_spd(rng, 2), m=make_traceless(rng, 2), omega=np.zeros((2, 2)))
        _, d_m = vector_field(state, CostParams(theta=1.0))
        assert frobenius(d_m) < 1e-14

    def test_state_rejects_mismatched_shapes(self):
        """Test that ExtremalState validates dimensions."""
        with pytest.raises(ValueError, match="shape"):
            ExtremalState(sigma=np.eye(2), m=np.zeros((3, 3)), omega=np.zeros((2, 2)))


class TestIntegrate:
    """Test cases for fixed-step RK4 integration of the extremal system."""

    def test_zero_momentum_is_stationary(self):
        """Test that M = 0 leaves Sigma unchanged."""
        sigma0 = np.array([[2.0, 0.3], [0.3, 1.0]])
        traj = integrate(sigma0, np.zeros((2, 2)), np.zeros((2, 2)), CostParams(theta=5.0), IntegratorConfig(steps=50))
        assert np.allclose(traj.sigmas, sigma0)
        assert np.allclose(traj.controls, 0.0, atol=1e-12)
        assert traj.steps == 50
        assert traj.times[0] == 0.0 and traj.times[-1] == 1.0

    def test_commuting_case_matches_closed_form(self):
        """Test diag(2, 0.5) is carried to diag(0.5, 2) by A = diag(-ln 2, ln 2)."""
        p = CostParams(theta=1.0)
        a = np.diag([-np.log(2.0), np.log(2.0)])
        traj = integrate(np.diag([2.0, 0.5]), momentum_from_control(a, p), np.zeros((2, 2)), p, IntegratorConfig(steps=200))
        assert relative_error(traj.sigmas[-1], np.diag([0.5, 2.0])) < 1e-10
        assert np.allclose(traj.eigs_a, [-np.log(2.0), np.log(2.0)], atol=1e-10)

    def test_conserved_quantities(self, random_extremal):
        """Test constant det(Sigma), isospectral A, M and L along the flow."""
        sigma0, m0, omega = random_extremal
        traj = integrate(sigma0, m0, omega, CostParams(theta=2.0), IntegratorConfig(steps=400))
        assert np.max(np.abs(traj.det_sigma / traj.det_sigma[0] - 1.0)) < 1e-8
        drift = spectrum_drift(traj)
        assert drift.drift_a < 1e-8
        assert drift.drift_m < 1e-8
        assert drift.drift_l < 1e-8
        assert traj.max_symmetry_correction < 1e-12

    def test_momentum_actually_rotates(self, random_extremal):
        """Test that a nonzero Omega moves M while keeping its spectrum."""
        sigma0, m0, omega = random_extremal
        traj = integrate(sigma0, m0, omega, CostParams(theta=2.0), IntegratorConfig(steps=200))
        assert frobenius(traj.momenta[-1] - traj.momenta[0]) > 1e-3

    def test_stationarity_along_trajectory(self, random_extremal):
        """Test g G + M = 0 at every node."""
        sigma0, m0, omega = random_extremal
        p = CostParams(theta=2.0)
        traj = integrate(sigma0, m0, omega, p, IntegratorConfig(steps=100))
        assert stationarity_residuals(traj, p).max() < 1e-9

    def test_costate_stays_symmetric(self, rng):
        """Test Lambda_t = L_t Sigma_t^{-1} remains symmetric from a symmetric Lambda_0."""
        sigma0 = make_spd(rng, 3, spread=0.5)
        lam0 = make_traceless(rng, 3, scale=0.4) + 0.2 * np.eye(3)
        l0 = lam0 @ sigma0
        n = 3
        trace_scalar = np.trace(l0) / n
        m0 = 0.5 * (l0 + l0.T) - trace_scalar * np.eye(n)
        omega = 0.5 * (l0 - l0.T)
        traj = integrate(sigma0, m0, omega, CostParams(theta=2.0), IntegratorConfig(steps=400), lax_trace=trace_scalar)
        assert np.allclose(traj.costate_at(0), lam0, atol=1e-12)
        for k in (100, 250, 400):
            lam = traj.costate_at(k)
            assert frobenius(lam - lam.T) < 1e-7

    def test_spectral_matching_agrees_with_full_inversion(self, random_extremal):
        """Test that reusing the t = 0 eigenvalues reproduces A_t node by node."""
        sigma0, m0, omega = random_extremal
        p = CostParams(theta=2.0)
        full = integrate(sigma0, m0, omega, p, IntegratorConfig(steps=400))
        matched = integrate(sigma0, m0, omega, p, IntegratorConfig(steps=400, control_mode="spectral_matching"))
        assert relative_error(matched.sigmas[-1], full.sigmas[-1]) < 1e-8
        gaps = [frobenius(a - b) for a, b in zip(matched.controls, full.controls)]
        assert max(gaps) < 1e-8

    def test_spectral_matching_stationarity(self, random_extremal):
        """Test g G + M = 0 at every node when A_t reuses the t = 0 eigenvalues."""
        sigma0, m0, omega = random_extremal
        p = CostParams(theta=2.0)
        traj = integrate(sigma0, m0, omega, p, IntegratorConfig(steps=400, control_mode="spectral_matching"))
        assert stationarity_residuals(traj, p).max() < 1e-9

    def test_orthogonal_equivariance(self, rng, random_extremal):
        """Test that conjugating the initial data by Q conjugates the trajectory."""
        sigma0, m0, omega = random_extremal
        q = make_orthogonal(rng, 3)
        p = CostParams(theta=2.0)
        cfg = IntegratorConfig(steps=100)
        base = integrate(sigma0, m0, omega, p, cfg)
        rotated = integrate(q @ sigma0 @ q.T, q @ m0 @ q.T, q @ omega @ q.T, p, cfg)
        assert relative_error(rotated.sigmas[-1], q @ base.sigmas[-1] @ q.T) < 1e-9
        assert np.allclose(rotated.eigs_a, base.eigs_a, atol=1e-9)

    def test_spd_loss_reports_time(self):
        """Test that squeezing an ill-conditioned Sigma past the SPD margin raises with the time."""
        p = CostParams(theta=1.0)
        m0 = momentum_from_control(np.diag([1.0, -1.0]), p)
        with pytest.raises(IntegrationError) as excinfo:
            integrate(np.diag([1.0, 1e-11]), m0, np.zeros((2, 2)), p, IntegratorConfig(steps=100))
        # lambda_min / lambda_max = 1e-11 e^{-4t} crosses 1e-12 at t = ln(10)/4
        assert 0.57 < excinfo.value.time <= 0.6
        assert "t=" in str(excinfo.value)

    def test_dimension_mismatch(self):
        """Test that inconsistent shapes are rejected."""
        with pytest.raises(ValueError, match="dimension"):
            integrate(np.eye(2), np.zeros((3, 3)), np.zeros((2, 2)), CostParams(theta=1.0))


class TestConstantControl:
    """Test cases for the closed-form constant-control trajectory."""

    def test_endpoint(self):
        """Test e^A Sigma_0 e^A at t = 1."""
        a = np.diag([-np.log(2.0), np.log(2.0)])
        traj = constant_control_trajectory(np.diag([2.0, 0.5]), a, CostParams(theta=1.0), steps=10)
        assert np.allclose(traj.sigmas[-1], np.diag([0.5, 2.0]))
        assert np.allclose(traj.det_sigma, 1.0)

    def test_is_an_extremal_without_rotation(self):
        """Test the closed form against RK4 when Omega = 0."""
        p = CostParams(theta=3.0)
        sigma0 = np.array([[1.5, 0.2], [0.2, 0.8]])
        a = np.array([[0.3, 0.1], [0.1, -0.3]])
        closed = constant_control_trajectory(sigma0, a, p, steps=100)
        rk4 = integrate(sigma0, momentum_from_control(a, p), np.zeros((2, 2)), p, IntegratorConfig(steps=100))
        assert relative_error(rk4.sigmas[-1], closed.sigmas[-1]) < 1e-9


class TestCost:
    """Test cases for the cost functional and related integrals."""

    def test_zero_control_cost(self):
        """Test J_5 of the zero-control trajectory is ((2/5) ln 2)^2."""
        p = CostParams(theta=5.0)
        traj = constant_control_trajectory(np.eye(2), np.zeros((2, 2)), p, steps=100)
        report = cost_quadrature(traj, p)
        assert report.quadrature == pytest.approx(0.076872, abs=1e-6)
        assert report.method == "simpson"
        assert report.relative_gap < 1e-12

    def test_diag_control_cost(self):
        """Test J_1 of A = diag(1, -1) is g_1(diag(1, -1))^2."""
        p = CostParams(theta=1.0)
        traj = constant_control_trajectory(np.eye(2), np.diag([1.0, -1.0]), p, steps=100)
        assert cost_quadrature(traj, p).quadrature == pytest.approx(G_DIAG_ONE**2, rel=1e-12)
        assert cost_quadrature(traj, p).quadrature == pytest.approx(5.079867, abs=1e-6)

    def test_odd_steps_use_trapezoid(self):
        """Test the quadrature rule on an odd number of intervals."""
        p = CostParams(theta=1.0)
        traj = constant_control_trajectory(np.eye(2), np.diag([0.5, -0.5]), p, steps=7)
        report = cost_quadrature(traj, p)
        assert report.method == "trapezoid"
        assert report.relative_gap < 1e-12

    def test_extremal_cost_matches_closed_form(self, random_extremal):
        """Test quadrature vs g(A_0)^2 along an extremal."""
        sigma0, m0, omega = random_extremal
        p = CostParams(theta=2.0)
        traj = integrate(sigma0, m0, omega, p, IntegratorConfig(steps=200))
        assert cost_quadrature(traj, p).relative_gap < 1e-8

    def test_coercivity(self, random_extremal):
        """Test J >= (1/n) integral of tr(A^2)."""
        sigma0, m0, omega = random_extremal
        p = CostParams(theta=2.0)
        traj = integrate(sigma0, m0, omega, p, IntegratorConfig(steps=100))
        assert coercivity_gap(traj, p) >= 0.0


class TestLyapunovControl:
    """Test cases for solving A Sigma + Sigma A = dSigma."""

    def test_solves_equation(self, rng):
        """Test the Lyapunov residual."""
        sigma = make_spd(rng, 4)
        dsigma = make_traceless(rng, 4) + 0.3 * np.eye(4)
        a = lyapunov_control(sigma, dsigma)
        assert frobenius(a @ sigma + sigma @ a - dsigma) < 1e-10
        assert np.allclose(a, a.T)

    def test_diagonal_example(self):
        """Test Sigma = diag(1, 2), dSigma = [[0, 3], [3, 0]] gives A = [[0, 1], [1, 0]]."""
        a = lyapunov_control(np.diag([1.0, 2.0]), np.array([[0.0, 3.0], [3.0, 0.0]]))
        assert np.allclose(a, [[0.0, 1.0], [1.0, 0.0]], atol=1e-14)

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_trace_identity(self, rng, n):
        """Test tr(A) = tr(Sigma^{-1} dSigma) / 2."""
        sigma = make_spd(rng, n)
        dsigma = make_traceless(rng, n) + 0.4 * np.eye(n)
        a = lyapunov_control(sigma, dsigma)
        assert np.trace(a) == pytest.approx(0.5 * np.trace(np.linalg.solve(sigma, dsigma)), abs=1e-12)


@pytest.mark.slow
class TestConvergenceStudy:
    """Test cases for the RK4 order study."""

    def test_fourth_order(self):
        """Test that the observed order approaches 4."""
        sigma0 = np.array([[1.4, 0.3], [0.3, 0.9]])
        m0 = np.array([[-0.8, 0.2], [0.2, 0.8]])
        omega = np.array([[0.0, 0.7], [-0.7, 0.0]])
        frame = convergence_study(sigma0, m0, omega, CostParams(theta=2.0), steps_list=(10, 20, 40), reference_steps=640)
        assert list(frame.columns) == ["steps", "error", "observed_order"]
        assert np.isnan(frame["observed_order"].iloc[0])
        assert frame["error"].is_monotonic_decreasing
        assert 3.5 < frame["observed_order"].iloc[-1] < 4.5
