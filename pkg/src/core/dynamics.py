"""Extremal dynamics of the minimum-shear steering problem.

State is (Sigma, M, Omega) with Omega constant:

    dSigma/dt = A Sigma + Sigma A
    dM/dt     = Omega A - A Omega
    M         = -g_theta(A) G_theta(A)

Integration is classical fixed-step RK4 on [0, 1]. After every step Sigma is
re-symmetrized, M re-projected to traceless symmetric, and Sigma checked for
positive definiteness.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import pandas as pd
from numpy.typing import NDArray
from scipy.integrate import simpson, trapezoid

from ..models.params import CostParams, IntegratorConfig
from ..models.results import CostReport, SpectrumDrift
from ..models.trajectory import ExtremalState, Trajectory
from ..utils.logger import logger
from .exceptions import IntegrationError
from .spectral_cost import control_from_momentum, invert_spectrum, momentum_from_control, soft_spectrum
from .symmat import (
    SPD_EPS,
    Matrix,
    SkewMatrix,
    SpdMatrix,
    SymMatrix,
    TracelessSym,
    characteristic_coefficients,
    frobenius,
    sym_eig,
    symmetrize,
)


class _Evaluation(NamedTuple):
    d_sigma: Matrix
    d_m: Matrix
    control: Matrix
    lam: NDArray[np.float64]  # aligned with ascending mu
    mu: NDArray[np.float64]


def _traceless_sym(a: Matrix) -> Matrix:
    n = a.shape[0]
    s = 0.5 * (a + a.T)
    return s - (np.trace(s) / n) * np.eye(n)


def vector_field(s: ExtremalState, p: CostParams) -> tuple[SymMatrix, SymMatrix]:
    """Right-hand side of the extremal system.

    Args:
        s: Current state (Sigma, M, Omega)
        p: Cost parameters

    Returns:
        Tuple of (dSigma, dM); dOmega is identically zero

    Raises:
        IterationError: If the momentum inversion fails
    """
    a = control_from_momentum(s.m, p)
    d_sigma = a @ s.sigma + s.sigma @ a
    d_m = s.omega @ a - a @ s.omega
    return 0.5 * (d_sigma + d_sigma.T), _traceless_sym(d_m)


class _ExtremalField:
    """Vector field with control recovery according to the integrator mode."""

    def __init__(self, omega: Matrix, p: CostParams, cfg: IntegratorConfig, lam_star: NDArray[np.float64] | None):
        self.omega = omega
        self.p = p
        self.cfg = cfg
        self.lam_star = lam_star

    def __call__(self, sigma: Matrix, m: Matrix, guess: NDArray[np.float64] | None) -> _Evaluation:
        mu, vectors = sym_eig(m)
        if self.lam_star is None:
            lam = invert_spectrum(mu, self.p, self.cfg.inversion, guess)
        else:
            lam = self.lam_star
        a = (vectors * lam) @ vectors.T
        a = _traceless_sym(a)
        d_sigma = a @ sigma + sigma @ a
        d_m = self.omega @ a - a @ self.omega
        return _Evaluation(0.5 * (d_sigma + d_sigma.T), _traceless_sym(d_m), a, lam, np.array(mu))


def integrate(
    sigma0: SpdMatrix,
    m0: TracelessSym,
    omega: SkewMatrix,
    p: CostParams,
    cfg: IntegratorConfig | None = None,
    lax_trace: float = 0.0,
) -> Trajectory:
    """Integrate the extremal system from t = 0 to t = 1 with fixed-step RK4.

    Args:
        sigma0: Initial covariance (SPD)
        m0: Initial momentum (traceless symmetric)
        omega: Constant skew component
        p: Cost parameters
        cfg: Integrator settings
        lax_trace: tr(L_0)/n, carried for costate reconstruction

    Returns:
        Trajectory with states, controls and per-node diagnostics

    Raises:
        IntegrationError: If Sigma loses positive definiteness
        IterationError: If the momentum inversion fails
    """
    cfg = cfg or IntegratorConfig()
    sigma = np.array(sigma0, dtype=np.float64)
    m = _traceless_sym(np.array(m0, dtype=np.float64))
    omega = np.array(omega, dtype=np.float64)
    omega = 0.5 * (omega - omega.T)
    n = sigma.shape[0]
    if m.shape != (n, n) or omega.shape != (n, n):
        raise ValueError(f"dimension mismatch: sigma {sigma.shape}, m {m.shape}, omega {omega.shape}")

    steps = cfg.steps
    h = 1.0 / steps
    times = np.linspace(0.0, 1.0, steps + 1)

    lam_star = None
    if cfg.control_mode == "spectral_matching":
        lam_star = invert_spectrum(sym_eig(m).values, p, cfg.inversion)
    field = _ExtremalField(omega, p, cfg, lam_star)

    sigmas = np.empty((steps + 1, n, n))
    momenta = np.empty((steps + 1, n, n))
    controls = np.empty((steps + 1, n, n))
    eigs_a = np.empty((steps + 1, n))
    eigs_m = np.empty((steps + 1, n))
    g_theta = np.empty(steps + 1)
    max_correction = 0.0

    def record(k: int, ev: _Evaluation) -> None:
        sigmas[k] = sigma
        momenta[k] = m
        controls[k] = ev.control
        eigs_a[k] = np.sort(ev.lam)
        eigs_m[k] = ev.mu
        g_theta[k] = soft_spectrum(ev.lam, p.theta)[0]

    k1 = field(sigma, m, None)
    for k in range(steps):
        record(k, k1)
        guess = k1.lam
        k2 = field(sigma + 0.5 * h * k1.d_sigma, _traceless_sym(m + 0.5 * h * k1.d_m), guess)
        k3 = field(sigma + 0.5 * h * k2.d_sigma, _traceless_sym(m + 0.5 * h * k2.d_m), guess)
        k4 = field(sigma + h * k3.d_sigma, _traceless_sym(m + h * k3.d_m), guess)

        sigma_next = sigma + (h / 6.0) * (k1.d_sigma + 2.0 * k2.d_sigma + 2.0 * k3.d_sigma + k4.d_sigma)
        m_next = m + (h / 6.0) * (k1.d_m + 2.0 * k2.d_m + 2.0 * k3.d_m + k4.d_m)

        sigma_sym, correction = symmetrize(sigma_next)
        max_correction = max(max_correction, correction)
        sigma = np.array(sigma_sym)
        m = _traceless_sym(m_next)

        values = sym_eig(sigma).values
        if values[-1] <= 0.0 or values[0] <= SPD_EPS * values[-1]:
            raise IntegrationError(
                f"Sigma lost positive definiteness at t={times[k + 1]:.6f} "
                f"(eigenvalues [{values[0]:.3e}, {values[-1]:.3e}])",
                time=float(times[k + 1]),
            )
        k1 = field(sigma, m, k1.lam)
    record(steps, k1)

    logger.debug(
        f"Integrated {steps} RK4 steps (n={n}, mode={cfg.control_mode}), "
        f"max symmetry correction {max_correction:.2e}"
    )

    return Trajectory(
        times=times,
        sigmas=sigmas,
        momenta=momenta,
        omega=omega,
        controls=controls,
        det_sigma=np.linalg.det(sigmas),
        g_theta=g_theta,
        eigs_a=eigs_a,
        eigs_m=eigs_m,
        theta=p.theta,
        lax_trace=lax_trace,
        max_symmetry_correction=max_correction,
    )


def constant_control_trajectory(
    sigma0: SpdMatrix, a: TracelessSym, p: CostParams, steps: int = 1000
) -> Trajectory:
    """Closed-form trajectory Sigma_t = e^{tA} Sigma_0 e^{tA} under a constant control.

    The momentum is the constant -g_theta(A) G_theta(A) and Omega = 0, which
    makes this an extremal whenever the boundary data commute.
    """
    a = _traceless_sym(np.array(a, dtype=np.float64))
    n = a.shape[0]
    times = np.linspace(0.0, 1.0, steps + 1)
    values, vectors = sym_eig(a)
    m = np.array(momentum_from_control(a, p))
    sigmas = np.empty((steps + 1, n, n))
    for k, t in enumerate(times):
        flow = (vectors * np.exp(t * values)) @ vectors.T
        s = flow @ sigma0 @ flow
        sigmas[k] = 0.5 * (s + s.T)
    g, _ = soft_spectrum(values, p.theta)
    mu = sym_eig(m).values
    return Trajectory(
        times=times,
        sigmas=sigmas,
        momenta=np.broadcast_to(m, (steps + 1, n, n)),
        omega=np.zeros((n, n)),
        controls=np.broadcast_to(a, (steps + 1, n, n)),
        det_sigma=np.linalg.det(sigmas),
        g_theta=np.full(steps + 1, g),
        eigs_a=np.broadcast_to(values, (steps + 1, n)),
        eigs_m=np.broadcast_to(mu, (steps + 1, n)),
        theta=p.theta,
    )


def spectrum_drift(traj: Trajectory) -> SpectrumDrift:
    """Maximum drift of the spectra of A_t, M_t and L_t relative to t = 0.

    L = M + Omega is not symmetric, so its spectrum is tracked through the
    coefficients of its characteristic polynomial.
    """
    dev_a = np.max(np.abs(traj.eigs_a - traj.eigs_a[0]), axis=1)
    dev_m = np.max(np.abs(traj.eigs_m - traj.eigs_m[0]), axis=1)
    coeffs = np.array([characteristic_coefficients(traj.lax_matrix(k)) for k in range(traj.times.size)])
    dev_l = np.max(np.abs(coeffs - coeffs[0]), axis=1)
    return SpectrumDrift(
        drift_a=float(dev_a.max()),
        drift_m=float(dev_m.max()),
        drift_l=float(dev_l.max()),
        worst_node_a=int(dev_a.argmax()),
    )


def lyapunov_control(sigma: SpdMatrix, dsigma: SymMatrix) -> SymMatrix:
    """Solve A Sigma + Sigma A = dSigma for symmetric A.

    Evaluated exactly in the eigenbasis of Sigma: with Sigma = V diag(s) V^T and
    D = V^T dSigma V, A = V [D_ij / (s_i + s_j)] V^T.
    """
    values, vectors = sym_eig(sigma)
    d = vectors.T @ np.asarray(dsigma, dtype=np.float64) @ vectors
    d = 0.5 * (d + d.T)
    a = vectors @ (d / np.add.outer(values, values)) @ vectors.T
    return 0.5 * (a + a.T)


def _integrate_grid(times: NDArray[np.float64], values: NDArray[np.float64]) -> tuple[float, str]:
    # Simpson on an even number of intervals, trapezoid otherwise
    if (times.size - 1) % 2 == 0:
        return float(simpson(values, x=times)), "simpson"
    return float(trapezoid(values, x=times)), "trapezoid"


def cost_quadrature(traj: Trajectory, p: CostParams) -> CostReport:
    """J_theta = integral of g_theta(A_t)^2 dt over the trajectory grid.

    Reports the closed-form value g_theta(A_0)^2 alongside; the two agree along
    extremals because the spectrum of A_t is constant.
    """
    g = np.array([soft_spectrum(lam, p.theta)[0] for lam in traj.eigs_a])
    value, method = _integrate_grid(traj.times, g * g)
    return CostReport(quadrature=max(value, 0.0), closed_form=float(g[0] ** 2), method=method)


def attention_integral(traj: Trajectory) -> float:
    """Integral of tr(A_t^2) dt over the trajectory grid."""
    value, _ = _integrate_grid(traj.times, np.sum(traj.eigs_a**2, axis=1))
    return value


def coercivity_gap(traj: Trajectory, p: CostParams) -> float:
    """J_theta - (1/n) * integral of tr(A_t^2); nonnegative for every control path."""
    return cost_quadrature(traj, p).quadrature - attention_integral(traj) / traj.dim


def stationarity_residuals(traj: Trajectory, p: CostParams) -> NDArray[np.float64]:
    """||g_theta(A_t) G_theta(A_t) + M_t||_F at every node."""
    out = np.empty(traj.times.size)
    for k in range(traj.times.size):
        out[k] = frobenius(np.array(momentum_from_control(traj.controls[k], p)) - traj.momenta[k])
    return out


def convergence_study(
    sigma0: SpdMatrix,
    m0: TracelessSym,
    omega: SkewMatrix,
    p: CostParams,
    steps_list: list[int] | tuple[int, ...] = (250, 500, 1000, 2000),
    reference_steps: int = 16000,
    control_mode: str = "full_inversion",
) -> pd.DataFrame:
    """Endpoint error of RK4 against a fine reference solution.

    Returns:
        DataFrame with columns steps, error and observed_order (log2 of the
        error ratio between consecutive step counts; NaN for the first row)
    """
    reference = integrate(sigma0, m0, omega, p, IntegratorConfig(steps=reference_steps, control_mode=control_mode))
    rows = []
    for steps in steps_list:
        traj = integrate(sigma0, m0, omega, p, IntegratorConfig(steps=steps, control_mode=control_mode))
        error = frobenius(traj.sigmas[-1] - reference.sigmas[-1]) + frobenius(traj.momenta[-1] - reference.momenta[-1])
        rows.append({"steps": steps, "error": error})
    frame = pd.DataFrame(rows)
    frame["observed_order"] = np.log2(frame["error"].shift(1) / frame["error"]) / np.log2(
        frame["steps"] / frame["steps"].shift(1)
    )
    return frame

