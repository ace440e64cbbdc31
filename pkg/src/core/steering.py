"""Boundary-value layer: transport-map baseline and Levenberg-Marquardt shooting.

The shooting unknown is the initial costate Lambda_0 (symmetric, n(n+1)/2 free
entries). L_0 = Lambda_0 Sigma_0 is split into (M_0, Omega, tr/n) and the
extremal system is integrated to t = 1; the residual is the relative mismatch
with Sigma_1. Shifting Lambda_0 by c Sigma_0^{-1} moves L_0 by c I and leaves
the dynamics unchanged; Marquardt damping absorbs this gauge direction.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from ..models.params import CostParams, IntegratorConfig, ShootingConfig
from ..models.problem import ProblemInstance
from ..models.results import BaselineResult, Solution
from ..models.trajectory import Trajectory
from ..utils.logger import logger
from .dynamics import cost_quadrature, integrate, lyapunov_control
from .exceptions import ConvergenceError, CovsteerError, ShootingError
from .spectral_cost import momentum_from_control, soft_diameter
from .symmat import (
    SpdMatrix,
    SymMatrix,
    expm_sym,
    frobenius,
    invsqrtm_spd,
    logm_spd,
    relative_error,
    split,
    sqrtm_spd,
    traceless,
)

GAIN_RATIO_ACCEPT = 1e-4
DAMPING_DECREASE = 1.0 / 3.0
DAMPING_INCREASE = 2.0

Vector = NDArray[np.float64]


def gaussian_transport_map(sigma0: SpdMatrix, sigma1: SpdMatrix) -> SpdMatrix:
    """SPD map Phi with Phi Sigma_0 Phi = Sigma_1.

    Phi = S (S Sigma_0 S)^{-1/2} S with S = Sigma_1^{1/2}.
    """
    root1 = sqrtm_spd(sigma1)
    middle = root1 @ np.asarray(sigma0) @ root1
    phi = root1 @ invsqrtm_spd(0.5 * (middle + middle.T)) @ root1
    phi = 0.5 * (phi + phi.T)
    phi.setflags(write=False)
    return phi


def constant_control_baseline(inst: ProblemInstance) -> BaselineResult:
    """Feasible constant control A = log(Phi) and its cost g_theta(A)^2.

    Equal determinants make tr(log Phi) = log det Phi = 0.
    """
    phi = gaussian_transport_map(inst.sigma0, inst.sigma1)
    log_phi = logm_spd(phi)
    trace = float(np.trace(log_phi))
    a_const = traceless(log_phi)
    flow = expm_sym(a_const)
    residual = relative_error(flow @ inst.sigma0 @ flow, inst.sigma1)
    cost = soft_diameter(a_const, inst.params) ** 2
    logger.info(f"Baseline: tr(log Phi)={trace:.3e}, cost={cost:.10g}, feasibility residual={residual:.3e}")
    return BaselineResult(phi=phi, a_const=a_const, trace=trace, cost=cost, feasibility_residual=residual)


def initial_costate(inst: ProblemInstance, baseline: BaselineResult | None = None) -> SymMatrix:
    """Costate Lambda_0 whose momentum matches the baseline control.

    Solves (Sigma_0 Lambda_0 + Lambda_0 Sigma_0) / 2 = -g_theta(A) G_theta(A) for
    A = A_const, in the eigenbasis of Sigma_0.
    """
    baseline = baseline or constant_control_baseline(inst)
    m_init = momentum_from_control(baseline.a_const, inst.params)
    return lyapunov_control(inst.sigma0, 2.0 * np.asarray(m_init))


def _pack(lambda0: SymMatrix) -> Vector:
    n = lambda0.shape[0]
    return np.asarray(lambda0, dtype=np.float64)[np.triu_indices(n)].copy()


def _unpack(x: Vector, n: int) -> SymMatrix:
    upper = np.zeros((n, n))
    upper[np.triu_indices(n)] = x
    return upper + upper.T - np.diag(np.diag(upper))


def _residual_weights(n: int) -> Vector:
    rows, cols = np.triu_indices(n)
    return np.where(rows == cols, 1.0, np.sqrt(2.0))


def _shoot(lambda0: SymMatrix, inst: ProblemInstance, cfg: ShootingConfig) -> tuple[Vector, Trajectory]:
    try:
        traj = forward_simulation(inst.sigma0, lambda0, inst.params, cfg.integrator)
    except CovsteerError as e:
        raise ShootingError(f"shooting integration failed: {e}", lambda0=np.asarray(lambda0)) from e
    n = inst.dim
    mismatch = (traj.sigmas[-1] - inst.sigma1)[np.triu_indices(n)]
    residual = _residual_weights(n) * mismatch / frobenius(inst.sigma1)
    return residual, traj


def shooting_residual(lambda0: SymMatrix, inst: ProblemInstance, cfg: ShootingConfig | None = None) -> Vector:
    """Weighted upper-triangular entries of (Sigma(1) - Sigma_1) / ||Sigma_1||_F.

    Off-diagonal entries carry a factor sqrt(2), so the vector 2-norm equals the
    relative Frobenius mismatch.

    Raises:
        ShootingError: If the integration fails; carries the offending lambda0
    """
    residual, _ = _shoot(lambda0, inst, cfg or ShootingConfig())
    return residual


def _jacobian(x: Vector, r: Vector, inst: ProblemInstance, cfg: ShootingConfig) -> NDArray[np.float64]:
    # Forward differences, falling back to a backward step if the forward point fails
    n = inst.dim
    jac = np.empty((r.size, x.size))
    for i in range(x.size):
        h = cfg.fd_step * max(1.0, abs(x[i]))
        for step in (h, -h):
            x_step = x.copy()
            x_step[i] += step
            try:
                r_step, _ = _shoot(_unpack(x_step, n), inst, cfg)
            except ShootingError:
                continue
            jac[:, i] = (r_step - r) / step
            break
        else:
            raise ShootingError(f"Jacobian column {i} could not be evaluated", lambda0=_unpack(x, n))
    return jac


def _levenberg_marquardt(
    x0: Vector, inst: ProblemInstance, cfg: ShootingConfig
) -> tuple[Vector, Vector, Trajectory, int]:
    n = inst.dim
    lo, hi = cfg.lm_damping_bounds
    x = x0.copy()
    r, traj = _shoot(_unpack(x, n), inst, cfg)
    cost2 = float(r @ r)
    damping = cfg.lm_damping_init
    logger.debug(f"LM start: |r|={np.sqrt(cost2):.3e}")
    if np.sqrt(cost2) <= cfg.residual_tol:
        return x, r, traj, 0

    jac = _jacobian(x, r, inst, cfg)
    for iteration in range(1, cfg.max_outer_iter + 1):
        jtj = jac.T @ jac
        grad = jac.T @ r
        diag = np.diag(jtj).copy()
        diag = np.maximum(diag, 1e-12 * max(float(diag.max()), 1e-300))
        try:
            delta = np.linalg.solve(jtj + damping * np.diag(diag), -grad)
        except np.linalg.LinAlgError:
            damping = min(damping * DAMPING_INCREASE, hi)
            continue

        predicted_r = r + jac @ delta
        predicted = cost2 - float(predicted_r @ predicted_r)
        x_trial = x + delta
        try:
            r_trial, traj_trial = _shoot(_unpack(x_trial, n), inst, cfg)
            actual = cost2 - float(r_trial @ r_trial)
        except ShootingError as e:
            logger.debug(f"LM iteration {iteration}: trial step failed ({e}); increasing damping")
            r_trial, traj_trial, actual = None, None, -np.inf

        gain = actual / predicted if predicted > 0 else -np.inf
        if gain > GAIN_RATIO_ACCEPT and r_trial is not None and traj_trial is not None:
            x, r, traj = x_trial, r_trial, traj_trial
            cost2 = float(r @ r)
            damping = max(damping * DAMPING_DECREASE, lo)
            logger.debug(f"LM iteration {iteration}: accepted, |r|={np.sqrt(cost2):.3e}, damping={damping:.1e}")
            if np.sqrt(cost2) <= cfg.residual_tol:
                return x, r, traj, iteration
            jac = _jacobian(x, r, inst, cfg)
        else:
            damping = min(damping * DAMPING_INCREASE, hi)
            logger.debug(f"LM iteration {iteration}: rejected (gain={gain:.2e}), damping={damping:.1e}")

    raise ConvergenceError(
        f"shooting did not reach residual {cfg.residual_tol:g} in {cfg.max_outer_iter} iterations "
        f"(best residual {np.sqrt(cost2):.3e})",
        best_residual=float(np.sqrt(cost2)),
        best_lambda0=_unpack(x, n),
        iterations=cfg.max_outer_iter,
    )


def solve_bvp(
    inst: ProblemInstance,
    cfg: ShootingConfig | None = None,
    initial_lambda0: SymMatrix | None = None,
    restarts: int = 0,
    seed: int | None = None,
) -> Solution:
    """Solve the two-point boundary value problem by shooting on Lambda_0.

    Starts from the costate matching the constant-control baseline. Each of the
    ``restarts`` extra runs starts from that costate plus a seeded Gaussian
    perturbation; the cheapest converged run is returned.

    Args:
        inst: Validated problem instance
        cfg: Shooting settings
        initial_lambda0: Optional starting costate (defaults to the baseline costate)
        restarts: Additional perturbed starts to try
        seed: Seed for the perturbations

    Returns:
        Solution with trajectory, cost and baseline cost

    Raises:
        ConvergenceError: If no start converged; carries the best residual and iterate
        ShootingError: If the starting point itself cannot be integrated
        ValueError: If restarts is negative
    """
    if restarts < 0:
        raise ValueError(f"restarts must be non-negative, got {restarts}")
    cfg = cfg or ShootingConfig()
    n = inst.dim
    baseline = constant_control_baseline(inst)
    lambda_init = initial_costate(inst, baseline) if initial_lambda0 is None else np.asarray(initial_lambda0)
    x0 = _pack(0.5 * (lambda_init + lambda_init.T))
    logger.info(f"Shooting: n={n}, theta={inst.params.theta:g}, steps={cfg.integrator.steps}")

    rng = np.random.default_rng(seed)
    converged: list[tuple[Vector, Vector, Trajectory, int]] = []
    failures: list[ConvergenceError] = []
    for attempt in range(restarts + 1):
        start = x0 if attempt == 0 else x0 + rng.normal(scale=0.1 * (1.0 + np.linalg.norm(x0)), size=x0.size)
        try:
            converged.append(_levenberg_marquardt(start, inst, cfg))
        except ConvergenceError as e:
            logger.warning(f"Shooting attempt {attempt} failed: {e}")
            failures.append(e)
        except ShootingError:
            if attempt == 0:
                raise
            logger.warning(f"Shooting attempt {attempt}: perturbed start could not be integrated")

    if not converged:
        best = min(failures, key=lambda e: e.best_residual)
        raise best

    runs = [(cost_quadrature(run[2], inst.params).quadrature, run) for run in converged]
    cost, (x, r, traj, iterations) = min(runs, key=lambda item: item[0])
    residual_norm = float(np.linalg.norm(r))
    exceeds = cost > baseline.cost + cfg.cost_slack
    if exceeds:
        logger.warning(
            f"Extremal cost {cost:.10g} exceeds baseline {baseline.cost:.10g}; "
            f"the shooting solution is stationary but not the best known control"
        )
    logger.info(f"Shooting converged: cost={cost:.10g}, residual={residual_norm:.3e}, iterations={iterations}")
    return Solution(
        lambda0=_unpack(x, n),
        trajectory=traj,
        cost=cost,
        residual_norm=residual_norm,
        outer_iterations=iterations,
        baseline_cost=baseline.cost,
        cost_exceeds_baseline=exceeds,
    )


def forward_simulation(
    sigma0: SpdMatrix, lambda0: SymMatrix, p: CostParams, cfg: IntegratorConfig | None = None
) -> Trajectory:
    """Integrate the extremal system forward from (Sigma_0, Lambda_0) without shooting.

    Raises:
        IntegrationError: If Sigma leaves the SPD cone
    """
    lam = np.asarray(lambda0, dtype=np.float64)
    parts = split(0.5 * (lam + lam.T) @ np.asarray(sigma0, dtype=np.float64))
    return integrate(sigma0, parts.sym, parts.skew, p, cfg, lax_trace=parts.trace_scalar)
