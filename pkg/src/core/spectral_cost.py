"""Spectral costs of a traceless symmetric control and the momentum map.

The soft diameter g_theta is a spectral function, so everything is evaluated on
eigenvalues and lifted back with the eigenvectors of the argument. Log-sum-exp
and softmax come from scipy.special, which shift by the maximum internally.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray
from scipy.special import logsumexp, softmax

from ..models.params import CostParams, InversionConfig
from ..utils.logger import logger
from .exceptions import IterationError
from .symmat import TracelessSym, sym_eig, traceless

Vector = NDArray[np.float64]

ARMIJO_C = 1e-4
MAX_BACKTRACKS = 60
# Objective comparisons below this relative level are rounding noise
OBJECTIVE_NOISE = 1e-13


def soft_spectrum(lam: Vector, theta: float) -> tuple[float, Vector]:
    """Soft diameter and its eigenvalue-space gradient.

    Args:
        lam: Eigenvalues (any order)
        theta: Surrogate sharpness

    Returns:
        Tuple of (g_theta(lam), softmax(theta lam) - softmax(-theta lam))
    """
    a = theta * np.asarray(lam, dtype=np.float64)
    g = (float(logsumexp(a)) + float(logsumexp(-a))) / theta
    return g, softmax(a) - softmax(-a)


def attention_cost(a: TracelessSym) -> float:
    """Brockett attention tr(A^2); f_cond(A) <= sqrt(2 tr(A^2)) <= sqrt(n) f_cond(A)."""
    arr = np.asarray(a, dtype=np.float64)
    return float(np.sum(arr * arr))


def spectral_diameter(a: TracelessSym) -> float:
    """Spread lambda_max - lambda_min of the eigenvalues."""
    values = sym_eig(a).values
    return float(values[-1] - values[0])


def soft_diameter(a: TracelessSym, p: CostParams) -> float:
    """Log-sum-exp surrogate of the spectral diameter.

    Satisfies f_cond(A) <= g_theta(A) <= f_cond(A) + 2 ln(n) / theta.
    """
    g, _ = soft_spectrum(sym_eig(a).values, p.theta)
    return g


def soft_diameter_gradient(a: TracelessSym, p: CostParams) -> TracelessSym:
    """Gradient G_theta(A) = e^{tA}/tr e^{tA} - e^{-tA}/tr e^{-tA}, projected traceless."""
    values, vectors = sym_eig(a)
    _, grad = soft_spectrum(values, p.theta)
    return traceless((vectors * grad) @ vectors.T)


def momentum_from_control(a: TracelessSym, p: CostParams) -> TracelessSym:
    """Momentum M = -g_theta(A) G_theta(A) (stationarity of the Hamiltonian)."""
    values, vectors = sym_eig(a)
    g, grad = soft_spectrum(values, p.theta)
    return traceless((vectors * (-g * grad)) @ vectors.T)


def _objective(lam: Vector, mu: Vector, theta: float) -> tuple[float, Vector, NDArray[np.float64]]:
    # F(lam) = g(lam)^2 / 2 + <mu, lam>, strictly convex on sum(lam) = 0
    a = theta * lam
    p = softmax(a)
    q = softmax(-a)
    g = (float(logsumexp(a)) + float(logsumexp(-a))) / theta
    dg = p - q
    value = 0.5 * g * g + float(mu @ lam)
    grad = g * dg + mu
    hess_g = theta * (np.diag(p) - np.outer(p, p) + np.diag(q) - np.outer(q, q))
    hess = g * hess_g + np.outer(dg, dg)
    return value, grad, hess


def invert_spectrum(
    mu: Vector,
    p: CostParams,
    cfg: InversionConfig | None = None,
    initial_guess: Vector | None = None,
) -> Vector:
    """Solve mu_i = -g(lam) (softmax(theta lam) - softmax(-theta lam))_i with sum(lam) = 0.

    Projected Newton with Armijo backtracking on the convex objective
    g(lam)^2 / 2 + <mu, lam>. The output is index-aligned with ``mu``.

    Args:
        mu: Momentum eigenvalues (summing to zero)
        p: Cost parameters
        cfg: Newton settings
        initial_guess: Optional warm start aligned with mu

    Returns:
        Control eigenvalues lam, aligned with mu

    Raises:
        IterationError: If the gradient does not reach tolerance within max_iter
    """
    cfg = cfg or InversionConfig()
    mu = np.asarray(mu, dtype=np.float64)
    n = mu.size
    mu = mu - mu.mean()
    if n == 1:
        return np.zeros(1)

    theta = p.theta
    ones = np.full((n, n), 1.0 / n)
    proj = np.eye(n) - ones
    tol = cfg.grad_tol * (1.0 + float(np.linalg.norm(mu)))

    if initial_guess is None:
        lam = -mu / (float(np.linalg.norm(mu)) + 1.0)
    else:
        lam = np.asarray(initial_guess, dtype=np.float64)
        lam = lam - lam.mean()
    restarted = False

    for iteration in range(cfg.max_iter):
        value, grad, hess = _objective(lam, mu, theta)
        r = proj @ grad
        if np.linalg.norm(r) <= tol:
            return lam - lam.mean()

        direction = np.linalg.solve(proj @ hess @ proj + ones, -r)
        slope = float(r @ direction)
        noise = OBJECTIVE_NOISE * (1.0 + abs(value))

        step = 1.0
        for _ in range(MAX_BACKTRACKS):
            trial = lam + step * direction
            trial_value = _objective(trial, mu, theta)[0]
            if trial_value <= value + ARMIJO_C * step * slope + noise:
                lam = trial
                break
            step *= cfg.backtrack_factor
        else:
            if np.linalg.norm(r) <= 1e3 * tol:
                return lam - lam.mean()
            if restarted:
                raise IterationError(
                    f"momentum inversion line search stalled at iteration {iteration} "
                    f"(|grad|={np.linalg.norm(r):.3e}, theta={theta:g})"
                )
            logger.warning("Momentum inversion line search stalled; restarting from zero")
            lam = np.zeros(n)
            restarted = True

    raise IterationError(
        f"momentum inversion did not reach |grad| <= {tol:.3e} in {cfg.max_iter} iterations"
    )


def control_from_momentum(
    m: TracelessSym,
    p: CostParams,
    cfg: InversionConfig | None = None,
    initial_guess: Vector | None = None,
) -> TracelessSym:
    """Recover the control A from the momentum M = -g_theta(A) G_theta(A).

    A shares the eigenvectors of M; its eigenvalues solve the scalar
    transcendental system in the eigenbasis of M (ascending mu), so the largest
    lambda pairs with the smallest mu.

    Args:
        m: Traceless symmetric momentum
        p: Cost parameters
        cfg: Newton settings
        initial_guess: Optional warm start aligned with ascending eigenvalues of m

    Returns:
        Traceless symmetric control A

    Raises:
        IterationError: If the inversion does not converge
    """
    mu, vectors = sym_eig(m)
    lam = invert_spectrum(mu, p, cfg, initial_guess)
    return traceless((vectors * lam) @ vectors.T)
