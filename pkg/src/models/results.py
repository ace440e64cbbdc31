"""Pydantic models for solver outputs, diagnostics and verification reports."""

from typing import Literal

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

from .trajectory import Trajectory


class SpectrumDrift(BaseModel):
    """Maximum deviation of spectral data from its value at t = 0.

    Attributes:
        drift_a: Max l-inf distance of sorted eigenvalues of A_t
        drift_m: Max l-inf distance of sorted eigenvalues of M_t
        drift_l: Max l-inf distance of characteristic-polynomial coefficients of L_t
        worst_node_a: Node at which drift_a is attained
    """

    model_config = ConfigDict(frozen=True)

    drift_a: float = Field(ge=0)
    drift_m: float = Field(ge=0)
    drift_l: float = Field(ge=0)
    worst_node_a: int = Field(default=0, ge=0)


class CostReport(BaseModel):
    """Cost functional by quadrature next to its closed form.

    Attributes:
        quadrature: Simpson (or trapezoid) value of the integral of g_theta(A_t)^2
        closed_form: g_theta(A_0)^2, exact along extremals
        method: Quadrature rule used
    """

    model_config = ConfigDict(frozen=True)

    quadrature: float = Field(ge=0)
    closed_form: float = Field(ge=0)
    method: Literal["simpson", "trapezoid"]

    @property
    def relative_gap(self) -> float:
        return abs(self.quadrature - self.closed_form) / max(self.closed_form, 1e-300)


class BaselineResult(BaseModel):
    """Constant-control feasible baseline A = log(Phi).

    Attributes:
        phi: Gaussian transport map with Phi Sigma_0 Phi = Sigma_1
        a_const: Constant control
        trace: tr(A_const)
        cost: g_theta(A_const)^2
        feasibility_residual: ||e^A Sigma_0 e^A - Sigma_1||_F / ||Sigma_1||_F
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    phi: NDArray[np.float64]
    a_const: NDArray[np.float64]
    trace: float
    cost: float = Field(ge=0)
    feasibility_residual: float = Field(ge=0)


class Solution(BaseModel):
    """Converged shooting solution.

    Attributes:
        lambda0: Costate at t = 0 (L_0 = Lambda_0 Sigma_0)
        trajectory: Extremal trajectory
        cost: J_theta by quadrature
        residual_norm: Relative terminal mismatch
        outer_iterations: LM iterations used
        baseline_cost: Cost of the constant-control baseline
        cost_exceeds_baseline: True when cost > baseline_cost + slack
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    lambda0: NDArray[np.float64]
    trajectory: Trajectory
    cost: float = Field(ge=0)
    residual_norm: float = Field(ge=0)
    outer_iterations: int = Field(ge=0)
    baseline_cost: float = Field(ge=0)
    cost_exceeds_baseline: bool = False


class CheckResult(BaseModel):
    """Outcome of one verification check.

    Attributes:
        name: Check identifier
        value: Measured quantity
        threshold: Limit it was compared against
        passed: Whether the check passed
        severity: "error" checks decide the report, "warning" checks are informational
        node: Offending grid node, when meaningful
        detail: Human-readable note
    """

    name: str
    value: float
    threshold: float
    passed: bool
    severity: Literal["error", "warning"] = "error"
    node: int | None = None
    detail: str = ""


class VerificationReport(BaseModel):
    """Collection of checks with an overall verdict."""

    checks: list[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.severity == "error")

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed and c.severity == "error"]

    def check(self, name: str) -> CheckResult:
        """Look up a check by name.

        Raises:
            KeyError: If no such check was run
        """
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


class SolveSummary(BaseModel):
    """Summary object printed by the solve command."""

    cost: float
    baseline_cost: float
    residual_norm: float
    iterations: int
    drift: SpectrumDrift
    cost_closed_form: float
    verification_passed: bool
