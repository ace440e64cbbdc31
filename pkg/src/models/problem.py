"""Pydantic models for problem instances and the input files that carry them."""

from typing import Any

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..core.exceptions import InstanceValidationError
from ..core.symmat import check_spd
from .params import CostParams, IntegratorConfig, ShootingConfig

DET_EPS = 1e-9  # relative determinant mismatch accepted for equal-volume boundary data
SYMMETRY_EPS = 1e-9  # input asymmetry tolerated before symmetrizing


def _square_symmetric(values: Any, name: str) -> NDArray[np.float64]:
    try:
        a = np.array(values, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise ValueError(f"{name} must be an array of row arrays of numbers") from e
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite")
    scale = max(float(np.max(np.abs(a))), 1.0)
    if np.max(np.abs(a - a.T)) > SYMMETRY_EPS * scale:
        raise ValueError(f"{name} violates the symmetric invariant (asymmetry above {SYMMETRY_EPS:g})")
    a = 0.5 * (a + a.T)
    try:
        check_spd(a, what=name)
    except InstanceValidationError as e:
        raise ValueError(f"{name} violates the SPD invariant: {e}") from e
    a.setflags(write=False)
    return a


def _check_determinants(sigma0: NDArray[np.float64], sigma1: NDArray[np.float64], det_eps: float) -> None:
    if sigma0.shape != sigma1.shape:
        raise ValueError(f"sigma0 {sigma0.shape} and sigma1 {sigma1.shape} must have equal dimensions")
    d0 = float(np.linalg.det(sigma0))
    d1 = float(np.linalg.det(sigma1))
    if abs(d0 / d1 - 1.0) > det_eps:
        raise ValueError(
            f"determinant invariant violated: det(sigma0)={d0:.12g}, det(sigma1)={d1:.12g} "
            f"(relative mismatch above {det_eps:g})"
        )


class ProblemInstance(BaseModel):
    """Boundary covariances of equal determinant and the cost parameters.

    Attributes:
        sigma0: Initial covariance
        sigma1: Terminal covariance
        params: Cost parameters
        det_eps: Relative tolerance on det(sigma0) / det(sigma1) - 1
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    sigma0: NDArray[np.float64]
    sigma1: NDArray[np.float64]
    params: CostParams
    det_eps: float = Field(default=DET_EPS, gt=0)

    @field_validator("sigma0", "sigma1", mode="before")
    @classmethod
    def _validate_matrix(cls, v: Any, info: Any) -> NDArray[np.float64]:
        return _square_symmetric(v, info.field_name)

    @model_validator(mode="after")
    def _validate_pair(self) -> "ProblemInstance":
        _check_determinants(self.sigma0, self.sigma1, self.det_eps)
        return self

    @property
    def dim(self) -> int:
        return int(self.sigma0.shape[0])


class ShootingOverrides(BaseModel):
    """Optional shooting settings as they appear in a problem file."""

    residual_tol: float | None = Field(default=None, gt=0)
    max_outer_iter: int | None = Field(default=None, ge=1)
    fd_step: float | None = Field(default=None, gt=0)
    lm_damping_init: float | None = Field(default=None, gt=0)


class ProblemFile(BaseModel):
    """Input file for the solve and baseline commands.

    Attributes:
        theta: Surrogate sharpness
        sigma0: Initial covariance, row arrays
        sigma1: Terminal covariance, row arrays
        steps: RK4 steps
        shooting: Optional shooting overrides
        seed: Seed for multi-start perturbations
    """

    theta: float = Field(gt=0)
    sigma0: list[list[float]]
    sigma1: list[list[float]]
    steps: int = Field(default=1000, ge=1)
    shooting: ShootingOverrides | None = None
    seed: int | None = None

    @model_validator(mode="after")
    def _validate_matrices(self) -> "ProblemFile":
        s0 = _square_symmetric(self.sigma0, "sigma0")
        s1 = _square_symmetric(self.sigma1, "sigma1")
        _check_determinants(s0, s1, DET_EPS)
        return self

    def to_instance(self, theta: float | None = None) -> ProblemInstance:
        """Build the validated problem instance, optionally overriding theta."""
        params = CostParams(theta=self.theta if theta is None else theta)
        return ProblemInstance(sigma0=self.sigma0, sigma1=self.sigma1, params=params)

    def shooting_config(self, steps: int | None = None) -> ShootingConfig:
        """Shooting configuration from file overrides and the step count."""
        overrides = self.shooting.model_dump(exclude_none=True) if self.shooting else {}
        integrator = IntegratorConfig(steps=self.steps if steps is None else steps)
        return ShootingConfig(integrator=integrator, **overrides)


class SimulationFile(BaseModel):
    """Input file for the simulate command: forward integration from (Sigma_0, Lambda_0)."""

    theta: float = Field(gt=0)
    sigma0: list[list[float]]
    lambda0: list[list[float]]
    steps: int = Field(default=1000, ge=1)

    @model_validator(mode="after")
    def _validate_matrices(self) -> "SimulationFile":
        s0 = _square_symmetric(self.sigma0, "sigma0")
        lam = np.array(self.lambda0, dtype=np.float64)
        if lam.shape != s0.shape:
            raise ValueError(f"lambda0 must have shape {s0.shape}, got {lam.shape}")
        if not np.all(np.isfinite(lam)):
            raise ValueError("lambda0 must be finite")
        scale = max(float(np.max(np.abs(lam))), 1.0)
        if np.max(np.abs(lam - lam.T)) > SYMMETRY_EPS * scale:
            raise ValueError("lambda0 violates the symmetric invariant")
        return self

    @property
    def sigma0_matrix(self) -> NDArray[np.float64]:
        return _square_symmetric(self.sigma0, "sigma0")

    @property
    def lambda0_matrix(self) -> NDArray[np.float64]:
        lam = np.array(self.lambda0, dtype=np.float64)
        return 0.5 * (lam + lam.T)
