"""Pydantic models for solver parameters and tolerances.

All models are frozen: a config value never changes once a solve starts.
"""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


class CostParams(BaseModel):
    """Parameters of the soft spectral diameter.

    Attributes:
        theta: Surrogate sharpness (larger = closer to the hard diameter)
    """

    model_config = ConfigDict(frozen=True)

    theta: float = Field(description="Surrogate sharpness", gt=0)


class InversionConfig(BaseModel):
    """Settings for the momentum-to-control Newton solve.

    Attributes:
        grad_tol: Gradient tolerance, relative to 1 + ||mu||
        max_iter: Newton iteration budget
        backtrack_factor: Step shrink factor for the Armijo line search
    """

    model_config = ConfigDict(frozen=True)

    grad_tol: float = Field(default=1e-12, description="Gradient norm tolerance", gt=0)
    max_iter: int = Field(default=200, description="Maximum Newton iterations", ge=1)
    backtrack_factor: float = Field(default=0.5, description="Line-search shrink factor", gt=0, lt=1)


class IntegratorConfig(BaseModel):
    """Fixed-step RK4 settings on [0, 1].

    Attributes:
        steps: Number of uniform steps N
        control_mode: "full_inversion" solves for A at every evaluation;
            "spectral_matching" solves only at t = 0 and reuses the eigenvalues
    """

    model_config = ConfigDict(frozen=True)

    steps: int = Field(default=1000, description="Number of RK4 steps", ge=1)
    control_mode: Literal["full_inversion", "spectral_matching"] = Field(
        default="full_inversion", description="How A_t is recovered from M_t"
    )
    inversion: InversionConfig = Field(
        default_factory=InversionConfig, description="Newton settings for control recovery"
    )


class ShootingConfig(BaseModel):
    """Levenberg-Marquardt shooting settings.

    Attributes:
        residual_tol: Success threshold on the relative terminal mismatch
        max_outer_iter: LM iteration budget (accepted and rejected trials)
        fd_step: Forward-difference step on each costate entry
        lm_damping_init: Initial Marquardt damping
        lm_damping_bounds: (lower, upper) clamp for the damping
        cost_slack: Allowed excess of the extremal cost over the baseline before warning
        integrator: Integrator used by every residual evaluation
    """

    model_config = ConfigDict(frozen=True)

    residual_tol: float = Field(default=1e-8, description="Relative terminal residual tolerance", gt=0)
    max_outer_iter: int = Field(default=100, description="Maximum LM iterations", ge=1)
    fd_step: float = Field(default=1e-6, description="Forward-difference step", gt=0)
    lm_damping_init: float = Field(default=1e-3, description="Initial damping", gt=0)
    lm_damping_bounds: tuple[float, float] = Field(
        default=(1e-12, 1e8), description="Damping clamp (lower, upper)"
    )
    cost_slack: float = Field(default=1e-6, description="Baseline comparison slack", ge=0)
    integrator: IntegratorConfig = Field(default_factory=IntegratorConfig)

    @model_validator(mode="after")
    def _check_damping(self) -> "ShootingConfig":
        lo, hi = self.lm_damping_bounds
        if not 0 < lo < hi:
            raise ValueError(f"lm_damping_bounds must satisfy 0 < lower < upper, got {self.lm_damping_bounds}")
        if not lo <= self.lm_damping_init <= hi:
            raise ValueError("lm_damping_init must lie within lm_damping_bounds")
        return self


class ToleranceProfile(BaseModel):
    """Thresholds used by solution and trajectory verification."""

    model_config = ConfigDict(frozen=True)

    boundary: float = Field(default=1e-8, description="Relative terminal mismatch", gt=0)
    det_drift: float = Field(default=1e-8, description="Max |det(S_t)/det(S_0) - 1|", gt=0)
    spectrum_drift: float = Field(default=1e-8, description="Eigenvalue / char-poly drift", gt=0)
    stationarity: float = Field(default=1e-9, description="||g G + M||_F per node", gt=0)
    cost_gap: float = Field(default=1e-8, description="Quadrature vs g(A_0)^2, relative", gt=0)
    baseline_slack: float = Field(default=1e-6, description="Allowed cost excess over baseline", ge=0)
    costate_symmetry: float = Field(default=1e-7, description="Skew part of Lambda_t", gt=0)
    coercivity_slack: float = Field(default=1e-10, description="Allowed negative coercivity gap", ge=0)
    record_consistency: float = Field(default=1e-9, description="Stored diagnostics vs matrices", gt=0)

    @classmethod
    def uniform(cls, tol: float) -> "ToleranceProfile":
        """Profile with every threshold set to the same value (CLI --tol)."""
        return cls(**{name: tol for name in cls.model_fields})
