"""Pydantic models for extremal states, integrated trajectories and persisted records.

Trajectories keep their per-node data as stacked, read-only numpy arrays;
node-level views are produced on demand.
"""

from typing import Any

import numpy as np
import pandas as pd
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Array = NDArray[np.float64]


class ExtremalState(BaseModel):
    """The triple (Sigma, M, Omega) evolved by the extremal system.

    Attributes:
        sigma: Covariance (SPD)
        m: Momentum (traceless symmetric)
        omega: Rotation part of the Lax variable (skew, constant in time)
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    sigma: Array = Field(description="Covariance Sigma_t")
    m: Array = Field(description="Momentum M_t")
    omega: Array = Field(description="Skew component Omega")

    @model_validator(mode="after")
    def _check_dims(self) -> "ExtremalState":
        shapes = {self.sigma.shape, self.m.shape, self.omega.shape}
        if len(shapes) != 1:
            raise ValueError(f"state matrices must share one shape, got {sorted(shapes)}")
        return self

    @property
    def dim(self) -> int:
        return int(self.sigma.shape[0])


class Trajectory(BaseModel):
    """Integrated extremal (or constant-control) trajectory on a uniform grid over [0, 1].

    Attributes:
        times: Grid 0 = t_0 < ... < t_N = 1
        sigmas: Sigma at each node, shape (N+1, n, n)
        momenta: M at each node, shape (N+1, n, n)
        omega: Constant skew component
        controls: A at each node, shape (N+1, n, n)
        det_sigma: det(Sigma_t) per node
        g_theta: Soft diameter of A per node
        eigs_a: Ascending eigenvalues of A per node, shape (N+1, n)
        eigs_m: Ascending eigenvalues of M per node, shape (N+1, n)
        theta: Surrogate sharpness used
        lax_trace: tr(L)/n, constant along the flow
        max_symmetry_correction: Largest per-step re-symmetrization correction
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    times: Array
    sigmas: Array
    momenta: Array
    omega: Array
    controls: Array
    det_sigma: Array
    g_theta: Array
    eigs_a: Array
    eigs_m: Array
    theta: float = Field(gt=0)
    lax_trace: float = 0.0
    max_symmetry_correction: float = Field(default=0.0, ge=0)

    @field_validator(
        "times", "sigmas", "momenta", "omega", "controls", "det_sigma", "g_theta", "eigs_a", "eigs_m",
        mode="before",
    )
    @classmethod
    def _read_only(cls, v: Any) -> Array:
        arr = np.array(v, dtype=np.float64)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check_grid(self) -> "Trajectory":
        t = self.times
        if t.ndim != 1 or t.size < 2:
            raise ValueError("times must hold at least two nodes")
        if t[0] != 0.0 or t[-1] != 1.0 or np.any(np.diff(t) <= 0):
            raise ValueError("times must increase strictly from 0 to 1")
        count = t.size
        for name in ("sigmas", "momenta", "controls", "det_sigma", "g_theta", "eigs_a", "eigs_m"):
            if getattr(self, name).shape[0] != count:
                raise ValueError(f"{name} has {getattr(self, name).shape[0]} nodes, expected {count}")
        return self

    @property
    def dim(self) -> int:
        return int(self.omega.shape[0])

    @property
    def steps(self) -> int:
        return int(self.times.size - 1)

    def state(self, k: int) -> ExtremalState:
        """Extremal state at node k."""
        return ExtremalState(sigma=self.sigmas[k], m=self.momenta[k], omega=self.omega)

    @property
    def states(self) -> list[ExtremalState]:
        return [self.state(k) for k in range(self.times.size)]

    def lax_matrix(self, k: int) -> Array:
        """Lax variable L_t = M_t + Omega + (tr L / n) I at node k."""
        n = self.dim
        return self.momenta[k] + self.omega + self.lax_trace * np.eye(n)

    def costate_at(self, k: int) -> Array:
        """Costate Lambda_t = L_t Sigma_t^{-1} at node k (symmetric along extremals)."""
        return np.linalg.solve(self.sigmas[k].T, self.lax_matrix(k).T).T

    def diagnostics_frame(self) -> pd.DataFrame:
        """Per-node diagnostics as a DataFrame indexed by node.

        Columns: t, det_sigma, g_theta, eig_a_<i>, eig_m_<i>.
        """
        frame = pd.DataFrame({"t": self.times, "det_sigma": self.det_sigma, "g_theta": self.g_theta})
        for i in range(self.dim):
            frame[f"eig_a_{i}"] = self.eigs_a[:, i]
        for i in range(self.dim):
            frame[f"eig_m_{i}"] = self.eigs_m[:, i]
        frame.index.name = "node"
        return frame


class TrajectoryRecord(BaseModel):
    """One persisted grid node (one line of the trajectory file).

    Matrices are stored row-major as n^2 floats.

    Attributes:
        t: Node time
        sigma: Sigma_t
        a: Control A_t
        m: Momentum M_t
        omega: Omega
        eigs_a: Ascending eigenvalues of A_t
        det_sigma: det(Sigma_t)
        g_theta: g_theta(A_t)
        theta: Surrogate sharpness of the run
    """

    model_config = ConfigDict(allow_inf_nan=False)

    t: float = Field(description="Node time", ge=0, le=1)
    sigma: list[float] = Field(description="Sigma_t row-major")
    a: list[float] = Field(description="A_t row-major")
    m: list[float] = Field(description="M_t row-major")
    omega: list[float] = Field(description="Omega row-major")
    eigs_a: list[float] = Field(description="Ascending eigenvalues of A_t")
    det_sigma: float = Field(description="det(Sigma_t), positive for an SPD Sigma_t", gt=0)
    g_theta: float = Field(description="Soft diameter of A_t")
    theta: float = Field(description="Surrogate sharpness", gt=0)

    @model_validator(mode="after")
    def _check_sizes(self) -> "TrajectoryRecord":
        n = len(self.eigs_a)
        if n < 1:
            raise ValueError("eigs_a must be non-empty")
        for name in ("sigma", "a", "m", "omega"):
            if len(getattr(self, name)) != n * n:
                raise ValueError(f"{name} must hold {n * n} entries for n = {n}")
        return self

    @property
    def dim(self) -> int:
        return len(self.eigs_a)

    def matrix(self, name: str) -> Array:
        """Reshape one of the stored row-major matrices."""
        n = self.dim
        return np.asarray(getattr(self, name), dtype=np.float64).reshape(n, n)
