"""Independent checks on solutions and persisted trajectories.

Each check yields a CheckResult; "error" checks decide the verdict while
"warning" checks (the baseline comparison) are reported but never fail it.
"""

from __future__ import annotations

import numpy as np
import pandas as pd

from ..models.params import CostParams, ToleranceProfile
from ..models.problem import ProblemInstance
from ..models.results import CheckResult, Solution, VerificationReport
from ..models.trajectory import Trajectory, TrajectoryRecord
from ..storage.trajectory_store import records_to_trajectory
from ..utils.logger import logger
from .dynamics import coercivity_gap, cost_quadrature, spectrum_drift, stationarity_residuals
from .spectral_cost import soft_spectrum
from .symmat import frobenius, relative_error, sym_eig


def _check(name: str, value: float, threshold: float, node: int | None = None, detail: str = "") -> CheckResult:
    return CheckResult(
        name=name, value=float(value), threshold=threshold, passed=bool(value <= threshold), node=node, detail=detail
    )


def _trajectory_checks(traj: Trajectory, p: CostParams, tol: ToleranceProfile) -> list[CheckResult]:
    checks = []

    det_dev = np.abs(traj.det_sigma / traj.det_sigma[0] - 1.0)
    worst_det = int(det_dev.argmax())
    checks.append(_check("det_drift", det_dev[worst_det], tol.det_drift, worst_det, "max |det(S_t)/det(S_0) - 1|"))

    drift = spectrum_drift(traj)
    checks.append(_check("spectrum_drift_a", drift.drift_a, tol.spectrum_drift, drift.worst_node_a))
    checks.append(_check("spectrum_drift_m", drift.drift_m, tol.spectrum_drift))
    checks.append(_check("spectrum_drift_l", drift.drift_l, tol.spectrum_drift, detail="characteristic polynomial"))

    stationarity = stationarity_residuals(traj, p)
    checks.append(_check("stationarity", stationarity.max(), tol.stationarity, int(stationarity.argmax())))

    report = cost_quadrature(traj, p)
    checks.append(_check("cost_gap", report.relative_gap, tol.cost_gap, detail=f"{report.method} vs g(A_0)^2"))

    gap = coercivity_gap(traj, p)
    checks.append(_check("coercivity", -gap, tol.coercivity_slack, detail=f"J - (1/n) int tr(A^2) = {gap:.3e}"))
    return checks


def verify_solution(
    sol: Solution, inst: ProblemInstance, tol: ToleranceProfile | None = None
) -> VerificationReport:
    """Run every solution-level check.

    Args:
        sol: Converged shooting solution
        inst: Problem it solves
        tol: Thresholds

    Returns:
        Report with boundary, volume, spectral, stationarity, cost,
        costate-symmetry, coercivity and baseline checks
    """
    tol = tol or ToleranceProfile()
    traj = sol.trajectory
    checks = [
        _check("boundary_initial", relative_error(traj.sigmas[0], inst.sigma0), tol.boundary),
        _check("boundary_terminal", relative_error(traj.sigmas[-1], inst.sigma1), tol.boundary),
    ]
    checks.extend(_trajectory_checks(traj, inst.params, tol))

    asym = np.empty(traj.times.size)
    for k in range(traj.times.size):
        lam = traj.costate_at(k)
        asym[k] = frobenius(lam - lam.T) / max(frobenius(lam), 1.0)
    checks.append(_check("costate_symmetry", asym.max(), tol.costate_symmetry, int(asym.argmax())))

    excess = sol.cost - sol.baseline_cost
    baseline = _check("baseline", excess, tol.baseline_slack, detail=f"baseline cost {sol.baseline_cost:.10g}")
    checks.append(baseline.model_copy(update={"severity": "warning"}))

    report = VerificationReport(checks=checks)
    _log_report(report)
    return report


def records_frame(records: list[TrajectoryRecord]) -> pd.DataFrame:
    """Tabulate stored scalar diagnostics, one row per node."""
    frame = pd.DataFrame(
        {
            "t": [r.t for r in records],
            "det_sigma": [r.det_sigma for r in records],
            "g_theta": [r.g_theta for r in records],
        }
    )
    frame.index.name = "node"
    return frame


def diagnostics_table(traj: Trajectory, p: CostParams) -> pd.DataFrame:
    """Per-node diagnostics of a trajectory with the stationarity residual and det drift added."""
    frame = traj.diagnostics_frame()
    frame["det_drift"] = (frame["det_sigma"] / frame["det_sigma"].iloc[0] - 1.0).abs()
    frame["stationarity"] = stationarity_residuals(traj, p)
    return frame


def verify_records(records: list[TrajectoryRecord], tol: ToleranceProfile | None = None) -> VerificationReport:
    """Check a persisted trajectory without re-solving.

    Confirms that the stored diagnostics match the stored matrices, then runs
    the volume, spectral, stationarity, cost and coercivity checks on the
    reconstructed trajectory.

    Raises:
        ValueError: If the records are empty, mix dimensions or theta values, or
            do not form a grid from 0 to 1
    """
    tol = tol or ToleranceProfile()
    if not records:
        raise ValueError("trajectory holds no records")
    thetas = {r.theta for r in records}
    if len(thetas) != 1:
        raise ValueError(f"records mix theta values {sorted(thetas)}")
    p = CostParams(theta=records[0].theta)

    frame = records_frame(records)
    eig_gap, det_recomputed, g_recomputed = [], [], []
    for r in records:
        a = r.matrix("a")
        values = sym_eig(0.5 * (a + a.T)).values
        eig_gap.append(float(np.max(np.abs(values - np.asarray(r.eigs_a)))))
        det_recomputed.append(float(np.linalg.det(r.matrix("sigma"))))
        g_recomputed.append(soft_spectrum(values, p.theta)[0])
    mismatch = pd.concat(
        [
            pd.Series(eig_gap, index=frame.index),
            (pd.Series(det_recomputed, index=frame.index) / frame["det_sigma"] - 1.0).abs(),
            (pd.Series(g_recomputed, index=frame.index) - frame["g_theta"]).abs(),
        ],
        axis=1,
    ).max(axis=1)
    worst_node = int(mismatch.idxmax())

    checks = [
        _check(
            "record_consistency",
            mismatch[worst_node],
            tol.record_consistency,
            worst_node,
            "stored diagnostics vs matrices",
        )
    ]
    checks.extend(_trajectory_checks(records_to_trajectory(records), p, tol))
    report = VerificationReport(checks=checks)
    _log_report(report)
    return report


def _log_report(report: VerificationReport) -> None:
    for c in report.checks:
        if c.passed:
            logger.debug(f"Check {c.name}: {c.value:.3e} <= {c.threshold:.1e}")
        elif c.severity == "warning":
            logger.warning(f"Check {c.name}: {c.value:.3e} exceeds {c.threshold:.1e} ({c.detail})")
        else:
            where = f" at node {c.node}" if c.node is not None else ""
            logger.error(f"Check {c.name} failed{where}: {c.value:.3e} > {c.threshold:.1e}")
    logger.info(f"Verification {'passed' if report.passed else 'failed'} ({len(report.checks)} checks)")
