"""Command-line entry point for the covariance steering solver.

Usage:
    python -m src.main solve --input problem.json --output traj.jsonl [--svg fig.svg]
    python -m src.main baseline --input problem.json [--output baseline.jsonl]
    python -m src.main simulate --input init.json --output traj.jsonl
    python -m src.main verify --trajectory traj.jsonl [--tol 1e-6] [--table diag.csv]
    python -m src.main figure --trajectory traj.jsonl --svg fig.svg [--frames 12]

Structured results go to stdout; logs go to stderr.

Exit codes:
    0  success
    2  invalid input (parse error, malformed file, violated matrix invariant)
    3  shooting did not converge
    4  verification failed
    5  integration failure (Sigma left the SPD cone)
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any

import numpy as np

from .core.dynamics import constant_control_trajectory, cost_quadrature, spectrum_drift
from .core.exceptions import ConvergenceError, IntegrationError, IterationError, ShootingError
from .core.steering import constant_control_baseline, forward_simulation, solve_bvp
from .core.verification import diagnostics_table, verify_records, verify_solution
from .models.params import CostParams, IntegratorConfig, ToleranceProfile
from .models.problem import ProblemFile, SimulationFile
from .models.results import SolveSummary, VerificationReport
from .models.trajectory import Trajectory
from .plotting.figure import DEFAULT_FRAMES, render_figure
from .storage.trajectory_store import read_records, records_to_trajectory, write_records
from .utils.logger import logger

EXIT_OK = 0
EXIT_INVALID_INPUT = 2
EXIT_NOT_CONVERGED = 3
EXIT_VERIFICATION_FAILED = 4
EXIT_INTEGRATION_FAILED = 5


def _emit(payload: dict[str, Any]) -> None:
    print(json.dumps(payload, indent=2))


def _matrix(a: Any) -> list[list[float]]:
    return np.asarray(a, dtype=np.float64).tolist()


def _report_payload(report: VerificationReport) -> dict[str, Any]:
    return {"passed": report.passed, "checks": [c.model_dump() for c in report.checks]}


def _read_problem(path: str) -> ProblemFile:
    return ProblemFile.model_validate_json(Path(path).read_text(encoding="utf-8"))


def cmd_solve(args: argparse.Namespace) -> int:
    """Solve a problem file by shooting and persist the extremal trajectory."""
    problem = _read_problem(args.input)
    inst = problem.to_instance(theta=args.theta)
    cfg = problem.shooting_config(steps=args.steps)

    sol = solve_bvp(inst, cfg, restarts=args.restarts, seed=problem.seed)
    write_records(args.output, sol.trajectory)

    tol = ToleranceProfile(boundary=max(cfg.residual_tol, ToleranceProfile().boundary))
    report = verify_solution(sol, inst, tol)
    summary = SolveSummary(
        cost=sol.cost,
        baseline_cost=sol.baseline_cost,
        residual_norm=sol.residual_norm,
        iterations=sol.outer_iterations,
        drift=spectrum_drift(sol.trajectory),
        cost_closed_form=cost_quadrature(sol.trajectory, inst.params).closed_form,
        verification_passed=report.passed,
    )
    print(summary.model_dump_json(indent=2))

    if args.svg:
        if inst.dim == 2:
            render_figure(sol.trajectory, args.svg, sigma1=inst.sigma1)
        else:
            logger.warning(f"Skipping figure: only planar problems can be drawn (n = {inst.dim})")

    if not report.passed:
        names = ", ".join(c.name for c in report.failures)
        logger.error(f"Post-solve verification failed: {names}")
        return EXIT_VERIFICATION_FAILED
    return EXIT_OK


def cmd_baseline(args: argparse.Namespace) -> int:
    """Report the constant-control baseline of a problem file."""
    problem = _read_problem(args.input)
    inst = problem.to_instance()
    baseline = constant_control_baseline(inst)
    _emit(
        {
            "phi": _matrix(baseline.phi),
            "a_const": _matrix(baseline.a_const),
            "trace": baseline.trace,
            "cost": baseline.cost,
            "feasibility_residual": baseline.feasibility_residual,
        }
    )
    if args.output:
        traj = constant_control_trajectory(inst.sigma0, baseline.a_const, inst.params, steps=problem.steps)
        write_records(args.output, traj)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    """Integrate forward from (Sigma_0, Lambda_0) without shooting."""
    sim = SimulationFile.model_validate_json(Path(args.input).read_text(encoding="utf-8"))
    traj = forward_simulation(
        sim.sigma0_matrix, sim.lambda0_matrix, CostParams(theta=sim.theta), IntegratorConfig(steps=sim.steps)
    )
    write_records(args.output, traj)
    print(spectrum_drift(traj).model_dump_json(indent=2))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    """Re-check a persisted trajectory from its records alone."""
    records = read_records(args.trajectory)
    tol = ToleranceProfile.uniform(args.tol) if args.tol is not None else ToleranceProfile()
    report = verify_records(records, tol)
    _emit(_report_payload(report))
    if args.table:
        table = diagnostics_table(records_to_trajectory(records), CostParams(theta=records[0].theta))
        path = Path(args.table)
        path.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(path)
        logger.info(f"Wrote per-node diagnostics for {len(table)} nodes to {path}")
    if not report.passed:
        for c in report.failures:
            where = f" at node {c.node}" if c.node is not None else ""
            logger.error(f"Check {c.name} failed{where}")
        return EXIT_VERIFICATION_FAILED
    return EXIT_OK


def cmd_figure(args: argparse.Namespace) -> int:
    """Render a persisted planar trajectory as a two-panel SVG."""
    traj: Trajectory = records_to_trajectory(read_records(args.trajectory))
    render_figure(traj, args.svg, frames=args.frames)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="covsteer", description="Minimum-shear covariance steering solver")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="Solve a steering problem by shooting")
    solve.add_argument("--input", required=True, help="Problem file (JSON)")
    solve.add_argument("--output", required=True, help="Trajectory file to write (JSON Lines)")
    solve.add_argument("--svg", default=None, help="Optional figure output (planar problems only)")
    solve.add_argument("--steps", type=int, default=None, help="RK4 steps (overrides the file)")
    solve.add_argument("--theta", type=float, default=None, help="Surrogate sharpness (overrides the file)")
    solve.add_argument("--restarts", type=int, default=0, help="Extra seeded starts (cheapest converged run wins)")
    solve.set_defaults(handler=cmd_solve)

    baseline = sub.add_parser("baseline", help="Constant-control feasible baseline")
    baseline.add_argument("--input", required=True, help="Problem file (JSON)")
    baseline.add_argument("--output", default=None, help="Optional baseline trajectory file (JSON Lines)")
    baseline.set_defaults(handler=cmd_baseline)

    simulate = sub.add_parser("simulate", help="Forward integration from an initial costate")
    simulate.add_argument("--input", required=True, help="Initial-value file (JSON)")
    simulate.add_argument("--output", required=True, help="Trajectory file to write (JSON Lines)")
    simulate.set_defaults(handler=cmd_simulate)

    verify = sub.add_parser("verify", help="Verify a persisted trajectory")
    verify.add_argument("--trajectory", required=True, help="Trajectory file (JSON Lines)")
    verify.add_argument("--tol", type=float, default=None, help="Single threshold applied to every check")
    verify.add_argument("--table", default=None, help="Optional per-node diagnostics table (CSV)")
    verify.set_defaults(handler=cmd_verify)

    figure = sub.add_parser("figure", help="Render a planar trajectory as SVG")
    figure.add_argument("--trajectory", required=True, help="Trajectory file (JSON Lines)")
    figure.add_argument("--svg", required=True, help="SVG file to write")
    figure.add_argument("--frames", type=int, default=DEFAULT_FRAMES, help="Number of ellipses drawn")
    figure.set_defaults(handler=cmd_figure)
    return parser


def main(argv: list[str] | None = None) -> int:
    """Parse arguments, run the command and map failures to exit codes."""
    args = build_parser().parse_args(argv)
    try:
        return int(args.handler(args))
    except ConvergenceError as e:
        logger.error(f"Shooting did not converge (best residual {e.best_residual:.3e}): {e}")
        return EXIT_NOT_CONVERGED
    except (IntegrationError, ShootingError, IterationError) as e:
        time = getattr(e, "time", None)
        where = f" at t={time:.6f}" if time is not None else ""
        logger.error(f"Integration failed{where}: {e}")
        return EXIT_INTEGRATION_FAILED
    except (ValueError, OSError) as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
