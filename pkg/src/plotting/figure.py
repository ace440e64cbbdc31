"""Two-panel SVG figure of a planar trajectory.

Left panel: 1-sigma ellipses {x : x^T Sigma_t^{-1} x = 1} at K equispaced
times, colored chronologically, with Sigma_0 solid black and Sigma_1 dashed
black. Right panel: eigenvalues of A_t against t.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from numpy.typing import NDArray  # noqa: E402

from ..core.symmat import sqrtm_spd  # noqa: E402
from ..models.trajectory import Trajectory  # noqa: E402
from ..utils.logger import logger  # noqa: E402

DEFAULT_FRAMES = 12
ELLIPSE_POINTS = 256
LEVEL_SET_NOTE = "Ellipses are 1-sigma level sets x^T Sigma_t^-1 x = 1 (semi-axes sqrt of eigenvalues)."


def ellipse_points(sigma: NDArray[np.float64], count: int = ELLIPSE_POINTS) -> NDArray[np.float64]:
    """Boundary of the 1-sigma ellipse of a 2x2 covariance, shape (count + 1, 2)."""
    angles = np.linspace(0.0, 2.0 * np.pi, count + 1)
    circle = np.stack([np.cos(angles), np.sin(angles)])
    return (np.asarray(sqrtm_spd(sigma)) @ circle).T


def frame_nodes(times: NDArray[np.float64], frames: int) -> list[int]:
    """Grid nodes nearest to ``frames`` equispaced times in [0, 1]."""
    targets = np.linspace(0.0, 1.0, frames)
    return [int(np.abs(times - t).argmin()) for t in targets]


def render_figure(
    traj: Trajectory,
    svg_path: str | Path,
    frames: int = DEFAULT_FRAMES,
    sigma1: NDArray[np.float64] | None = None,
) -> Path:
    """Render the ellipse flow and eigenvalue traces to a standalone SVG.

    Args:
        traj: Planar trajectory
        svg_path: Output file
        frames: Number of intermediate ellipses K
        sigma1: Terminal target drawn dashed (defaults to the last node)

    Returns:
        The path written

    Raises:
        ValueError: If the trajectory is not planar or frames < 2
    """
    if traj.dim != 2:
        raise ValueError(f"figure requires a planar (n = 2) trajectory, got n = {traj.dim}")
    if frames < 2:
        raise ValueError(f"frames must be at least 2, got {frames}")
    target = traj.sigmas[-1] if sigma1 is None else np.asarray(sigma1)

    plt.rcParams["svg.hashsalt"] = "covsteer"
    fig, (ax_flow, ax_eig) = plt.subplots(1, 2, figsize=(10, 4.5))
    cmap = matplotlib.colormaps["viridis"]

    for i, k in enumerate(frame_nodes(traj.times, frames)):
        pts = ellipse_points(traj.sigmas[k])
        ax_flow.plot(pts[:, 0], pts[:, 1], color=cmap(i / (frames - 1)), linewidth=1.0)
    start = ellipse_points(traj.sigmas[0])
    end = ellipse_points(target)
    ax_flow.plot(start[:, 0], start[:, 1], color="black", linewidth=1.6, label=r"$\Sigma_0$")
    ax_flow.plot(end[:, 0], end[:, 1], color="black", linestyle="--", linewidth=1.6, label=r"$\Sigma_1$")
    ax_flow.set_aspect("equal")
    ax_flow.set_xlabel(r"$x_1$")
    ax_flow.set_ylabel(r"$x_2$")
    ax_flow.set_title("Covariance ellipses")
    ax_flow.legend(loc="upper right")

    for i in range(traj.dim):
        ax_eig.plot(traj.times, traj.eigs_a[:, i], linewidth=1.4, label=rf"$\lambda_{i + 1}(A_t)$")
    ax_eig.set_xlabel("t")
    ax_eig.set_ylabel("eigenvalues of A_t")
    ax_eig.set_title("Control spectrum")
    ax_eig.legend(loc="best")
    fig.tight_layout()

    path = Path(svg_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None, "Description": LEVEL_SET_NOTE})
    plt.close(fig)
    logger.info(f"Wrote figure with {frames} frames to {path}")
    return path
