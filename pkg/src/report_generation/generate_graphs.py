"""
Graph Generator

Static figures for solver runs:
- optimal paths over a height contour (2-D problems)
- coordinate traces against time with the value u (any dimension)
- wall time against dimension with standard deviation bars (scaling runs)

Uses Seaborn and Matplotlib.
"""

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import seaborn as sns  # noqa: E402

from src.geometry.manifolds import ManifoldModel  # noqa: E402

logger = logging.getLogger(__name__)

# Configure Seaborn styling
sns.set_theme(style="whitegrid")

COLORS = {
    "primary": "#103CC1",    # paths
    "secondary": "#FBBD09",  # start markers
    "accent": "#28A745",     # goal marker
    "warning": "#DC3545",    # unconverged paths
}

CONTOUR_RESOLUTION = 200


def _save(fig, output_path: Path):
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output_path, dpi=150, bbox_inches="tight", facecolor="white", edgecolor="none")
    plt.close(fig)
    logger.info(f"   ✅ Saved: {output_path.name}")


def plot_paths_contour(manifold: ManifoldModel, paths: list, goal, output_path: Path,
                       title: str = "Optimal paths", converged: list = None) -> bool:
    """
    Draw 2-D paths (forward order) over filled contours of the height M.

    Returns:
        True if the figure was written
    """
    if manifold.dim != 2 or not paths:
        logger.warning("Contour plot needs at least one path on a 2-D manifold; skipped")
        return False

    points = np.vstack(paths + [np.asarray(goal, dtype=float)[None, :]])
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    margin = 0.15 * max(float(np.max(hi - lo)), 1.0)
    xs = np.linspace(lo[0] - margin, hi[0] + margin, CONTOUR_RESOLUTION)
    ys = np.linspace(lo[1] - margin, hi[1] + margin, CONTOUR_RESOLUTION)
    X, Y = np.meshgrid(xs, ys)
    Z = manifold.height(np.stack([X, Y], axis=-1))

    fig, ax = plt.subplots(figsize=(7, 6))
    filled = ax.contourf(X, Y, Z, levels=30, cmap="viridis", alpha=0.85)
    fig.colorbar(filled, ax=ax, label="M(x)")

    converged = converged if converged is not None else [True] * len(paths)
    for path, ok in zip(paths, converged):
        color = COLORS["primary"] if ok else COLORS["warning"]
        ax.plot(path[:, 0], path[:, 1], color=color, linewidth=1.6)
        ax.scatter(path[0, 0], path[0, 1], color=COLORS["secondary"], s=25, zorder=3, edgecolor="black")
    ax.scatter(goal[0], goal[1], color=COLORS["accent"], marker="*", s=160, zorder=4, edgecolor="black")

    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_aspect("equal")
    ax.set_title(title, fontsize=13, fontweight="bold")
    _save(fig, output_path)
    return True


def plot_coordinate_traces(trajectory: pd.DataFrame, value: float, output_path: Path,
                           title: str = "Coordinates along the optimal path") -> bool:
    """Plot every x_i column of a forward-order trajectory table against t."""
    coords = [c for c in trajectory.columns if c.startswith("x")]
    if not coords:
        return False

    long = trajectory.melt(id_vars="t", value_vars=coords, var_name="coordinate", value_name="value")
    fig, ax = plt.subplots(figsize=(9, 5))
    # one highlighted line for x1, the rest in a muted palette
    if len(coords) > 1:
        sns.lineplot(data=long[long["coordinate"] != "x1"], x="t", y="value", hue="coordinate",
                     palette="Greys", legend=False, linewidth=1.0, ax=ax)
    sns.lineplot(data=long[long["coordinate"] == "x1"], x="t", y="value",
                 color=COLORS["primary"], linewidth=2.2, label="x1", ax=ax)

    ax.set_xlabel("t")
    ax.set_ylabel("coordinate value")
    ax.set_title(f"{title}\n(u = {value:.4f})", fontsize=13, fontweight="bold")
    _save(fig, output_path)
    return True


def plot_scaling(table: pd.DataFrame, output_path: Path, title: str = "Wall time against dimension") -> bool:
    """Errorbar plot of mean_s +- std_s per dim."""
    if table.empty:
        return False

    fig, ax = plt.subplots(figsize=(8, 5))
    ax.errorbar(table["dim"], table["mean_s"], yerr=table["std_s"], fmt="o-",
                color=COLORS["primary"], ecolor=COLORS["secondary"], capsize=4, linewidth=1.6)
    ax.set_xlabel("dimension")
    ax.set_ylabel("seconds per path")
    ax.set_title(title, fontsize=13, fontweight="bold")
    _save(fig, output_path)
    return True
