"""SVG rendering: reward contour with trajectory overlays."""

from __future__ import annotations

import io
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..games import GameDefinition  # noqa: E402
from .config import PlotSpec  # noqa: E402

_RC = {
    "svg.hashsalt": "gamegrad",
    "svg.fonttype": "path",
    "path.simplify": False,
}


def surface_values(game: GameDefinition, surface: str, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Reward surface on the grid; rows follow ``ys``, columns ``xs``."""
    z = np.empty((ys.size, xs.size))
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            w = np.array([x, y])
            if surface == "collective":
                z[i, j] = -game.collective_value(w)
            else:
                z[i, j] = game.rewards(w)[int(surface[6:]) - 1]
    return z


def render_svg(
    game: GameDefinition,
    spec: PlotSpec,
    surface: str,
    trajectories: Sequence[tuple],
    title: Optional[str] = None,
) -> str:
    """Return an SVG document.

    ``trajectories`` holds ``(label, points)`` pairs with ``points`` shaped
    (T, 2).  Every ``spec.mark_every``-th point gets a marker.
    """
    (x0, x1), (y0, y1) = spec.bounds
    if not (x0 < x1 and y0 < y1):
        raise ValueError("plot bounds must enclose a positive area")
    xs = np.linspace(x0, x1, spec.resolution[0])
    ys = np.linspace(y0, y1, spec.resolution[1])
    z = surface_values(game, surface, xs, ys)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 5))
        cs = ax.contourf(xs, ys, z, levels=20, cmap="viridis")
        fig.colorbar(cs, ax=ax, label=f"{surface} reward")
        colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
        for k, (label, pts) in enumerate(trajectories):
            pts = np.asarray(pts, dtype=float)
            pts = pts[np.all(np.isfinite(pts), axis=1)]
            if pts.size == 0:
                continue
            color = colors[(k + 3) % len(colors)]
            ax.plot(pts[:, 0], pts[:, 1], color=color, lw=1.5, label=label)
            marks = pts[:: spec.mark_every]
            ax.plot(marks[:, 0], marks[:, 1], "o", color=color, ms=3)
            ax.plot(pts[-1, 0], pts[-1, 1], "*", color=color, ms=9)
        ax.set_xlim(x0, x1)
        ax.set_ylim(y0, y1)
        ax.set_xlabel("w_0")
        ax.set_ylabel("w_1")
        ax.set_title(title or f"{game.name}: {surface} reward")
        if trajectories:
            ax.legend(loc="best", fontsize="small")
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()


def write_svg(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path
