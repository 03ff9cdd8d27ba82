"""Benchmark report figures: error-versus-noise curves rendered to files."""

from __future__ import annotations

import os
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .synth import summarize


def render_benchmark_figures(
    rows: Sequence[dict], out_dir: str, stem: str = "bench"
) -> list[str]:
    """Render rotational and translational error curves next to the CSV.

    One figure per error kind; each configuration contributes a mean and a
    median curve over the noise grid.  Returns the written file paths.
    """
    stats = summarize(rows)
    configs = sorted({s["config"] for s in stats})
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for kind, label in (("rot", "rotational error (deg)"),
                        ("transl", "translational error (deg)")):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for config in configs:
            pts = [s for s in stats if s["config"] == config]
            pts.sort(key=lambda s: float(s["sigma_px"]))
            xs = [float(s["sigma_px"]) for s in pts]
            ax.plot(xs, [s[f"{kind}_mean"] for s in pts], "o-",
                    label=f"{config} mean")
            ax.plot(xs, [s[f"{kind}_median"] for s in pts], "s--",
                    label=f"{config} median")
        ax.set_xlabel("image noise (pixels)")
        ax.set_ylabel(label)
        ax.set_yscale("log")
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        path = os.path.join(out_dir, f"{stem}_{kind}_error.png")
        fig.savefig(path, dpi=130)
        plt.close(fig)
        paths.append(path)
    return paths
