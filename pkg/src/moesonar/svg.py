"""Optional static SVG line charts (presentation only; CSV files are the contract)."""
from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "moesonar"
    import matplotlib.pyplot as plt

    return plt


def line_chart(path: str | Path, series: Mapping[str, tuple[Sequence[float], Sequence[float]]],
               title: str, ylabel: str = "MOE", ylim: tuple[float, float] | None = (0.0, 1.0)) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 3.5))
    for name, (xs, ys) in series.items():
        ax.plot(xs, ys, marker=".", linestyle=":", label=name)
    ax.set_xlabel("time (s)")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if ylim is not None:
        ax.set_ylim(*ylim)
    ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
