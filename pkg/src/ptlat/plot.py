"""Static SVG charts of CSV files written by the CLI."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_LABELS = {
    "phi": r"$\Phi$",
    "gamma": r"$\gamma$",
    "V": r"$V/t$",
    "N": r"$N$",
    "re": r"Re $E$",
    "im": r"Im $E$",
    "mean_ipr": "mean IPR",
    "max_imag": r"max |Im $E$|",
}


def _read(path: Path) -> tuple[list[str], dict[str, np.ndarray]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    cols = {}
    for i, name in enumerate(header):
        raw = [r[i] for r in rows]
        try:
            cols[name] = np.array([float({"true": 1, "false": 0}.get(x, x)) for x in raw])
        except ValueError:
            continue
    return header, cols


def render_csv(src: str | Path, target: str | Path, title: str = "") -> Path:
    """
    Render ``src`` to a standalone SVG.

    Files with ``re``/``im`` columns get two stacked panels (real and imaginary
    parts against the first column); a ``phi,gamma,...`` grid becomes a map of
    ``max_imag``; anything else is drawn as lines of every numeric column
    against the first one.
    """
    src, target = Path(src), Path(target)
    header, cols = _read(src)
    if not header or header[0] not in cols:
        raise ValueError(f"{src}: first column must be numeric")
    x_name = header[0]
    x = cols[x_name]

    plt.rcParams["svg.hashsalt"] = "ptlat"
    plt.rcParams["svg.fonttype"] = "path"
    if "re" in cols and "im" in cols:
        fig, axes = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
        for ax, key in zip(axes, ("re", "im")):
            ax.scatter(x, cols[key], s=1.5, c="k", linewidths=0)
            ax.set_ylabel(_LABELS[key])
        axes[-1].set_xlabel(_LABELS.get(x_name, x_name))
    elif header[:2] == ["phi", "gamma"] and "max_imag" in cols:
        fig, ax = plt.subplots(figsize=(6, 4.5))
        z = np.log10(cols["max_imag"] + 1e-16)
        sc = ax.scatter(cols["phi"], cols["gamma"], c=z, s=6, marker="s", cmap="viridis", linewidths=0)
        fig.colorbar(sc, ax=ax, label=r"log$_{10}$ max |Im $E$|")
        ax.set_xlabel(_LABELS["phi"])
        ax.set_ylabel(_LABELS["gamma"])
    else:
        fig, ax = plt.subplots(figsize=(6, 4))
        for name in header[1:]:
            if name in cols:
                ax.plot(x, cols[name], marker="o", ms=3, label=_LABELS.get(name, name))
        ax.set_xlabel(_LABELS.get(x_name, x_name))
        ax.legend()
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(target, format="svg", metadata={"Date": None})
    plt.close(fig)
    return target
