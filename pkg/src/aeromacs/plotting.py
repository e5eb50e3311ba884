"""Render speed-sweep figures to image files.

Only used when a figure directory is requested; the CSV stays the primary
output. Uses the non-interactive Agg backend.
"""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["render_sweep_figures", "SWEEP_FIGURES"]

# file stem, column, y label, title
SWEEP_FIGURES = (
    ("doppler_shift", "doppler_hz", "Doppler shift (kHz)", "Doppler shift vs speed"),
    ("ici_power", "ici_dbm", "ICI power (dBm)", "ICI caused by Doppler shift"),
    ("signal_to_ici", "signal_to_ici_db", "Signal to ICI (dB)", "Signal to ICI ratio"),
    ("coherence_time", "coherence_ms", "Coherence time (ms)", "Coherence time vs speed"),
)

_RC = {
    "font.size": 10,
    "axes.labelsize": 10,
    "axes.grid": True,
    "grid.alpha": 0.4,
    "lines.linewidth": 1.5,
    "figure.figsize": (5.5, 3.6),
    "savefig.dpi": 120,
}


def _finite(rows, column):
    xs, ys = [], []
    for row in rows:
        y = row[column]
        if y is None or (isinstance(y, float) and math.isinf(y)):
            continue
        xs.append(row["speed_kmh"])
        ys.append(y / 1000.0 if column == "doppler_hz" else y)
    return xs, ys


def render_sweep_figures(rows, out_dir, fmt="png"):
    """Write one figure per sweep quantity against speed in km/h.

    Args:
        rows: sweep rows as produced by the ``doppler-sweep`` command
            (dicts keyed by column name, values already in report units).
        out_dir: directory to write into; created if missing.
        fmt: any matplotlib output format.

    Returns:
        List of written file paths, in a fixed order.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    with plt.rc_context(_RC):
        for stem, column, ylabel, title in SWEEP_FIGURES:
            xs, ys = _finite(rows, column)
            fig, ax = plt.subplots()
            ax.plot(xs, ys, marker="o", markersize=3)
            ax.set_xlabel("Speed (km/h)")
            ax.set_ylabel(ylabel)
            ax.set_title(title)
            if column == "coherence_ms" and ys:
                ax.set_yscale("log")
            fig.tight_layout()
            path = os.path.join(out_dir, f"{stem}.{fmt}")
            fig.savefig(path, metadata={"Software": None} if fmt == "png" else None)
            plt.close(fig)
            paths.append(path)
    return paths
