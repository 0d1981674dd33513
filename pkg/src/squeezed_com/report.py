"""Render sweep results to figure files next to their delimited exports.

The data path stays plot-free (see :mod:`squeezed_com.sweep`); this module
is the presentation layer the CLI ``report`` subcommand drives.  Axes are
shown in the customary reduced units (G/kappa, omega/omega_m, g/kappa);
dynamically unstable or threshold regions of 2D maps are overlaid with a
stability boundary contour so the formula surface remains visible without
being mistaken for a reachable stationary spectrum.
"""

from __future__ import annotations

import math

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402
from matplotlib.colors import LogNorm  # noqa: E402

from .sweep import SweepResult, figure_dataset, write_csv  # noqa: E402

plt.rcParams.update({
    "figure.figsize": (4.8, 3.6),
    "font.size": 9,
    "axes.grid": False,
    "savefig.dpi": 160,
    "savefig.bbox": "tight",
})

_AXIS_LABEL = {
    "g_sq_ratio": r"$g^2/g_{\mathrm{SQL}}^2$",
    "G": r"$G/\kappa$",
    "theta": r"$\theta$ (rad)",
    "omega": r"$\omega/\omega_m$",
    "delta": r"$\Delta/\kappa$",
}
_VALUE_LABEL = {
    "ratio": r"$S_{FF}/S_{\mathrm{SQL}}$",
    "ratio_opt": r"$\min\,S_{FF}/S_{\mathrm{SQL}}$",
    "s_ff": r"$S_{FF}$",
    "s_backaction": "backaction PSD",
    "s_shot": "shot PSD",
    "phi": r"$\phi$ (rad)",
    "psi": r"$\psi$ (rad)",
    "g_opt": r"$g_{\mathrm{opt}}/\kappa$",
}
_LOG_VALUES = ("ratio", "ratio_opt", "s_ff", "s_backaction", "s_shot")


def _display_axis(result: SweepResult, which: int):
    axis = result.spec.axis1 if which == 1 else result.spec.axis2
    values = result.axis1_values if which == 1 else result.axis2_values
    base = result.spec.fixed
    if axis.name in ("G", "delta"):
        values = values / base.kappa
    elif axis.name == "omega":
        values = values / base.omega_m
    return axis, np.asarray(values)


def _display_values(result: SweepResult) -> np.ndarray:
    values = np.array(result.values, dtype=float)
    if result.spec.observable == "g_opt":
        values = values / result.spec.fixed.kappa
    return values


def render_figure(result: SweepResult, path) -> None:
    """Draw one sweep result to an image file (format from the suffix)."""
    observable = result.spec.observable
    fig, ax = plt.subplots()
    axis1, a1 = _display_axis(result, 1)

    if result.axis2_values is None:
        values = _display_values(result)
        ax.plot(a1, values, lw=1.2)
        if axis1.spacing == "log":
            ax.set_xscale("log")
        if observable in _LOG_VALUES and np.nanmin(values) > 0:
            ax.set_yscale("log")
        ax.set_ylabel(_VALUE_LABEL.get(observable, observable))
    else:
        axis2, a2 = _display_axis(result, 2)
        values = np.ma.masked_invalid(_display_values(result)).T
        norm = None
        if observable in _LOG_VALUES and values.count() and values.min() > 0:
            norm = LogNorm(vmin=values.min(), vmax=values.max())
        mesh = ax.pcolormesh(a1, a2, values, shading="auto", norm=norm,
                             cmap="viridis")
        fig.colorbar(mesh, ax=ax,
                     label=_VALUE_LABEL.get(observable, observable))
        unstable = np.isin(result.flags, ("unstable", "threshold")).T
        if unstable.any() and not unstable.all():
            ax.contour(a1, a2, unstable.astype(float), levels=[0.5],
                       colors="white", linewidths=0.8, linestyles="dashed")
        if axis1.spacing == "log":
            ax.set_xscale("log")
        if axis2.spacing == "log":
            ax.set_yscale("log")
        ax.set_ylabel(_AXIS_LABEL.get(axis2.name, axis2.name))

    ax.set_xlabel(_AXIS_LABEL.get(axis1.name, axis1.name))
    title = result.metadata.get("figure", observable)
    gain = result.spec.fixed.G / result.spec.fixed.kappa
    theta = result.spec.fixed.theta / math.pi
    ax.set_title(f"{title}  (G/κ={gain:.3g}, θ={theta:.3g}π)",
                 fontsize=9)
    fig.savefig(path)
    plt.close(fig)


def render_figure_files(figure_id: str, out_dir, baseline=None) -> tuple[str, str]:
    """Produce <id>.csv and <id>.png for one bundled figure recipe.

    Returns the two paths written.
    """
    import os

    os.makedirs(out_dir, exist_ok=True)
    result = figure_dataset(figure_id, baseline)
    csv_path = os.path.join(out_dir, f"{figure_id}.csv")
    png_path = os.path.join(out_dir, f"{figure_id}.png")
    write_csv(result, csv_path)
    render_figure(result, png_path)
    return csv_path, png_path
