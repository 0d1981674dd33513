import math

from squeezed_com.report import render_figure, render_figure_files
from squeezed_com.sweep import Axis, SweepSpec, run_sweep


def test_render_line_plot(baseline, tmp_path):
    spec = SweepSpec(fixed=baseline.with_updates(G=0.2 * baseline.kappa),
                     observable="phi",
                     axis1=Axis("theta", -math.pi, math.pi, 40))
    path = tmp_path / "phase.png"
    render_figure(run_sweep(spec), path)
    assert path.exists() and path.stat().st_size > 1000


def test_render_map_with_instability_overlay(baseline, tmp_path):
    spec = SweepSpec(fixed=baseline.with_updates(theta=-math.pi / 4.0),
                     observable="ratio",
                     axis1=Axis("g_sq_ratio", 1e-3, 10.0, 24, "log"),
                     axis2=Axis("G", 0.0, 0.24 * baseline.kappa, 12))
    result = run_sweep(spec)
    assert (result.flags == "unstable").any()
    path = tmp_path / "map.png"
    render_figure(result, path)
    assert path.exists() and path.stat().st_size > 1000


def test_figure_files_land_next_to_each_other(baseline, tmp_path):
    csv_path, png_path = render_figure_files("fig4c", tmp_path)
    assert csv_path.endswith("fig4c.csv") and png_path.endswith("fig4c.png")
    with open(csv_path) as fh:
        header = fh.readline()
    assert header.startswith("# version=")
    import os
    assert os.path.getsize(png_path) > 1000
