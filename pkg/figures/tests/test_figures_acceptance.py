"""Figure-pipeline acceptance: render the study figures from real runs.

Generates desk-scale analogues of the scaling, localization, symmetry and
thermal-degradation outputs by invoking the `isingprobe` CLI (the only
interface this package consumes), renders each paper-style figure, and
verifies the checksum round-trip between run manifests and image metadata.
"""

import hashlib
import json
import subprocess
import sys

import pytest
from PIL import Image

from probefig import FigureSpec, render


def run_cli(*args):
    proc = subprocess.run([sys.executable, "-m", "isingprobe.cli", *args],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def runs(tmp_path_factory):
    """Small but real runs of every study the figures consume."""
    base = tmp_path_factory.mktemp("runs")
    run_cli("echo", "--N", "100", "--delta", "0.1", "--lambda", "0.7:1.1:60",
            "--t", "0:30:80", "--out", str(base / "echo100"))
    run_cli("qfi", "--N", "100", "--delta", "0.1", "--lambda", "0.7:1.1:60",
            "--t", "0:30:80", "--out", str(base / "qfi100"))
    run_cli("scaling", "--n", "50,100,150,200", "--n-delta", "10", "--peak", "1",
            "--lambda-steps", "100", "--t-steps", "150",
            "--out", str(base / "scaling_t0"))
    run_cli("scaling", "--n", "50,100,150,200", "--n-delta", "10", "--peak", "1",
            "--T", "0.015", "--lambda-steps", "100", "--t-steps", "150",
            "--out", str(base / "scaling_hot"))
    run_cli("symmetry", "--n0", "100", "--alpha", "5", "--n-delta", "10",
            "--lambda-shift=-0.1:0.1:50", "--t", "0:30:70",
            "--out", str(base / "symmetry"))
    return base


def manifest_digest(run_dir, name):
    manifest = json.loads((run_dir / "manifest.json").read_text())
    return manifest["outputs"][name]["sha256"]


def assert_roundtrip(image_path, run_dir, input_name):
    """Image metadata digest == manifest digest == bytes on disk."""
    recorded = manifest_digest(run_dir, input_name)
    recomputed = hashlib.sha256((run_dir / input_name).read_bytes()).hexdigest()
    embedded = Image.open(image_path).text["source-sha256"]
    assert recorded == recomputed
    assert recorded in embedded.split(",")


def test_fig1_analogue_echo_surface(runs, tmp_path):
    out = render(FigureSpec(inputs=[runs / "echo100" / "surface.csv"],
                            kind="surface3d", value="L",
                            output=tmp_path / "fig1.png",
                            title="decoherence factor, N=100"))
    assert_roundtrip(out, runs / "echo100", "surface.csv")
    svg = render(FigureSpec(inputs=[runs / "echo100" / "surface.csv"],
                            kind="contour", value="L",
                            output=tmp_path / "fig1.svg"))
    assert manifest_digest(runs / "echo100", "surface.csv") in svg.read_text()


def test_fig3_analogue_qfi_contour(runs, tmp_path):
    out = render(FigureSpec(inputs=[runs / "qfi100" / "surface.csv"],
                            kind="logcontour", value="qfi",
                            output=tmp_path / "fig3.png",
                            title="QFI, N=100"))
    assert_roundtrip(out, runs / "qfi100", "surface.csv")


def test_fig6_analogue_ground_scaling(runs, tmp_path):
    out = render(FigureSpec(inputs=[runs / "scaling_t0" / "fit.json"],
                            kind="scaling", output=tmp_path / "fig6.png",
                            labels=["first peak, T=0"]))
    assert_roundtrip(out, runs / "scaling_t0", "fit.json")


def test_fig7_analogue_residual_and_histogram(runs, tmp_path):
    res = render(FigureSpec(inputs=[runs / "symmetry" / "residual.csv"],
                            kind="residual", output=tmp_path / "fig7a.png"))
    assert_roundtrip(res, runs / "symmetry", "residual.csv")
    hist = render(FigureSpec(inputs=[runs / "symmetry" / "histogram.csv"],
                             kind="histogram", output=tmp_path / "fig7b.png"))
    assert_roundtrip(hist, runs / "symmetry", "histogram.csv")


def test_fig8_analogue_thermal_scaling(runs, tmp_path):
    inputs = [runs / "scaling_t0" / "fit.json", runs / "scaling_hot" / "fit.json"]
    out = render(FigureSpec(inputs=inputs, kind="scaling",
                            output=tmp_path / "fig8.png",
                            labels=["T=0", "T=0.015"]))
    meta = Image.open(out).text["source-sha256"].split(",")
    assert manifest_digest(runs / "scaling_t0", "fit.json") == meta[0]
    assert manifest_digest(runs / "scaling_hot", "fit.json") == meta[1]
    # the hot curve must sit below the cold one at the largest ring
    cold = json.loads((runs / "scaling_t0" / "fit.json").read_text())
    hot = json.loads((runs / "scaling_hot" / "fit.json").read_text())
    assert hot["f_values"][-1] < cold["f_values"][-1]
