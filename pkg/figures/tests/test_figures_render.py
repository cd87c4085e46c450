"""Renderer unit tests on synthetic contract-conformant inputs."""

import hashlib
import json

import pytest
from PIL import Image

from probefig import FigureSpec, SchemaMismatch, StaleInput, render
from probefig.cli import main

SURFACE_HEADER = "lambda,t,L,dlogL,qfi,flag\n"


def write_surface(path, nl=4, nt=3):
    rows = [SURFACE_HEADER]
    for i in range(nl):
        for j in range(nt):
            lam, t = 0.8 + 0.05 * i, 2.0 * j
            rows.append(f"{lam},{t},{0.9 - 0.01 * i * j},{-0.1 * j},{1.5 * i + j},ok\n")
    path.write_text("".join(rows))
    return path


def write_residual(path, nl=5, nt=4):
    rows = ["lambda_shift,t,delta_f,flag\n"]
    for i in range(nl):
        for j in range(nt):
            flag = "excluded" if (i, j) == (0, 0) else "ok"
            val = "nan" if flag == "excluded" else f"{0.01 * (i - 2) * j}"
            rows.append(f"{-0.1 + 0.05 * i},{float(j)},{val},{flag}\n")
    path.write_text("".join(rows))
    return path


def write_histogram(path):
    path.write_text(
        "bin_left,bin_right,count\n-0.1,0.0,3\n0.0,0.1,17\n0.1,0.2,2\n")
    return path


def write_fit(path, a=0.015, peak=1):
    ns = [50, 100, 150]
    payload = {"peak_index": peak, "a": a, "b": 0.2, "c": -1.0, "r2": 0.9999,
               "n_values": ns, "f_values": [a * n * n + 0.2 * n - 1.0 for n in ns]}
    path.write_text(json.dumps(payload))
    return path


@pytest.mark.parametrize("kind,value", [
    ("surface3d", "L"), ("contour", "L"), ("contour", "qfi"), ("logcontour", "qfi"),
])
def test_surface_kinds_render_png(tmp_path, kind, value):
    src = write_surface(tmp_path / "surface.csv")
    out = render(FigureSpec(inputs=[src], kind=kind,
                            output=tmp_path / f"{kind}_{value}.png", value=value))
    assert out.exists() and out.stat().st_size > 0
    digest = hashlib.sha256(src.read_bytes()).hexdigest()
    assert Image.open(out).text["source-sha256"] == digest


def test_svg_output_carries_checksum(tmp_path):
    src = write_surface(tmp_path / "surface.csv")
    out = render(FigureSpec(inputs=[src], kind="contour",
                            output=tmp_path / "fig.svg"))
    digest = hashlib.sha256(src.read_bytes()).hexdigest()
    assert digest in out.read_text()


def test_residual_and_histogram_render(tmp_path):
    res = write_residual(tmp_path / "residual.csv")
    out = render(FigureSpec(inputs=[res], kind="residual",
                            output=tmp_path / "residual.png"))
    assert out.exists()
    hist = write_histogram(tmp_path / "histogram.csv")
    out = render(FigureSpec(inputs=[hist], kind="histogram",
                            output=tmp_path / "hist.png"))
    assert out.exists()


def test_scaling_overlay_two_fits(tmp_path):
    f1 = write_fit(tmp_path / "fit_cold.json", a=0.015)
    f2 = write_fit(tmp_path / "fit_hot.json", a=0.004)
    out = render(FigureSpec(inputs=[f1, f2], kind="scaling",
                            output=tmp_path / "scaling.png",
                            labels=["T=0", "T=0.015"]))
    meta = Image.open(out).text
    d1 = hashlib.sha256(f1.read_bytes()).hexdigest()
    d2 = hashlib.sha256(f2.read_bytes()).hexdigest()
    assert meta["source-sha256"] == f"{d1},{d2}"
    assert meta["source-files"] == "fit_cold.json,fit_hot.json"


def test_inputs_not_modified(tmp_path):
    src = write_surface(tmp_path / "surface.csv")
    before = src.read_bytes()
    render(FigureSpec(inputs=[src], kind="contour", output=tmp_path / "f.png"))
    assert src.read_bytes() == before


def test_empty_csv_is_schema_mismatch(tmp_path):
    src = tmp_path / "surface.csv"
    src.write_text("")
    with pytest.raises(SchemaMismatch):
        render(FigureSpec(inputs=[src], kind="contour", output=tmp_path / "f.png"))


def test_wrong_column_named_in_error(tmp_path):
    src = tmp_path / "surface.csv"
    src.write_text("lambda,t,L,dlogL,fisher,flag\n0.8,0.0,1.0,0.0,0.0,ok\n")
    with pytest.raises(SchemaMismatch, match="qfi"):
        render(FigureSpec(inputs=[src], kind="contour", output=tmp_path / "f.png"))


def test_non_numeric_column_rejected(tmp_path):
    src = tmp_path / "surface.csv"
    src.write_text(SURFACE_HEADER + "0.8,0.0,one,0.0,0.0,ok\n")
    with pytest.raises(SchemaMismatch, match="'L'"):
        render(FigureSpec(inputs=[src], kind="contour", output=tmp_path / "f.png"))


def test_ragged_grid_rejected(tmp_path):
    src = tmp_path / "surface.csv"
    src.write_text(SURFACE_HEADER
                   + "0.8,0.0,1.0,0.0,0.0,ok\n"
                   + "0.8,1.0,1.0,0.0,0.0,ok\n"
                   + "0.9,0.0,1.0,0.0,0.0,ok\n")
    with pytest.raises(SchemaMismatch, match="rectangular"):
        render(FigureSpec(inputs=[src], kind="contour", output=tmp_path / "f.png"))


def test_bad_fit_json_key_named(tmp_path):
    f = tmp_path / "fit.json"
    f.write_text(json.dumps({"peak_index": 1, "a": 1.0, "b": 0.0, "c": 0.0,
                             "r2": 1.0, "n_values": [1, 2, 3]}))
    with pytest.raises(SchemaMismatch, match="f_values"):
        render(FigureSpec(inputs=[f], kind="scaling", output=tmp_path / "f.png"))


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(SchemaMismatch):
        FigureSpec(inputs=[tmp_path / "x.csv"], kind="sparkline",
                   output=tmp_path / "f.png")


def test_manifest_agreement_checked(tmp_path):
    src = write_surface(tmp_path / "surface.csv")
    digest = hashlib.sha256(src.read_bytes()).hexdigest()
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps(
        {"outputs": {"surface.csv": {"sha256": digest}}}))
    out = render(FigureSpec(inputs=[src], kind="contour",
                            output=tmp_path / "ok.png"))
    assert out.exists()
    # now corrupt the recorded checksum: the figure must refuse stale data
    manifest.write_text(json.dumps(
        {"outputs": {"surface.csv": {"sha256": "0" * 64}}}))
    with pytest.raises(StaleInput):
        render(FigureSpec(inputs=[src], kind="contour",
                          output=tmp_path / "stale.png"))


def test_cli_roundtrip(tmp_path):
    src = write_surface(tmp_path / "surface.csv")
    out = tmp_path / "fig.png"
    assert main(["--kind", "contour", "--input", str(src), "--value", "qfi",
                 "--output", str(out)]) == 0
    assert out.exists()
    assert main(["--kind", "contour", "--input", str(tmp_path / "nope.csv"),
                 "--output", str(out)]) == 2
