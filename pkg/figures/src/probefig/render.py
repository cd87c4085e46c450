"""Readers for the isingprobe file contracts and the figure kinds.

Input schemas (headers are exact):
    surface.csv    lambda,t,L,dlogL,qfi,flag
    residual.csv   lambda_shift,t,delta_f,flag
    histogram.csv  bin_left,bin_right,count
    fit.json       peak_index, a, b, c, r2, n_values, f_values

Kinds: surface3d | contour | logcontour | residual | histogram | scaling.
Contour kinds switch to log2 of the values when they span more than three
decades (logcontour always does).
"""

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

SURFACE_COLUMNS = ["lambda", "t", "L", "dlogL", "qfi", "flag"]
RESIDUAL_COLUMNS = ["lambda_shift", "t", "delta_f", "flag"]
HISTOGRAM_COLUMNS = ["bin_left", "bin_right", "count"]
FIT_KEYS = {"peak_index", "a", "b", "c", "r2", "n_values", "f_values"}

KINDS = ("surface3d", "contour", "logcontour", "residual", "histogram", "scaling")


class SchemaMismatch(ValueError):
    """Input does not match the documented contract; names the offender."""


class StaleInput(ValueError):
    """Input checksum disagrees with the run manifest next to it."""


@dataclass
class FigureSpec:
    """One figure: inputs, kind, labels, destination."""

    inputs: list[Path]
    kind: str
    output: Path
    value: str = "L"            # surface column to plot (L or qfi)
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    labels: list[str] = field(default_factory=list)  # per-input, scaling kind
    levels: int = 24
    cmap: str = "viridis"       # blue-to-yellow

    def __post_init__(self):
        self.inputs = [Path(p) for p in self.inputs]
        self.output = Path(self.output)
        if self.kind not in KINDS:
            raise SchemaMismatch(f"unknown figure kind {self.kind!r}")


def _check_header(found: list[str], expected: list[str], path: Path) -> None:
    if found == expected:
        return
    missing = [c for c in expected if c not in found]
    extra = [c for c in found if c not in expected]
    offender = (missing + extra + ["<order>"])[0]
    raise SchemaMismatch(
        f"{path}: column {offender!r} breaks the schema (expected "
        f"{','.join(expected)}, found {','.join(found) or '<empty>'})"
    )


def _read_table(path: Path, expected: list[str]) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaMismatch(f"{path}: empty file, expected header "
                                 f"{','.join(expected)}")
        _check_header(header, expected, path)
        rows = list(reader)
    cols: dict[str, np.ndarray] = {}
    for i, name in enumerate(expected):
        raw = [r[i] for r in rows]
        if name in ("flag",):
            cols[name] = np.array(raw)
        elif name == "count":
            cols[name] = np.array([int(v) for v in raw])
        else:
            try:
                cols[name] = np.array([float(v) for v in raw])
            except ValueError as exc:
                raise SchemaMismatch(f"{path}: column {name!r} is not numeric: {exc}")
    return cols


def _pivot(x: np.ndarray, y: np.ndarray, v: np.ndarray):
    """Row-major (x-major) node list back to axes + 2-D array."""
    xs = np.unique(x)
    ys = np.unique(y)
    if len(xs) * len(ys) != len(v):
        raise SchemaMismatch("node list is not a full rectangular grid")
    return xs, ys, v.reshape(len(xs), len(ys))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def source_checksums(inputs: list[Path]) -> list[tuple[str, str]]:
    """(name, sha256) per input, cross-checked against a sibling manifest.json.

    If the run manifest lists the file, the recorded and recomputed digests
    must agree (otherwise the data on disk is not what the run produced).
    Returned as ordered pairs: distinct runs share file names like fit.json.
    """
    out: list[tuple[str, str]] = []
    for path in inputs:
        digest = _sha256(path)
        manifest = path.parent / "manifest.json"
        if manifest.exists():
            recorded = (json.loads(manifest.read_text())
                        .get("outputs", {}).get(path.name, {}).get("sha256"))
            if recorded is not None and recorded != digest:
                raise StaleInput(
                    f"{path}: sha256 {digest[:12]}... does not match the run "
                    f"manifest ({recorded[:12]}...)"
                )
        out.append((path.name, digest))
    return out


def _maybe_log2(values: np.ndarray, force: bool):
    """log2-transform positive data spanning > 3 decades; returns (data, tag)."""
    pos = values[np.isfinite(values) & (values > 0)]
    span = (pos.size > 1) and (pos.max() / pos.min() > 1e3)
    if not (force or span):
        return np.ma.masked_invalid(values), ""
    with np.errstate(divide="ignore", invalid="ignore"):
        logv = np.where(values > 0, np.log2(np.where(values > 0, values, 1.0)),
                        np.nan)
    return np.ma.masked_invalid(logv), "log2 "


def render(spec: FigureSpec) -> Path:
    """Render one figure; returns the written image path.

    The sha256 of every input (manifest-verified) is embedded in the image
    metadata and echoed in a caption line.
    """
    if not spec.inputs:
        raise SchemaMismatch("figure needs at least one input file")
    checksums = source_checksums(spec.inputs)

    fig = plt.figure(figsize=(7.2, 4.8))
    if spec.kind == "surface3d":
        _draw_surface3d(fig, spec)
    elif spec.kind in ("contour", "logcontour"):
        _draw_contour(fig, spec, force_log=(spec.kind == "logcontour"))
    elif spec.kind == "residual":
        _draw_residual(fig, spec)
    elif spec.kind == "histogram":
        _draw_histogram(fig, spec)
    elif spec.kind == "scaling":
        _draw_scaling(fig, spec)

    stamp = ", ".join(f"{name} {digest[:12]}" for name, digest in checksums)
    fig.text(0.01, 0.01, f"source sha256: {stamp}", fontsize=5, color="0.45")

    joined = ",".join(digest for _, digest in checksums)
    names = ",".join(name for name, _ in checksums)
    if spec.output.suffix.lower() == ".svg":
        metadata = {"Description": f"source-sha256={joined}; source-files={names}"}
    else:
        metadata = {"source-sha256": joined, "source-files": names,
                    "Description": f"source-sha256={joined}"}
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.output, dpi=150, metadata=metadata)
    plt.close(fig)
    return spec.output


def _surface_grid(spec: FigureSpec):
    if spec.value not in ("L", "qfi", "dlogL"):
        raise SchemaMismatch(f"unknown surface value column {spec.value!r}")
    cols = _read_table(spec.inputs[0], SURFACE_COLUMNS)
    vals = np.where(cols["flag"] == "ok", cols[spec.value], np.nan)
    return _pivot(cols["lambda"], cols["t"], vals)


def _draw_surface3d(fig, spec):
    lams, ts, grid = _surface_grid(spec)
    ax = fig.add_subplot(projection="3d")
    T, L = np.meshgrid(ts, lams)
    ax.plot_surface(L, T, np.ma.masked_invalid(grid), cmap=spec.cmap,
                    linewidth=0, antialiased=True, rstride=1, cstride=1)
    ax.set_xlabel(spec.xlabel or "field")
    ax.set_ylabel(spec.ylabel or "time")
    ax.set_zlabel(spec.value)
    ax.set_title(spec.title)


def _draw_contour(fig, spec, force_log: bool):
    lams, ts, grid = _surface_grid(spec)
    data, tag = _maybe_log2(grid, force=force_log)
    ax = fig.add_subplot()
    m = ax.contourf(ts, lams, data, levels=spec.levels, cmap=spec.cmap)
    fig.colorbar(m, ax=ax, label=f"{tag}{spec.value}")
    ax.set_xlabel(spec.xlabel or "time")
    ax.set_ylabel(spec.ylabel or "field")
    ax.set_title(spec.title)


def _draw_residual(fig, spec):
    cols = _read_table(spec.inputs[0], RESIDUAL_COLUMNS)
    vals = np.where(cols["flag"] == "ok", cols["delta_f"], np.nan)
    us, ts, grid = _pivot(cols["lambda_shift"], cols["t"], vals)
    ax = fig.add_subplot()
    bound = float(np.nanmax(np.abs(grid))) or 1.0
    m = ax.contourf(ts, us, np.ma.masked_invalid(grid), levels=spec.levels,
                    cmap="RdBu_r", vmin=-bound, vmax=bound)
    fig.colorbar(m, ax=ax, label="residual")
    ax.set_xlabel(spec.xlabel or "time")
    ax.set_ylabel(spec.ylabel or "field - critical field")
    ax.set_title(spec.title)


def _draw_histogram(fig, spec):
    cols = _read_table(spec.inputs[0], HISTOGRAM_COLUMNS)
    ax = fig.add_subplot()
    widths = cols["bin_right"] - cols["bin_left"]
    ax.bar(cols["bin_left"], cols["count"], width=widths, align="edge",
           color="tab:blue", edgecolor="none")
    ax.set_yscale("log")
    ax.set_xlabel(spec.xlabel or "residual")
    ax.set_ylabel(spec.ylabel or "nodes")
    ax.set_title(spec.title)


def _load_fit(path: Path) -> dict:
    try:
        fit = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"{path}: not valid JSON: {exc}")
    missing = FIT_KEYS - set(fit)
    if missing:
        raise SchemaMismatch(f"{path}: fit key {sorted(missing)[0]!r} missing")
    if len(fit["n_values"]) != len(fit["f_values"]):
        raise SchemaMismatch(f"{path}: key 'f_values' length differs from 'n_values'")
    return fit


def _draw_scaling(fig, spec):
    ax = fig.add_subplot()
    for i, path in enumerate(spec.inputs):
        fit = _load_fit(path)
        ns = np.asarray(fit["n_values"], dtype=float)
        fs = np.asarray(fit["f_values"], dtype=float)
        label = (spec.labels[i] if i < len(spec.labels)
                 else f"peak {fit['peak_index']}")
        color = f"C{i}"
        ax.plot(ns, fs, "o", color=color, label=label)
        dense = np.linspace(ns.min(), ns.max(), 200)
        ax.plot(dense, fit["a"] * dense**2 + fit["b"] * dense + fit["c"],
                "-", color=color, linewidth=1)
    ax.set_xlabel(spec.xlabel or "ring size")
    ax.set_ylabel(spec.ylabel or "QFI at peak")
    ax.set_title(spec.title)
    ax.legend(fontsize=8)
