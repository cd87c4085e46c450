"""Command-line entry point.

Subcommands: echo, qfi, peaks, scaling, symmetry, oracle-check.  Each run
writes its data files plus a manifest.json (tool version, resolved config,
timestamps, sha256 per output) into --out.  Data files are byte-stable
across reruns and worker counts; only the manifest carries timestamps.

Exit codes: 0 success, 2 configuration error, 3 numerical/oracle failure.
"""

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .echo import GridPoint, ThermalConfig, loschmidt_ground, loschmidt_thermal
from .errors import (ConfigError, DegenerateGroundState, InsufficientPeaks,
                     NumericalFailure)
from .modes import RingConfig
from .oracle import block_echo_oracle, block_thermal_oracle, finite_difference
from .qfi import OPTIMAL_THETA
from .sweep import (Grid, SurfaceKind, evaluate_surface, find_peaks,
                    peak_scaling, symmetry_residual)

SURFACE_HEADER = ["lambda", "t", "L", "dlogL", "qfi", "flag"]
PEAKS_HEADER = ["peak_index", "lambda_star", "t_star", "qfi_star", "N", "delta", "temperature"]
RESIDUAL_HEADER = ["lambda_shift", "t", "delta_f", "flag"]
HISTOGRAM_HEADER = ["bin_left", "bin_right", "count"]


def _fmt(x: float) -> str:
    """Shortest round-trip decimal; keeps CSVs byte-stable and lossless."""
    return repr(float(x))


def _parse_range(text: str, name: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"{name} must be min:max:steps, got {text!r}")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad {name} range {text!r}: {exc}") from exc


def _parse_window(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"window must be lo:hi, got {text!r}")
    return float(parts[0]), float(parts[1])


def _parse_n_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad N list {text!r}: {exc}") from exc


def _load_config_file(path: str) -> dict[str, str]:
    """key=value lines; '#' starts a comment; keys match long option names."""
    values: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line is not key=value: {raw!r}")
        key, val = line.split("=", 1)
        key = key.strip().replace("-", "_")
        if key == "lambda":  # argparse dest avoids the keyword
            key = "lam"
        values[key] = val.strip()
    return values


def _apply_config_file(args: argparse.Namespace) -> None:
    """Fill options still at None from --config; flags override the file."""
    if not getattr(args, "config", None):
        return
    values = _load_config_file(args.config)
    for key, val in values.items():
        if not hasattr(args, key):
            raise ConfigError(f"unknown config key {key!r}")
        if getattr(args, key) is None:
            setattr(args, key, val)


def _require(args, *names: str) -> None:
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join(
            "--lambda" if n == "lam" else "--" + n.replace("_", "-")
            for n in missing)
        raise ConfigError(f"missing required option(s): {flags}")


def _resolve_delta(args) -> float:
    has_delta = getattr(args, "delta", None) is not None
    has_nd = getattr(args, "n_delta", None) is not None
    if has_delta == has_nd:
        raise ConfigError("exactly one of --delta / --n-delta must be given")
    if has_delta:
        return float(args.delta)
    return float(args.n_delta) / int(args.N)


def _thermal_from(args) -> ThermalConfig | None:
    if getattr(args, "T", None) is None:
        return None
    return ThermalConfig(float(args.T))


@dataclass
class _Run:
    """Accumulates outputs and writes the closing manifest."""

    out_dir: Path
    command: str
    config: dict
    started: str
    outputs: dict

    @classmethod
    def begin(cls, out: str, command: str, config: dict) -> "_Run":
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        return cls(out_dir=out_dir, command=command, config=config,
                   started=datetime.now(timezone.utc).isoformat(), outputs={})

    def _register(self, path: Path) -> None:
        data = path.read_bytes()
        self.outputs[path.name] = {
            "sha256": hashlib.sha256(data).hexdigest(),
            "bytes": len(data),
        }

    def write_csv(self, name: str, header: list[str], rows) -> None:
        path = self.out_dir / name
        tmp = path.with_suffix(path.suffix + ".tmp")
        with open(tmp, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        os.replace(tmp, path)
        self._register(path)

    def write_json(self, name: str, payload: dict) -> None:
        path = self.out_dir / name
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(json.dumps(payload, indent=2) + "\n")
        os.replace(tmp, path)
        self._register(path)

    def finish(self) -> None:
        manifest = {
            "tool": "isingprobe",
            "version": __version__,
            "command": self.command,
            "config": self.config,
            "started": self.started,
            "finished": datetime.now(timezone.utc).isoformat(),
            "outputs": self.outputs,
        }
        path = self.out_dir / "manifest.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(manifest, indent=2) + "\n")
        os.replace(tmp, path)


def _surface_rows(surface):
    for lam, t, l, dlog, f, flag in surface.iter_rows():
        yield [_fmt(lam), _fmt(t), _fmt(l), _fmt(dlog), _fmt(f), flag.value]


def _build_surface(args, kind_ground: SurfaceKind, kind_thermal: SurfaceKind):
    _require(args, "N", "lam", "t", "out")
    n = int(args.N)
    delta = _resolve_delta(args)
    cfg = RingConfig(n, delta)
    th = _thermal_from(args)
    lam_lo, lam_hi, lam_steps = _parse_range(args.lam, "--lambda")
    t_lo, t_hi, t_steps = _parse_range(args.t, "--t")
    grid = Grid(lam_lo, lam_hi, lam_steps, t_lo, t_hi, t_steps)
    kind = kind_thermal if th is not None else kind_ground
    theta = float(args.theta) if args.theta is not None else OPTIMAL_THETA
    t0 = time.monotonic()
    surf = evaluate_surface(cfg, grid, kind, th=th, theta=theta,
                            workers=int(args.workers or 1))
    print(f"evaluated {lam_steps}x{t_steps} {kind.value} surface for N={n} "
          f"in {time.monotonic() - t0:.1f}s", file=sys.stderr)
    config = {
        "N": n, "delta": delta, "kind": kind.value, "theta": theta,
        "temperature": th.temperature if th else None,
        "lambda": [lam_lo, lam_hi, lam_steps], "t": [t_lo, t_hi, t_steps],
        "workers": int(args.workers or 1),
    }
    return cfg, th, surf, config


def cmd_echo(args) -> int:
    _, _, surf, config = _build_surface(args, SurfaceKind.ECHO_GROUND,
                                        SurfaceKind.ECHO_THERMAL)
    run = _Run.begin(args.out, "echo", config)
    run.write_csv("surface.csv", SURFACE_HEADER, _surface_rows(surf))
    run.finish()
    return 0


def cmd_qfi(args) -> int:
    _, _, surf, config = _build_surface(args, SurfaceKind.QFI_GROUND,
                                        SurfaceKind.QFI_THERMAL)
    run = _Run.begin(args.out, "qfi", config)
    run.write_csv("surface.csv", SURFACE_HEADER, _surface_rows(surf))
    run.finish()
    return 0


def cmd_peaks(args) -> int:
    cfg, th, surf, config = _build_surface(args, SurfaceKind.QFI_GROUND,
                                           SurfaceKind.QFI_THERMAL)
    window = _parse_window(args.window) if args.window else None
    count = int(args.count or 5)
    peaks = find_peaks(surf, window=window, count=count)
    config.update({"count": count, "window": list(window) if window else None})
    run = _Run.begin(args.out, "peaks", config)
    temp = th.temperature if th else 0.0
    run.write_csv("peaks.csv", PEAKS_HEADER, (
        [str(p.index_l), _fmt(p.lambda_star), _fmt(p.t_star), _fmt(p.F_star),
         str(cfg.N), _fmt(cfg.delta), _fmt(temp)]
        for p in peaks
    ))
    run.finish()
    return 0


def cmd_scaling(args) -> int:
    _require(args, "n", "out")
    n_list = _parse_n_list(args.n)
    if getattr(args, "n_delta", None) is None:
        raise ConfigError("scaling requires --n-delta")
    peak_index = int(args.peak or 1)
    th = _thermal_from(args)
    t0 = time.monotonic()
    fit = peak_scaling(
        n_list, float(args.n_delta), peak_index=peak_index, th=th,
        lambda_steps=int(args.lambda_steps or 200),
        t_steps=int(args.t_steps or 300), workers=int(args.workers or 1),
    )
    print(f"tracked peak {peak_index} over N={n_list} in "
          f"{time.monotonic() - t0:.1f}s", file=sys.stderr)
    config = {
        "n_values": n_list, "n_delta": float(args.n_delta),
        "peak_index": peak_index,
        "temperature": th.temperature if th else None,
        "lambda_steps": int(args.lambda_steps or 200),
        "t_steps": int(args.t_steps or 300),
    }
    run = _Run.begin(args.out, "scaling", config)
    run.write_json("fit.json", {
        "peak_index": peak_index, "a": fit.a, "b": fit.b, "c": fit.c,
        "r2": fit.r2, "n_values": fit.n_values, "f_values": fit.f_values,
    })
    run.finish()
    return 0


def cmd_symmetry(args) -> int:
    _require(args, "n0", "alpha", "out")
    if getattr(args, "n_delta", None) is None:
        raise ConfigError("symmetry requires --n-delta")
    n0 = int(args.n0)
    alpha = float(args.alpha)
    u_lo, u_hi, u_steps = _parse_range(args.lambda_shift or "-0.1:0.1:200",
                                       "--lambda-shift")
    t_lo, t_hi, t_steps = _parse_range(args.t or "0:30:300", "--t")
    grid = Grid(u_lo, u_hi, u_steps, t_lo, t_hi, t_steps)
    th = _thermal_from(args)
    t0 = time.monotonic()
    check = symmetry_residual(n0, alpha, float(args.n_delta), grid, th=th,
                              workers=int(args.workers or 1))
    print(f"symmetry residual n0={n0} alpha={alpha}: "
          f"{check.fraction_within(0.05):.3f} of nodes within 0.05 "
          f"({time.monotonic() - t0:.1f}s)", file=sys.stderr)
    config = {
        "n0": n0, "alpha": alpha, "n_delta": float(args.n_delta),
        "temperature": th.temperature if th else None,
        "lambda_shift": [u_lo, u_hi, u_steps], "t": [t_lo, t_hi, t_steps],
    }
    run = _Run.begin(args.out, "symmetry", config)
    us, ts = grid.lambda_axis(), grid.t_axis()

    def residual_rows():
        for i in range(len(us)):
            for j in range(len(ts)):
                flag = "excluded" if check.flagged[i, j] else "ok"
                yield [_fmt(us[i]), _fmt(ts[j]), _fmt(check.delta_f[i, j]), flag]

    run.write_csv("residual.csv", RESIDUAL_HEADER, residual_rows())
    run.write_csv("histogram.csv", HISTOGRAM_HEADER, (
        [_fmt(check.bin_edges[i]), _fmt(check.bin_edges[i + 1]), str(int(c))]
        for i, c in enumerate(check.counts)
    ))
    run.finish()
    return 0


def _oracle_checks(quick: bool) -> list[dict]:
    rng = np.random.default_rng(20240611)
    sizes = [4, 8] if quick else [4, 8, 16, 100]
    n_pts = 20 if quick else 100
    betas = [0.1, 10.0] if quick else [0.1, 1.0, 10.0]
    checks = []

    worst = 0.0
    for n in sizes:
        cfg = RingConfig(n, 10.0 / n)
        for _ in range(n_pts):
            p = GridPoint(rng.uniform(0.5, 1.5), rng.uniform(0.0, 20.0))
            worst = max(worst, abs(loschmidt_ground(cfg, p).L - block_echo_oracle(cfg, p)))
    checks.append({"name": "ground_block_equivalence", "max_abs_error": worst,
                   "tolerance": 1e-10})

    worst = 0.0
    for n in sizes:
        cfg = RingConfig(n, 10.0 / n)
        for beta in betas:
            th = ThermalConfig(1.0 / beta)
            for _ in range(n_pts // 2):
                p = GridPoint(rng.uniform(0.5, 1.5), rng.uniform(0.0, 20.0))
                worst = max(worst, abs(loschmidt_thermal(cfg, p, th).L
                                       - block_thermal_oracle(cfg, p, th)))
    checks.append({"name": "thermal_block_equivalence", "max_abs_error": worst,
                   "tolerance": 1e-9})

    worst = 0.0
    cfg = RingConfig(16 if quick else 100, 0.1)
    n_deriv = 10 if quick else 50
    done = 0
    while done < n_deriv:
        lam, t = rng.uniform(0.6, 1.4), rng.uniform(0.5, 15.0)
        e = loschmidt_ground(cfg, GridPoint(lam, t))
        if e.L < 1e-8:
            continue
        fd = finite_difference(
            lambda x: loschmidt_ground(cfg, GridPoint(x, t)).log_L, lam)
        worst = max(worst, abs(e.dlogL - fd) / max(1.0, abs(e.dlogL)))
        th = ThermalConfig(0.1)
        e_t = loschmidt_thermal(cfg, GridPoint(lam, t), th)
        if e_t.L > 1e-8:
            fd_t = finite_difference(
                lambda x: loschmidt_thermal(cfg, GridPoint(x, t), th).log_L, lam)
            worst = max(worst, abs(e_t.dlogL - fd_t) / max(1.0, abs(e_t.dlogL)))
        done += 1
    checks.append({"name": "derivative_fd_consistency", "max_abs_error": worst,
                   "tolerance": 1e-6})

    worst = 0.0
    cfg = RingConfig(50 if quick else 100, 0.1)
    th = ThermalConfig(1e-4)
    for lam in np.linspace(0.5, 1.5, 8 if quick else 20):
        for t in np.linspace(0.0, 20.0, 8 if quick else 20):
            p = GridPoint(float(lam), float(t))
            worst = max(worst, abs(loschmidt_thermal(cfg, p, th).L
                                   - loschmidt_ground(cfg, p).L))
    checks.append({"name": "zero_temperature_limit", "max_abs_error": worst,
                   "tolerance": 1e-6})

    for c in checks:
        c["pass"] = bool(c["max_abs_error"] < c["tolerance"])
    return checks


def cmd_oracle_check(args) -> int:
    _require(args, "out")
    quick = bool(args.quick)
    t0 = time.monotonic()
    checks = _oracle_checks(quick)
    all_pass = all(c["pass"] for c in checks)
    for c in checks:
        status = "pass" if c["pass"] else "FAIL"
        print(f"{status}  {c['name']}: max_abs_error={c['max_abs_error']:.3e} "
              f"(tol {c['tolerance']:.0e})", file=sys.stderr)
    print(f"oracle checks finished in {time.monotonic() - t0:.1f}s", file=sys.stderr)
    run = _Run.begin(args.out, "oracle-check", {"quick": quick})
    run.write_json("oracle_report.json", {"quick": quick, "checks": checks,
                                          "all_pass": all_pass})
    run.finish()
    return 0 if all_pass else 3


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--out", default=None, help="output directory for this run")
    sub.add_argument("--workers", type=int, default=None,
                     help="evaluation pool size (results are identical for any value)")
    sub.add_argument("--config", help="key=value file; flags override file values")


def _add_surface_opts(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--N", dest="N", type=int, default=None, help="ring size (even)")
    sub.add_argument("--delta", type=float, default=None, help="probe-ring coupling")
    sub.add_argument("--n-delta", dest="n_delta", type=float, default=None,
                     help="N*delta product (delta = n_delta / N)")
    sub.add_argument("--lambda", dest="lam", default=None,
                     help="field axis min:max:steps")
    sub.add_argument("--t", dest="t", default=None, help="time axis min:max:steps")
    sub.add_argument("--T", dest="T", type=float, default=None,
                     help="ring temperature; selects the thermal kind (0 = ground path)")
    sub.add_argument("--theta", type=float, default=None,
                     help="probe preparation angle (default pi/4)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isingprobe",
        description="Probe-qubit magnetometry near an Ising-ring critical point",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("echo", help="decoherence-factor surface -> surface.csv")
    _add_surface_opts(p)
    _add_common(p)
    p.set_defaults(func=cmd_echo)

    p = subs.add_parser("qfi", help="QFI surface -> surface.csv")
    _add_surface_opts(p)
    _add_common(p)
    p.set_defaults(func=cmd_qfi)

    p = subs.add_parser("peaks", help="QFI peaks -> peaks.csv")
    _add_surface_opts(p)
    p.add_argument("--count", type=int, default=None, help="number of peaks (default 5)")
    p.add_argument("--window", default=None,
                   help="lambda window lo:hi (default lambda_c +- 5 delta)")
    _add_common(p)
    p.set_defaults(func=cmd_peaks)

    p = subs.add_parser("scaling", help="peak-vs-N quadratic fit -> fit.json")
    p.add_argument("--n", default=None, help="comma-separated ring sizes")
    p.add_argument("--n-delta", dest="n_delta", type=float, default=None,
                   help="N*delta product held fixed across sizes")
    p.add_argument("--peak", type=int, default=None, help="peak index (default 1)")
    p.add_argument("--T", dest="T", type=float, default=None, help="ring temperature")
    p.add_argument("--lambda-steps", dest="lambda_steps", type=int, default=None)
    p.add_argument("--t-steps", dest="t_steps", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_scaling)

    p = subs.add_parser("symmetry",
                        help="scaling-symmetry residual -> residual.csv + histogram.csv")
    p.add_argument("--n0", type=int, default=None, help="reference ring size")
    p.add_argument("--alpha", type=float, default=None, help="scale factor")
    p.add_argument("--n-delta", dest="n_delta", type=float, default=None)
    p.add_argument("--lambda-shift", dest="lambda_shift", default=None,
                   help="shifted field axis min:max:steps (default -0.1:0.1:200)")
    p.add_argument("--t", dest="t", default=None,
                   help="time axis min:max:steps (default 0:30:300)")
    p.add_argument("--T", dest="T", type=float, default=None, help="ring temperature")
    _add_common(p)
    p.set_defaults(func=cmd_symmetry)

    p = subs.add_parser("oracle-check",
                        help="closed form vs brute-force oracles -> oracle_report.json")
    p.add_argument("--quick", action="store_true", help="reduced sizes and point counts")
    _add_common(p)
    p.set_defaults(func=cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config_file(args)
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (NumericalFailure, InsufficientPeaks, DegenerateGroundState) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
