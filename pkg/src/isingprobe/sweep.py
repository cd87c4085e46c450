"""Grid evaluation, peak tracking, N-scaling fits and the symmetry residual.

Surfaces are evaluated one lambda-column at a time through the shared echo
kernels, so a surface node is bit-identical to the corresponding scalar
echo/QFI call and to the same node computed under any worker count.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .echo import ThermalConfig, ground_columns, thermal_columns
from .errors import ConfigError, Flag, InsufficientPeaks
from .modes import RingConfig, spectrum_table
from .qfi import OPTIMAL_THETA, dephasing_qfi_arrays

__all__ = [
    "Grid", "SurfaceKind", "Surface", "Peak", "QuadFit", "SymmetryCheck",
    "evaluate_surface", "critical_lambda", "find_peaks", "fit_quadratic",
    "peak_scaling", "symmetry_residual", "default_peak_grid",
]

_FLAG_CODES = {Flag.OK: 0, Flag.ECHO_VANISHED: 1, Flag.BOUNDARY_SINGULARITY: 2}
_CODE_FLAGS = {v: k for k, v in _FLAG_CODES.items()}


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular grid over the (lambda, t) plane."""

    lambda_min: float
    lambda_max: float
    lambda_steps: int
    t_min: float
    t_max: float
    t_steps: int

    def __post_init__(self):
        if not self.lambda_min < self.lambda_max:
            raise ConfigError("lambda axis needs lambda_min < lambda_max")
        if not 0.0 <= self.t_min < self.t_max:
            raise ConfigError("t axis needs 0 <= t_min < t_max")
        if self.lambda_steps < 2 or self.t_steps < 2:
            raise ConfigError("both axes need at least 2 steps")

    def lambda_axis(self) -> np.ndarray:
        return np.linspace(self.lambda_min, self.lambda_max, self.lambda_steps)

    def t_axis(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.t_steps)


class SurfaceKind(str, Enum):
    ECHO_GROUND = "echo_ground"
    ECHO_THERMAL = "echo_thermal"
    QFI_GROUND = "qfi_ground"
    QFI_THERMAL = "qfi_thermal"

    @property
    def thermal(self) -> bool:
        return self in (SurfaceKind.ECHO_THERMAL, SurfaceKind.QFI_THERMAL)

    @property
    def is_qfi(self) -> bool:
        return self in (SurfaceKind.QFI_GROUND, SurfaceKind.QFI_THERMAL)


@dataclass(frozen=True)
class Surface:
    """Echo and QFI sampled on a grid, with per-node flags.

    Arrays are shaped (lambda_steps, t_steps), row-major in lambda.  All
    three physical fields are populated regardless of kind; `values` picks
    the field named by the kind.
    """

    grid: Grid
    kind: SurfaceKind
    ring: RingConfig
    thermal_cfg: ThermalConfig | None
    theta: float
    l: np.ndarray
    dlogl: np.ndarray
    qfi: np.ndarray
    flags: np.ndarray  # int codes; see node_flag()

    @property
    def values(self) -> np.ndarray:
        return self.qfi if self.kind.is_qfi else self.l

    def node_flag(self, i: int, j: int) -> Flag:
        return _CODE_FLAGS[int(self.flags[i, j])]

    def iter_rows(self):
        """Yield (lambda, t, L, dlogL, qfi, flag) in lambda-major order."""
        lams, ts = self.grid.lambda_axis(), self.grid.t_axis()
        for i, lam in enumerate(lams):
            for j, t in enumerate(ts):
                yield (float(lam), float(t), float(self.l[i, j]),
                       float(self.dlogl[i, j]), float(self.qfi[i, j]),
                       _CODE_FLAGS[int(self.flags[i, j])])


@dataclass(frozen=True)
class Peak:
    """A refined local maximum; index_l counts peaks by ascending t_star."""

    index_l: int
    lambda_star: float
    t_star: float
    F_star: float


@dataclass(frozen=True)
class QuadFit:
    """Least-squares fit F(N) = a N^2 + b N + c over the sampled ring sizes."""

    a: float
    b: float
    c: float
    r2: float
    n_values: list[int]
    f_values: list[float]


@dataclass(frozen=True)
class SymmetryCheck:
    """Residual of the (lambda - lambda_c, t, N, delta) scaling symmetry.

    delta_f holds the nodewise residual on the shifted-coordinate grid
    (NaN where flagged); histogram counts are over np.clip(delta_f, -1, 1).
    """

    n0: int
    n1: int
    alpha: float
    grid: Grid
    delta_f: np.ndarray
    flagged: np.ndarray
    bin_edges: np.ndarray
    counts: np.ndarray

    def fraction_within(self, tol: float) -> float:
        good = self.delta_f[~self.flagged]
        return float(np.mean(np.abs(good) < tol)) if good.size else 0.0


def critical_lambda(cfg: RingConfig) -> float:
    """Effective critical field 1 - delta (the coupled branch hits h = 1)."""
    return 1.0 - cfg.delta


def _surface_column(cfg, kind, lam, ts, beta, theta):
    """One lambda-column of (L, dlogL, qfi, flag codes)."""
    table = spectrum_table(cfg, lam)
    if kind.thermal and beta is not None and math.isfinite(beta):
        log_l, dlog, vanished = thermal_columns(table, ts, beta)
    else:
        log_l, dlog, vanished = ground_columns(table, ts)
    l_col = np.exp(log_l)
    one_minus = -np.expm1(log_l)
    with np.errstate(invalid="ignore"):
        dl_col = l_col * dlog
    f_col, ok = dephasing_qfi_arrays(l_col, one_minus, dl_col, theta)
    codes = np.zeros(ts.shape, dtype=np.int8)
    codes[~ok] = _FLAG_CODES[Flag.BOUNDARY_SINGULARITY]
    # The echo-vanished condition wins; QFI there is the L -> 0 policy value.
    f_col = np.where(vanished, 0.0, f_col)
    codes[vanished] = _FLAG_CODES[Flag.ECHO_VANISHED]
    return l_col, dlog, f_col, codes


def evaluate_surface(cfg: RingConfig, grid: Grid, kind: SurfaceKind,
                     th: ThermalConfig | None = None,
                     theta: float = OPTIMAL_THETA, workers: int = 1) -> Surface:
    """Evaluate echo and QFI on every grid node.

    Thermal kinds require `th`; T = 0 routes through the ground kernel so
    the two kinds agree node-for-node.  Nodes never abort the surface: the
    two typed conditions are recorded in the flag plane.  Output is
    independent of `workers` (columns are assembled in axis order).
    """
    if kind.thermal and th is None:
        raise ConfigError(f"kind {kind.value} requires a ThermalConfig")
    beta = th.beta if (kind.thermal and th is not None) else None
    lams, ts = grid.lambda_axis(), grid.t_axis()

    def column(lam):
        return _surface_column(cfg, kind, float(lam), ts, beta, theta)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cols = list(pool.map(column, lams))
    else:
        cols = [column(lam) for lam in lams]

    l = np.vstack([c[0] for c in cols])
    dlogl = np.vstack([c[1] for c in cols])
    qfi = np.vstack([c[2] for c in cols])
    flags = np.vstack([c[3] for c in cols])
    return Surface(grid=grid, kind=kind, ring=cfg,
                   thermal_cfg=th if kind.thermal else None,
                   theta=theta, l=l, dlogl=dlogl, qfi=qfi, flags=flags)


_QUAD_OFFSETS = np.array([(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)], dtype=float)
_QUAD_DESIGN = np.column_stack([
    np.ones(9), _QUAD_OFFSETS[:, 0], _QUAD_OFFSETS[:, 1],
    _QUAD_OFFSETS[:, 0] ** 2, _QUAD_OFFSETS[:, 1] ** 2,
    _QUAD_OFFSETS[:, 0] * _QUAD_OFFSETS[:, 1],
])
_QUAD_SOLVE = np.linalg.pinv(_QUAD_DESIGN)


def _refine_quadratic(patch: np.ndarray) -> tuple[float, float, float]:
    """Stationary point of the LSQ quadratic through a 3x3 patch.

    Returns (dx, dy, value) with offsets in cell units relative to the
    center; falls back to the center when the fit is not a genuine interior
    maximum (then value = center value).
    """
    c, gx, gy, cxx, cyy, cxy = _QUAD_SOLVE @ patch.ravel()
    hxx, hyy, hxy = 2.0 * cxx, 2.0 * cyy, cxy
    det = hxx * hyy - hxy * hxy
    if det <= 0.0 or hxx >= 0.0:
        return 0.0, 0.0, float(patch[1, 1])
    dx = (-gx * hyy + gy * hxy) / det
    dy = (-gy * hxx + gx * hxy) / det
    if abs(dx) > 1.0 or abs(dy) > 1.0:
        return 0.0, 0.0, float(patch[1, 1])
    value = (c + gx * dx + gy * dy
             + cxx * dx * dx + cyy * dy * dy + cxy * dx * dy)
    return float(dx), float(dy), float(value)


def find_peaks(surface: Surface, window: tuple[float, float] | None = None,
               count: int = 5, threshold_frac: float = 0.10,
               dedup_radius: int = 2) -> list[Peak]:
    """Local maxima of a QFI surface inside a lambda-window.

    8-neighborhood maxima above threshold_frac of the window's global
    maximum, deduplicated within a Chebyshev radius of dedup_radius cells
    (highest survives), refined on the 3x3 neighborhood, ordered by
    ascending t_star and truncated to `count`.  Flagged nodes are masked.
    """
    if not surface.kind.is_qfi:
        raise ConfigError("find_peaks needs a QFI surface")
    if window is None:
        lc = critical_lambda(surface.ring)
        window = (lc - 5.0 * surface.ring.delta, lc + 5.0 * surface.ring.delta)
    lams, ts = surface.grid.lambda_axis(), surface.grid.t_axis()
    in_window = (lams >= window[0]) & (lams <= window[1])
    if not np.any(in_window):
        raise ConfigError(f"lambda-window {window} misses the grid")

    F = np.where(surface.flags == _FLAG_CODES[Flag.OK], surface.qfi, -np.inf)
    F = np.where(in_window[:, None], F, -np.inf)
    gmax = float(F.max())
    if not math.isfinite(gmax) or gmax <= 0.0:
        raise InsufficientPeaks("surface has no positive unflagged values in window")

    # Interior cells that dominate their 8 neighbors.
    pad = np.full((F.shape[0] + 2, F.shape[1] + 2), -np.inf)
    pad[1:-1, 1:-1] = F
    is_max = np.ones_like(F, dtype=bool)
    strict = np.zeros_like(F, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            neigh = pad[1 + di:F.shape[0] + 1 + di, 1 + dj:F.shape[1] + 1 + dj]
            is_max &= F >= neigh
            strict |= F > neigh
    # plateaus (all 8 neighbors equal) are not peaks
    is_max &= strict
    is_max &= F >= threshold_frac * gmax
    is_max[0, :] = is_max[-1, :] = False
    is_max[:, 0] = is_max[:, -1] = False

    cand = [(int(i), int(j), float(F[i, j])) for i, j in zip(*np.nonzero(is_max))]
    cand.sort(key=lambda c: -c[2])
    kept: list[tuple[int, int, float]] = []
    for i, j, v in cand:
        if any(abs(i - i2) <= dedup_radius and abs(j - j2) <= dedup_radius
               for i2, j2, _ in kept):
            continue
        kept.append((i, j, v))
    if len(kept) < count:
        raise InsufficientPeaks(
            f"found {len(kept)} peaks after filtering, needed {count}"
        )

    dl = lams[1] - lams[0]
    dt = ts[1] - ts[0]
    refined = []
    for i, j, v in kept:
        dx, dy, value = _refine_quadratic(surface.qfi[i - 1:i + 2, j - 1:j + 2])
        refined.append((float(lams[i] + dx * dl), float(ts[j] + dy * dt),
                        max(value, v)))
    refined.sort(key=lambda r: r[1])
    return [Peak(index_l=idx + 1, lambda_star=r[0], t_star=r[1], F_star=r[2])
            for idx, r in enumerate(refined[:count])]


def fit_quadratic(n_values, f_values) -> QuadFit:
    """Least-squares F(N) = a N^2 + b N + c with coefficient of determination."""
    ns = np.asarray(n_values, dtype=float)
    fs = np.asarray(f_values, dtype=float)
    if len(ns) < 3:
        raise ConfigError("quadratic fit needs at least 3 ring sizes")
    a, b, c = np.polyfit(ns, fs, 2)
    resid = fs - np.polyval([a, b, c], ns)
    ss_tot = float(np.sum((fs - fs.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return QuadFit(a=float(a), b=float(b), c=float(c), r2=r2,
                   n_values=[int(n) for n in n_values],
                   f_values=[float(f) for f in fs])


def default_peak_grid(cfg: RingConfig, lambda_steps: int = 200,
                      t_steps: int = 300, half_width_deltas: float = 5.0,
                      t_max_factor: float = 0.30) -> Grid:
    """Peak-tracking window: lambda_c +- 5 delta, t in [0, 0.3 N].

    Both extents follow the scaling symmetry (delta ~ 1/N shrinks the
    lambda window, peak times grow ~ N), so the same window tracks the same
    peak family across ring sizes.
    """
    lc = critical_lambda(cfg)
    hw = half_width_deltas * cfg.delta
    return Grid(lambda_min=lc - hw, lambda_max=lc + hw, lambda_steps=lambda_steps,
                t_min=0.0, t_max=t_max_factor * cfg.N, t_steps=t_steps)


def peak_scaling(n_list, n_delta_product: float, peak_index: int = 1,
                 th: ThermalConfig | None = None, theta: float = OPTIMAL_THETA,
                 lambda_steps: int = 200, t_steps: int = 300,
                 workers: int = 1) -> QuadFit:
    """Track one QFI peak across ring sizes at fixed N*delta and fit a N^2 law.

    For each N, delta = n_delta_product / N, the QFI surface is evaluated on
    the default peak grid and peak `peak_index` (ascending t) is extracted.
    """
    if peak_index < 1:
        raise ConfigError("peak_index counts from 1")
    f_values = []
    for n in n_list:
        cfg = RingConfig(int(n), n_delta_product / float(n))
        grid = default_peak_grid(cfg, lambda_steps=lambda_steps, t_steps=t_steps)
        kind = SurfaceKind.QFI_THERMAL if th is not None else SurfaceKind.QFI_GROUND
        surf = evaluate_surface(cfg, grid, kind, th=th, theta=theta, workers=workers)
        peaks = find_peaks(surf, count=peak_index)
        f_values.append(peaks[peak_index - 1].F_star)
    return fit_quadratic(list(n_list), f_values)


def symmetry_residual(n0: int, alpha: float, n_delta_product: float,
                      grid: Grid, th: ThermalConfig | None = None,
                      theta: float = OPTIMAL_THETA, workers: int = 1,
                      guard: float = 1e-12,
                      bin_edges: np.ndarray | None = None) -> SymmetryCheck:
    """Nodewise residual between F at ring n0 and the rescaled F at alpha*n0.

    `grid` is expressed in shifted coordinates (u, t) with u = lambda -
    lambda_c.  The small ring is evaluated at (lambda_c0 + u, t), the large
    ring at (lambda_c1 + u/alpha, alpha t), and the residual is

        dF = [F_n0(u, t) - F_n1(u/alpha, alpha t) / alpha^2] / F_n1

    with the unscaled F_n1 in the denominator, so the residual vanishes
    wherever F is small or the symmetry holds.  Nodes with F_n1 <= guard or
    carrying a flag on either surface are excluded (NaN).
    """
    n1 = alpha * n0
    if abs(n1 - round(n1)) > 1e-9 or int(round(n1)) % 2 != 0:
        raise ConfigError(f"alpha*n0 must be an even integer, got {n1}")
    n1 = int(round(n1))
    cfg0 = RingConfig(int(n0), n_delta_product / float(n0))
    cfg1 = RingConfig(n1, n_delta_product / float(n1))
    kind = SurfaceKind.QFI_THERMAL if th is not None else SurfaceKind.QFI_GROUND

    grid0 = Grid(critical_lambda(cfg0) + grid.lambda_min,
                 critical_lambda(cfg0) + grid.lambda_max, grid.lambda_steps,
                 grid.t_min, grid.t_max, grid.t_steps)
    grid1 = Grid(critical_lambda(cfg1) + grid.lambda_min / alpha,
                 critical_lambda(cfg1) + grid.lambda_max / alpha, grid.lambda_steps,
                 alpha * grid.t_min if grid.t_min else 0.0,
                 alpha * grid.t_max, grid.t_steps)
    s0 = evaluate_surface(cfg0, grid0, kind, th=th, theta=theta, workers=workers)
    s1 = evaluate_surface(cfg1, grid1, kind, th=th, theta=theta, workers=workers)

    ok_code = _FLAG_CODES[Flag.OK]
    flagged = (s0.flags != ok_code) | (s1.flags != ok_code) | (s1.qfi <= guard)
    with np.errstate(divide="ignore", invalid="ignore"):
        delta_f = (s0.qfi - s1.qfi / alpha**2) / s1.qfi
    delta_f = np.where(flagged, np.nan, delta_f)

    if bin_edges is None:
        bin_edges = np.linspace(-1.0, 1.0, 201)
    good = delta_f[~flagged]
    counts, _ = np.histogram(np.clip(good, bin_edges[0], bin_edges[-1]), bins=bin_edges)
    return SymmetryCheck(n0=int(n0), n1=n1, alpha=float(alpha), grid=grid,
                         delta_f=delta_f, flagged=flagged,
                         bin_edges=np.asarray(bin_edges), counts=counts)
