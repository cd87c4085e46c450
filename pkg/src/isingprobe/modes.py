"""Momentum-mode decomposition of an Ising ring coupled to a probe qubit.

The ring Hamiltonian with transverse field h maps, via Jordan-Wigner and a
Fourier transform, onto free fermion modes at momenta k = 2*pi*n/N,
n = 1..N/2 (N even).  Each mode carries a dispersion

    eps(h, k) = 2*sqrt(1 + h^2 - 2*h*cos(k))

and a Bogoliubov angle theta(h, k) = atan2(sin k, h - cos k).  The probe
couples through its excited state, so the two evolution branches see
effective fields h0 = lambda and h1 = lambda + delta.  Everything the echo
and QFI layers need per mode -- both energies, both angles, the mixing
angle alpha = (theta0 - theta1)/2 and all closed-form lambda-derivatives --
is assembled here.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalFailure


@dataclass(frozen=True)
class RingConfig:
    """Ring size N (even, >= 2) and probe-ring coupling delta (>= 0).

    Units: hbar = k_B = 1, unit lattice spacing, ring exchange J = 1.
    """

    N: int
    delta: float

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or isinstance(self.N, bool):
            raise ConfigError(f"N must be an integer, got {self.N!r}")
        if self.N < 2 or self.N % 2 != 0:
            raise ConfigError(f"N must be even and >= 2, got {self.N}")
        if not math.isfinite(self.delta) or self.delta < 0:
            raise ConfigError(f"delta must be finite and >= 0, got {self.delta}")


@dataclass(frozen=True)
class Mode:
    """A single momentum mode: index n in 1..N/2 and momentum k = 2*pi*n/N."""

    n: int
    k: float


@dataclass(frozen=True)
class ModeSpectrum:
    """Per-mode energies, angles and lambda-derivatives at a given field.

    eps0/eps1 are the mode energies at fields lambda and lambda + delta,
    theta0/theta1 the Bogoliubov angles, alpha = (theta0 - theta1)/2, and
    sin2a/cos2a the closed forms

        sin(2*alpha) = 4*delta*sin(k) / (eps0*eps1)
        cos(2*alpha) = 4*[1 + lambda*(lambda+delta)
                          - (2*lambda+delta)*cos(k)] / (eps0*eps1)

    deps0, deps1, dsin2a, dcos2a are the corresponding d/dlambda values.
    """

    k: float
    eps0: float
    eps1: float
    theta0: float
    theta1: float
    alpha: float
    sin2a: float
    cos2a: float
    deps0: float
    deps1: float
    dsin2a: float
    dcos2a: float


@dataclass(frozen=True)
class SpectrumTable:
    """Vectorized spectrum: each field is a length-N/2 array over modes.

    This is the single source of the closed forms; `spectrum` materializes
    per-mode records from it and the echo kernels consume it directly.
    """

    k: np.ndarray
    eps0: np.ndarray
    eps1: np.ndarray
    theta0: np.ndarray
    theta1: np.ndarray
    alpha: np.ndarray
    sin2a: np.ndarray
    cos2a: np.ndarray
    deps0: np.ndarray
    deps1: np.ndarray
    dsin2a: np.ndarray
    dcos2a: np.ndarray


def build_modes(cfg: RingConfig) -> list[Mode]:
    """Momenta k = 2*pi*n/N for n = 1..N/2, ascending."""
    return [Mode(n, 2.0 * math.pi * n / cfg.N) for n in range(1, cfg.N // 2 + 1)]


def dispersion(h: float, k: float) -> float:
    """Mode energy 2*sqrt(1 + h^2 - 2*h*cos(k)); real for all real h."""
    return 2.0 * math.sqrt(1.0 + h * h - 2.0 * h * math.cos(k))


def bogoliubov_angle(h: float, k: float) -> float:
    """Two-argument arctangent of (sin k, h - cos k).

    The two-argument form keeps the angle continuous across h = cos(k),
    where the naive arctan of the ratio jumps branch; with sin(k) >= 0 the
    result lies in [0, pi].
    """
    return math.atan2(math.sin(k), h - math.cos(k))


def spectrum_table(cfg: RingConfig, lam: float) -> SpectrumTable:
    """All per-mode quantities at field lambda, as arrays over the mode set.

    Raises NumericalFailure if any mode energy is not strictly positive
    (possible only at h = +-1 with cos(k) = h, i.e. k -> 0 or k = pi; the
    mode set excludes k = 0, so this requires lambda or lambda+delta = -1).
    """
    if not math.isfinite(lam):
        raise ConfigError(f"lambda must be finite, got {lam}")
    n = np.arange(1, cfg.N // 2 + 1, dtype=float)
    k = 2.0 * np.pi * n / cfg.N
    sk, ck = np.sin(k), np.cos(k)
    h0, h1 = lam, lam + cfg.delta

    eps0 = 2.0 * np.sqrt(1.0 + h0 * h0 - 2.0 * h0 * ck)
    eps1 = 2.0 * np.sqrt(1.0 + h1 * h1 - 2.0 * h1 * ck)
    if np.any(eps0 <= 0.0) or np.any(eps1 <= 0.0):
        raise NumericalFailure(
            f"mode energy underflowed to zero at lambda={lam}, delta={cfg.delta}"
        )

    theta0 = np.arctan2(sk, h0 - ck)
    theta1 = np.arctan2(sk, h1 - ck)
    alpha = 0.5 * (theta0 - theta1)
    prod = eps0 * eps1
    sin2a = 4.0 * cfg.delta * sk / prod
    cos2a = 4.0 * (1.0 + h0 * h1 - (h0 + h1) * ck) / prod
    deps0 = 4.0 * (h0 - ck) / eps0
    deps1 = 4.0 * (h1 - ck) / eps1
    dsin2a = -4.0 * cfg.delta * sk * (deps0 / (eps0 * prod) + deps1 / (eps1 * prod))
    # Note the cube: differentiating cos2a through eps0, eps1 gives
    # delta^2 * (2*lambda + delta - 2*cos k) * sin^2(k) * 64 / (eps0*eps1)^3.
    dcos2a = 64.0 * cfg.delta**2 * (h0 + h1 - 2.0 * ck) * sk * sk / prod**3
    return SpectrumTable(
        k=k, eps0=eps0, eps1=eps1, theta0=theta0, theta1=theta1, alpha=alpha,
        sin2a=sin2a, cos2a=cos2a, deps0=deps0, deps1=deps1,
        dsin2a=dsin2a, dcos2a=dcos2a,
    )


def spectrum(cfg: RingConfig, lam: float) -> list[ModeSpectrum]:
    """Per-mode spectrum records at field lambda, ascending n."""
    t = spectrum_table(cfg, lam)
    return [
        ModeSpectrum(
            k=float(t.k[i]), eps0=float(t.eps0[i]), eps1=float(t.eps1[i]),
            theta0=float(t.theta0[i]), theta1=float(t.theta1[i]),
            alpha=float(t.alpha[i]), sin2a=float(t.sin2a[i]),
            cos2a=float(t.cos2a[i]), deps0=float(t.deps0[i]),
            deps1=float(t.deps1[i]), dsin2a=float(t.dsin2a[i]),
            dcos2a=float(t.dcos2a[i]),
        )
        for i in range(len(t.k))
    ]
