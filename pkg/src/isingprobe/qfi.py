"""Quantum Fisher information of the dephased probe qubit.

For a qubit with Bloch vector a(lambda),

    F = (a . da)^2 / (1 - |a|^2) + |da|^2,

and for the pure dephasing channel acting on the probe prepared as
cos(theta)|0> + e^{i omega} sin(theta)|1>, whose off-diagonal shrinks by
sqrt(L),

    F = (dL)^2 / (4 L (1 - L)) * sin^2(2 theta),

independent of omega.  theta = pi/4 maximizes F.  Both expressions are
implemented and cross-checked against each other in the tests.

Boundary policy (the formulas are 0/0 at L in {0, 1}):
    1 - L < 1e-14 and |dL| < 1e-7  ->  F = 0   (t -> 0 limit)
    L     < 1e-14 and |dL| < 1e-7  ->  F = 0   (vanished-echo limit)
    either boundary with larger |dL| ->  F = NaN, flag boundary_singularity
"""

import math
from dataclasses import dataclass

import numpy as np

from .echo import EchoValue, GridPoint, ThermalConfig, loschmidt_ground, loschmidt_thermal
from .errors import ConfigError, Flag
from .modes import RingConfig

__all__ = [
    "ProbeState", "BlochVector", "QfiValue",
    "dephased_bloch", "qfi_bloch", "qfi_dephasing",
    "qfi_from_echo", "qfi_ground", "qfi_thermal", "dephasing_qfi_arrays",
]

OPTIMAL_THETA = math.pi / 4

_BOUNDARY_TOL = 1e-14
_DL_TOL = 1e-7


@dataclass(frozen=True)
class ProbeState:
    """Initial pure probe state cos(theta)|0> + e^{i omega} sin(theta)|1>."""

    theta: float
    omega: float = 0.0


@dataclass(frozen=True)
class BlochVector:
    """Bloch components of the probe state and their lambda-derivatives."""

    ax: float
    ay: float
    az: float
    dax: float = 0.0
    day: float = 0.0
    daz: float = 0.0

    def norm2(self) -> float:
        return self.ax**2 + self.ay**2 + self.az**2


@dataclass(frozen=True)
class QfiValue:
    """Quantum Fisher information for lambda; NaN only when flagged."""

    F: float
    flag: Flag = Flag.OK


def dephased_bloch(probe: ProbeState, L: float, dL: float = 0.0) -> BlochVector:
    """Bloch vector after dephasing by sqrt(L), with chain-rule derivatives.

    Basis convention (fixed here once): a_z = cos(2 theta) and the coherence
    lives in the x-y plane as
        a_x = sqrt(L) sin(2 theta) cos(omega),
        a_y = -sqrt(L) sin(2 theta) sin(omega).
    The QFI is invariant under the sign choice of a_y.  Derivative fields
    apply d sqrt(L) = dL / (2 sqrt(L)); pass dL to populate them.  At L = 0
    the transverse components and their derivatives are reported as 0.
    """
    if not 0.0 <= L <= 1.0:
        raise ConfigError(f"L must lie in [0, 1], got {L}")
    s2t = math.sin(2.0 * probe.theta)
    c2t = math.cos(2.0 * probe.theta)
    root = math.sqrt(L)
    droot = dL / (2.0 * root) if root > 0.0 else 0.0
    cw, sw = math.cos(probe.omega), math.sin(probe.omega)
    return BlochVector(
        ax=root * s2t * cw, ay=-root * s2t * sw, az=c2t,
        dax=droot * s2t * cw, day=-droot * s2t * sw, daz=0.0,
    )


def _one_minus_norm2(a: BlochVector) -> float:
    """1 - |a|^2 without shell cancellation.

    Peeling the dominant component as (1-m)(1+m) keeps the result accurate
    to ~eps relative near |a| = 1, where the naive 1 - (ax^2+ay^2+az^2)
    loses all its digits.
    """
    m, b, c = sorted((abs(a.ax), abs(a.ay), abs(a.az)), reverse=True)
    return (1.0 - m) * (1.0 + m) - b * b - c * c


def qfi_bloch(a: BlochVector) -> QfiValue:
    """QFI from a Bloch vector: (a.da)^2/(1-|a|^2) + |da|^2.

    On the pure-state shell (1 - |a|^2 < 1e-12) the first term is dropped
    when the radial derivative a.da is negligible (norm-preserving limit);
    a non-negligible radial derivative there is a genuine singularity and
    is flagged.
    """
    one_minus_a2 = _one_minus_norm2(a)
    if one_minus_a2 < -1e-12:
        raise ConfigError(f"Bloch vector norm exceeds 1: |a|^2 = {a.norm2()}")
    radial = a.ax * a.dax + a.ay * a.day + a.az * a.daz
    da2 = a.dax**2 + a.day**2 + a.daz**2
    if one_minus_a2 < 1e-12:
        if abs(radial) < 1e-12:
            return QfiValue(da2)
        return QfiValue(math.nan, Flag.BOUNDARY_SINGULARITY)
    return QfiValue(radial * radial / one_minus_a2 + da2)


def dephasing_qfi_arrays(L, one_minus_L, dL, theta: float):
    """Vectorized dephasing QFI with the boundary policy applied nodewise.

    Returns (F, ok_mask); where not ok, F is NaN (boundary singularity).
    All four policy branches match the scalar `qfi_dephasing` bit for bit;
    one_minus_L is passed separately so log-domain precision survives.
    """
    L = np.asarray(L, dtype=float)
    one_minus_L = np.asarray(one_minus_L, dtype=float)
    dL = np.asarray(dL, dtype=float)
    s22 = math.sin(2.0 * theta) ** 2
    small_dl = np.abs(dL) < _DL_TOL
    at_one = one_minus_L < _BOUNDARY_TOL
    at_zero = L < _BOUNDARY_TOL
    limit_zero = (at_one | at_zero) & small_dl
    singular = (at_one | at_zero) & ~small_dl
    denom = 4.0 * L * one_minus_L
    with np.errstate(divide="ignore", invalid="ignore"):
        F = dL * dL * s22 / denom
    F = np.where(limit_zero, 0.0, F)
    F = np.where(singular, np.nan, F)
    return F, ~singular


def qfi_dephasing(L: float, dL: float, theta: float) -> QfiValue:
    """Dephasing-channel QFI (dL)^2 sin^2(2 theta) / (4 L (1 - L))."""
    if not 0.0 <= L <= 1.0:
        raise ConfigError(f"L must lie in [0, 1], got {L}")
    F, ok = dephasing_qfi_arrays(np.array([L]), np.array([1.0 - L]), np.array([dL]), theta)
    return QfiValue(float(F[0]), Flag.OK if ok[0] else Flag.BOUNDARY_SINGULARITY)


def qfi_from_echo(e: EchoValue, theta: float = OPTIMAL_THETA) -> QfiValue:
    """QFI of the probe given an echo value, preserving 1-L precision."""
    if e.flag is Flag.ECHO_VANISHED:
        # L -> 0 limit policy: report 0, flagged as a policy placeholder.
        return QfiValue(0.0, Flag.ECHO_VANISHED)
    L = e.L
    F, ok = dephasing_qfi_arrays(
        np.array([L]), np.array([e.one_minus_L]), np.array([L * e.dlogL]), theta
    )
    return QfiValue(float(F[0]), Flag.OK if ok[0] else Flag.BOUNDARY_SINGULARITY)


def qfi_ground(cfg: RingConfig, p: GridPoint, theta: float = OPTIMAL_THETA) -> QfiValue:
    """QFI with the ring initialized in its ground state."""
    return qfi_from_echo(loschmidt_ground(cfg, p), theta)


def qfi_thermal(cfg: RingConfig, p: GridPoint, th: ThermalConfig,
                theta: float = OPTIMAL_THETA) -> QfiValue:
    """QFI with the ring in a thermal state; T = 0 equals qfi_ground exactly."""
    return qfi_from_echo(loschmidt_thermal(cfg, p, th), theta)
