"""Loschmidt-echo decoherence factors of the probe qubit.

Ground-state ring:

    L(lambda, t) = prod_k [1 - sin^2(2*alpha_k) * sin^2(eps1_k * t)]

Thermal ring at inverse temperature beta:

    L(lambda, t) = prod_k (p_k^2 + q_k^2) / [1 + cosh(beta*eps0_k)]^2
    p_k = cosh(beta*eps0_k) * [cos(eps1 t)cos(eps0 t)
                               + sin(eps1 t)sin(eps0 t)cos(2 alpha_k)] + 1
    q_k = sinh(beta*eps0_k) * [cos(eps1 t)sin(eps0 t)
                               - sin(eps1 t)cos(eps0 t)cos(2 alpha_k)]

Both products are accumulated in the log domain (sum of log1p terms) so that
1 - L stays accurate when L is close to 1, and the thermal factors are
rescaled by exp(-beta*eps0) so no intermediate overflows at any beta.  The
logarithmic lambda-derivative of L is computed alongside from the closed-form
spectrum derivatives.

Per-mode accumulation is an explicit ascending-n loop; scalar evaluations and
whole t-rows go through the same kernel, so results are bit-identical however
the caller batches nodes.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, Flag, NumericalFailure
from .modes import ModeSpectrum, RingConfig, SpectrumTable, spectrum_table

__all__ = [
    "GridPoint", "ThermalConfig", "EchoValue", "ThermalModeFactor",
    "loschmidt_ground", "loschmidt_thermal", "dp_dq_thermal",
    "ground_columns", "thermal_columns", "thermal_mode_factors",
]


@dataclass(frozen=True)
class GridPoint:
    """An evaluation coordinate: field lambda and evolution time t >= 0."""

    lam: float
    t: float

    def __post_init__(self):
        if not math.isfinite(self.lam):
            raise ConfigError(f"lambda must be finite, got {self.lam}")
        if not math.isfinite(self.t) or self.t < 0:
            raise ConfigError(f"t must be finite and >= 0, got {self.t}")


@dataclass(frozen=True)
class ThermalConfig:
    """Ring temperature T >= 0 (hbar = k_B = 1).

    T = 0 means the ground state (beta = inf); T = inf is the beta = 0
    infinite-temperature limit.
    """

    temperature: float

    def __post_init__(self):
        if math.isnan(self.temperature) or self.temperature < 0:
            raise ConfigError(f"temperature must be >= 0, got {self.temperature}")

    @property
    def beta(self) -> float:
        return math.inf if self.temperature == 0 else 1.0 / self.temperature


@dataclass(frozen=True)
class EchoValue:
    """A decoherence factor with its logarithmic lambda-derivative.

    log L is the stored quantity; `L` and `one_minus_L` are exact exp /
    -expm1 views of it, so 1 - L keeps full precision when L is near 1
    (the QFI divides by it).  When the echo vanished (some mode factor hit
    zero), log_L = -inf, dlogL is NaN and flag is ECHO_VANISHED.
    """

    log_L: float
    dlogL: float
    flag: Flag = Flag.OK

    @property
    def L(self) -> float:
        # np.exp, not math.exp: surfaces exponentiate whole columns with the
        # numpy ufunc and scalar views must agree bit for bit
        return float(np.exp(self.log_L))

    @property
    def one_minus_L(self) -> float:
        return float(-np.expm1(self.log_L))


@dataclass(frozen=True)
class ThermalModeFactor:
    """Diagnostic view of one thermal mode factor.

    p and q are the unrescaled Euler-form amplitudes (they overflow to inf
    once beta*eps0 exceeds ~710); logfactor is the log of the mode factor
    (p^2+q^2)/[1+cosh(beta eps0)]^2 computed in the overflow-safe rescaled
    form, hence always finite and <= 0.
    """

    p: float
    q: float
    logfactor: float


def _thermal_mode_terms(eps0, eps1, cos2a, deps0, deps1, dcos2a, t):
    """Bracketed amplitudes A, B of p_k, q_k and their lambda-derivatives.

    A = cos(eps1 t)cos(eps0 t) + sin(eps1 t)sin(eps0 t)cos2a
    B = cos(eps1 t)sin(eps0 t) - sin(eps1 t)cos(eps0 t)cos2a

    Scalars or arrays broadcast; t may be an array.
    """
    c0, s0 = np.cos(eps0 * t), np.sin(eps0 * t)
    c1, s1 = np.cos(eps1 * t), np.sin(eps1 * t)
    A = c1 * c0 + s1 * s0 * cos2a
    B = c1 * s0 - s1 * c0 * cos2a
    dA = t * (-deps1 * s1 * c0 - deps0 * c1 * s0
              + cos2a * (deps1 * c1 * s0 + deps0 * s1 * c0)) + s1 * s0 * dcos2a
    dB = t * (-deps1 * s1 * s0 + deps0 * c1 * c0
              - cos2a * (deps1 * c1 * c0 - deps0 * s1 * s0)) - s1 * c0 * dcos2a
    return A, B, dA, dB


def ground_columns(table: SpectrumTable, ts: np.ndarray):
    """log L, dlogL and vanished mask at fixed lambda over an array of times.

    Returns (log_L, dlogL, vanished); where vanished, log_L = -inf and
    dlogL = NaN.
    """
    ts = np.asarray(ts, dtype=float)
    log_sum = np.zeros_like(ts)
    dlog_sum = np.zeros_like(ts)
    vanished = np.zeros(ts.shape, dtype=bool)
    for i in range(len(table.k)):
        s2a, ds2a = table.sin2a[i], table.dsin2a[i]
        e1, de1 = table.eps1[i], table.deps1[i]
        sn = np.sin(e1 * ts)
        s = (s2a * sn) ** 2
        dead = s >= 1.0
        vanished |= dead
        safe = np.where(dead, 0.0, s)
        log_sum += np.log1p(-safe)
        num = 2.0 * s2a * ds2a * sn * sn + ts * s2a * s2a * np.sin(2.0 * e1 * ts) * de1
        dlog_sum -= num / (1.0 - safe)
    log_sum = np.where(vanished, -np.inf, log_sum)
    dlog_sum = np.where(vanished, np.nan, dlog_sum)
    return log_sum, dlog_sum, vanished


def thermal_columns(table: SpectrumTable, ts: np.ndarray, beta: float):
    """Thermal counterpart of `ground_columns` at finite beta >= 0."""
    ts = np.asarray(ts, dtype=float)
    log_sum = np.zeros_like(ts)
    dlog_sum = np.zeros_like(ts)
    vanished = np.zeros(ts.shape, dtype=bool)
    for i in range(len(table.k)):
        e0, de0 = table.eps0[i], table.deps0[i]
        A, B, dA, dB = _thermal_mode_terms(
            e0, table.eps1[i], table.cos2a[i], de0, table.deps1[i],
            table.dcos2a[i], ts,
        )
        # Every cosh/sinh and the additive 1's are rescaled by exp(-beta*eps0),
        # keeping all intermediates in [0, 2] for any beta.
        em = math.exp(-beta * e0)
        em2 = em * em
        chs, shs = 0.5 * (1.0 + em2), 0.5 * (1.0 - em2)
        denom = em + chs
        p = chs * A + em
        q = shs * B
        dp = beta * shs * de0 * A + chs * dA
        dq = beta * chs * de0 * B + shs * dB
        s = ((denom - p) * (denom + p) - q * q) / (denom * denom)
        dead = s >= 1.0
        vanished |= dead
        safe = np.where(dead, 0.0, s)
        log_sum += np.log1p(-safe)
        pq2 = p * p + q * q
        # At the identity point (t = 0, or delta = 0 with exact trig) the two
        # derivative terms cancel algebraically; skip them so dlogL is 0
        # exactly instead of their rounding difference.
        ident = (A == 1.0) & (B == 0.0) & (dA == 0.0) & (dB == 0.0)
        dlog_sum += 2.0 * np.where(
            dead | ident, 0.0, (p * dp + q * dq) / np.where(dead, 1.0, pq2)
            - beta * de0 * shs / denom,
        )
    if np.any(np.isnan(log_sum) & ~vanished):
        raise NumericalFailure("rescaled thermal factor produced NaN")
    log_sum = np.where(vanished, -np.inf, log_sum)
    dlog_sum = np.where(vanished, np.nan, dlog_sum)
    return log_sum, dlog_sum, vanished


def loschmidt_ground(cfg: RingConfig, p: GridPoint) -> EchoValue:
    """Ground-state decoherence factor and its logarithmic derivative."""
    table = spectrum_table(cfg, p.lam)
    log_L, dlog, vanished = ground_columns(table, np.array([p.t]))
    flag = Flag.ECHO_VANISHED if vanished[0] else Flag.OK
    return EchoValue(float(log_L[0]), float(dlog[0]), flag)


def loschmidt_thermal(cfg: RingConfig, p: GridPoint, th: ThermalConfig) -> EchoValue:
    """Thermal decoherence factor; T = 0 dispatches to the ground-state path."""
    if th.temperature == 0:
        return loschmidt_ground(cfg, p)
    table = spectrum_table(cfg, p.lam)
    log_L, dlog, vanished = thermal_columns(table, np.array([p.t]), th.beta)
    flag = Flag.ECHO_VANISHED if vanished[0] else Flag.OK
    return EchoValue(float(log_L[0]), float(dlog[0]), flag)


def dp_dq_thermal(spec: ModeSpectrum, t: float, beta: float) -> tuple[float, float]:
    """lambda-derivatives of the thermal amplitudes p_k, q_k of one mode.

    Chain rule through eps0(lambda), eps1(lambda) and cos2a(lambda):

        dp = beta*sinh(beta eps0)*deps0*A + cosh(beta eps0)*dA
        dq = beta*cosh(beta eps0)*deps0*B + sinh(beta eps0)*dB

    Unrescaled (matches p_k, q_k as printed), so beta*eps0 must stay below
    ~710; the echo kernels use the rescaled equivalents internally.
    """
    A, B, dA, dB = _thermal_mode_terms(
        spec.eps0, spec.eps1, spec.cos2a, spec.deps0, spec.deps1, spec.dcos2a, t
    )
    ch, sh = math.cosh(beta * spec.eps0), math.sinh(beta * spec.eps0)
    dp = beta * sh * spec.deps0 * A + ch * dA
    dq = beta * ch * spec.deps0 * B + sh * dB
    return float(dp), float(dq)


def thermal_mode_factors(cfg: RingConfig, p: GridPoint, th: ThermalConfig) -> list[ThermalModeFactor]:
    """Per-mode thermal factors (diagnostic; ascending n)."""
    if th.temperature == 0:
        raise ConfigError("thermal mode factors need T > 0; T = 0 is the ground path")
    beta = th.beta
    table = spectrum_table(cfg, p.lam)
    out = []
    for i in range(len(table.k)):
        e0 = table.eps0[i]
        A, B, _, _ = _thermal_mode_terms(
            e0, table.eps1[i], table.cos2a[i], table.deps0[i],
            table.deps1[i], table.dcos2a[i], p.t,
        )
        em = math.exp(-beta * e0)
        em2 = em * em
        chs, shs = 0.5 * (1.0 + em2), 0.5 * (1.0 - em2)
        denom = em + chs
        pr = chs * A + em
        qr = shs * B
        s = ((denom - pr) * (denom + pr) - qr * qr) / (denom * denom)
        logfactor = -math.inf if s >= 1.0 else math.log1p(-float(s))
        ch = math.cosh(beta * e0) if beta * e0 < 710 else math.inf
        sh = math.sinh(beta * e0) if beta * e0 < 710 else math.inf
        out.append(ThermalModeFactor(
            p=float(ch * A + 1.0), q=float(sh * B), logfactor=logfactor,
        ))
    return out
