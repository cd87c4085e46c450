"""Bloch-vector QFI, dephasing-channel QFI and their equivalence."""

import math

import numpy as np
import pytest

from isingprobe import (BlochVector, ConfigError, Flag, GridPoint, ProbeState,
                        RingConfig, ThermalConfig, dephased_bloch, qfi_bloch,
                        qfi_dephasing, qfi_ground, qfi_thermal)
from isingprobe.qfi import OPTIMAL_THETA


def test_dephased_bloch_values():
    a = dephased_bloch(ProbeState(theta=0.3, omega=0.0), L=1.0)
    assert a.norm2() == pytest.approx(1.0, abs=1e-14)
    a = dephased_bloch(ProbeState(theta=math.pi / 4, omega=0.4), L=0.0)
    assert (a.ax, a.ay, a.az) == pytest.approx((0.0, 0.0, 0.0), abs=1e-15)
    a = dephased_bloch(ProbeState(theta=math.pi / 4, omega=0.0), L=0.64)
    assert math.hypot(a.ax, a.ay) == pytest.approx(0.8, abs=1e-14)
    with pytest.raises(ConfigError):
        dephased_bloch(ProbeState(0.3), L=1.5)


def test_qfi_bloch_trivial():
    assert qfi_bloch(BlochVector(1.0, 0.0, 0.0)).F == 0.0
    v = qfi_bloch(BlochVector(0.0, 0.0, 0.0, dax=1.0, day=2.0, daz=3.0))
    assert v.F == pytest.approx(14.0)
    sing = qfi_bloch(BlochVector(1.0, 0.0, 0.0, dax=1.0))
    assert sing.flag is Flag.BOUNDARY_SINGULARITY
    with pytest.raises(ConfigError):
        qfi_bloch(BlochVector(1.0, 1.0, 0.0))


def test_qfi_dephasing_arithmetic():
    v = qfi_dephasing(0.5, 1.0, math.pi / 4)
    assert v.F == pytest.approx(1.0) and v.flag is Flag.OK


def test_qfi_dephasing_theta_zeros():
    for theta in (0.0, math.pi / 2):
        for L, dL in ((0.5, 3.0), (0.2, -1.0)):
            assert qfi_dephasing(L, dL, theta).F == pytest.approx(0.0, abs=1e-28)


def test_qfi_dephasing_limit_policy():
    # t = 0 limit: L = 1, dL = 0
    v = qfi_dephasing(1.0, 0.0, math.pi / 4)
    assert v.F == 0.0 and v.flag is Flag.OK
    # vanished-echo limit
    v = qfi_dephasing(0.0, 0.0, math.pi / 4)
    assert v.F == 0.0 and v.flag is Flag.OK
    # boundary with non-negligible derivative is singular
    v = qfi_dephasing(1.0, 1e-3, math.pi / 4)
    assert v.flag is Flag.BOUNDARY_SINGULARITY and math.isnan(v.F)
    v = qfi_dephasing(0.0, 1e-3, math.pi / 4)
    assert v.flag is Flag.BOUNDARY_SINGULARITY


def test_theta_optimality():
    L, dL = 0.37, 0.8
    best = qfi_dephasing(L, dL, OPTIMAL_THETA).F
    for theta in np.linspace(0.0, math.pi, 100):
        v = qfi_dephasing(L, dL, float(theta)).F
        assert v <= best + 1e-12
        if abs(math.sin(2 * theta) ** 2 - 1.0) > 1e-12:
            assert v < best


def test_formula_equivalence_bloch_vs_dephasing():
    # (a.da)^2/(1-|a|^2) + |da|^2 must reduce to dL^2 sin^2(2 theta)/(4L(1-L))
    rng = np.random.default_rng(7)
    for _ in range(1000):
        L = rng.uniform(0.01, 0.99)
        dL = rng.uniform(-2.0, 2.0)
        theta = rng.uniform(0.0, math.pi)
        omega = rng.uniform(0.0, 2 * math.pi)
        a = dephased_bloch(ProbeState(theta, omega), L, dL)
        fb = qfi_bloch(a).F
        fd = qfi_dephasing(L, dL, theta).F
        assert abs(fb - fd) <= 1e-12 * max(1.0, abs(fd))


def test_omega_independence():
    rng = np.random.default_rng(11)
    for _ in range(50):
        L, dL = rng.uniform(0.05, 0.95), rng.uniform(-1, 1)
        theta = rng.uniform(0, math.pi)
        vals = [qfi_bloch(dephased_bloch(ProbeState(theta, w), L, dL)).F
                for w in rng.uniform(0, 2 * math.pi, 4)]
        assert max(vals) - min(vals) < 1e-12 * max(1.0, max(vals))


def test_qfi_ground_trivial_zero_cases():
    # delta = 0: no dephasing anywhere
    cfg = RingConfig(64, 0.0)
    for lam, t in ((0.5, 3.0), (1.0, 11.0)):
        assert qfi_ground(cfg, GridPoint(lam, t)).F == 0.0
    # N = 2: the single k = pi mode has sin(k) = 0
    cfg = RingConfig(2, 0.3)
    assert qfi_ground(cfg, GridPoint(0.9, 5.0)).F == 0.0
    # t = 0 limit policy
    assert qfi_ground(RingConfig(100, 0.1), GridPoint(0.9, 0.0)).F == 0.0


def test_qfi_ground_positive_near_critical():
    cfg = RingConfig(100, 0.1)
    v = qfi_ground(cfg, GridPoint(0.92, 5.0))
    assert v.flag is Flag.OK and v.F > 0.0


def test_qfi_thermal_t0_bit_identical_to_ground():
    cfg = RingConfig(100, 0.1)
    p = GridPoint(0.93, 7.0)
    assert qfi_thermal(cfg, p, ThermalConfig(0.0)).F == qfi_ground(cfg, p).F


def test_qfi_thermal_hot_ring_near_zero():
    cfg = RingConfig(500, 10.0 / 500)
    th = ThermalConfig(100.0)  # beta = 0.01
    for lam, t in ((0.95, 10.0), (0.99, 40.0)):
        v = qfi_thermal(cfg, GridPoint(lam, t), th)
        assert v.F < 1e-2


def test_qfi_thermal_monotone_temperature_degradation():
    # at the T = 0 first-peak location, F^T non-increasing in T
    cfg = RingConfig(100, 0.1)
    p = GridPoint(0.9928, 8.86)
    vals = [qfi_thermal(cfg, p, ThermalConfig(T)).F
            for T in (0.0, 0.005, 0.01, 0.015)]
    assert all(vals[i] >= vals[i + 1] - 1e-9 for i in range(len(vals) - 1))


def test_qfi_nonnegative_on_sample():
    cfg = RingConfig(64, 10.0 / 64)
    rng = np.random.default_rng(3)
    for _ in range(200):
        v = qfi_ground(cfg, GridPoint(rng.uniform(0.5, 1.5), rng.uniform(0, 25)))
        if v.flag is Flag.OK:
            assert v.F >= 0.0
