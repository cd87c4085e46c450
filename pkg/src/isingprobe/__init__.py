"""Probe-qubit magnetometry on a transverse-field Ising ring.

A central qubit coupled to an Ising ring near its critical field decoheres
at a rate that is steeply field-dependent; the package computes the
resulting Loschmidt-echo decoherence factors (ground-state and thermal),
their analytic field-derivatives, the probe's quantum Fisher information,
and the parameter-sweep studies built on them (peak tracking, N^2 scaling
fits, the scaling-symmetry residual), with brute-force oracles validating
every closed form.
"""

__version__ = "0.1.0"

from .echo import (EchoValue, GridPoint, ThermalConfig, dp_dq_thermal,
                   loschmidt_ground, loschmidt_thermal)
from .errors import (ConfigError, DegenerateGroundState, DimensionExceeded,
                     Flag, InsufficientPeaks, NumericalFailure)
from .modes import (Mode, ModeSpectrum, RingConfig, bogoliubov_angle,
                    build_modes, dispersion, spectrum, spectrum_table)
from .qfi import (BlochVector, ProbeState, QfiValue, dephased_bloch,
                  qfi_bloch, qfi_dephasing, qfi_ground, qfi_thermal)
from .sweep import (Grid, Peak, QuadFit, Surface, SurfaceKind, SymmetryCheck,
                    critical_lambda, evaluate_surface, find_peaks,
                    peak_scaling, symmetry_residual)

__all__ = [
    "__version__",
    "ConfigError", "DegenerateGroundState", "DimensionExceeded", "Flag",
    "InsufficientPeaks", "NumericalFailure",
    "Mode", "ModeSpectrum", "RingConfig", "bogoliubov_angle", "build_modes",
    "dispersion", "spectrum", "spectrum_table",
    "EchoValue", "GridPoint", "ThermalConfig", "dp_dq_thermal",
    "loschmidt_ground", "loschmidt_thermal",
    "BlochVector", "ProbeState", "QfiValue", "dephased_bloch", "qfi_bloch",
    "qfi_dephasing", "qfi_ground", "qfi_thermal",
    "Grid", "Peak", "QuadFit", "Surface", "SurfaceKind", "SymmetryCheck",
    "critical_lambda", "evaluate_surface", "find_peaks", "peak_scaling",
    "symmetry_residual",
]
