"""Exact and harmonic-approximation spectra of a large Josephson junction
coupled to a charge qubit, H = n^2 - T cos(theta) + T' sin(theta/2) sigma_3."""

from .errors import (
    InvalidGridError,
    InvalidParameterError,
    NoHarmonicWellError,
    NumericalFailure,
)
from .model import (
    ChargeGrid,
    CircuitParams,
    JunctionParams,
    SpinSector,
    build_hamiltonian,
    gauge_transform,
    potential,
    reduce_circuit,
    well_parameters,
)
from .eigen import Spectrum, eigh, junction_spectrum, residuals
from .variational import (
    energy_functional,
    ha_parameters,
    ha_spectrum,
    optimize_parameters,
    trial_wavefunction,
)

__version__ = "0.1.0"
