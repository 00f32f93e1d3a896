"""Periodic Coulomb energies with a quantum-Fourier-transform reciprocal backend."""

from .charges import (
    ChargeSystem,
    ConfigSpec,
    MIXED,
    SEPARATED,
    generate_configuration,
    make_system,
    rocksalt_lattice,
    validate,
)
from .ewald import (
    BACKENDS,
    DIRECT_K,
    GRID_FFT,
    QUANTUM_EXACT,
    QUANTUM_SAMPLED,
    EnergyBreakdown,
    EwaldParams,
    default_params,
    direct_sum_converged,
    direct_sum_energy,
    total_energy,
)

__all__ = [
    "ChargeSystem", "ConfigSpec", "MIXED", "SEPARATED",
    "generate_configuration", "make_system", "rocksalt_lattice", "validate",
    "BACKENDS", "DIRECT_K", "GRID_FFT", "QUANTUM_EXACT", "QUANTUM_SAMPLED",
    "EnergyBreakdown", "EwaldParams", "default_params",
    "direct_sum_converged", "direct_sum_energy", "total_energy",
]

__version__ = "0.1.0"
