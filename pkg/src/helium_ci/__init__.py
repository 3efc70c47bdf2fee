"""Configuration-interaction solver for helium with one-electron entanglement entropies."""

from .ci import (Configuration, CiState, SpatialSector, assemble_hamiltonian, diagonalize,
                 enumerate_configurations, label_states, spectroscopic_orbitals)
from .entanglement import EntropyReport, entropy_report, reduced_density
from .sto import OrthonormalRadialBasis, StoOrbital, even_tempered, orthonormalize

__all__ = [
    "Configuration", "CiState", "SpatialSector", "assemble_hamiltonian", "diagonalize",
    "enumerate_configurations", "label_states", "spectroscopic_orbitals",
    "EntropyReport", "entropy_report", "reduced_density",
    "OrthonormalRadialBasis", "StoOrbital", "even_tempered", "orthonormalize",
]
