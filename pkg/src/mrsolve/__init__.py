"""Klein-Gordon bound states of the q-deformed Manning-Rosen potential via the asymptotic iteration method."""

from .errors import (
    NoBoundState,
    NotBoundState,
    NotNormalizable,
    ParameterError,
    SolverError,
    UnphysicalLevel,
)
from .potentials import PotentialSpec
from .spectrum import EnergyLevel, Provenance, enumerate_levels, preset_energy, preset_levels, solve_energy
from .wavefunction import Eigenfunction, eigenfunction, evaluate_psi, normalize

__version__ = "0.1.0"
