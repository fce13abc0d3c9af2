"""Circuit construction and exact statevector simulation for fermionic state preparation."""

from .antisym import AntisymJob, AntisymResult, antisymmetrize, verify_antisymmetry
from .fyshuffle import ShuffleJob, shuffle_antisymmetrize
from .netgen import ComparatorSchedule, generate, verify_zero_one
from .phaseprep import CostModelParams, SpectralModel, iterative_phase_estimation
from .qubitize import LcuHamiltonian, build_qubiterate, spectral_check
from .sim import Circuit, GateOp, RegisterLayout, SimulationCapError, Statevector

__version__ = "0.1.0"

__all__ = [
    "AntisymJob",
    "AntisymResult",
    "Circuit",
    "ComparatorSchedule",
    "CostModelParams",
    "GateOp",
    "LcuHamiltonian",
    "RegisterLayout",
    "ShuffleJob",
    "SimulationCapError",
    "SpectralModel",
    "Statevector",
    "antisymmetrize",
    "build_qubiterate",
    "generate",
    "iterative_phase_estimation",
    "shuffle_antisymmetrize",
    "spectral_check",
    "verify_antisymmetry",
    "verify_zero_one",
]
