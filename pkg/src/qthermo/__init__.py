"""Open-quantum-system thermodynamics: master-equation propagation with
entropy, heat and work ledgers, plus classical and erasure comparators."""

from .linalg import BACKEND
from .hilbert import (
    DensityMatrix,
    HamiltonianSpec,
    SpaceLayout,
    correlation_entropy,
    gibbs_state,
    make_pure,
    von_neumann_entropy,
)
from .dynamics import DissipationChannel, Generator, Trajectory, propagate, thermal_channels
from .ledger import ThermoSample, bipartite_ledger, engine_efficiency, thermo_samples

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DensityMatrix",
    "DissipationChannel",
    "Generator",
    "HamiltonianSpec",
    "SpaceLayout",
    "ThermoSample",
    "Trajectory",
    "bipartite_ledger",
    "correlation_entropy",
    "engine_efficiency",
    "gibbs_state",
    "make_pure",
    "propagate",
    "thermal_channels",
    "thermo_samples",
    "von_neumann_entropy",
]
