"""Work and entropy accounting for erasing a gas of atoms in a mixed state.

The gas starts in ``rho^n`` with ``rho = sum_i p_i |psi_i><psi_i|``. Species
are separated by semi-permeable walls (no work, no heat), each species is
compressed isothermally to ``V_i = p_i V``, and every species is then rotated
to ``|psi_1>`` at no cost. Work is per particle in units of k_B T; the
compression work of species i is ``p_i ln p_i`` (with ``0 ln 0 = 0``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BadDistribution, NonPositiveTemperature


@dataclass(frozen=True)
class ErasureSpec:
    probabilities: tuple[float, ...]
    n_atoms: int = 1
    temperature: float = 1.0
    volume: float = 1.0

    def __post_init__(self):
        p = tuple(float(x) for x in self.probabilities)
        if not p:
            raise BadDistribution("empty distribution")
        if any(not math.isfinite(x) or x < 0 for x in p):
            raise BadDistribution("probabilities must be finite and non-negative")
        if abs(math.fsum(p) - 1.0) > 1e-12:
            raise BadDistribution(f"probabilities sum to {math.fsum(p)!r}, not 1")
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 1:
            raise ValueError("n_atoms must be a positive integer")
        if not self.temperature > 0:
            raise NonPositiveTemperature("temperature must be positive")
        if not self.volume > 0:
            raise ValueError("volume must be positive")
        object.__setattr__(self, "probabilities", p)


@dataclass(frozen=True)
class ErasureStep:
    name: str
    work: float
    entropy_change: float


@dataclass(frozen=True)
class ErasureReport:
    species_work: tuple[float, ...]
    species_volume: tuple[float, ...]
    work_per_particle: float
    entropy_change_per_particle: float
    recovered_entropy: float
    total_work: float  # n * sum_i w_i, k_B T units
    total_work_energy: float  # n * T * sum_i w_i
    steps: tuple[ErasureStep, ...]


def _plogp(p: float) -> float:
    return p * math.log(p) if p > 0 else 0.0


def erasure_accounting(spec: ErasureSpec) -> ErasureReport:
    w = tuple(_plogp(p) for p in spec.probabilities)
    # sorted summation keeps the report invariant under relabelling of species
    total = math.fsum(sorted(w))
    steps = (
        ErasureStep("separation", 0.0, 0.0),
        ErasureStep("compression", total, total),
        ErasureStep("unitary reset", 0.0, 0.0),
    )
    return ErasureReport(
        species_work=w,
        species_volume=tuple(p * spec.volume for p in spec.probabilities),
        work_per_particle=total,
        entropy_change_per_particle=total,
        recovered_entropy=-total if total else 0.0,
        total_work=spec.n_atoms * total,
        total_work_energy=spec.n_atoms * spec.temperature * total,
        steps=steps,
    )

