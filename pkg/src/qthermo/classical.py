"""Two finite-heat-capacity bodies exchanging heat quasi-statically.

Each step moves ``dq`` from the hotter body to the colder one at the current
boundary temperatures (equal to the bulk temperatures in the quasi-static
limit). Units: k_B = 1, so entropies are in heat-capacity units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import NonPositiveTemperature


@dataclass(frozen=True)
class ClassicalBody:
    heat_capacity: float
    temperature: float
    boundary_temperature: float | None = None

    def __post_init__(self):
        if self.boundary_temperature is None:
            object.__setattr__(self, "boundary_temperature", self.temperature)
        for name in ("heat_capacity", "temperature", "boundary_temperature"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                if name == "heat_capacity":
                    raise ValueError(f"heat capacity must be positive and finite, got {value!r}")
                raise NonPositiveTemperature(f"{name} must be positive and finite, got {value!r}")

    def absorb(self, dq: float) -> "ClassicalBody":
        t = self.temperature + dq / self.heat_capacity
        if not t > 0:
            raise NonPositiveTemperature(f"temperature would drop to {t!r}")
        return replace(self, temperature=t, boundary_temperature=t)


@dataclass(frozen=True)
class ClassicalLedger:
    """Entropy bookkeeping for one exchange; ``heat_to_a`` is signed."""

    de_s_a: float
    de_s_b: float
    di_s_total: float
    heat_to_a: float


def exchange_step(a: ClassicalBody, b: ClassicalBody, dq: float):
    """Move ``|dq|`` from the hotter body to the colder one.

    Returns ``(a', b', ledger)``. Equal temperatures exchange nothing.
    """
    dq = abs(dq)
    if a.temperature == b.temperature:
        return a, b, ClassicalLedger(0.0, 0.0, 0.0, 0.0)
    q_a = dq if a.temperature < b.temperature else -dq
    de_a = q_a / a.boundary_temperature
    de_b = -q_a / b.boundary_temperature
    return a.absorb(q_a), b.absorb(-q_a), ClassicalLedger(de_a, de_b, de_a + de_b, q_a)


def run_equilibration(a: ClassicalBody, b: ClassicalBody, dq: float, max_steps: int):
    """Step until ``|T_A - T_B| < dq / min(C)`` or ``max_steps`` is reached.

    Returns ``(ledgers, a_final, b_final)``.
    """
    if not dq > 0:
        raise ValueError("dq must be positive")
    if max_steps <= 0:
        raise ValueError("max_steps must be positive")
    stop = dq / min(a.heat_capacity, b.heat_capacity)
    ledgers = []
    while len(ledgers) < max_steps and abs(a.temperature - b.temperature) >= stop:
        a, b, entry = exchange_step(a, b, dq)
        ledgers.append(entry)
    return ledgers, a, b


def equilibration_entropy(a: ClassicalBody, b: ClassicalBody) -> float:
    """Closed-form total entropy change for full equilibration at constant capacities."""
    t_f = (a.heat_capacity * a.temperature + b.heat_capacity * b.temperature) / (
        a.heat_capacity + b.heat_capacity
    )
    return a.heat_capacity * math.log(t_f / a.temperature) + b.heat_capacity * math.log(t_f / b.temperature)
