"""Entropy, heat and work bookkeeping along master-equation trajectories.

Sign convention: heat and work are positive when they raise the system
energy. Rates stored in samples are analytic (evaluated from the generator at
the sample); finite differences only appear in cross-checks and in the
bipartite entropy rates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import Generator, Trajectory
from .errors import InvariantViolation, NonPositiveHotHeat, NonPositiveTemperature
from .hilbert import DensityMatrix, von_neumann_entropy
from . import linalg

RATE_FLOOR = 1e-9
INTERIOR_TOL = 1e-10


def _tr(a: np.ndarray, b: np.ndarray) -> float:
    # real part of tr(a b) without forming the product
    return float(np.real(np.sum(a * b.T)))


def entropy_rate_split(gen: Generator, t: float, rho: DensityMatrix) -> tuple[float, float]:
    """Return ``(interior, exterior)`` entropy rates.

    interior = tr(i[H, rho] ln rho), which vanishes identically because
    ``rho`` commutes with ``ln rho``; exterior = -tr(D(rho) ln rho).
    """
    log_rho = rho.log()
    h = gen.h.at(t)
    m = rho.matrix
    interior = _tr(1j * (h @ m - m @ h), log_rho)
    exterior = -_tr(gen.dissipator(t, m), log_rho)
    return interior, exterior


def energy_ledger_rate(gen: Generator, t: float, rho: DensityMatrix) -> tuple[float, float, float]:
    """``(heat_rate, work_rate, energy_rate)`` with heat = tr(rho' H), work = tr(rho H')."""
    m = rho.matrix
    heat = _tr(gen.rhs(t, m), gen.h.at(t))
    work = _tr(m, gen.h.derivative(t))
    return heat, work, heat + work


def conventional_entropy_production_rate(
    gen: Generator, t: float, rho: DensityMatrix, bath_temperature: float
) -> float:
    """``dS/dt - (dQ/dt)/T_bath``, the bath-temperature entropy-production ledger."""
    if not bath_temperature > 0:
        raise NonPositiveTemperature(f"bath temperature must be positive, got {bath_temperature!r}")
    interior, exterior = entropy_rate_split(gen, t, rho)
    heat, _, _ = energy_ledger_rate(gen, t, rho)
    return interior + exterior - heat / bath_temperature


def generalized_temperature(dS_dt: float, dQ_dt: float, rate_floor: float = RATE_FLOOR) -> float | None:
    """``dQ/dS``; ``None`` when the entropy rate is below ``rate_floor``."""
    if abs(dS_dt) < rate_floor:
        return None
    return dQ_dt / dS_dt


def smooth3(values: np.ndarray) -> np.ndarray:
    """Three-point moving average; endpoints are left as they are."""
    v = np.asarray(values, dtype=np.float64)
    out = v.copy()
    if v.size >= 3:
        out[1:-1] = (v[:-2] + v[1:-1] + v[2:]) / 3.0
    return out


@dataclass(frozen=True)
class ThermoSample:
    t: float
    entropy: float
    interior_rate: float
    exterior_rate: float
    heat_rate: float
    work_rate: float
    energy: float
    generalized_temperature: float | None
    conventional_ep_rate: float | None

    @property
    def entropy_rate(self) -> float:
        return self.interior_rate + self.exterior_rate


def thermo_samples(
    traj: Trajectory,
    bath_temperature: float | None = None,
    rate_floor: float = RATE_FLOOR,
    interior_tol: float | None = INTERIOR_TOL,
) -> list[ThermoSample]:
    """Per-sample ledger for a trajectory produced by :func:`propagate`.

    Raises :class:`InvariantViolation` when an interior rate exceeds
    ``interior_tol`` (pass ``None`` to disable the check).
    """
    gen = traj.generator
    if gen is None:
        raise ValueError("trajectory does not carry its generator")
    if bath_temperature is not None and not bath_temperature > 0:
        raise NonPositiveTemperature(f"bath temperature must be positive, got {bath_temperature!r}")
    n = len(traj)
    cols = np.zeros((6, n))
    for i, (t, rho) in enumerate(zip(traj.times, traj.states)):
        interior, exterior = entropy_rate_split(gen, t, rho)
        if interior_tol is not None and abs(interior) > interior_tol:
            raise InvariantViolation(f"interior entropy rate {interior:.3e} exceeds {interior_tol:.1e}", time=t)
        heat, work, _ = energy_ledger_rate(gen, t, rho)
        energy = rho.expect(gen.h.at(t))
        cols[:, i] = (von_neumann_entropy(rho), interior, exterior, heat, work, energy)
    entropy, interior, exterior, heat, work, energy = cols
    s_rate = smooth3(interior + exterior)
    q_rate = smooth3(heat)
    samples = []
    for i in range(n):
        temp = generalized_temperature(s_rate[i], q_rate[i], rate_floor)
        conv = None
        if bath_temperature is not None:
            conv = interior[i] + exterior[i] - heat[i] / bath_temperature
        samples.append(
            ThermoSample(
                float(traj.times[i]),
                float(entropy[i]),
                float(interior[i]),
                float(exterior[i]),
                float(heat[i]),
                float(work[i]),
                float(energy[i]),
                temp,
                conv,
            )
        )
    return samples


def _times(samples) -> np.ndarray:
    return np.array([s.t for s in samples])


def ledger_closure_residuals(samples: Sequence[ThermoSample]) -> np.ndarray:
    """``|(interior + exterior) - dS/dt|`` at interior samples, dS/dt by central differences."""
    if len(samples) < 3:
        return np.zeros(0)
    t = _times(samples)
    s = np.array([x.entropy for x in samples])
    fd = (s[2:] - s[:-2]) / (t[2:] - t[:-2])
    analytic = np.array([x.entropy_rate for x in samples[1:-1]])
    return np.abs(analytic - fd)


def closure_tolerance(h_step: float) -> float:
    return max(1e-6, 10.0 * h_step * h_step)


def first_law_residual(samples: Sequence[ThermoSample]) -> float:
    """``|E(t1) - E(t0) - integral(dQ + dW)|`` with the trapezoidal rule."""
    t = _times(samples)
    rate = np.array([x.heat_rate + x.work_rate for x in samples])
    return abs(samples[-1].energy - samples[0].energy - float(np.trapezoid(rate, t)))


def stroke_heat(samples: Sequence[ThermoSample]) -> float:
    return float(np.trapezoid([x.heat_rate for x in samples], _times(samples)))


def stroke_work(samples: Sequence[ThermoSample]) -> float:
    return float(np.trapezoid([x.work_rate for x in samples], _times(samples)))


def clausius_integral(samples: Sequence[ThermoSample]) -> float:
    """Trapezoidal ``integral dQ / T(t)``; samples with undefined T contribute zero."""
    vals = [
        x.heat_rate / x.generalized_temperature if x.generalized_temperature else 0.0
        for x in samples
    ]
    return float(np.trapezoid(vals, _times(samples)))


def temperature_entropy_integral(samples: Sequence[ThermoSample]) -> float:
    """``integral T(t) dS`` as a trapezoidal Stieltjes sum over simulation time.

    A segment with one undefined endpoint uses the defined temperature; a
    segment with both undefined is skipped (its entropy change is below the
    rate floor).
    """
    total = 0.0
    for a, b in zip(samples[:-1], samples[1:]):
        ta, tb = a.generalized_temperature, b.generalized_temperature
        if ta is None and tb is None:
            continue
        if ta is None:
            ta = tb
        elif tb is None:
            tb = ta
        total += 0.5 * (ta + tb) * (b.entropy - a.entropy)
    return total


@dataclass(frozen=True)
class BipartiteLedgerSample:
    t: float
    s_a: float
    s_b: float
    s_ab: float
    s_c: float
    ds_a: float
    ds_b: float
    ds_c: float
    q_a: float
    q_b: float
    t_a: float | None
    t_b: float | None
    interaction_energy: float
    correlation_residual: float | None


def bipartite_ledger(traj: Trajectory, split, rate_floor: float = RATE_FLOOR) -> list[BipartiteLedgerSample]:
    """Subsystem entropies, correlation entropy and subsystem heats along a trajectory.

    Entropy rates ``ds_*`` are finite differences (central inside, second
    order one-sided at the ends). Subsystem heat uses only the Hamiltonian
    terms local to each side; interaction energy is reported separately.
    ``correlation_residual`` is ``dS_C + dQ_A/T_A + dQ_B/T_B`` where both
    generalized temperatures are defined.
    """
    gen = traj.generator
    if gen is None:
        raise ValueError("trajectory does not carry its generator")
    layout = traj.layout
    split = sorted(set(int(s) for s in split))
    other = layout.complement(split)
    n = len(traj)
    cols = np.zeros((10, n))
    for i, (t, rho) in enumerate(zip(traj.times, traj.states)):
        rho_a = rho.reduced(split)
        rho_b = rho.reduced(other)
        rdot = gen.rhs(t, rho.matrix)
        rdot_a = linalg.partial_trace(rdot, layout.subsystem_dims, split)
        rdot_b = linalg.partial_trace(rdot, layout.subsystem_dims, other)
        s_a = von_neumann_entropy(rho_a)
        s_b = von_neumann_entropy(rho_b)
        s_ab = von_neumann_entropy(rho)
        cols[:, i] = (
            s_a,
            s_b,
            s_ab,
            _tr(rdot_a, gen.h.local_part(t, split)),
            _tr(rdot_b, gen.h.local_part(t, other)),
            -_tr(rdot_a, rho_a.log()),
            -_tr(rdot_b, rho_b.log()),
            rho.expect(gen.h.interaction_part(t, split)),
            0.0,
            0.0,
        )
    s_a, s_b, s_ab, qdot_a, qdot_b, sdot_a, sdot_b, e_int = cols[:8]
    s_c = s_ab - s_a - s_b
    t = np.asarray(traj.times, dtype=np.float64)
    if n >= 3:
        grad = lambda y: np.gradient(y, t, edge_order=2)  # noqa: E731
    elif n == 2:
        grad = lambda y: np.gradient(y, t)  # noqa: E731
    else:
        grad = np.zeros_like
    ds_a, ds_b, ds_c = grad(s_a), grad(s_b), grad(s_c)
    q_a = _cumtrapz(qdot_a, t)
    q_b = _cumtrapz(qdot_b, t)
    sm_sa, sm_sb = smooth3(sdot_a), smooth3(sdot_b)
    sm_qa, sm_qb = smooth3(qdot_a), smooth3(qdot_b)
    out = []
    for i in range(n):
        ta = generalized_temperature(sm_sa[i], sm_qa[i], rate_floor)
        tb = generalized_temperature(sm_sb[i], sm_qb[i], rate_floor)
        resid = None
        if ta is not None and tb is not None:
            resid = float(ds_c[i] + qdot_a[i] / ta + qdot_b[i] / tb)
        out.append(
            BipartiteLedgerSample(
                float(t[i]),
                float(s_a[i]),
                float(s_b[i]),
                float(s_ab[i]),
                float(s_c[i]),
                float(ds_a[i]),
                float(ds_b[i]),
                float(ds_c[i]),
                float(q_a[i]),
                float(q_b[i]),
                ta,
                tb,
                float(e_int[i]),
                resid,
            )
        )
    return out


def _cumtrapz(y: np.ndarray, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    if y.size > 1:
        out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


def sum_rule_residuals(samples: Sequence[BipartiteLedgerSample]) -> np.ndarray:
    """``|dS_A + dS_B + dS_C|`` per sample (zero for closed evolution)."""
    return np.array([abs(x.ds_a + x.ds_b + x.ds_c) for x in samples])


@dataclass(frozen=True)
class EngineCycleReport:
    heat_hot: float
    heat_cold: float
    net_work: float
    efficiency: float
    efficiency_heat_ratio: float
    discrepancy: float
    integral_hot: float
    integral_cold: float
    first_law_residual: float


def engine_efficiency(
    hot_stroke: Sequence[ThermoSample],
    cold_stroke: Sequence[ThermoSample],
    net_work: float | None = None,
) -> EngineCycleReport:
    """Efficiency from the heat ratio and from ``1 - int T_c dS_c / int T_h dS_h``.

    ``efficiency`` is the temperature-entropy integral form; the heat-ratio
    form and their difference are reported alongside. ``net_work`` is the
    work done on the system over the whole cycle; when omitted it is inferred
    from the first law and the residual is zero by construction.
    """
    if len(hot_stroke) < 2 or len(cold_stroke) < 2:
        raise ValueError("each stroke needs at least two samples")
    q_h = stroke_heat(hot_stroke)
    q_c = stroke_heat(cold_stroke)
    if not q_h > 0:
        raise NonPositiveHotHeat(f"hot-stroke heat {q_h:.6g} is not positive")
    i_h = temperature_entropy_integral(hot_stroke)
    i_c = temperature_entropy_integral(cold_stroke)
    eta_heat = 1.0 - abs(q_c) / q_h
    eta = 1.0 - abs(i_c) / i_h
    if net_work is None:
        net_work = -(q_h + q_c)
    return EngineCycleReport(
        q_h, q_c, net_work, eta, eta_heat, abs(eta - eta_heat), i_h, i_c, abs(q_h + q_c + net_work)
    )
