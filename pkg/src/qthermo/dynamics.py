"""Local-in-time master equations and fixed-step RK4 propagation.

The generator is ``drho/dt = -i[H(t), rho] + sum_k g_k(t) (L_k rho L_k^+ -
1/2 {L_k^+ L_k, rho})``. Rates may be negative (non-Markovian regime); the
trajectory then records the regime and positivity is only monitored.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import linalg
from .errors import DimensionMismatch, NonPositiveTemperature, StepRejected
from .hilbert import DensityMatrix, HamiltonianSpec, SpaceLayout
from .linalg import HermitianEigenSystem, dagger

logger = logging.getLogger(__name__)

STEP_REJECT_EIGENVALUE = -1e-6
SUPEROP_MAX_DIM = 8


def _as_function(value) -> Callable[[float], object]:
    if callable(value):
        return value

    def constant(t):
        return value

    constant.constant = True
    return constant


@dataclass(frozen=True, eq=False)
class DissipationChannel:
    """One ``(g_k(t), L_k(t))`` pair; ``rate`` and ``op`` may be constants or functions of t."""

    rate: Callable[[float], float] | float
    op: Callable[[float], np.ndarray] | np.ndarray
    label: str = ""
    _fixed: tuple | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if not callable(self.op):
            m = linalg.as_matrix(self.op).copy()
            m.setflags(write=False)
            md = dagger(m).copy()
            object.__setattr__(self, "_fixed", (m, md, md @ m))
            object.__setattr__(self, "op", _as_function(m))
        object.__setattr__(self, "rate", _as_function(self.rate))

    def operators(self, t: float):
        """``(L, L^+, L^+ L)`` at time t."""
        if self._fixed is not None:
            return self._fixed
        m = linalg.as_matrix(self.op(t))
        md = dagger(m)
        return m, md, md @ m


class Generator:
    def __init__(self, h: HamiltonianSpec, channels: Sequence[DissipationChannel] = (), check_time: float = 0.0):
        self.h = h
        self.channels = tuple(channels)
        d = h.layout.total_dim
        if len(self.channels) > d * d - 1:
            raise ValueError(f"{len(self.channels)} channels exceed d^2 - 1 = {d * d - 1}")
        for ch in self.channels:
            m = ch.operators(check_time)[0]
            if m.shape != (d, d):
                raise DimensionMismatch(f"channel {ch.label!r} has shape {m.shape}, expected {(d, d)}")
            if abs(np.trace(m)) > 1e-10:
                raise ValueError(f"channel {ch.label!r} operator is not traceless")
            if abs(np.vdot(m, m).real - 1.0) > 1e-10:
                raise ValueError(f"channel {ch.label!r} operator does not have unit Hilbert-Schmidt norm")
        self._superop = None
        self._pieces = None
        fixed_ops = all(ch._fixed is not None for ch in self.channels)
        if fixed_ops and h.is_time_independent and all(getattr(ch.rate, "constant", False) for ch in self.channels):
            self._superop = self._build_superoperator()
        elif fixed_ops and d <= SUPEROP_MAX_DIM:
            # time dependence only through scalar coefficients: keep one superoperator per term
            eye = np.eye(d)
            terms = [(term.coefficient, _hamiltonian_superop(term.operator, eye)) for term in h.terms]
            chans = [(ch.rate, _channel_superop(ch._fixed, eye)) for ch in self.channels]
            self._pieces = terms + chans

    def _build_superoperator(self) -> np.ndarray:
        d = self.layout.total_dim
        eye = np.eye(d)
        sup = _hamiltonian_superop(self.h.at(0.0), eye)
        for ch in self.channels:
            sup += ch.rate(0.0) * _channel_superop(ch._fixed, eye)
        return sup

    @property
    def layout(self) -> SpaceLayout:
        return self.h.layout

    def dissipator(self, t: float, m: np.ndarray) -> np.ndarray:
        out = np.zeros_like(m)
        for ch in self.channels:
            g = ch.rate(t)
            if g == 0.0:
                continue
            lop, ld, ldl = ch.operators(t)
            out += g * (lop @ m @ ld - 0.5 * (ldl @ m + m @ ldl))
        return out

    def rhs(self, t: float, m: np.ndarray) -> np.ndarray:
        if self._superop is not None:
            return (self._superop @ m.reshape(-1)).reshape(m.shape)
        if self._pieces is not None:
            sup = None
            for coef, piece in self._pieces:
                c = coef(t)
                if c != 0.0:
                    sup = c * piece if sup is None else sup + c * piece
            if sup is None:
                return np.zeros_like(m)
            return (sup @ m.reshape(-1)).reshape(m.shape)
        h = self.h.at(t)
        return -1j * (h @ m - m @ h) + self.dissipator(t, m)

    def min_rate(self, t: float) -> float:
        return min((ch.rate(t) for ch in self.channels), default=0.0)


# row-major vec: vec(A X B) = (A kron B^T) vec(X)
def _hamiltonian_superop(h: np.ndarray, eye: np.ndarray) -> np.ndarray:
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T))


def _channel_superop(fixed, eye: np.ndarray) -> np.ndarray:
    lop, ld, ldl = fixed
    return np.kron(lop, ld.T) - 0.5 * (np.kron(ldl, eye) + np.kron(eye, ldl.T))


def normalized(op) -> np.ndarray:
    """Scale an operator to unit Hilbert-Schmidt norm."""
    m = linalg.as_matrix(op)
    return m / math.sqrt(np.vdot(m, m).real)


def lindblad_rhs(gen: Generator, t: float, rho) -> np.ndarray:
    m = rho.matrix if isinstance(rho, DensityMatrix) else linalg.as_matrix(rho)
    d = gen.layout.total_dim
    if m.shape != (d, d):
        raise DimensionMismatch(f"state shape {m.shape} does not match generator dim {d}")
    return gen.rhs(t, m)


def transition_frequency(h: HamiltonianSpec, t: float, lowering: np.ndarray) -> float:
    """``omega`` in ``[H, L] = -omega L``, projected onto ``L``."""
    hm = h.at(t)
    comm = hm @ lowering - lowering @ hm
    return float(-np.vdot(lowering, comm).real / np.vdot(lowering, lowering).real)


def bath_channels(h: HamiltonianSpec, lowering, baths, label: str = "bath"):
    """Detailed-balance emission/absorption pair for one or more baths.

    Each bath is ``(gamma, temperature)`` and contributes emission rate
    ``gamma (n + 1)`` and absorption rate ``gamma n`` with
    ``n = 1/(exp(omega/T) - 1)``, ``omega`` being the transition frequency of
    the lowering operator. Rates of baths sharing the operator add, so the
    Gibbs state of ``H`` is a fixed point whenever a single temperature is
    active. ``gamma`` and ``temperature`` may be functions of t.
    """
    low = normalized(lowering)
    raise_op = dagger(low).copy()
    baths = list(baths)
    static = h.is_time_independent and not any(callable(g) or callable(temp) for g, temp in baths)

    def omega_at(t):
        omega = transition_frequency(h, t, low)
        if omega <= 0:
            raise ValueError(f"operator for {label!r} does not lower the energy (omega={omega:.3g})")
        return omega

    def occupations(t, omega=None):
        out = []
        for g, temp in baths:
            g = g(t) if callable(g) else g
            if g == 0.0:
                continue
            temp = temp(t) if callable(temp) else temp
            if not temp > 0:
                raise NonPositiveTemperature(f"bath temperature must be positive, got {temp!r}")
            if omega is None:
                omega = omega_at(t)
            out.append((g, 1.0 / math.expm1(omega / temp)))
        return out

    if static:
        pairs = occupations(0.0, omega_at(0.0))
        down = math.fsum(g * (n + 1.0) for g, n in pairs)
        up = math.fsum(g * n for g, n in pairs)
        return [DissipationChannel(down, low, f"{label}-"), DissipationChannel(up, raise_op, f"{label}+")]

    # emission and absorption are queried at the same t back to back
    last = [None, (0.0, 0.0)]

    def rates(t):
        if last[0] is None or last[0] != t:
            pairs = occupations(t)
            last[1] = (math.fsum(g * (n + 1.0) for g, n in pairs), math.fsum(g * n for g, n in pairs))
            last[0] = t
        return last[1]

    def down(t):
        return rates(t)[0]

    def up(t):
        return rates(t)[1]

    return [DissipationChannel(down, low, f"{label}-"), DissipationChannel(up, raise_op, f"{label}+")]


def thermal_channels(h: HamiltonianSpec, lowering, gamma, temperature, label: str = "bath"):
    """Detailed-balance pair for a single bath; see :func:`bath_channels`."""
    return bath_channels(h, lowering, [(gamma, temperature)], label)


@dataclass
class DissipatorBasisReport:
    passed: bool
    trace_norms: list[float]
    gram: np.ndarray
    max_gram_deviation: float
    failures: list[str]


def validate_dissipator_basis(ops: Sequence, tol: float = 1e-10) -> DissipatorBasisReport:
    """Check ``tr L_k = 0`` and ``tr(L_j^+ L_k) = delta_jk``."""
    mats = [linalg.as_matrix(o) for o in ops]
    failures = []
    if mats:
        shape = mats[0].shape
        if shape[0] != shape[1] or any(m.shape != shape for m in mats):
            raise DimensionMismatch("dissipator operators must be square and of equal size")
    traces = [float(abs(np.trace(m))) for m in mats]
    for k, tr in enumerate(traces):
        if tr > tol:
            failures.append(f"L[{k}] has |tr| = {tr:.3e}")
    n = len(mats)
    gram = np.array([[np.vdot(a, b) for b in mats] for a in mats], dtype=np.complex128).reshape(n, n)
    dev = np.abs(gram - np.eye(n))
    max_dev = float(dev.max()) if n else 0.0
    for j in range(n):
        for k in range(n):
            if dev[j, k] > tol:
                failures.append(f"gram[{j},{k}] deviates from delta by {dev[j, k]:.3e}")
    return DissipatorBasisReport(not failures, traces, gram, max_dev, failures)


@dataclass
class GeneratorReport:
    basis: DissipatorBasisReport
    negative_rates: bool
    min_rate: float

    @property
    def regime(self) -> str:
        return "non-markovian" if self.negative_rates else "markovian"


def validate_generator(gen: Generator, times: Sequence[float]) -> GeneratorReport:
    times = list(times)
    basis = validate_dissipator_basis([ch.operators(times[0])[0] for ch in gen.channels])
    lowest = min((gen.min_rate(t) for t in times), default=0.0)
    return GeneratorReport(basis, lowest < 0, lowest)


@dataclass
class _Step:
    matrix: np.ndarray
    eig: HermitianEigenSystem
    trace_deviation: float
    hermiticity_deviation: float


def _rk4(gen: Generator, t: float, m: np.ndarray, h: float) -> _Step:
    k1 = gen.rhs(t, m)
    k2 = gen.rhs(t + 0.5 * h, m + (0.5 * h) * k1)
    k3 = gen.rhs(t + 0.5 * h, m + (0.5 * h) * k2)
    k4 = gen.rhs(t + h, m + h * k3)
    out = m + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    herm = 0.5 * (out + dagger(out))
    herm_dev = linalg.max_abs(out - herm)
    tr = float(np.trace(herm).real)
    if tr != 1.0:
        herm = herm / tr
    es = linalg.eig_hermitian(herm, hermiticity_tol=1e-12)
    if es.eigenvalues[0] < STEP_REJECT_EIGENVALUE:
        raise StepRejected(f"minimum eigenvalue {es.eigenvalues[0]:.3e} after step", time=t + h)
    return _Step(herm, es, abs(tr - 1.0), herm_dev)


def _state(layout: SpaceLayout, step: _Step) -> DensityMatrix:
    return DensityMatrix(layout, step.matrix, 1e-12, 1e-8, STEP_REJECT_EIGENVALUE, step.eig)


def step_rk4(gen: Generator, t: float, rho: DensityMatrix, h_step: float) -> DensityMatrix:
    """One classical RK4 step followed by re-Hermitization and trace renormalization."""
    if not h_step > 0:
        raise ValueError("h_step must be positive")
    step = _rk4(gen, t, rho.matrix, h_step)
    logger.debug("t=%.6g trace deviation %.3e hermiticity deviation %.3e", t, step.trace_deviation, step.hermiticity_deviation)
    return _state(rho.layout, step)


@dataclass
class Trajectory:
    times: np.ndarray
    states: list[DensityMatrix]
    h_step: float
    metadata: dict = field(default_factory=dict)
    generator: Generator | None = None

    def __len__(self):
        return len(self.times)

    @property
    def layout(self) -> SpaceLayout:
        return self.states[0].layout


def time_grid(t0: float, t1: float, h_step: float) -> tuple[np.ndarray, float]:
    """Uniform grid including both endpoints; the step shrinks to fit the interval."""
    if not h_step > 0:
        raise ValueError("h_step must be positive")
    if t1 < t0:
        raise ValueError("t1 must not precede t0")
    span = t1 - t0
    if span == 0:
        return np.array([float(t0)]), float(h_step)
    n = max(1, math.ceil(span / h_step - 1e-9))
    h = span / n
    times = t0 + h * np.arange(n + 1)
    times[-1] = t1
    return times, h


def propagate(gen: Generator, rho0: DensityMatrix, t0: float, t1: float, h_step: float) -> Trajectory:
    if rho0.layout.total_dim != gen.layout.total_dim:
        raise DimensionMismatch("initial state and generator live on different spaces")
    times, h = time_grid(t0, t1, h_step)
    states = [rho0]
    m = rho0.matrix
    trace_corr = herm_corr = 0.0
    min_eig = float(rho0.eig.eigenvalues[0])
    min_rate = gen.min_rate(times[0])
    for i in range(1, len(times)):
        t = times[i - 1]
        step = _rk4(gen, t, m, h)
        trace_corr += step.trace_deviation
        herm_corr += step.hermiticity_deviation
        min_eig = min(min_eig, float(step.eig.eigenvalues[0]))
        min_rate = min(min_rate, gen.min_rate(times[i]))
        states.append(_state(rho0.layout, step))
        m = step.matrix
    meta = {
        "steps": len(times) - 1,
        "h_step": h,
        "cumulative_trace_correction": trace_corr,
        "cumulative_hermiticity_correction": herm_corr,
        "min_eigenvalue": min_eig,
        "min_rate": min_rate,
        "regime": "non-markovian" if min_rate < 0 else "markovian",
    }
    logger.debug("propagated %d steps: %s", len(times) - 1, meta)
    return Trajectory(times, states, h, meta, gen)
