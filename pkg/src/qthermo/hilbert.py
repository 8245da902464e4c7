"""Quantum states, Hamiltonians and entropy functionals.

Units: hbar = k_B = 1, energies in units of a reference frequency, entropy
in nats. Qubit basis convention: ``|0>`` is the ground level and ``|1>`` the
excited level; ``sigma_minus = |0><1|`` lowers and ``sigma_plus = |1><0|``
raises. The Pauli matrices themselves are the standard ones, so a qubit with
gap ``omega`` has Hamiltonian ``-(omega/2) Z``.
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from . import linalg
from .errors import (
    BadSplit,
    DimensionMismatch,
    InvalidState,
    NonPositiveTemperature,
    ZeroVector,
)
from .linalg import HermitianEigenSystem

PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
    "+": np.array([[0, 0], [1, 0]], dtype=np.complex128),
    "-": np.array([[0, 1], [0, 0]], dtype=np.complex128),
}


def pauli_string(label: str) -> np.ndarray:
    """Tensor product of single-qubit operators named by ``label``.

    Letters: ``I X Y Z`` plus ``+`` (raising) and ``-`` (lowering); the
    leftmost letter acts on subsystem 0.
    """
    if not label:
        raise ValueError("empty operator label")
    try:
        return linalg.tensor_all([PAULI[ch] for ch in label])
    except KeyError as exc:
        raise ValueError(f"unknown operator letter {exc.args[0]!r} in {label!r}") from None


@dataclass(frozen=True)
class SpaceLayout:
    subsystem_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.subsystem_dims)
        if not dims or any(d <= 0 for d in dims):
            raise DimensionMismatch(f"invalid subsystem dims {self.subsystem_dims!r}")
        object.__setattr__(self, "subsystem_dims", dims)

    @classmethod
    def qubits(cls, n: int) -> "SpaceLayout":
        return cls((2,) * n)

    @cached_property
    def total_dim(self) -> int:
        return math.prod(self.subsystem_dims)

    @property
    def n_subsystems(self) -> int:
        return len(self.subsystem_dims)

    def complement(self, split) -> list[int]:
        split = sorted(set(int(s) for s in split))
        n = self.n_subsystems
        if not split or len(split) >= n or split[0] < 0 or split[-1] >= n:
            raise BadSplit(f"split {split} is not a proper nonempty subset of range({n})")
        return [i for i in range(n) if i not in split]


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix on a layout.

    The eigensystem is computed once on demand and cached.
    """

    layout: SpaceLayout
    matrix: np.ndarray
    hermiticity_tol: InitVar[float] = 1e-12
    trace_tol: InitVar[float] = 1e-12
    min_eigenvalue: InitVar[float] = -1e-10
    eigensystem: InitVar[HermitianEigenSystem | None] = None
    _eig: HermitianEigenSystem | None = field(default=None, init=False, repr=False)

    def __post_init__(self, hermiticity_tol, trace_tol, min_eigenvalue, eigensystem):
        m = linalg.as_matrix(self.matrix)
        d = self.layout.total_dim
        if m.shape != (d, d):
            raise DimensionMismatch(f"matrix shape {m.shape} does not match layout dim {d}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if linalg.hermiticity_error(m) > hermiticity_tol:
            raise InvalidState("density matrix is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1.0) > trace_tol:
            raise InvalidState(f"trace {tr.real:.15g} differs from 1 by more than {trace_tol:.1e}")
        if eigensystem is not None:
            object.__setattr__(self, "_eig", eigensystem)
        if self.eig.eigenvalues[0] < min_eigenvalue:
            raise InvalidState(f"minimum eigenvalue {self.eig.eigenvalues[0]:.3e} is negative")

    @property
    def eig(self) -> HermitianEigenSystem:
        if self._eig is None:
            object.__setattr__(self, "_eig", linalg.eig_hermitian(self.matrix))
        return self._eig

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    def log(self, zero_clamp: float = linalg.ZERO_CLAMP) -> np.ndarray:
        return linalg.function_from_eigensystem(
            self.eig, linalg.clamped_log(self.eig.eigenvalues, zero_clamp)
        )

    def reduced(self, keep) -> "DensityMatrix":
        keep = sorted(set(int(k) for k in keep))
        dims = self.layout.subsystem_dims
        sub = linalg.partial_trace(self.matrix, dims, keep)
        return DensityMatrix(SpaceLayout(tuple(dims[k] for k in keep)), sub, 1e-10, 1e-8)

    def expect(self, op) -> float:
        return float(np.real(np.trace(self.matrix @ op)))


def maximally_mixed(layout: SpaceLayout) -> DensityMatrix:
    d = layout.total_dim
    return DensityMatrix(layout, np.eye(d) / d)


def make_pure(layout: SpaceLayout, amplitudes) -> DensityMatrix:
    psi = np.asarray(amplitudes, dtype=np.complex128).ravel()
    if psi.size != layout.total_dim:
        raise DimensionMismatch(f"{psi.size} amplitudes for a {layout.total_dim}-dim space")
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ZeroVector("state vector has zero norm")
    psi = psi / norm
    return DensityMatrix(layout, np.outer(psi, psi.conj()))


def basis_state(layout: SpaceLayout, label: str) -> DensityMatrix:
    """Product basis state from a digit string, e.g. ``"10"``."""
    dims = layout.subsystem_dims
    if len(label) != len(dims):
        raise DimensionMismatch(f"label {label!r} does not match layout {dims}")
    idx = 0
    for ch, d in zip(label, dims):
        k = int(ch)
        if not 0 <= k < d:
            raise ValueError(f"level {k} out of range for a {d}-level subsystem")
        idx = idx * d + k
    psi = np.zeros(layout.total_dim)
    psi[idx] = 1.0
    return make_pure(layout, psi)


def diagonal_state(layout: SpaceLayout, populations) -> DensityMatrix:
    p = np.asarray(populations, dtype=np.float64)
    return DensityMatrix(layout, np.diag(p))


def random_state(layout: SpaceLayout, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Full-rank (by default) random mixed state from a Ginibre matrix."""
    d = layout.total_dim
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    m = g @ g.conj().T
    return DensityMatrix(layout, m / np.trace(m).real)


Coefficient = Callable[[float], float]


def _constant(value: float) -> Coefficient:
    value = float(value)

    def coefficient(t: float) -> float:
        return value

    coefficient.constant = True
    return coefficient


def _support(op: np.ndarray, dims: Sequence[int], tol: float = 1e-12) -> tuple[int, ...]:
    """Subsystems on which ``op`` acts non-trivially."""
    n = len(dims)
    sites = []
    for j in range(n):
        rest = [i for i in range(n) if i != j]
        if not rest:
            reduced = np.trace(op) / dims[0] * np.eye(dims[0])
            if linalg.max_abs(op - reduced) > tol:
                sites.append(j)
            continue
        red = linalg.partial_trace(op, dims, rest) / dims[j]
        if linalg.max_abs(linalg.embed(red, dims, rest) - op) > tol:
            sites.append(j)
    return tuple(sites)


@dataclass(frozen=True)
class HamiltonianTerm:
    coefficient: Coefficient
    operator: np.ndarray
    support: tuple[int, ...]


class HamiltonianSpec:
    """``H(t) = sum_k c_k(t) O_k`` with real coefficients and Hermitian operators."""

    def __init__(self, layout: SpaceLayout, terms=()):
        self.layout = layout
        d = layout.total_dim
        built = []
        for coef, op in terms:
            if isinstance(op, str):
                op = pauli_string(op)
            m = linalg.as_matrix(op)
            if m.shape != (d, d):
                raise DimensionMismatch(f"term operator shape {m.shape} does not match dim {d}")
            if linalg.hermiticity_error(m) > 1e-12:
                raise ValueError("Hamiltonian term operator is not Hermitian")
            m = m.copy()
            m.setflags(write=False)
            fn = coef if callable(coef) else _constant(coef)
            built.append(HamiltonianTerm(fn, m, _support(m, layout.subsystem_dims)))
        self.terms = tuple(built)
        self._static = None
        self._parts = {}
        if self.is_time_independent:
            self._static = self.at(0.0)
            self._static.setflags(write=False)

    @classmethod
    def from_pauli(cls, terms) -> "HamiltonianSpec":
        terms = list(terms)
        if not terms:
            raise ValueError("at least one term is needed to infer the layout")
        n = len(terms[0][1])
        return cls(SpaceLayout.qubits(n), terms)

    @property
    def is_time_independent(self) -> bool:
        return all(getattr(term.coefficient, "constant", False) for term in self.terms)

    def at(self, t: float) -> np.ndarray:
        if self._static is not None:
            return self._static
        d = self.layout.total_dim
        h = np.zeros((d, d), dtype=np.complex128)
        for term in self.terms:
            c = term.coefficient(t)
            if c != 0.0:
                h += c * term.operator
        return h

    def derivative(self, t: float, step: float = 1e-6) -> np.ndarray:
        d = self.layout.total_dim
        dh = np.zeros((d, d), dtype=np.complex128)
        for term in self.terms:
            if getattr(term.coefficient, "constant", False):
                continue
            rate = (term.coefficient(t + step) - term.coefficient(t - step)) / (2 * step)
            if rate != 0.0:
                dh += rate * term.operator
        return dh

    def local_part(self, t: float, sites) -> np.ndarray:
        """Terms supported inside ``sites``, reduced to an operator on ``sites``."""
        sites = sorted(set(int(s) for s in sites))
        key = ("local", tuple(sites))
        if self._static is not None and key in self._parts:
            return self._parts[key]
        dims = self.layout.subsystem_dims
        rest = [i for i in range(len(dims)) if i not in sites]
        dk = math.prod(dims[i] for i in sites)
        dr = math.prod(dims[i] for i in rest) if rest else 1
        h = np.zeros((dk, dk), dtype=np.complex128)
        for term in self.terms:
            if term.support and set(term.support) <= set(sites):
                c = term.coefficient(t)
                if c != 0.0:
                    red = term.operator if not rest else linalg.partial_trace(term.operator, dims, sites) / dr
                    h += c * red
        if self._static is not None:
            h.setflags(write=False)
            self._parts[key] = h
        return h

    def interaction_part(self, t: float, split) -> np.ndarray:
        """Full-space operator of terms supported in neither ``split`` nor its complement."""
        a = set(split)
        b = set(self.layout.complement(split))
        key = ("interaction", tuple(sorted(a)))
        if self._static is not None and key in self._parts:
            return self._parts[key]
        d = self.layout.total_dim
        h = np.zeros((d, d), dtype=np.complex128)
        for term in self.terms:
            s = set(term.support)
            if s and not s <= a and not s <= b:
                h += term.coefficient(t) * term.operator
        if self._static is not None:
            h.setflags(write=False)
            self._parts[key] = h
        return h


def gibbs_state(h: HamiltonianSpec, t: float, temperature: float) -> DensityMatrix:
    """``exp(-H(t)/T)/Z`` with the spectrum shifted by its minimum first."""
    if not temperature > 0:
        raise NonPositiveTemperature(f"temperature must be positive, got {temperature!r}")
    es = linalg.eig_hermitian(h.at(t))
    w = np.exp(-(es.eigenvalues - es.eigenvalues[0]) / temperature)
    p = w / w.sum()
    m = linalg.function_from_eigensystem(es, p)
    ascending = HermitianEigenSystem(p[::-1].copy(), es.eigenvectors[:, ::-1].copy())
    return DensityMatrix(h.layout, m, 1e-12, 1e-12, -1e-10, ascending)


def entropy_from_eigenvalues(w: np.ndarray, zero_clamp: float = linalg.ZERO_CLAMP) -> float:
    w = np.asarray(w, dtype=np.float64)
    if np.any(w < -zero_clamp):
        raise linalg.DomainError(f"eigenvalue {w.min():.3e} below -{zero_clamp:.1e}")
    pos = w[w > zero_clamp]
    return float(-np.sum(pos * np.log(pos)))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """``S = -tr(rho ln rho)`` in nats, with ``0 ln 0 = 0``."""
    return entropy_from_eigenvalues(rho.eig.eigenvalues)


def correlation_entropy(rho_ab: DensityMatrix, split) -> float:
    """``S_AB - S_A - S_B``, i.e. minus the mutual information (never positive)."""
    other = rho_ab.layout.complement(split)
    s_ab = von_neumann_entropy(rho_ab)
    s_a = von_neumann_entropy(rho_ab.reduced(split))
    s_b = von_neumann_entropy(rho_ab.reduced(other))
    return s_ab - s_a - s_b


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """``tr rho (ln rho - ln sigma)``; sigma is assumed full rank."""
    return float(np.real(np.trace(rho.matrix @ (rho.log() - sigma.log()))))
