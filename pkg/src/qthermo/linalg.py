"""Dense complex-matrix kernel: Hermitian eigensystems, matrix functions,
tensor products, partial traces and commutators.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. The Jacobi
diagonalizer is compiled when the ``_jacobi_ext`` extension is importable;
otherwise the pure-Python kernel is used. Set ``QTHERMO_PURE_PYTHON=1`` to
force the fallback.
"""

from __future__ import annotations

import math
import os
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import _jacobi_py
from .errors import DimensionMismatch, DomainError, NoConvergence, NotHermitian

if os.environ.get("QTHERMO_PURE_PYTHON"):
    _kernel = _jacobi_py
    BACKEND = "python"
else:
    try:
        from . import _jacobi_ext as _kernel

        BACKEND = "compiled"
    except ImportError:
        _kernel = _jacobi_py
        BACKEND = "python"

HERMITICITY_TOL = 1e-10
ZERO_CLAMP = 1e-14
MAX_SWEEPS = 100


class HermitianEigenSystem(NamedTuple):
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # orthonormal columns


def as_matrix(a) -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or 0 in m.shape:
        raise DimensionMismatch(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _square(m: np.ndarray) -> None:
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def hermiticity_error(a: np.ndarray) -> float:
    return max_abs(a - dagger(a))


def eig_hermitian(
    a,
    hermiticity_tol: float = HERMITICITY_TOL,
    *,
    max_sweeps: int = MAX_SWEEPS,
    backend=None,
) -> HermitianEigenSystem:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    The input is symmetrized as ``(a + a^dagger)/2`` after the hermiticity
    check. Eigenvalues are sorted ascending (stable order for ties).
    """
    m = as_matrix(a)
    _square(m)
    err = hermiticity_error(m)
    if err > hermiticity_tol:
        raise NotHermitian(f"||a - a^dagger||_max = {err:.3e} exceeds {hermiticity_tol:.1e}")
    m = 0.5 * (m + dagger(m))
    kernel = _kernel if backend is None else backend
    diag, vecs, sweeps = kernel.jacobi_hermitian(m, max_sweeps)
    if sweeps < 0:
        raise NoConvergence(f"Jacobi sweep budget of {max_sweeps} exhausted")
    order = np.argsort(diag, kind="stable")
    return HermitianEigenSystem(diag[order], vecs[:, order])


def _is_log(f) -> bool:
    return f in ("log", "ln", np.log, math.log)


def _resolve(f) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(f, str):
        named = {"exp": np.exp, "sqrt": np.sqrt}
        if f not in named:
            raise ValueError(f"unknown matrix function {f!r}")
        return named[f]
    if f is math.exp:
        return np.exp
    return f


def clamped_log(eigenvalues: np.ndarray, zero_clamp: float = ZERO_CLAMP) -> np.ndarray:
    """ln of a spectrum with |lambda| <= zero_clamp mapped to ln(zero_clamp).

    Anything that multiplies these logs by the eigenvalue itself (entropy,
    entropy rates) sees a contribution bounded by zero_clamp * |ln zero_clamp|,
    which realizes the 0 ln 0 = 0 convention.
    """
    w = np.asarray(eigenvalues, dtype=np.float64)
    if np.any(w < -zero_clamp):
        raise DomainError(
            f"eigenvalue {w.min():.3e} below -{zero_clamp:.1e}: matrix is not positive semidefinite"
        )
    return np.log(np.where(w > zero_clamp, w, zero_clamp))


def function_from_eigensystem(es: HermitianEigenSystem, values: np.ndarray) -> np.ndarray:
    v = es.eigenvectors
    return (v * values) @ dagger(v)


def hermitian_matrix_function(
    a,
    f,
    zero_clamp: float = ZERO_CLAMP,
    hermiticity_tol: float = HERMITICITY_TOL,
) -> np.ndarray:
    """Return ``V f(Lambda) V^dagger`` for Hermitian ``a``.

    ``f`` is a real scalar map (a callable acting on an eigenvalue array, or
    one of ``"log"``, ``"exp"``, ``"sqrt"``). For the logarithm the clamp
    convention of :func:`clamped_log` applies.
    """
    es = eig_hermitian(a, hermiticity_tol)
    if _is_log(f):
        values = clamped_log(es.eigenvalues, zero_clamp)
    else:
        values = np.asarray(_resolve(f)(es.eigenvalues), dtype=np.float64)
    return function_from_eigensystem(es, values)


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product; the first factor indexes the most significant digit."""
    return np.kron(as_matrix(a), as_matrix(b))


def tensor_all(factors: Sequence) -> np.ndarray:
    out = as_matrix(factors[0])
    for f in factors[1:]:
        out = np.kron(out, as_matrix(f))
    return out


def _check_dims(rho: np.ndarray, dims: Sequence[int]) -> list[int]:
    dims = [int(d) for d in dims]
    if not dims or any(d <= 0 for d in dims):
        raise DimensionMismatch(f"invalid subsystem dims {dims}")
    total = math.prod(dims)
    if rho.shape != (total, total):
        raise DimensionMismatch(f"matrix shape {rho.shape} does not match dims {dims}")
    return dims


def partial_trace(rho, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Kept subsystems appear in ascending index order in the result.
    """
    m = as_matrix(rho)
    dims = _check_dims(m, dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise DimensionMismatch(f"keep={keep} is not a nonempty subset of range({n})")
    drop = [i for i in range(n) if i not in keep]
    dk = math.prod(dims[i] for i in keep)
    dd = math.prod(dims[i] for i in drop) if drop else 1
    t = m.reshape(dims + dims)
    t = t.transpose(keep + drop + [n + i for i in keep] + [n + i for i in drop])
    t = t.reshape(dk, dd, dk, dd)
    return np.trace(t, axis1=1, axis2=3)


def embed(op, dims: Sequence[int], sites: Sequence[int]) -> np.ndarray:
    """Lift an operator on ``sites`` (ascending order) to the full space."""
    dims = [int(d) for d in dims]
    n = len(dims)
    sites = sorted(int(s) for s in sites)
    rest = [i for i in range(n) if i not in sites]
    ds = math.prod(dims[i] for i in sites)
    dr = math.prod(dims[i] for i in rest) if rest else 1
    m = as_matrix(op)
    if m.shape != (ds, ds):
        raise DimensionMismatch(f"operator shape {m.shape} does not match sites {sites}")
    full = np.kron(m, np.eye(dr))
    order = sites + rest
    t = full.reshape([dims[i] for i in order] * 2)
    inv = list(np.argsort(order))
    t = t.transpose(inv + [n + i for i in inv])
    total = ds * dr
    return t.reshape(total, total)


def commutator(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    _square(a)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a
