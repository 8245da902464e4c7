"""Compare the compiled and pure-Python Jacobi eigensolvers.

    python benchmarks/bench_eig.py [--dims 2 4 8 16] [--repeat 5]

Also times a short propagation with each backend, since every RK4 step
diagonalizes the new state once.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from qthermo import _jacobi_py

try:
    from qthermo import _jacobi_ext
except ImportError:
    _jacobi_ext = None

PROPAGATE = """
import time
from qthermo import hilbert, dynamics, BACKEND
h = hilbert.HamiltonianSpec.from_pauli([(-0.5, "ZI"), (-0.5, "IZ"), (0.25, "XX"), (0.25, "YY")])
gen = dynamics.Generator(h, dynamics.thermal_channels(h, hilbert.pauli_string("-I"), 0.2, 1.0))
rho = hilbert.basis_state(h.layout, "10")
t = time.perf_counter()
dynamics.propagate(gen, rho, 0.0, 2.0, 1e-3)
print(BACKEND, time.perf_counter() - t)
"""


def random_hermitian(rng, d):
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (x + x.conj().T) / 2


def best_of(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--dims", type=int, nargs="+", default=[2, 4, 8, 16])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _jacobi_ext is None:
        sys.exit("compiled extension not built; run `pip install -e . --no-build-isolation` first")

    rng = np.random.default_rng(0)
    print(f"{'d':>4} {'python [ms]':>12} {'compiled [ms]':>14} {'speedup':>8}  identical")
    for d in args.dims:
        a = random_hermitian(rng, d)
        number = max(1, 200 // d)
        t_py = best_of(lambda: _jacobi_py.jacobi_hermitian(a), args.repeat, number)
        t_c = best_of(lambda: _jacobi_ext.jacobi_hermitian(a), args.repeat, number)
        w1, v1, _ = _jacobi_py.jacobi_hermitian(a)
        w2, v2, _ = _jacobi_ext.jacobi_hermitian(a)
        same = np.array_equal(w1, w2) and np.array_equal(v1, v2)
        print(f"{d:4d} {1e3 * t_py:12.3f} {1e3 * t_c:14.4f} {t_py / t_c:8.1f}  {same}")

    print("\npropagation, two qubits with a bath, 2000 RK4 steps:")
    for forced in (False, True):
        env = dict(os.environ)
        env.pop("QTHERMO_PURE_PYTHON", None)
        if forced:
            env["QTHERMO_PURE_PYTHON"] = "1"
        out = subprocess.run([sys.executable, "-c", PROPAGATE], env=env, capture_output=True, text=True, check=True)
        backend, seconds = out.stdout.split()
        print(f"  {backend:8s} {float(seconds):.2f} s")


if __name__ == "__main__":
    main()
