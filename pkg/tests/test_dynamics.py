import math

import numpy as np
import pytest

from qthermo import dynamics, hilbert, linalg
from qthermo.dynamics import DissipationChannel, Generator, lindblad_rhs, propagate, step_rk4
from qthermo.errors import DimensionMismatch, StepRejected
from qthermo.hilbert import PAULI, DensityMatrix, HamiltonianSpec, SpaceLayout

from conftest import random_density, random_hermitian

Q1 = SpaceLayout.qubits(1)
LOWER = PAULI["-"]  # |0><1|, ground = |0>


def damping(gamma, omega=1.0):
    h = HamiltonianSpec(Q1, [(-omega / 2, "Z")])
    return Generator(h, [DissipationChannel(gamma, LOWER, "decay")])


def test_rhs_stationary_and_closed(rng):
    h = HamiltonianSpec(Q1, [(0.7, "Z")])
    gen = Generator(h)
    rho = hilbert.diagonal_state(Q1, [0.3, 0.7])
    assert linalg.max_abs(lindblad_rhs(gen, 0.0, rho)) == 0.0
    rho = DensityMatrix(Q1, random_density(rng, 2))
    hm = h.at(0.0)
    expected = -1j * (hm @ rho.matrix - rho.matrix @ hm)
    assert linalg.max_abs(lindblad_rhs(gen, 0.0, rho) - expected) <= 1e-15


def test_rhs_amplitude_damping_symbolic():
    gamma = 0.37
    rho = hilbert.basis_state(Q1, "1")
    out = lindblad_rhs(damping(gamma), 0.0, rho)
    assert linalg.max_abs(out - gamma * np.diag([1.0, -1.0])) <= 1e-15


def test_rhs_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        lindblad_rhs(damping(1.0), 0.0, np.eye(4) / 4)


@pytest.mark.parametrize("seed", range(40))
def test_rhs_traceless_hermitian_with_negative_rates(seed):
    rng = np.random.default_rng(seed)
    d = 2 + seed % 4
    layout = SpaceLayout((d,))
    h = HamiltonianSpec(layout, [(1.0, random_hermitian(rng, d))])
    ops = []
    for _ in range(1 + seed % 3):
        m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        m -= np.trace(m) / d * np.eye(d)
        ops.append(dynamics.normalized(m))
    chans = [DissipationChannel(float(rng.uniform(-1, 1)), m) for m in ops]
    gen = Generator(h, chans)
    out = lindblad_rhs(gen, 0.0, DensityMatrix(layout, random_density(rng, d)))
    assert abs(np.trace(out)) <= 1e-12
    assert linalg.hermiticity_error(out) <= 1e-12


def test_generator_rejects_bad_channels():
    h = HamiltonianSpec(Q1, [(1.0, "Z")])
    with pytest.raises(ValueError):
        Generator(h, [DissipationChannel(1.0, np.eye(2) / math.sqrt(2))])
    with pytest.raises(ValueError):
        Generator(h, [DissipationChannel(1.0, 2 * LOWER)])
    with pytest.raises(DimensionMismatch):
        Generator(h, [DissipationChannel(1.0, np.zeros((3, 3)))])
    with pytest.raises(ValueError):
        Generator(h, [DissipationChannel(1.0, LOWER)] * 4)


def test_validate_basis_examples():
    s = 1 / math.sqrt(2)
    assert dynamics.validate_dissipator_basis([PAULI["X"] * s, PAULI["Y"] * s, PAULI["Z"] * s]).passed
    report = dynamics.validate_dissipator_basis([np.eye(2) * s])
    assert not report.passed and report.trace_norms[0] == pytest.approx(math.sqrt(2))
    report = dynamics.validate_dissipator_basis([PAULI["X"] * s, PAULI["X"] * s])
    assert not report.passed
    assert abs(report.gram[0, 1] - 1) <= 1e-15


def test_validate_generator_regime():
    h = HamiltonianSpec(Q1, [(1.0, "Z")])
    gen = Generator(h, [DissipationChannel(lambda t: math.cos(t), LOWER)])
    assert gen._superop is None
    assert dynamics.validate_generator(gen, np.linspace(0, 4, 9)).regime == "non-markovian"
    assert dynamics.validate_generator(damping(0.1), [0.0]).regime == "markovian"


def test_null_generator_step_is_identity(rng):
    layout = SpaceLayout((3,))
    gen = Generator(HamiltonianSpec(layout, []))
    rho = DensityMatrix(layout, random_density(rng, 3))
    out = step_rk4(gen, 0.0, rho, 1e-3)
    herm = 0.5 * (rho.matrix + rho.matrix.conj().T)
    tr = np.trace(herm).real
    expected = herm if tr == 1.0 else herm / tr
    assert np.array_equal(out.matrix, expected)


def _exact_closed(rho0, hm, t):
    es = linalg.eig_hermitian(hm)
    u = linalg.function_from_eigensystem(es, np.exp(-1j * es.eigenvalues * t))
    return u @ rho0 @ u.conj().T


def rk4_errors(steps=(0.1, 0.05, 0.025), t1=2.0):
    h = HamiltonianSpec(Q1, [(1.0, "Z")])
    gen = Generator(h)
    rho0 = hilbert.make_pure(Q1, [math.cos(0.3), math.sin(0.3) * np.exp(0.4j)])
    exact = _exact_closed(rho0.matrix, h.at(0.0), t1)
    return [linalg.max_abs(propagate(gen, rho0, 0.0, t1, hs).states[-1].matrix - exact) for hs in steps]


def test_rk4_fourth_order():
    e = rk4_errors()
    orders = [math.log2(e[0] / e[1]), math.log2(e[1] / e[2])]
    assert min(orders) >= 3.8
    # x16 per halving within 20 percent
    for a, b in zip(e, e[1:]):
        assert 16 * 0.8 <= a / b <= 16 * 1.2


def test_trace_before_renormalization(rng):
    h = HamiltonianSpec.from_pauli([(-0.5, "ZI"), (-0.5, "IZ"), (0.3, "XX")])
    chans = dynamics.thermal_channels(h, hilbert.pauli_string("-I"), 0.5, 1.0)
    gen = Generator(h, chans)
    m = random_density(rng, 4)
    for _ in range(20):
        step = dynamics._rk4(gen, 0.0, m, 1e-3)
        assert step.trace_deviation <= 1e-10
        m = step.matrix


def test_step_rejected_reports_time():
    gen = damping(-50.0)
    rho = hilbert.basis_state(Q1, "1")
    with pytest.raises(StepRejected) as err:
        propagate(gen, rho, 0.0, 1.0, 0.05)
    assert err.value.time == pytest.approx(0.05)


def test_propagate_empty_interval(rng):
    rho = DensityMatrix(Q1, random_density(rng, 2))
    traj = propagate(damping(1.0), rho, 0.5, 0.5, 1e-3)
    assert len(traj) == 1 and traj.states[0] is rho


def test_time_grid():
    times, h = dynamics.time_grid(0.0, 1.0, 0.3)
    assert len(times) == 5 and times[-1] == 1.0 and h == pytest.approx(0.25)
    with pytest.raises(ValueError):
        dynamics.time_grid(1.0, 0.0, 0.1)


def test_amplitude_damping_population():
    gamma = 0.8
    traj = propagate(damping(gamma), hilbert.basis_state(Q1, "1"), 0.0, 3.0, 1e-3)
    pops = np.array([s.matrix[1, 1].real for s in traj.states])
    assert np.max(np.abs(pops - np.exp(-gamma * traj.times))) <= 1e-6
    assert traj.metadata["regime"] == "markovian"
    assert traj.metadata["min_eigenvalue"] >= -1e-6


def test_closed_exchange_entropy_constant():
    h = HamiltonianSpec.from_pauli([(-0.5, "ZI"), (-0.5, "IZ"), (0.25, "XX"), (0.25, "YY")])
    rho0 = DensityMatrix(SpaceLayout.qubits(2), np.diag([0.1, 0.6, 0.2, 0.1]))
    traj = propagate(Generator(h), rho0, 0.0, 3.0, 1e-3)
    s = [hilbert.von_neumann_entropy(x) for x in traj.states]
    assert max(abs(v - s[0]) for v in s) <= 1e-8


@pytest.mark.parametrize("temperature", [0.3, 1.0, 4.0])
def test_detailed_balance_fixed_point(temperature):
    h = HamiltonianSpec(Q1, [(-0.75, "Z")])
    gen = Generator(h, dynamics.thermal_channels(h, LOWER, 0.4, temperature))
    rho = hilbert.gibbs_state(h, 0.0, temperature)
    assert linalg.max_abs(lindblad_rhs(gen, 0.0, rho)) <= 1e-10


def test_multi_bath_rates_add():
    h = HamiltonianSpec(Q1, [(-0.5, "Z")])
    chans = dynamics.bath_channels(h, LOWER, [(1.0, 2.0), (0.5, 0.5)])
    n1, n2 = 1 / math.expm1(1 / 2.0), 1 / math.expm1(1 / 0.5)
    assert chans[0].rate(0.0) == pytest.approx(n1 + 1 + 0.5 * (n2 + 1), rel=1e-14)
    assert chans[1].rate(0.0) == pytest.approx(n1 + 0.5 * n2, rel=1e-14)
    with pytest.raises(ValueError):
        dynamics.bath_channels(h, PAULI["+"], [(1.0, 1.0)])


def test_time_dependent_path_matches_superoperator(rng):
    h_static = HamiltonianSpec(Q1, [(-0.5, "Z"), (0.2, "X")])
    h_dyn = HamiltonianSpec(Q1, [(lambda t: -0.5, "Z"), (lambda t: 0.2, "X")])
    chans = [DissipationChannel(0.3, LOWER), DissipationChannel(0.1, PAULI["+"])]
    dyn_chans = [DissipationChannel(lambda t: 0.3, LOWER), DissipationChannel(lambda t: 0.1, PAULI["+"])]
    g1, g2 = Generator(h_static, chans), Generator(h_dyn, dyn_chans)
    assert g1._superop is not None and g2._superop is None
    m = random_density(rng, 2)
    assert linalg.max_abs(g1.rhs(0.0, m) - g2.rhs(0.0, m)) <= 1e-15
