import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_state
from schwinger_trotter.circuit import Circuit, apply_circuit
from schwinger_trotter.lattice import (LatticeParams, basis_index, build_dense_hamiltonian,
                                       exact_propagator, vacuum_index)
from schwinger_trotter.measurement import (ae_config, ae_query_count, ae_tgate_count, basis_state_prep,
                                           build_hadamard_test, count_from_probability, density_truth,
                                           estimate_amplitude, grover_iterations, hadamard_target_qubits,
                                           median_repetitions_bound, qft_tgate_count, sample_pair_density,
                                           shots_required, simulate_amplitude_estimation,
                                           weighted_hadamard_analytic, weighted_hadamard_probability,
                                           zero_outcome_probability)

P2 = LatticeParams(2, 1, 1.0, 1.0)
P4 = LatticeParams(4, 1, 1.0, 1.0)


def random_prep(n, seed, depth=4):
    rng = np.random.default_rng(seed)
    c = Circuit(n)
    for _ in range(depth):
        for q in range(n):
            c.append("H", q).append("Rz", q, theta=float(rng.uniform(-np.pi, np.pi)))
        for q in range(n - 1):
            c.append("CNOT", q, q + 1)
    return c


def test_shots_examples():
    assert shots_required(0.1, 0.5) == (51, pytest.approx(1.02))
    assert shots_required(0.5, 0.0) == (2, pytest.approx(2.0))
    for bad in [(0.0, 0.5), (0.1, 1.0), (0.1, -0.1)]:
        with pytest.raises(ValueError):
            shots_required(*bad)


@given(st.floats(1e-3, 0.02), st.floats(0.0, 0.9))
def test_shots_scale_inverse_square(eps, kappa):
    ratio = shots_required(eps / 2, kappa)[0] / shots_required(eps, kappa)[0]
    assert 3.9 <= ratio <= 4.1


@given(st.floats(1e-3, 1.0), st.floats(0.0, 0.99))
def test_shots_formula(eps, kappa):
    n, nu = shots_required(eps, kappa)
    assert nu == pytest.approx(4 * eps**2 * (1 - kappa) + 1)
    assert n == math.floor(nu / (4 * eps**2 * (1 - kappa)) * (1 + 1e-12))


def test_sampling_on_eigenstates():
    for seed in range(5):
        psi = np.zeros(8, dtype=complex)
        psi[vacuum_index(P2)] = 1
        assert sample_pair_density(P2, psi, 7, seed).estimate == 0.0
        psi = np.zeros(8, dtype=complex)
        psi[basis_index(P2, [1, 1], [0])] = 1
        assert sample_pair_density(P2, psi, 7, seed).estimate == 0.5


def test_sampling_rejects_bad_states():
    with pytest.raises(ValueError):
        sample_pair_density(P2, np.ones(8), 5, 0)
    with pytest.raises(ValueError):
        sample_pair_density(P2, np.ones(4) / 2, 5, 0)
    with pytest.raises(ValueError):
        sample_pair_density(P2, np.ones(8) / math.sqrt(8), 0, 0)


def test_sampling_unbiased_on_uniform_superposition():
    psi = np.ones(8, dtype=complex) / math.sqrt(8)
    truth = density_truth(P2, psi)
    assert truth == pytest.approx(0.25)  # the positron site is occupied in half the basis states
    n_shots, seeds = 5, 10_000
    est = np.array([sample_pair_density(P2, psi, n_shots, s).estimate for s in range(seeds)])
    sigma = math.sqrt(0.25 * 0.75 / P2.N**2 / n_shots / seeds)
    assert abs(est.mean() - truth) <= 3 * sigma


def test_sampling_rms_on_evolved_state():
    psi = np.zeros(8, dtype=complex)
    psi[vacuum_index(P2)] = 1
    psi = exact_propagator(build_dense_hamiltonian(P2), 1.0) @ psi
    shots, _ = shots_required(0.1, 0.5)
    errs = [sample_pair_density(P2, psi, shots, s).error for s in range(500)]
    assert math.sqrt(np.mean(np.square(errs))) <= 0.1


def _hadamard_oracle(m, state, targets):
    """Average of <psi|U_j|psi> with explicit -Z matrices on the targets and identities elsewhere."""
    n = int(math.log2(state.size))
    total = 0.0
    for j in range(2 ** (m + 2)):
        if j < 2**m:
            z = np.array([1.0, -1.0])
            diag = np.ones(1)
            for q in reversed(range(n)):
                diag = np.kron(diag, z if q == targets[j] else np.ones(2))
            total += np.vdot(state, -diag * state).real
        else:
            total += 1.0
    return (total / 2 ** (m + 2)) ** 2


@pytest.mark.parametrize("m", [0, 1, 2])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_hadamard_test_matches_analytic(m, seed):
    n = 2 ** (m + 1)
    prep = random_prep(n, seed)
    zero = np.zeros(2**n, dtype=complex)
    zero[0] = 1
    state = apply_circuit(prep, zero)
    got = zero_outcome_probability(build_hadamard_test(m, prep))
    assert got == pytest.approx(_hadamard_oracle(m, state, hadamard_target_qubits(m)), abs=1e-9)


def test_hadamard_examples():
    m = 1
    # site register only: qubits 1 and 3 are the positron sites
    assert hadamard_target_qubits(m) == [1, 3]
    empty = zero_outcome_probability(build_hadamard_test(m, basis_state_prep(4, 0b0101)))
    full = zero_outcome_probability(build_hadamard_test(m, basis_state_prep(4, 0b1010)))
    one = zero_outcome_probability(build_hadamard_test(m, basis_state_prep(4, 0b0010)))
    assert empty == pytest.approx(0.25) and count_from_probability(m, empty) == pytest.approx(0)
    assert full == pytest.approx(1.0) and count_from_probability(m, full) == pytest.approx(2)
    assert one == pytest.approx(9 / 16) and count_from_probability(m, one) == pytest.approx(1)


def test_hadamard_test_on_lattice_register():
    prep = basis_state_prep(P4.n_qubits, vacuum_index(P4))
    assert zero_outcome_probability(build_hadamard_test(1, prep, P4)) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        build_hadamard_test(1, basis_state_prep(P2.n_qubits, 0), P2)
    with pytest.raises(ValueError):
        build_hadamard_test(-1, prep)


@given(st.integers(0, 2**31), st.integers(2, 6))
def test_weighted_hadamard(seed, k):
    rng = np.random.default_rng(seed)
    state = random_state(rng, 4)
    unitaries = []
    for _ in range(k):
        q, r = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
        unitaries.append(q)
    weights = rng.uniform(0.01, 3.0, k)
    s = sum(w * np.vdot(state, U @ state) for w, U in zip(weights, unitaries)) / weights.sum()
    got = weighted_hadamard_probability(state, unitaries, weights)
    assert got == pytest.approx(abs(s) ** 2, abs=1e-9)
    assert got == pytest.approx(weighted_hadamard_analytic(state, unitaries, weights), abs=1e-9)


def test_ae_config_examples():
    cfg = ae_config(0.1)
    assert cfg.eps_L == 0.05 and cfg.L == 92
    assert math.sqrt(2) * math.pi / 92 + (math.pi / 92) ** 2 <= 0.05
    assert math.sqrt(2) * math.pi / 91 + (math.pi / 91) ** 2 > 0.05
    assert cfg.R <= median_repetitions_bound(0.1) <= 36.1
    big = ae_config(1.0)
    assert big.L <= 2 * math.sqrt(2) * math.pi + 4
    with pytest.raises(ValueError):
        ae_config(0.0)
    with pytest.raises(ValueError):
        grover_iterations(-1.0)


@given(st.floats(1e-4, 1.4))
def test_ae_config_invariants(eps):
    cfg = ae_config(eps)
    assert cfg.L <= math.sqrt(2) * math.pi / cfg.eps_L + 4
    assert cfg.R <= median_repetitions_bound(eps)
    L = cfg.L
    assert math.sqrt(2) * math.pi / L + (math.pi / L) ** 2 <= cfg.eps_L
    assert L == 1 or math.sqrt(2) * math.pi / (L - 1) + (math.pi / (L - 1)) ** 2 > cfg.eps_L


@pytest.mark.parametrize("k,M", [(1, 8), (3, 16), (5, 92)])
def test_phase_estimation_exact_eigencase(k, M):
    a = math.sin(math.pi * k / M) ** 2
    prepared = np.array([math.sqrt(a), math.sqrt(1 - a), 0, 0], dtype=complex)
    for seed in range(3):
        est = estimate_amplitude(prepared, M, 5, np.random.default_rng(seed))
        assert est == pytest.approx(a, abs=1e-12)


@pytest.mark.parametrize("which,truth", [("vacuum", 0.0), ("full", 0.5)])
def test_amplitude_estimation_on_basis_states(which, truth):
    occ = [r % 2 for r in range(1, 5)] if which == "vacuum" else [1] * 4
    prep = basis_state_prep(P4.n_qubits, basis_index(P4, occ, [0, 0, 0]))
    cfg = ae_config(0.1, 1)
    hits = 0
    for seed in range(200):
        res = simulate_amplitude_estimation(prep, cfg, seed, P4, 0.1)
        assert res.truth == pytest.approx(truth)
        assert res.shots_or_queries == cfg.L * cfg.R
        hits += abs(res.estimate - truth) <= 0.1
    assert hits >= 160


def test_query_counts():
    assert ae_query_count(0.1) == pytest.approx(13_623, rel=1e-3)
    grid = np.geomspace(1e-3, 1.0, 20)
    q = [ae_query_count(e) for e in grid]
    assert all(a > b for a, b in zip(q, q[1:]))
    assert ae_tgate_count(0.1, 2) > qft_tgate_count(0.1) * math.log(500)
    with pytest.raises(ValueError):
        ae_query_count(0.0)


def test_ae_tgate_count_small_registers():
    assert ae_tgate_count(0.1, 0) == ae_tgate_count(0.1, 1) == pytest.approx(qft_tgate_count(0.1) * math.log(500))
    with pytest.raises(ValueError):
        ae_tgate_count(0.1, -1)
