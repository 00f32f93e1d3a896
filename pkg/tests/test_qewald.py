import itertools
import math

import numpy as np
import pytest

from ewaldqft import charges, ewald, qewald


def random_system(seed, m=8, d=2, n=6):
    return charges.generate_configuration(
        charges.ConfigSpec(charges.MIXED, n, seed), m, d)


def structure_factor_sq_oracle(system):
    """|S(k_s)|^2 per flattened DFT index, by plain summation over charges."""
    m, d = system.grid_size, system.d
    out = np.empty(m ** d)
    for flat, svec in enumerate(itertools.product(range(m), repeat=d)):
        s_k = 0.0 + 0.0j
        for q, x in zip(system.charges, system.coords):
            phase = 2.0 * math.pi / m * sum(s * c for s, c in zip(svec, x))
            s_k += q * complex(math.cos(phase), math.sin(phase))
        out[flat] = abs(s_k) ** 2
    return out


def test_encoding_round_trip():
    emap = qewald.EncodingMap(d=3, bits_per_axis=2)
    coords = np.array([[0, 0, 0], [1, 2, 3], [3, 3, 3]])
    indices = emap.encode(coords)
    assert list(indices) == [0, 1 * 16 + 2 * 4 + 3, 63]
    assert np.array_equal(emap.decode(indices), coords)
    with pytest.raises(ValueError):
        emap.encode([[4, 0, 0]])
    with pytest.raises(ValueError):
        emap.decode([64])


def test_encoding_map_from_system():
    system = random_system(0, m=16, d=2)
    emap = qewald.encoding_map(system)
    assert emap.bits_per_axis == 4
    assert emap.n_qubits == 8
    assert emap.grid_size == 16


def test_encode_charges_amplitudes():
    system = charges.make_system(2, 4, [3.0, -4.0], [[0, 1], [2, 3]])
    state = qewald.encode_charges(system)
    assert abs(state.norm() - 1.0) < 1e-15
    assert state.amps[1] == pytest.approx(0.6)
    assert state.amps[11] == pytest.approx(-0.8)
    assert np.count_nonzero(state.amps) == 2


def test_probabilities_sum_to_one():
    probs = qewald.probabilities_exact(random_system(1, m=8, d=2, n=8))
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("d,m", [(2, 4), (2, 8), (3, 4)])
def test_structure_factor_identity(d, m):
    system = random_system(5, m=m, d=d, n=min(8, m ** d // 2))
    probs = qewald.probabilities_exact(system)
    s_sq = qewald.structure_factor_sq_from_probs(system, probs)
    assert np.max(np.abs(s_sq - structure_factor_sq_oracle(system))) < 1e-10


@pytest.mark.parametrize("d,m", [(2, 8), (3, 8)])
def test_exact_mode_matches_fft(d, m):
    system = random_system(7, m=m, d=d, n=10)
    params = ewald.default_params(system)
    estimate = qewald.estimate_reciprocal_energy(system, params)
    assert estimate.mode == qewald.EXACT
    assert estimate.shots == 0
    assert estimate.e_long == pytest.approx(
        ewald.reciprocal_energy_fft(system, params), rel=1e-12)


def test_sampled_mode_deterministic():
    system = random_system(2, m=4, d=2, n=4)
    params = ewald.default_params(system)
    a = qewald.estimate_reciprocal_energy(system, params, mode=qewald.SAMPLED,
                                          shots=2000, seed=11)
    b = qewald.estimate_reciprocal_energy(system, params, mode=qewald.SAMPLED,
                                          shots=2000, seed=11)
    assert a == b
    assert a.shots == 2000 and a.seed == 11


def test_sampled_mode_requires_shots():
    system = random_system(2, m=4, d=2, n=4)
    params = ewald.default_params(system)
    with pytest.raises(ValueError):
        qewald.estimate_reciprocal_energy(system, params, mode=qewald.SAMPLED)
    with pytest.raises(ValueError):
        qewald.estimate_reciprocal_energy(system, params, mode="noisy")


def test_estimate_from_frequencies_linear():
    freqs = np.array([0.5, 0.25, 0.25])
    weights = np.array([0.0, 2.0, 4.0])
    assert qewald.estimate_from_frequencies(freqs, weights, 10.0) == pytest.approx(15.0)


def test_sampled_error_shrinks_with_shots():
    system = random_system(3, m=8, d=2, n=8)
    params = ewald.default_params(system)
    exact = qewald.estimate_reciprocal_energy(system, params).e_long

    def median_err(shots):
        errs = [abs(qewald.estimate_reciprocal_energy(
            system, params, mode=qewald.SAMPLED, shots=shots, seed=s).e_long
            - exact) / abs(exact) for s in range(12)]
        return float(np.median(errs))

    assert median_err(100_000) < median_err(100) / 3.0


def test_bias_check():
    system = random_system(4, m=4, d=2, n=4)
    params = ewald.default_params(system)
    report = qewald.estimator_bias_check(system, params, shots=2000,
                                         seeds=range(12))
    assert report.n_seeds == 12
    assert report.within_three_se
    with pytest.raises(ValueError):
        qewald.estimator_bias_check(system, params, shots=100, seeds=range(12))
    with pytest.raises(ValueError):
        qewald.estimator_bias_check(system, params, shots=2000, seeds=range(3))
