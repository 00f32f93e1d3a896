"""Reciprocal-space energy via the emulated quantum pipeline.

Charges are encoded as amplitudes of a sparse register state, a
d-dimensional QFT turns them into structure-factor amplitudes, and the
energy is read off either from exact probabilities or from measurement
shot frequencies. Shares the reciprocal weight grid with the classical
backends bit-for-bit, so exact mode reproduces the grid-FFT result up to
floating-point noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import ewald, qsim
from .charges import ChargeSystem, validate

EXACT = "exact"
SAMPLED = "sampled"


@dataclass(frozen=True)
class EncodingMap:
    """Bijection between grid coordinates and basis indices.

    Axis 0 occupies the most significant qubit block; within an axis the
    most significant qubit comes first, so the basis index is the plain
    axis-major integer sum(x_a * M^(d-1-a)).
    """

    d: int
    bits_per_axis: int

    @property
    def grid_size(self) -> int:
        return 1 << self.bits_per_axis

    @property
    def n_qubits(self) -> int:
        return self.d * self.bits_per_axis

    def encode(self, coords: np.ndarray) -> np.ndarray:
        coords = np.atleast_2d(np.asarray(coords, dtype=np.int64))
        if coords.shape[1] != self.d:
            raise ValueError(f"expected {self.d} coordinates per point")
        if np.any(coords < 0) or np.any(coords >= self.grid_size):
            raise ValueError("coordinate outside the grid")
        flat = np.zeros(len(coords), dtype=np.int64)
        for axis in range(self.d):
            flat = flat * self.grid_size + coords[:, axis]
        return flat

    def decode(self, indices) -> np.ndarray:
        rest = np.atleast_1d(np.asarray(indices, dtype=np.int64)).copy()
        if np.any(rest < 0) or np.any(rest >= self.grid_size ** self.d):
            raise ValueError("basis index outside the register")
        coords = np.empty((len(rest), self.d), dtype=np.int64)
        for axis in range(self.d - 1, -1, -1):
            coords[:, axis] = rest % self.grid_size
            rest //= self.grid_size
        return coords


def encoding_map(system: ChargeSystem) -> EncodingMap:
    bits = system.grid_size.bit_length() - 1
    return EncodingMap(d=system.d, bits_per_axis=bits)


def encode_charges(system: ChargeSystem) -> qsim.Statevector:
    """|psi> = sum_j (q_j / ||q||) |r_j>, injected directly into the register."""
    result = validate(system)
    if not result.ok:
        raise ValueError(result.reason)
    emap = encoding_map(system)
    indices = emap.encode(system.coords)
    amps = system.charges / system.charge_norm
    return qsim.inject_sparse_state(emap.n_qubits, zip(indices, amps))


def probabilities_exact(system: ChargeSystem) -> np.ndarray:
    """Measurement distribution after the d-dimensional QFT, indexed by basis state."""
    emap = encoding_map(system)
    state = encode_charges(system)
    state = qsim.apply_qft_multidim(state, emap.d, emap.bits_per_axis)
    return state.probabilities()


def structure_factor_sq_from_probs(system: ChargeSystem,
                                   probs: np.ndarray) -> np.ndarray:
    """|S(k_s)|^2 = M^d * ||q||^2 * p_s on the flattened DFT grid."""
    scale = float(system.grid_size ** system.d) * system.charge_norm ** 2
    return scale * np.asarray(probs)


@dataclass(frozen=True)
class ReciprocalEstimate:
    e_long: float
    mode: str
    shots: int
    seed: int | None


def estimate_from_frequencies(freqs: np.ndarray, weights: np.ndarray,
                              scale: float) -> float:
    """Linear estimator scale * sum_s w_s * p_s (weights already zero at s=0)."""
    return scale * float(np.asarray(weights) @ np.asarray(freqs))


def estimate_reciprocal_energy(system: ChargeSystem, params: ewald.EwaldParams,
                               mode: str = EXACT, shots: int = 0,
                               seed: int = 0) -> ReciprocalEstimate:
    """Reciprocal-space energy from exact probabilities or K shot frequencies.

    Sampled mode draws all K measurements from one emulated statevector;
    for a noiseless emulator this is statistically identical to repeating
    state preparation K times, and the repetition cost is still charged in
    the hardware-time model.
    """
    if mode not in (EXACT, SAMPLED):
        raise ValueError(f"unknown estimator mode {mode!r}")
    emap = encoding_map(system)
    state = encode_charges(system)
    state = qsim.apply_qft_multidim(state, emap.d, emap.bits_per_axis)
    if mode == EXACT:
        freqs = state.probabilities()
        shots_used, seed_used = 0, None
    else:
        if shots < 1:
            raise ValueError("sampled mode needs at least one shot")
        histogram = qsim.sample_shots(state, shots, seed)
        freqs = histogram.frequencies()
        shots_used, seed_used = shots, seed
    weights = ewald.weight_grid_flat(system, params)
    scale = float(system.grid_size ** system.d) * system.charge_norm ** 2
    e_long = estimate_from_frequencies(freqs, weights, scale)
    return ReciprocalEstimate(e_long=e_long, mode=mode, shots=shots_used,
                              seed=seed_used)


@dataclass(frozen=True)
class BiasReport:
    exact: float
    sampled_mean: float
    bias: float
    std_error: float
    n_seeds: int
    shots: int

    @property
    def within_three_se(self) -> bool:
        return abs(self.bias) <= 3.0 * self.std_error


def estimator_bias_check(system: ChargeSystem, params: ewald.EwaldParams,
                         shots: int, seeds) -> BiasReport:
    """Mean sampled estimate over seeds against the exact value.

    The estimator is linear in the empirical frequencies, hence unbiased;
    the report flags any deviation beyond three standard errors.
    """
    seeds = list(seeds)
    if shots < 1000:
        raise ValueError("bias check needs at least 1000 shots")
    if len(seeds) < 10:
        raise ValueError("bias check needs at least 10 seeds")
    exact = estimate_reciprocal_energy(system, params, mode=EXACT).e_long
    values = np.array([
        estimate_reciprocal_energy(system, params, mode=SAMPLED,
                                   shots=shots, seed=s).e_long
        for s in seeds
    ])
    mean = float(values.mean())
    std_error = float(values.std(ddof=1) / math.sqrt(len(values)))
    return BiasReport(exact=exact, sampled_mean=mean, bias=mean - exact,
                      std_error=std_error, n_seeds=len(seeds), shots=shots)
