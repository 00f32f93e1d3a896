"""Statevector quantum-circuit emulator.

Supports exactly the gate set needed for Fourier-transform circuits:
Hadamard, integer-order phase rotations diag(1, e^{2*pi*i/2^k}), their
controlled versions, and SWAP. Amplitudes are double-precision complex;
qubit 0 is the most significant bit of the basis index (big-endian), so
reshaping the amplitude vector to shape (2,)*n maps qubit k to axis k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_INV_SQRT2 = 1.0 / math.sqrt(2.0)

H = "h"
PHASE = "p"
CPHASE = "cp"
SWAP = "swap"


@dataclass(frozen=True)
class GateOp:
    """One elementary gate.

    ``order`` fixes the rotation angle of phase gates to 2*pi/2^order;
    ``dagger`` flips its sign (used for inverse circuits).
    """

    kind: str
    target: int
    control: int | None = None
    order: int | None = None
    dagger: bool = False

    def __post_init__(self):
        if self.kind not in (H, PHASE, CPHASE, SWAP):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind in (PHASE, CPHASE):
            if self.order is None or self.order < 1:
                raise ValueError("phase gates need an integer order >= 1")
        if self.kind in (CPHASE, SWAP):
            if self.control is None:
                raise ValueError(f"{self.kind} needs a second qubit index")
            if self.control == self.target:
                raise ValueError("control and target must differ")

    def phase(self) -> complex:
        angle = 2.0 * math.pi / (1 << self.order)
        if self.dagger:
            angle = -angle
        return complex(math.cos(angle), math.sin(angle))

    def inverse(self) -> "GateOp":
        if self.kind in (H, SWAP):
            return self
        return GateOp(self.kind, self.target, self.control, self.order, not self.dagger)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[GateOp, ...]

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            qubits = (g.target,) if g.control is None else (g.target, g.control)
            for q in qubits:
                if not 0 <= q < self.n_qubits:
                    raise ValueError(f"gate {g} out of range for {self.n_qubits} qubits")

    @property
    def gate_count(self) -> int:
        return len(self.gates)

    def inverse(self) -> "Circuit":
        return Circuit(self.n_qubits, tuple(g.inverse() for g in reversed(self.gates)))


class Statevector:
    """2^n complex amplitudes of an n-qubit register."""

    __slots__ = ("n_qubits", "amps")

    def __init__(self, n_qubits: int, amps):
        amps = np.asarray(amps, dtype=complex)
        if amps.shape != (1 << n_qubits,):
            raise ValueError(f"expected {1 << n_qubits} amplitudes, got {amps.shape}")
        self.n_qubits = n_qubits
        self.amps = amps

    @classmethod
    def zero_state(cls, n_qubits: int) -> "Statevector":
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def copy(self) -> "Statevector":
        return Statevector(self.n_qubits, self.amps.copy())


def _apply_inplace(amps: np.ndarray, n: int, gate: GateOp) -> None:
    t = amps.reshape((2,) * n)
    if gate.kind == H:
        x = np.moveaxis(t, gate.target, 0)
        x0 = x[0].copy()
        x[0] += x[1]
        x[0] *= _INV_SQRT2
        x[1] = (x0 - x[1]) * _INV_SQRT2
    elif gate.kind == PHASE:
        idx = [slice(None)] * n
        idx[gate.target] = 1
        t[tuple(idx)] *= gate.phase()
    elif gate.kind == CPHASE:
        idx = [slice(None)] * n
        idx[gate.target] = 1
        idx[gate.control] = 1
        t[tuple(idx)] *= gate.phase()
    else:  # SWAP
        x = np.moveaxis(t, (gate.target, gate.control), (0, 1))
        tmp = x[0, 1].copy()
        x[0, 1] = x[1, 0]
        x[1, 0] = tmp


def apply_gate(state: Statevector, gate: GateOp) -> Statevector:
    """Pure single-gate application; returns a fresh statevector."""
    qubits = (gate.target,) if gate.control is None else (gate.target, gate.control)
    for q in qubits:
        if not 0 <= q < state.n_qubits:
            raise ValueError(f"qubit index {q} out of range")
    out = state.copy()
    _apply_inplace(out.amps, out.n_qubits, gate)
    return out


def apply_circuit(state: Statevector, circuit: Circuit) -> Statevector:
    if circuit.n_qubits != state.n_qubits:
        raise ValueError("circuit and state disagree on qubit count")
    out = state.copy()
    for gate in circuit.gates:
        _apply_inplace(out.amps, out.n_qubits, gate)
    return out


def build_qft_circuit(n: int, offset: int = 0, n_qubits: int | None = None) -> Circuit:
    """Fourier-transform circuit on qubits [offset, offset+n).

    Per qubit j: a Hadamard followed by controlled phase rotations of order
    2..(n-j) controlled from the lower qubits, then terminal swaps that undo
    the bit reversal. Gate count is n(n+1)/2 + floor(n/2). The realized
    unitary is the DFT matrix with kernel e^{+2*pi*i*j*k/2^n} / 2^{n/2}.
    """
    if n < 1:
        raise ValueError("need at least one qubit")
    if n_qubits is None:
        n_qubits = offset + n
    gates = []
    for j in range(n):
        gates.append(GateOp(H, offset + j))
        for k in range(2, n - j + 1):
            gates.append(GateOp(CPHASE, offset + j, control=offset + j + k - 1, order=k))
    for i in range(n // 2):
        gates.append(GateOp(SWAP, offset + i, control=offset + n - 1 - i))
    return Circuit(n_qubits, tuple(gates))


def qft_gate_count(n: int) -> int:
    return n * (n + 1) // 2 + n // 2


def build_multidim_qft_circuit(d: int, bits_per_axis: int) -> Circuit:
    """d independent QFT blocks on contiguous bits_per_axis-qubit registers."""
    n_qubits = d * bits_per_axis
    gates = []
    for axis in range(d):
        block = build_qft_circuit(bits_per_axis, offset=axis * bits_per_axis,
                                  n_qubits=n_qubits)
        gates.extend(block.gates)
    return Circuit(n_qubits, tuple(gates))


def apply_qft_multidim(state: Statevector, d: int, bits_per_axis: int) -> Statevector:
    """Axis-wise QFT: amplitudes become the d-dimensional DFT (kernel e^{+2*pi*i*r.s/M})."""
    if state.n_qubits != d * bits_per_axis:
        raise ValueError(
            f"state has {state.n_qubits} qubits, need {d}*{bits_per_axis}")
    return apply_circuit(state, build_multidim_qft_circuit(d, bits_per_axis))


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense unitary, assembled by running the circuit on every basis state."""
    dim = 1 << circuit.n_qubits
    u = np.empty((dim, dim), dtype=complex)
    for col in range(dim):
        amps = np.zeros(dim, dtype=complex)
        amps[col] = 1.0
        for gate in circuit.gates:
            _apply_inplace(amps, circuit.n_qubits, gate)
        u[:, col] = amps
    return u


def inject_sparse_state(n_qubits: int, entries, normalize: bool = False) -> Statevector:
    """Statevector with the given (basis index, amplitude) entries, zeros elsewhere."""
    amps = np.zeros(1 << n_qubits, dtype=complex)
    seen = set()
    for index, amp in entries:
        index = int(index)
        if not 0 <= index < len(amps):
            raise ValueError(f"basis index {index} out of range")
        if index in seen:
            raise ValueError(f"duplicate basis index {index}")
        seen.add(index)
        amps[index] = amp
    norm = float(np.sqrt(np.sum(np.abs(amps) ** 2)))
    if norm == 0.0:
        raise ValueError("zero-norm input state")
    if normalize:
        amps /= norm
    elif abs(norm - 1.0) > 1e-12:
        raise ValueError(f"entries have norm {norm}, expected 1 (or pass normalize=True)")
    return Statevector(n_qubits, amps)


@dataclass(frozen=True)
class ShotHistogram:
    """Counts per measured basis index from K repeated measurements."""

    shots: int
    counts: dict = field(default_factory=dict)
    seed: int | None = None
    n_states: int = 0

    def frequencies(self) -> np.ndarray:
        freq = np.zeros(self.n_states)
        for index, count in self.counts.items():
            freq[index] = count / self.shots
        return freq

    def to_csv(self) -> str:
        lines = ["basis_index,count"]
        for index in sorted(self.counts):
            lines.append(f"{index},{self.counts[index]}")
        return "\n".join(lines) + "\n"


def sample_shots(state: Statevector, shots: int, seed: int) -> ShotHistogram:
    """K independent measurements of the register; deterministic under the seed."""
    if shots < 1:
        raise ValueError("need at least one shot")
    p = state.probabilities()
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, p)
    nonzero = np.flatnonzero(counts)
    return ShotHistogram(
        shots=shots,
        counts={int(i): int(counts[i]) for i in nonzero},
        seed=seed,
        n_states=len(p),
    )


# -- state-preparation cost models ----------------------------------------

@dataclass(frozen=True)
class GateCountModel:
    prep: int
    qft: int

    @property
    def total(self) -> int:
        return self.prep + self.qft


MOTTONEN = "mottonen"
GLEINIG_HOEFLER = "gleinig-hoefler"


def mottonen_cnot_count(n_qubits: int) -> int:
    return (1 << (n_qubits + 2)) - 4 * n_qubits - 4


def mottonen_rotation_count(n_qubits: int) -> int:
    return (1 << (n_qubits + 2)) - 5


def mottonen_gate_count(grid_size: int) -> int:
    """Generic dense state preparation: 8M - 4*log2(M) - 9 gates."""
    n = grid_size.bit_length() - 1
    return 8 * grid_size - 4 * n - 9


def gleinig_hoefler_gate_count(n_charges: int, grid_size: int, d: int) -> int:
    """Sparse state preparation: one gate per charge per register qubit."""
    n = grid_size.bit_length() - 1
    return n_charges * d * n


def gate_count_model(n_charges: int, grid_size: int, d: int,
                     method: str = GLEINIG_HOEFLER,
                     include_qft: bool = True) -> GateCountModel:
    """Analytic gate counts for one state-prep + transform repetition."""
    if not _is_power_of_two(grid_size):
        raise ValueError(f"grid size {grid_size} is not a power of two")
    if method == MOTTONEN:
        prep = mottonen_gate_count(grid_size)
    elif method == GLEINIG_HOEFLER:
        prep = gleinig_hoefler_gate_count(n_charges, grid_size, d)
    else:
        raise ValueError(f"unknown state-preparation method {method!r}")
    bits = grid_size.bit_length() - 1
    qft = d * qft_gate_count(bits) if include_qft else 0
    return GateCountModel(prep=prep, qft=qft)


def _is_power_of_two(m) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


# -- text dumps ------------------------------------------------------------

def dump_circuit(circuit: Circuit) -> str:
    """Golden-file text form: 'H t', 'P n t', 'CP n c t', 'SWAP a b'."""
    lines = []
    for g in circuit.gates:
        if g.kind == H:
            lines.append(f"H {g.target}")
        elif g.kind == PHASE:
            lines.append(f"P {g.order} {g.target}")
        elif g.kind == CPHASE:
            lines.append(f"CP {g.order} {g.control} {g.target}")
        else:
            lines.append(f"SWAP {g.target} {g.control}")
    return "\n".join(lines) + "\n"
