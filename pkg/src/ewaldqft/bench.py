"""Benchmark experiments: term breakdown, timing model, accuracy sweep.

Each experiment emits CSV rows that are bit-reproducible from (spec, seed)
for all energy columns; wall-clock columns are measured and exempt. The
hardware-time projection follows T_q = T_em * t_q1 / t_em1, where t_em1 is
a per-gate emulator calibration and t_q1 the assumed per-gate execution
time on hardware (default 50 ns).
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

from . import ewald, qewald, qsim
from .charges import ChargeSystem, ConfigSpec, MIXED, SEPARATED, generate_configuration

SCHEMA_VERSION = 1

BREAKDOWN = "breakdown"
TIMING = "timing"
ERROR = "error"

DEFAULT_T_Q1 = 50e-9  # seconds per hardware gate
DEFAULT_SHOTS = 100_000


@dataclass(frozen=True)
class SweepSpec:
    experiment: str
    n_list: tuple
    d: int = 3
    grid_size: int = 32
    kinds: tuple = (MIXED, SEPARATED)
    seeds: tuple = (0, 1, 2)
    sigma_scale: float = 1.0
    shots: int = DEFAULT_SHOTS
    repeats: int = 5
    t_q1: float = DEFAULT_T_Q1
    oracle_tol: float = 1e-6

    def __post_init__(self):
        if self.experiment not in (BREAKDOWN, TIMING, ERROR):
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        for n in self.n_list:
            if n > self.grid_size ** self.d:
                raise ValueError(f"N={n} exceeds {self.grid_size}^{self.d} grid points")


@dataclass(frozen=True)
class TimingModel:
    """Emulator-to-hardware wall-time conversion."""

    t_q1: float = DEFAULT_T_Q1
    t_em1: float = 0.0  # seconds per emulated gate, measured

    def hardware_time(self, t_em: float) -> float:
        if self.t_em1 <= 0:
            raise ValueError("calibrate t_em1 before converting emulator times")
        return t_em * self.t_q1 / self.t_em1

    def gate_projection(self, gates: int, shots: int) -> float:
        """K * gates * t_q1: hardware cannot reuse a collapsed state."""
        return shots * gates * self.t_q1


def calibrate_gate_time(n_qubits: int = 10, n_gates: int = 1000,
                        repeats: int = 3) -> float:
    """Median per-gate wall time of a fixed reference circuit, warm-up excluded."""
    gates = []
    qubit = 0
    while len(gates) < n_gates:
        gates.append(qsim.GateOp(qsim.H, qubit % n_qubits))
        if len(gates) < n_gates:
            gates.append(qsim.GateOp(qsim.CPHASE, qubit % n_qubits,
                                     control=(qubit + 1) % n_qubits, order=2))
        qubit += 1
    circuit = qsim.Circuit(n_qubits, tuple(gates))
    state = qsim.Statevector.zero_state(n_qubits)
    qsim.apply_circuit(state, circuit)  # warm-up
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        qsim.apply_circuit(state, circuit)
        times.append((time.perf_counter() - start) / len(gates))
    return statistics.median(times)


def _timed(fn, *args):
    start = time.perf_counter_ns()
    value = fn(*args)
    return value, time.perf_counter_ns() - start


# -- experiment runners ----------------------------------------------------

BREAKDOWN_FIELDS = ("N", "d", "M", "kind", "seed", "sigma",
                    "e_short", "e_long", "e_self", "e_dip", "e_total",
                    "frac_short", "frac_long", "frac_self", "frac_dip",
                    "t_short_ns", "t_long_ns", "t_self_ns", "t_dip_ns")


def run_breakdown_sweep(spec: SweepSpec):
    """Per-term energies, relative-importance fractions, per-term wall times.

    The fraction of a term is |term| divided by the sum of the four term
    magnitudes; the signed total is a poor denominator because it can
    cancel to nearly zero for dilute random configurations.
    """
    rows = []
    for n in spec.n_list:
        for kind in spec.kinds:
            for seed in spec.seeds:
                system = generate_configuration(ConfigSpec(kind, n, seed),
                                                spec.grid_size, spec.d)
                params = ewald.default_params(system, spec.sigma_scale)
                e_short, t_short = _timed(ewald.real_space_energy, system, params)
                e_long, t_long = _timed(ewald.reciprocal_energy_fft, system, params)
                e_self, t_self = _timed(ewald.self_energy, system, params)
                e_dip, t_dip = _timed(ewald.dipole_energy, system, params)
                total = e_short + e_long + e_self + e_dip
                row = {"N": n, "d": spec.d, "M": spec.grid_size, "kind": kind,
                       "seed": seed, "sigma": params.sigma,
                       "e_short": e_short, "e_long": e_long,
                       "e_self": e_self, "e_dip": e_dip, "e_total": total,
                       "t_short_ns": t_short, "t_long_ns": t_long,
                       "t_self_ns": t_self, "t_dip_ns": t_dip}
                denom = sum(abs(row[f"e_{key}"])
                            for key in ("short", "long", "self", "dip"))
                for key in ("short", "long", "self", "dip"):
                    row[f"frac_{key}"] = abs(row[f"e_{key}"]) / denom
                rows.append(row)
    meta = {"experiment": BREAKDOWN, "sigma_scale": spec.sigma_scale}
    return meta, rows


TIMING_FIELDS = ("N", "d", "M", "kind", "seed", "shots",
                 "gates_prep", "gates_qft", "gates_total",
                 "t_classical_ns", "t_classical_sd_ns",
                 "t_em_ns", "t_em_sd_ns", "t_q_ns", "t_q_gates_ns")


def _quantum_pipeline(system: ChargeSystem, params: ewald.EwaldParams):
    return qewald.estimate_reciprocal_energy(system, params, mode=qewald.EXACT)


def run_timing_sweep(spec: SweepSpec, t_em1: float | None = None):
    """Measured classical vs emulated quantum reciprocal-term times per N.

    Emits both the emulator-scaled hardware projection T_q and the pure
    gate-count projection t_q_gates = K * (prep + QFT gates) * t_q1.
    """
    if t_em1 is None:
        t_em1 = calibrate_gate_time()
    model = TimingModel(t_q1=spec.t_q1, t_em1=t_em1)
    kind = spec.kinds[0]
    rows = []
    for n in spec.n_list:
        for seed in spec.seeds:
            system = generate_configuration(ConfigSpec(kind, n, seed),
                                            spec.grid_size, spec.d)
            params = ewald.default_params(system, spec.sigma_scale)
            ewald.reciprocal_energy_fft(system, params)   # warm-up
            _quantum_pipeline(system, params)
            t_cl, t_em = [], []
            for _ in range(spec.repeats):
                _, dt = _timed(ewald.reciprocal_energy_fft, system, params)
                t_cl.append(dt)
                _, dt = _timed(_quantum_pipeline, system, params)
                t_em.append(dt)
            counts = qsim.gate_count_model(n, spec.grid_size, spec.d)
            t_em_mean = statistics.mean(t_em)
            rows.append({
                "N": n, "d": spec.d, "M": spec.grid_size, "kind": kind,
                "seed": seed, "shots": spec.shots,
                "gates_prep": counts.prep, "gates_qft": counts.qft,
                "gates_total": counts.total,
                "t_classical_ns": statistics.mean(t_cl),
                "t_classical_sd_ns": statistics.pstdev(t_cl),
                "t_em_ns": t_em_mean,
                "t_em_sd_ns": statistics.pstdev(t_em),
                "t_q_ns": model.hardware_time(t_em_mean),
                "t_q_gates_ns": model.gate_projection(counts.total, spec.shots) * 1e9,
            })
    meta = {"experiment": TIMING, "t_q1_s": spec.t_q1, "t_em1_s": t_em1}
    return meta, rows


def crossover_point(rows, quantum_col: str = "t_q_ns"):
    """First sweep N whose mean modeled quantum time undercuts the classical mean.

    Pure function of the CSV rows; returns None when the quantum curve
    never drops below the classical one in the sweep range.
    """
    by_n: dict = {}
    for row in rows:
        by_n.setdefault(int(row["N"]), []).append(row)
    for n in sorted(by_n):
        group = by_n[n]
        classical = statistics.mean(float(r["t_classical_ns"]) for r in group)
        quantum = statistics.mean(float(r[quantum_col]) for r in group)
        if quantum < classical:
            return n
    return None


ERROR_FIELDS = ("N", "d", "M", "kind", "seed", "shots",
                "e_exact", "oracle_shells", "oracle_converged",
                "err_classical", "err_qexact", "err_qsampled")


def run_error_sweep(spec: SweepSpec):
    """Relative error of the Ewald paths against the direct-summation oracle."""
    kind = spec.kinds[0]
    rows = []
    any_unconverged = False
    for n in spec.n_list:
        for seed in spec.seeds:
            system = generate_configuration(ConfigSpec(kind, n, seed),
                                            spec.grid_size, spec.d)
            params = ewald.default_params(system, spec.sigma_scale)
            oracle = ewald.direct_sum_converged(system, rel_tol=spec.oracle_tol)
            any_unconverged |= not oracle.converged
            classical = ewald.total_energy(system, params, backend=ewald.GRID_FFT)
            qexact = ewald.total_energy(system, params, backend=ewald.QUANTUM_EXACT)
            qsampled = ewald.total_energy(system, params,
                                          backend=ewald.QUANTUM_SAMPLED,
                                          shots=spec.shots, seed=seed)
            ref = abs(oracle.energy)
            rows.append({
                "N": n, "d": spec.d, "M": spec.grid_size, "kind": kind,
                "seed": seed, "shots": spec.shots,
                "e_exact": oracle.energy,
                "oracle_shells": oracle.shells,
                "oracle_converged": int(oracle.converged),
                "err_classical": abs(classical.e_total - oracle.energy) / ref,
                "err_qexact": abs(qexact.e_total - oracle.energy) / ref,
                "err_qsampled": abs(qsampled.e_total - oracle.energy) / ref,
            })
    meta = {"experiment": ERROR, "oracle_tol": spec.oracle_tol,
            "oracle_all_converged": int(not any_unconverged)}
    return meta, rows


EXPERIMENT_FIELDS = {
    BREAKDOWN: BREAKDOWN_FIELDS,
    TIMING: TIMING_FIELDS,
    ERROR: ERROR_FIELDS,
}


# -- CSV I/O ---------------------------------------------------------------

def _format_value(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path, meta: dict, rows, fields=None) -> None:
    if fields is None:
        fields = EXPERIMENT_FIELDS[meta["experiment"]]
    lines = [f"# schema-version: {SCHEMA_VERSION}"]
    for key in sorted(meta):
        lines.append(f"# {key}: {_format_value(meta[key])}")
    lines.append(",".join(fields))
    for row in rows:
        lines.append(",".join(_format_value(row[f]) for f in fields))
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def read_csv(path):
    meta: dict = {}
    rows = []
    fields = None
    with open(path) as handle:
        for raw in handle:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                meta[key.strip()] = value.strip()
                continue
            parts = line.split(",")
            if fields is None:
                fields = parts
                continue
            rows.append(dict(zip(fields, parts)))
    if "schema-version" not in meta:
        raise ValueError(f"{path} is missing the schema-version header")
    return meta, rows
