"""Acceptance gate: one test per criterion, one printed pass/fail line each.

Every reference value here is either derived by an independent in-test
oracle, frozen from a pre-build oracle run, or trivially hand-checkable.
"""

import itertools
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from ewaldqft import bench, charges, ewald, qewald, qsim

# half the NaCl Madelung constant, frozen from a pre-build shell-converged
# direct-summation run (matches the textbook value to 2e-9)
MADELUNG_ENERGY_PER_CHARGE = -0.8737822973165911

# one line per criterion; echoed by the conftest terminal-summary hook
REPORT_LINES = []


def report(criterion: int, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    line = f"ACCEPTANCE {criterion} {status}: {detail}"
    REPORT_LINES.append(line)
    print(line)
    assert ok, line


def mixed(seed, n, m, d):
    return charges.generate_configuration(
        charges.ConfigSpec(charges.MIXED, n, seed), m, d)


def test_criterion_1_oracle_accuracy():
    # mean relative error of the classical Ewald total against the
    # shell-converged direct sum, 10 seeds per N, both dimensions
    start = time.perf_counter()
    worst_mean = 0.0
    for d, m in ((3, 16), (2, 32)):
        for n in (16, 64, 128, 350):
            errs = []
            for seed in range(10):
                system = mixed(seed, n, m, d)
                oracle = ewald.direct_sum_converged(system, rel_tol=1e-6)
                assert oracle.converged, f"oracle unconverged at d={d} N={n} seed={seed}"
                total = ewald.total_energy(system, ewald.default_params(system))
                errs.append(abs(total.e_total - oracle.energy) / abs(oracle.energy))
            worst_mean = max(worst_mean, float(np.mean(errs)))
    elapsed = time.perf_counter() - start
    report(1, worst_mean < 1e-3 and elapsed < 120.0,
           f"worst mean relative error {worst_mean:.3e} (limit 1e-3), "
           f"runtime {elapsed:.1f}s (limit 120s)")


def test_criterion_2_quantum_exact_equivalence():
    combos = [(2, 8), (2, 16), (3, 8), (3, 16)]
    worst = 0.0
    for i in range(50):
        d, m = combos[i % len(combos)]
        n = min(64, 4 + (7 * i) % 61, m ** d // 2)
        system = mixed(i, n, m, d)
        params = ewald.default_params(system)
        e_fft = ewald.reciprocal_energy_fft(system, params)
        e_q = qewald.estimate_reciprocal_energy(system, params).e_long
        worst = max(worst, abs(e_q - e_fft) / abs(e_fft))
    report(2, worst < 1e-10,
           f"worst quantum-exact vs grid-FFT relative gap {worst:.3e} "
           "over 50 systems (limit 1e-10)")


def test_criterion_3_qft_correctness():
    worst_dft, worst_inv = 0.0, 0.0
    for n in range(1, 11):
        dim = 1 << n
        j, k = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
        dft = np.exp(2j * np.pi * j * k / dim) / math.sqrt(dim)
        circuit = qsim.build_qft_circuit(n)
        u = qsim.circuit_unitary(circuit)
        v = qsim.circuit_unitary(circuit.inverse())
        worst_dft = max(worst_dft, float(np.max(np.abs(u - dft))))
        worst_inv = max(worst_inv, float(np.max(np.abs(u @ v - np.eye(dim)))))
    report(3, worst_dft < 1e-10 and worst_inv < 1e-10,
           f"n=1..10 unitary vs DFT {worst_dft:.3e}, "
           f"QFT o inverse vs identity {worst_inv:.3e} (limits 1e-10)")


def test_criterion_4_structure_factor_identity():
    combos = [(2, 4), (2, 8), (3, 4), (3, 8)]
    worst = 0.0
    for i in range(20):
        d, m = combos[i % len(combos)]
        system = mixed(100 + i, min(12, m ** d // 2), m, d)
        s_sq = qewald.structure_factor_sq_from_probs(
            system, qewald.probabilities_exact(system))
        for flat, svec in enumerate(itertools.product(range(m), repeat=d)):
            s_k = sum(q * np.exp(2j * np.pi / m * np.dot(svec, x))
                      for q, x in zip(system.charges, system.coords))
            worst = max(worst, abs(s_sq[flat] - abs(s_k) ** 2))
    report(4, worst < 1e-10,
           f"worst |S(k)|^2 deviation from the per-k oracle {worst:.3e} "
           "over 20 systems (limit 1e-10)")


def test_criterion_5_shot_convergence():
    system = mixed(0, 8, 8, 2)
    params = ewald.default_params(system)
    exact = qewald.estimate_reciprocal_energy(system, params).e_long

    def median_err(shots):
        errs = [abs(qewald.estimate_reciprocal_energy(
            system, params, mode=qewald.SAMPLED, shots=shots, seed=s).e_long
            - exact) / abs(exact) for s in range(20)]
        return float(np.median(errs))

    med = {k: median_err(k) for k in (10 ** 3, 10 ** 5, 10 ** 7)}
    # 1/sqrt(K) predicts a factor of 10 per 100x shots; accept within 3x
    r1 = med[10 ** 3] / med[10 ** 5]
    r2 = med[10 ** 5] / med[10 ** 7]
    scaling_ok = 10 / 3 < r1 < 30 and 10 / 3 < r2 < 30
    bias = qewald.estimator_bias_check(system, params, shots=10 ** 5,
                                       seeds=range(20))
    report(5, scaling_ok and bias.within_three_se,
           f"median-error ratios per 100x shots {r1:.2f}, {r2:.2f} "
           f"(expected 10 within 3x); bias {bias.bias:.3e} vs "
           f"3 standard errors {3 * bias.std_error:.3e}")


def test_criterion_6_gate_counts():
    lengths_ok = all(
        qsim.build_qft_circuit(n).gate_count == n * (n + 1) // 2 + n // 2
        for n in range(1, 13))
    mottonen_ok = qsim.mottonen_gate_count(32) == 227
    gh = [qsim.gleinig_hoefler_gate_count(n, 32, 3) for n in (5, 10, 20, 40)]
    linear_ok = all(count == gh[0] * n // 5 for count, n in zip(gh, (5, 10, 20, 40)))
    report(6, lengths_ok and mottonen_ok and linear_ok,
           f"QFT lengths n<=12 match n(n+1)/2+floor(n/2): {lengths_ok}; "
           f"dense prep count at M=32 is {qsim.mottonen_gate_count(32)} "
           f"(expected 227); sparse prep linear in N: {linear_ok}")


def test_criterion_7_sigma_invariance():
    worst_total, least_term = 0.0, math.inf
    for seed in range(10):
        system = mixed(seed, 24, 16, 3)
        sigma0 = system.cell_length / (6.0 * math.sqrt(2.0))
        totals, selfs = [], []
        for scale in (0.8, 1.0, 1.2):
            params = ewald.EwaldParams(sigma=scale * sigma0,
                                       r_cut=system.cell_length, k_max=8)
            b = ewald.total_energy(system, params)
            totals.append(b.e_total)
            selfs.append(b.e_self)
        ref = abs(float(np.mean(totals)))
        worst_total = max(worst_total, (max(totals) - min(totals)) / ref)
        least_term = min(least_term, (max(selfs) - min(selfs)) / ref)
    report(7, worst_total < 1e-4 and least_term > 1e-2,
           f"total varies by at most {worst_total:.3e} (limit 1e-4) while "
           f"the self term varies by at least {least_term:.3e} (floor 1e-2)")


def test_criterion_8_madelung_oracle():
    system = charges.rocksalt_lattice(4)
    oracle = ewald.direct_sum_converged(system, rel_tol=1e-7)
    per_charge = oracle.energy / system.n_charges
    err = abs(per_charge - MADELUNG_ENERGY_PER_CHARGE) / abs(MADELUNG_ENERGY_PER_CHARGE)
    report(8, oracle.converged and err < 1e-4,
           f"rocksalt 4^3 energy per charge {per_charge:.12f} vs frozen "
           f"reference {MADELUNG_ENERGY_PER_CHARGE:.12f}, relative error {err:.3e} "
           "(limit 1e-4)")


def test_criterion_9_experiment_reproduction(tmp_path):
    def run(args):
        proc = subprocess.run([sys.executable, "-m", "ewaldqft.cli"] + args,
                              capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        return proc

    checks = []

    b_csv, b_svg = str(tmp_path / "b.csv"), str(tmp_path / "b.svg")
    run(["breakdown", "--n", "16,64", "--m", "16", "--dim", "3",
         "--seeds", "2", "--sigma-scale", "2.5", "--out", b_csv])
    run(["plot", "--in", b_csv, "--out", b_svg])
    meta, rows = bench.read_csv(b_csv)
    checks.append(("breakdown schema", set(bench.BREAKDOWN_FIELDS)
                   <= set(rows[0]) and meta["schema-version"] == "1"))
    fracs = [float(r["frac_long"]) for r in rows]
    checks.append(("E^L fraction in 1e-4..0.12",
                   any(1e-4 <= f <= 0.12 for f in fracs)))

    t_csv, t_svg = str(tmp_path / "t.csv"), str(tmp_path / "t.svg")
    run(["timing", "--n", "8,16,32", "--m", "8", "--dim", "2",
         "--seeds", "1", "--repeats", "2", "--out", t_csv])
    run(["plot", "--in", t_csv, "--out", t_svg])
    meta, rows = bench.read_csv(t_csv)
    checks.append(("timing schema", set(bench.TIMING_FIELDS) <= set(rows[0])))
    checks.append(("crossover reported", "crossover_n" in meta))
    ratio = float(meta["t_q1_s"]) / float(meta["t_em1_s"])
    checks.append(("T_q = T_em * t_q1 / t_em1", all(
        abs(float(r["t_q_ns"]) - float(r["t_em_ns"]) * ratio)
        <= 1e-9 * abs(float(r["t_q_ns"])) for r in rows)))
    checks.append(("t_q1 = 50 ns",
                   float(meta["t_q1_s"]) == pytest.approx(50e-9, rel=1e-12)))

    e_csv, e_svg = str(tmp_path / "e.csv"), str(tmp_path / "e.svg")
    run(["error", "--n", "8,16", "--m", "16", "--dim", "2",
         "--seeds", "1", "--shots", "20000", "--out", e_csv])
    run(["plot", "--in", e_csv, "--out", e_svg])
    meta, rows = bench.read_csv(e_csv)
    checks.append(("error schema", set(bench.ERROR_FIELDS) <= set(rows[0])))

    for path in (b_svg, t_svg, e_svg):
        with open(path) as handle:
            checks.append((f"svg {path.rsplit('/', 1)[-1]}",
                           handle.read().startswith("<svg ")))

    failed = [name for name, ok in checks if not ok]
    report(9, not failed,
           "breakdown/timing/error CSVs schema-valid, SVGs emitted, "
           "E^L fraction band hit, crossover and hardware-time model recorded"
           + (f"; FAILED: {failed}" if failed else ""))
