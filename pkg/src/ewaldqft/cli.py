"""Command-line harness: generate systems, compute energies, run experiments.

Exit codes: 0 success, 2 validation error, 3 direct-sum oracle failed to
converge during an error sweep.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import bench, charges, ewald, plotting

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NO_CONVERGENCE = 3

ROCKSALT = "rocksalt"


def _parse_n_list(text: str):
    return tuple(int(v) for v in text.split(","))


def _parse_seed_list(seed: int, count: int):
    return tuple(range(seed, seed + count))


def load_config(path) -> dict:
    """key=value lines; '#' starts a comment."""
    values = {}
    with open(path) as handle:
        for raw in handle:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"malformed config line: {raw.strip()!r}")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _add_common(parser):
    parser.add_argument("--n", type=str, default="32",
                        help="charge count, or comma list for sweeps")
    parser.add_argument("--m", type=int, default=32, help="grid size per axis")
    parser.add_argument("--dim", type=int, default=3, choices=(2, 3))
    parser.add_argument("--kind", default=charges.MIXED,
                        choices=(charges.MIXED, charges.SEPARATED, ROCKSALT))
    parser.add_argument("--sigma", type=float, default=None,
                        help="splitting width (default L / (6*sqrt(2)))")
    parser.add_argument("--sigma-scale", type=float, default=1.0,
                        help="multiplier on the default splitting width (sweeps)")
    parser.add_argument("--kmax", type=int, default=None,
                        help="max integer wavevector component (default M/2)")
    parser.add_argument("--shots", type=int, default=bench.DEFAULT_SHOTS)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--seeds", type=int, default=3,
                        help="number of consecutive seeds for sweeps")
    parser.add_argument("--backend", default=ewald.GRID_FFT,
                        choices=ewald.BACKENDS)
    parser.add_argument("--out", default=None, help="output file (default stdout)")
    parser.add_argument("--tq1-ns", type=float, default=50.0,
                        help="assumed hardware per-gate time in ns")
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--config", default=None,
                        help="key=value file supplying flag defaults")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ewald-qft",
        description="Periodic Coulomb energies with classical and "
                    "emulated-quantum reciprocal-space backends.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
            ("generate", "write a charge system to the line-oriented text format"),
            ("energy", "compute an energy breakdown for one system"),
            ("breakdown", "sweep: per-term energies, fractions, wall times"),
            ("timing", "sweep: classical vs modeled quantum reciprocal times"),
            ("error", "sweep: relative error against the direct-sum oracle"),
            ("plot", "render an experiment CSV to a deterministic SVG")):
        p = sub.add_parser(name, help=text)
        _add_common(p)
        if name == "plot":
            p.add_argument("--in", dest="in_file", required=True)
            p.add_argument("--plot-kind", default=None,
                           choices=(bench.BREAKDOWN, bench.TIMING, bench.ERROR))
        if name == "energy":
            p.add_argument("--in", dest="in_file", default=None,
                           help="read the system from a file instead of generating")
    return parser


def _apply_config(args):
    if args.config is None:
        return args
    overrides = load_config(args.config)
    defaults_parser = build_parser()
    defaults = vars(defaults_parser.parse_args([args.command]
                                               + (["--in", "x"] if args.command == "plot" else [])))
    for key, value in overrides.items():
        if key not in defaults:
            raise ValueError(f"unknown config key {key!r}")
        current = getattr(args, key)
        if current == defaults[key]:  # explicit flags beat the config file
            kind = type(defaults[key]) if defaults[key] is not None else str
            setattr(args, key, kind(value) if kind is not bool else value == "true")
    return args


def _make_system(args, n=None, seed=None):
    n = int(args.n.split(",")[0]) if n is None else n
    seed = args.seed if seed is None else seed
    if args.kind == ROCKSALT:
        return charges.rocksalt_lattice(args.m, args.dim)
    spec = charges.ConfigSpec(args.kind, n, seed)
    return charges.generate_configuration(spec, args.m, args.dim)


def _make_params(args, system):
    params = ewald.default_params(system)
    sigma = args.sigma if args.sigma is not None else params.sigma
    k_max = args.kmax if args.kmax is not None else params.k_max
    return ewald.EwaldParams(sigma=sigma, r_cut=params.r_cut, k_max=k_max,
                             eps_prime=params.eps_prime)


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as handle:
            handle.write(text)


def _sweep_spec(args, experiment, kinds=None):
    if kinds is None:
        kinds = (args.kind,) if args.kind != ROCKSALT else (charges.MIXED,)
    return bench.SweepSpec(
        experiment=experiment,
        n_list=_parse_n_list(args.n),
        d=args.dim,
        grid_size=args.m,
        kinds=kinds,
        seeds=_parse_seed_list(args.seed, args.seeds),
        sigma_scale=args.sigma_scale,
        shots=args.shots,
        repeats=args.repeats,
        t_q1=args.tq1_ns * 1e-9,
    )


def run(args) -> int:
    if args.command == "generate":
        system = _make_system(args)
        _emit(charges.to_text(system), args.out)
        return EXIT_OK

    if args.command == "energy":
        if getattr(args, "in_file", None):
            with open(args.in_file) as handle:
                system = charges.from_text(handle.read())
        else:
            system = _make_system(args)
        params = _make_params(args, system)
        start = time.perf_counter_ns()
        breakdown = ewald.total_energy(system, params, backend=args.backend,
                                       shots=args.shots, seed=args.seed)
        wall = time.perf_counter_ns() - start
        text = (f"# schema-version: {bench.SCHEMA_VERSION}\n"
                + ",".join(ewald.CSV_FIELDS) + "\n"
                + ewald.breakdown_csv_row(system, breakdown, wall) + "\n")
        _emit(text, args.out)
        return EXIT_OK

    if args.command == "breakdown":
        kinds = (charges.MIXED, charges.SEPARATED) if args.kind == charges.MIXED \
            else (args.kind,)
        meta, rows = bench.run_breakdown_sweep(_sweep_spec(args, bench.BREAKDOWN,
                                                           kinds=kinds))
        bench.write_csv(args.out or "/dev/stdout", meta, rows)
        return EXIT_OK

    if args.command == "timing":
        meta, rows = bench.run_timing_sweep(_sweep_spec(args, bench.TIMING))
        crossover = bench.crossover_point(rows)
        meta["crossover_n"] = "none" if crossover is None else crossover
        bench.write_csv(args.out or "/dev/stdout", meta, rows)
        return EXIT_OK

    if args.command == "error":
        meta, rows = bench.run_error_sweep(_sweep_spec(args, bench.ERROR))
        bench.write_csv(args.out or "/dev/stdout", meta, rows)
        if not int(meta["oracle_all_converged"]):
            sys.stderr.write("error: direct-sum oracle did not converge\n")
            return EXIT_NO_CONVERGENCE
        return EXIT_OK

    if args.command == "plot":
        meta, _ = bench.read_csv(args.in_file)
        kind = args.plot_kind or meta.get("experiment")
        if kind is None:
            raise ValueError("plot kind not given and absent from the CSV header")
        plotting.emit_plot(args.in_file, kind, args.out or "plot.svg")
        return EXIT_OK

    raise ValueError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config(args)
        return run(args)
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
