"""Command-line interface.

    dtc2d simulate --config run.json [--seed N] [--backend exact|mps]
                   [--chi-max N] [--out DIR]
    dtc2d phase-diagram --config run.json [...]
    dtc2d recover --config run.json --raw raw_eps..._phi....csv [--out DIR]
    dtc2d export-lattice --rows R --cols C

`simulate` evolves every grid point of the config, writing one CSV per
point plus Hamming-distribution and recovery JSON files; with noise
configured it also writes the raw bundle that `recover` consumes.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from .lattice import build_lattice
from .recovery import clifford_reference
from .runner import (
    RunConfig,
    _simulate_system,
    recover_from_raw,
    run_point,
    run_phase_diagram,
    write_phase_grid,
    write_point_outputs,
    write_raw_bundle,
    write_resolved_config,
    point_tag,
)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="run config JSON")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--backend", choices=("exact", "mps"), default=None)
    parser.add_argument("--chi-max", type=int, default=None, help="override MPS bond cap")
    parser.add_argument("--out", default=None, help="override output directory")


def _parse_chi_sweep(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise SystemExit(f"invalid --chi-sweep value {text!r}") from exc
    if not values:
        raise SystemExit("--chi-sweep needs at least one bond dimension")
    return values


def _load_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.load(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.backend is not None:
        config = replace(config, backend=args.backend)
    if args.chi_max is not None:
        config = replace(config, mps=replace(config.mps, chi_max=args.chi_max))
    if args.out is not None:
        config = replace(config, output_dir=args.out)
    if config.output_dir is None:
        config = replace(config, output_dir="runs")
    return config


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_config(args)
    if args.chi_sweep:
        # convergence protocol: one sub-run per bond cap, no automatic
        # convergence verdict; compare the per-chi curves by eye
        for chi in _parse_chi_sweep(args.chi_sweep):
            sub = replace(
                config,
                backend="mps",
                mps=replace(config.mps, chi_max=chi),
                output_dir=os.path.join(config.output_dir, f"chi_{chi}"),
            )
            _simulate_config(sub)
        return 0
    _simulate_config(config)
    return 0


def _simulate_config(config: RunConfig) -> None:
    out = config.output_dir
    write_resolved_config(config, out)
    for eps in config.epsilons:
        for phi in config.phis:
            result = run_point(config, eps, phi)
            files = write_point_outputs(result, out)
            if result.noisy is not None:
                reference = _simulate_system(
                    config, config.rows, config.cols, 0.0, clifford_reference(phi)
                )
                files.append(write_raw_bundle(result, reference, out))
            for path in files:
                print(path)


def cmd_phase_diagram(args: argparse.Namespace) -> int:
    config = _load_config(args)
    out = config.output_dir
    write_resolved_config(config, out)
    points = run_phase_diagram(config)
    path = write_phase_grid(points, out)
    print(path)
    return 0


def cmd_recover(args: argparse.Namespace) -> int:
    config = _load_config(args)
    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    eps, phi = config.epsilons[0], config.phis[0]
    n_qubits = build_lattice(config.rows, config.cols).n_qubits
    report = recover_from_raw(config, args.raw, phi, n_qubits)
    path = os.path.join(out, f"recovery_{point_tag(eps, phi)}.json")
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
    print(path)
    return 0


def cmd_export_lattice(args: argparse.Namespace) -> int:
    lattice = build_lattice(args.rows, args.cols)
    print(lattice.to_json())
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="dtc2d", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="evolve every grid point of a config")
    _add_common(p)
    p.add_argument(
        "--chi-sweep",
        default=None,
        help="comma-separated bond caps; runs the MPS backend once per value",
    )
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("phase-diagram", help="order parameters over the grid")
    _add_common(p)
    p.set_defaults(func=cmd_phase_diagram)

    p = sub.add_parser("recover", help="re-run recovery on an exported raw bundle")
    _add_common(p)
    p.add_argument("--raw", required=True, help="raw bundle CSV from simulate")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("export-lattice", help="print the lattice graph as JSON")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.set_defaults(func=cmd_export_lattice)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
