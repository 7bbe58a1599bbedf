"""Config-driven orchestration: point runs, phase-diagram sweeps, recovery.

A run evolves one (epsilon, phi) point for T cycles, recording every
diagnostic per cycle on up to three channels (noiseless, noisy,
recovered). Recovery follows the renormalization pipeline: a reference run
at the nearest Clifford point, parity offsets learned against a
classically simulated system (optionally a smaller lattice), correlator
coefficients learned the same way, and per-cycle flip probabilities
learned from the Clifford-point Hamming data.

All randomness is derived from the config seed plus the point coordinates
and cycle index, so re-running any config reproduces its outputs byte for
byte, serial or parallel.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .circuit import (
    FloquetParams,
    ProductState,
    build_cycle,
    custom_state,
    neel_state,
    polarized_state,
    sample_disorder,
)
from .exact import StateVector
from .lattice import build_lattice, unroll
from .mps import MPSState, build_cycle_mpos
from .noise import NoiseSpec, corrupt_bits, corrupt_correlators, corrupt_expectations
from .observables import (
    PhasePoint,
    TimeSeries,
    chi,
    chi_from_matrix,
    correlator_average,
    delta,
    hamming_distribution,
    phase_order_params,
    qfi,
)
from .recovery import (
    ChiCoefficients,
    OffsetVector,
    TrialDistribution,
    clifford_delta,
    clifford_reference,
    deconvolve_hamming,
    learn_chi_coefficients,
    learn_flip_schedule,
    learn_offsets,
    recover_chi,
    renormalize_delta,
)

CSV_COLUMNS = ["t", "delta", "chi_nn", "chi_sg", "qfi", "hamming_mean", "hamming_var"]
NOISY_COLUMNS = [c + "_noisy" for c in CSV_COLUMNS[1:]]
RECOVERED_COLUMNS = [
    "delta_recovered",
    "delta_recovered_flag",
    "chi_recovered",
    "chi_recovered_flag",
    "p_flip",
]


@dataclass(frozen=True)
class MPSOptions:
    chi_max: int = 64
    cutoff: float = 1e-12
    zip_factor: int = 4


@dataclass(frozen=True)
class RecoverySettings:
    ridge: float = 1e-4
    lambda_mean: float = 10.0
    lambda_var: float = 10.0
    guard: float = 1e-3
    learn_rows: int | None = None  # lattice used to learn offsets (None: self)
    learn_cols: int | None = None
    deconvolve: bool = False


@dataclass(frozen=True)
class RunConfig:
    rows: int = 1
    cols: int = 1
    epsilons: tuple[float, ...] = (0.05,)
    phis: tuple[float, ...] = (0.45 * np.pi,)
    cycles: int = 10
    initial_state: str = "neel"  # "neel" | "polarized" | 0/1 bitstring
    backend: str = "exact"  # "exact" | "mps"
    mps: MPSOptions = field(default_factory=MPSOptions)
    shots: int = 0
    seed: int = 0
    workers: int = 1
    full_correlations: bool = True
    noise: NoiseSpec | None = None
    recovery: RecoverySettings | None = None
    output_dir: str | None = None
    checkpoint: bool = False

    def __post_init__(self) -> None:
        if self.cycles < 1:
            raise ValueError("cycles must be >= 1")
        if self.shots < 0:
            raise ValueError("shots must be >= 0")
        if self.backend not in ("exact", "mps"):
            raise ValueError(f"unknown backend {self.backend!r}")
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        object.__setattr__(self, "phis", tuple(float(p) for p in self.phis))

    def to_json(self) -> str:
        payload = asdict(self)
        payload["noise"] = self.noise.to_dict() if self.noise else None
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        payload = json.loads(text)
        if payload.get("mps"):
            payload["mps"] = MPSOptions(**payload["mps"])
        if payload.get("noise"):
            payload["noise"] = NoiseSpec.from_dict(payload["noise"])
        if payload.get("recovery"):
            payload["recovery"] = RecoverySettings(**payload["recovery"])
        for key in ("epsilons", "phis"):
            if key in payload:
                payload[key] = tuple(payload[key])
        return cls(**payload)

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        with open(path) as fh:
            return cls.from_json(fh.read())


@dataclass
class RecoveryReport:
    offsets: OffsetVector
    offsets_objective: float
    chi_coefficients: ChiCoefficients
    chi_objective: float
    delta_recovered: np.ndarray
    delta_flags: np.ndarray
    chi_recovered: np.ndarray
    chi_flags: np.ndarray
    flip_schedule: np.ndarray | None = None
    deconvolved: list[TrialDistribution] | None = None

    def to_dict(self) -> dict:
        payload = {
            "offsets": list(self.offsets.as_array()),
            "offsets_objective": self.offsets_objective,
            "chi_coefficients": [
                self.chi_coefficients.c1_target,
                self.chi_coefficients.c2_target,
                self.chi_coefficients.c1_reference,
                self.chi_coefficients.c2_reference,
            ],
            "chi_objective": self.chi_objective,
            "delta_recovered": self.delta_recovered.tolist(),
            "delta_flags": self.delta_flags.astype(int).tolist(),
            "chi_recovered": self.chi_recovered.tolist(),
            "chi_flags": self.chi_flags.astype(int).tolist(),
        }
        if self.flip_schedule is not None:
            payload["flip_schedule"] = self.flip_schedule.tolist()
        if self.deconvolved is not None:
            payload["deconvolved"] = [
                {"d0": t.d0, "sigma": t.sigma, "k": t.k, "q": t.q}
                for t in self.deconvolved
            ]
        return payload


@dataclass
class PointResult:
    epsilon: float
    phi: float
    n_qubits: int
    s0: np.ndarray
    clean: TimeSeries
    noisy: TimeSeries | None = None
    recovery: RecoveryReport | None = None

    def phase_point(self) -> PhasePoint:
        return phase_order_params(
            self.clean.z_array(), self.s0, epsilon=self.epsilon, phi=self.phi
        )


def _initial_state(config: RunConfig, lattice) -> ProductState:
    if config.initial_state == "neel":
        return neel_state(lattice)
    if config.initial_state == "polarized":
        return polarized_state(lattice)
    return custom_state(config.initial_state)


def _shot_seed(config: RunConfig, eps: float, phi: float, t: int, channel: int) -> int:
    parts = [
        config.seed,
        int(np.float64(eps).view(np.int64)),
        int(np.float64(phi).view(np.int64)),
        t,
        channel,
    ]
    return int(np.random.SeedSequence(parts).generate_state(1)[0])


class _Backend:
    """Uniform evolution interface over the dense and MPS backends."""

    def __init__(self, config: RunConfig, lattice, order, state: ProductState, cycle):
        self.cycle = cycle
        if config.backend == "exact":
            self.state = StateVector.from_product(state)
            self.mpos = None
        else:
            self.state = MPSState(
                state,
                order,
                chi_max=config.mps.chi_max,
                cutoff=config.mps.cutoff,
                zip_factor=config.mps.zip_factor,
            )
            self.mpos = build_cycle_mpos(cycle, order)

    def step(self) -> None:
        if self.mpos is None:
            self.state.apply_cycle(self.cycle)
        else:
            self.state.apply_cycle(self.cycle, self.mpos)

    def per_site_z(self) -> np.ndarray:
        return self.state.per_site_z()

    def zz_pairs(self, pairs) -> np.ndarray:
        return self.state.zz_pairs(pairs)

    def zz_matrix(self) -> np.ndarray:
        return self.state.zz_matrix()

    def sample_bits(self, shots: int, seed: int) -> np.ndarray:
        return self.state.sample_bits(shots, seed)


def _simulate_system(
    config: RunConfig,
    rows: int,
    cols: int,
    eps: float,
    phi: float,
    checkpoint_dir: str | None = None,
) -> PointResult:
    """Evolve one system, recording the clean (and noisy) channels."""
    lattice = build_lattice(rows, cols)
    if config.backend == "exact" and lattice.n_qubits > 24:
        raise ValueError(
            f"exact backend capped at 24 qubits; {rows}x{cols} has {lattice.n_qubits}"
        )
    order = unroll(lattice)
    disorder = sample_disorder(lattice, config.seed)
    params = FloquetParams(epsilon=eps, phi=phi)
    cycle = build_cycle(lattice, disorder, params)
    s0 = _initial_state(config, lattice)
    noise_model = (
        config.noise.build(lattice.n_qubits, s0.spins) if config.noise else None
    )

    backend = _Backend(config, lattice, order, s0, cycle)
    clean = TimeSeries()
    noisy = TimeSeries() if noise_model else None
    edges = list(lattice.edges)

    start_t = 0
    if checkpoint_dir and config.backend == "mps":
        start_t = _try_resume(backend, checkpoint_dir, config, eps, phi, clean, noisy)

    for t in range(start_t, config.cycles + 1):
        if t > 0:
            backend.step()
        z = backend.per_site_z()
        zz_nn = backend.zz_pairs(edges)
        clean.per_site_z.append(z)
        clean.delta.append(delta(z, s0.spins))
        clean.chi_nn.append(chi(zz_nn))
        clean.corr_avg.append(correlator_average(zz_nn))
        if config.full_correlations:
            zz = backend.zz_matrix()
            clean.chi_sg.append(chi_from_matrix(zz))
            clean.qfi.append(qfi(z, zz, s0.spins))
        samples = None
        if config.shots > 0:
            samples = backend.sample_bits(
                config.shots, _shot_seed(config, eps, phi, t, 0)
            )
            clean.hamming.append(hamming_distribution(samples, s0.spins))
        if noise_model is not None:
            z_noisy = corrupt_expectations(z, noise_model, t)
            zz_nn_noisy = corrupt_correlators(zz_nn, edges, z, noise_model, t)
            noisy.per_site_z.append(z_noisy)
            noisy.delta.append(delta(z_noisy, s0.spins))
            noisy.chi_nn.append(chi(zz_nn_noisy))
            noisy.corr_avg.append(correlator_average(zz_nn_noisy))
            if config.full_correlations:
                iu = np.triu_indices(lattice.n_qubits, k=1)
                all_pairs = list(zip(iu[0].tolist(), iu[1].tolist()))
                zz_all_noisy = corrupt_correlators(
                    zz[iu], all_pairs, z, noise_model, t
                )
                noisy.chi_sg.append(chi(zz_all_noisy))
                matrix_noisy = np.eye(lattice.n_qubits)
                matrix_noisy[iu] = zz_all_noisy
                matrix_noisy.T[iu] = zz_all_noisy
                noisy.qfi.append(qfi(z_noisy, matrix_noisy, s0.spins))
            if samples is not None:
                rng = np.random.default_rng(_shot_seed(config, eps, phi, t, 1))
                corrupted = corrupt_bits(samples, noise_model, t, rng)
                noisy.hamming.append(hamming_distribution(corrupted, s0.spins))
        if checkpoint_dir and config.backend == "mps":
            _save_checkpoint(backend, checkpoint_dir, config, eps, phi, t, clean, noisy)

    return PointResult(
        epsilon=eps,
        phi=phi,
        n_qubits=lattice.n_qubits,
        s0=s0.spins,
        clean=clean,
        noisy=noisy,
    )


def run_point(config: RunConfig, eps: float, phi: float) -> PointResult:
    """Simulate one parameter point, with noise and recovery if configured."""
    checkpoint_dir = None
    if config.checkpoint and config.output_dir:
        checkpoint_dir = os.path.join(config.output_dir, "checkpoints")
        os.makedirs(checkpoint_dir, exist_ok=True)
    result = _simulate_system(
        config, config.rows, config.cols, eps, phi, checkpoint_dir
    )
    if config.noise is None or config.recovery is None:
        return result

    settings = config.recovery
    phi0 = clifford_reference(phi)
    reference = _simulate_system(config, config.rows, config.cols, 0.0, phi0)
    exact_reference = clifford_delta(phi0, config.cycles)

    learn_rows = settings.learn_rows or config.rows
    learn_cols = settings.learn_cols or config.cols
    if (learn_rows, learn_cols) == (config.rows, config.cols):
        learn_target, learn_reference = result, reference
    else:
        learn_target = _simulate_system(config, learn_rows, learn_cols, eps, phi)
        learn_reference = _simulate_system(config, learn_rows, learn_cols, 0.0, phi0)

    offsets, offset_info = learn_offsets(
        np.array(learn_target.noisy.delta),
        np.array(learn_reference.noisy.delta),
        exact_reference,
        np.array(learn_target.clean.delta),
        ridge=settings.ridge,
        guard=settings.guard,
    )
    delta_recovered, delta_flags = renormalize_delta(
        np.array(result.noisy.delta),
        np.array(reference.noisy.delta),
        exact_reference,
        offsets,
        guard=settings.guard,
    )

    coefficients, chi_info = learn_chi_coefficients(
        np.array(learn_target.noisy.chi_nn),
        np.array(learn_target.noisy.corr_avg),
        np.array(learn_reference.noisy.chi_nn),
        np.array(learn_reference.noisy.corr_avg),
        np.array(learn_target.clean.chi_nn),
        learn_target.n_qubits,
        ridge=settings.ridge,
        guard=settings.guard,
    )
    chi_recovered, chi_flags = recover_chi(
        np.array(result.noisy.chi_nn),
        np.array(result.noisy.corr_avg),
        np.array(reference.noisy.chi_nn),
        np.array(reference.noisy.corr_avg),
        coefficients,
        result.n_qubits,
        guard=settings.guard,
    )

    report = RecoveryReport(
        offsets=offsets,
        offsets_objective=offset_info["objective"],
        chi_coefficients=coefficients,
        chi_objective=chi_info["objective"],
        delta_recovered=delta_recovered,
        delta_flags=delta_flags,
        chi_recovered=chi_recovered,
        chi_flags=chi_flags,
    )

    if config.shots > 0 and reference.noisy is not None and reference.noisy.hamming:
        n = result.n_qubits
        if phi0 == 0.0:
            d_cliff = np.zeros(config.cycles + 1, dtype=int)
        else:
            d_cliff = np.where(np.arange(config.cycles + 1) % 2 == 0, 0, n)
        report.flip_schedule = learn_flip_schedule(
            np.array(reference.noisy.hamming), d_cliff
        )
        if settings.deconvolve and config.full_correlations:
            trials = []
            for t in range(config.cycles + 1):
                mu = 0.5 * n * (1.0 - delta_recovered[t])
                var = result.clean.qfi[t]
                trial, _ = deconvolve_hamming(
                    np.array(result.noisy.hamming[t]),
                    float(report.flip_schedule[t]),
                    mu,
                    var,
                    lambda_mean=settings.lambda_mean,
                    lambda_var=settings.lambda_var,
                )
                trials.append(trial)
            report.deconvolved = trials

    result.recovery = report
    return result


def run_phase_diagram(config: RunConfig) -> list[PhasePoint]:
    """Order parameters over the (epsilon, phi) grid, optionally parallel."""
    cells = [(eps, phi) for eps in config.epsilons for phi in config.phis]
    if not cells:
        raise ValueError("empty parameter grid")
    # the grid only needs per-site z values; skip the expensive extras
    fast = replace(
        config, full_correlations=False, shots=0, noise=None, recovery=None
    )
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_phase_cell, [(fast, e, p) for e, p in cells]))
    else:
        results = [_phase_cell((fast, e, p)) for e, p in cells]
    return results


def _phase_cell(args: tuple[RunConfig, float, float]) -> PhasePoint:
    config, eps, phi = args
    return run_point(config, eps, phi).phase_point()


# --- output files ---


def _format(value: float) -> str:
    return f"{value:.17g}"


def point_csv_rows(result: PointResult) -> list[str]:
    columns = list(CSV_COLUMNS)
    if result.noisy is not None:
        columns += NOISY_COLUMNS
    if result.recovery is not None:
        columns += RECOVERED_COLUMNS
    lines = [",".join(columns)]
    h_mean, h_var = result.clean.hamming_moments()
    if result.noisy is not None:
        hn_mean, hn_var = result.noisy.hamming_moments()
    for t in range(len(result.clean.delta)):
        def channel(series: TimeSeries, means, variances) -> list[str]:
            row = [
                _format(series.delta[t]),
                _format(series.chi_nn[t]),
                _format(series.chi_sg[t]) if series.chi_sg else "nan",
                _format(series.qfi[t]) if series.qfi else "nan",
                _format(means[t]) if len(means) else "nan",
                _format(variances[t]) if len(variances) else "nan",
            ]
            return row

        cells = [str(t)] + channel(result.clean, h_mean, h_var)
        if result.noisy is not None:
            cells += channel(result.noisy, hn_mean, hn_var)
        if result.recovery is not None:
            rec = result.recovery
            cells += [
                _format(rec.delta_recovered[t]),
                str(int(rec.delta_flags[t])),
                _format(rec.chi_recovered[t]),
                str(int(rec.chi_flags[t])),
                _format(rec.flip_schedule[t]) if rec.flip_schedule is not None else "nan",
            ]
        lines.append(",".join(cells))
    return lines


def point_tag(eps: float, phi: float) -> str:
    return f"eps{eps:.6g}_phi{phi:.6g}"


def write_point_outputs(result: PointResult, out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    tag = point_tag(result.epsilon, result.phi)
    written = []

    csv_path = os.path.join(out_dir, f"point_{tag}.csv")
    with open(csv_path, "w") as fh:
        fh.write("\n".join(point_csv_rows(result)) + "\n")
    written.append(csv_path)

    if result.clean.hamming or (result.noisy and result.noisy.hamming):
        payload = {}
        if result.clean.hamming:
            payload["clean"] = {
                str(t): dist.tolist() for t, dist in enumerate(result.clean.hamming)
            }
        if result.noisy and result.noisy.hamming:
            payload["noisy"] = {
                str(t): dist.tolist() for t, dist in enumerate(result.noisy.hamming)
            }
        ham_path = os.path.join(out_dir, f"hamming_{tag}.json")
        with open(ham_path, "w") as fh:
            json.dump(payload, fh)
        written.append(ham_path)

    if result.recovery is not None:
        report_path = os.path.join(out_dir, f"recovery_{tag}.json")
        with open(report_path, "w") as fh:
            json.dump(result.recovery.to_dict(), fh, indent=2)
        written.append(report_path)

    return written


def write_phase_grid(points: list[PhasePoint], out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "phase_grid.json")
    records = [
        {
            "eps": p.epsilon,
            "phi": p.phi,
            "delta_mbl": p.delta_mbl,
            "delta_dtc": p.delta_dtc,
        }
        for p in points
    ]
    with open(path, "w") as fh:
        json.dump(records, fh, indent=2)
    return path


def write_resolved_config(config: RunConfig, out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "config.resolved.json")
    with open(path, "w") as fh:
        fh.write(config.to_json() + "\n")
    return path


# --- raw-bundle export and offline recovery (the `recover` CLI path) ---

RAW_COLUMNS = [
    "t",
    "delta_noisy",
    "delta_noisy_ref",
    "delta_sim",
    "chi_noisy",
    "corr_noisy",
    "chi_noisy_ref",
    "corr_noisy_ref",
    "chi_sim",
]


def write_raw_bundle(
    result: PointResult, reference: PointResult, out_dir: str
) -> str:
    """Raw series bundle consumed by `recover`: target + Clifford reference."""
    os.makedirs(out_dir, exist_ok=True)
    tag = point_tag(result.epsilon, result.phi)
    path = os.path.join(out_dir, f"raw_{tag}.csv")
    lines = [",".join(RAW_COLUMNS)]
    for t in range(len(result.clean.delta)):
        lines.append(
            ",".join(
                [
                    str(t),
                    _format(result.noisy.delta[t]),
                    _format(reference.noisy.delta[t]),
                    _format(result.clean.delta[t]),
                    _format(result.noisy.chi_nn[t]),
                    _format(result.noisy.corr_avg[t]),
                    _format(reference.noisy.chi_nn[t]),
                    _format(reference.noisy.corr_avg[t]),
                    _format(result.clean.chi_nn[t]),
                ]
            )
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def recover_from_raw(
    config: RunConfig, raw_path: str, phi: float, n_qubits: int
) -> RecoveryReport:
    """Re-run Delta and chi recovery on a previously exported raw bundle."""
    settings = config.recovery or RecoverySettings()
    table = np.genfromtxt(raw_path, delimiter=",", names=True)
    cycles = len(table["t"]) - 1
    exact_reference = clifford_delta(clifford_reference(phi), cycles)

    offsets, offset_info = learn_offsets(
        table["delta_noisy"],
        table["delta_noisy_ref"],
        exact_reference,
        table["delta_sim"],
        ridge=settings.ridge,
        guard=settings.guard,
    )
    delta_recovered, delta_flags = renormalize_delta(
        table["delta_noisy"],
        table["delta_noisy_ref"],
        exact_reference,
        offsets,
        guard=settings.guard,
    )
    coefficients, chi_info = learn_chi_coefficients(
        table["chi_noisy"],
        table["corr_noisy"],
        table["chi_noisy_ref"],
        table["corr_noisy_ref"],
        table["chi_sim"],
        n_qubits,
        ridge=settings.ridge,
        guard=settings.guard,
    )
    chi_recovered, chi_flags = recover_chi(
        table["chi_noisy"],
        table["corr_noisy"],
        table["chi_noisy_ref"],
        table["corr_noisy_ref"],
        coefficients,
        n_qubits,
        guard=settings.guard,
    )
    return RecoveryReport(
        offsets=offsets,
        offsets_objective=offset_info["objective"],
        chi_coefficients=coefficients,
        chi_objective=chi_info["objective"],
        delta_recovered=delta_recovered,
        delta_flags=delta_flags,
        chi_recovered=chi_recovered,
        chi_flags=chi_flags,
    )


# --- MPS checkpointing ---


def _checkpoint_key(config: RunConfig, eps: float, phi: float) -> str:
    return (
        f"s{config.seed}_{point_tag(eps, phi)}_chi{config.mps.chi_max}"
    )


def _series_arrays(series: TimeSeries | None, prefix: str) -> dict:
    if series is None:
        return {}
    arrays = {
        f"{prefix}_delta": np.array(series.delta),
        f"{prefix}_chi_nn": np.array(series.chi_nn),
        f"{prefix}_corr_avg": np.array(series.corr_avg),
        f"{prefix}_z": np.array(series.per_site_z),
    }
    if series.chi_sg:
        arrays[f"{prefix}_chi_sg"] = np.array(series.chi_sg)
        arrays[f"{prefix}_qfi"] = np.array(series.qfi)
    if series.hamming:
        arrays[f"{prefix}_hamming"] = np.array(series.hamming)
    return arrays


def _restore_series(series: TimeSeries, data, prefix: str) -> None:
    series.delta = list(data[f"{prefix}_delta"])
    series.chi_nn = list(data[f"{prefix}_chi_nn"])
    series.corr_avg = list(data[f"{prefix}_corr_avg"])
    series.per_site_z = list(data[f"{prefix}_z"])
    if f"{prefix}_chi_sg" in data:
        series.chi_sg = list(data[f"{prefix}_chi_sg"])
        series.qfi = list(data[f"{prefix}_qfi"])
    if f"{prefix}_hamming" in data:
        series.hamming = list(data[f"{prefix}_hamming"])


def _save_checkpoint(backend, directory, config, eps, phi, t, clean, noisy) -> None:
    key = _checkpoint_key(config, eps, phi)
    path = os.path.join(directory, f"{key}_t{t}.npz")
    tensors = {f"site_{i}": a for i, a in enumerate(backend.state.mps.tensors)}
    arrays = _series_arrays(clean, "clean")
    arrays.update(_series_arrays(noisy, "noisy"))
    np.savez(
        path,
        t=np.array(t),
        truncation_error=np.array(backend.state.mps.truncation_error),
        **tensors,
        **arrays,
    )
    previous = os.path.join(directory, f"{key}_t{t - 1}.npz")
    if os.path.exists(previous):
        os.remove(previous)


def _try_resume(backend, directory, config, eps, phi, clean, noisy) -> int:
    key = _checkpoint_key(config, eps, phi)
    best_t, best_path = -1, None
    for name in os.listdir(directory):
        if name.startswith(key + "_t") and name.endswith(".npz"):
            t = int(name[len(key) + 2 : -4])
            if t <= config.cycles and t > best_t:
                best_t, best_path = t, os.path.join(directory, name)
    if best_path is None:
        return 0
    data = np.load(best_path)
    n_sites = backend.state.mps.n_sites
    backend.state.mps.tensors = [data[f"site_{i}"] for i in range(n_sites)]
    backend.state.mps.truncation_error = float(data["truncation_error"])
    _restore_series(clean, data, "clean")
    if noisy is not None and "noisy_delta" in data:
        _restore_series(noisy, data, "noisy")
    return best_t + 1
