"""Campaign orchestration: simulation sweeps, shot-count power studies,
file analysis and spectrum flows.

Every trial derives its own random stream from (campaign seed, dim, shots,
trial index), so runs are bit-reproducible and trials may be distributed
across worker processes without changing any result.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import qasm
from .dynamics import TimeSeries, exact_series, read_series, sample_series
from .errors import (
    ContractViolationError,
    DefectiveEvolutionError,
    IngestError,
    NumericalDriftError,
)
from .quantum import (
    Observable,
    QuantumState,
    Superoperator,
    basis_parity_observable,
    basis_state,
    conjugated_observable,
    haar_unitary,
    identity_superop,
    is_unitary_matrix,
    mix_superops,
    random_cptp,
    root_unitary,
    unitary_superop,
)
from .witness import RankReport, ValidationConfig, analyze

__all__ = [
    "CampaignConfig",
    "CampaignReport",
    "run_simulation_campaign",
    "power_study",
    "analyze_series_file",
    "spectrum_dump",
    "build_spectrum_evolution",
    "POWER_SHOT_EXPONENTS",
]

MODES = ("simulate", "power", "analyze", "emit", "ingest", "spectrum")
EVOLUTIONS = ("haar_unitary", "mixed_cptp", "two_qubit_step", "auto")
POWER_SHOT_EXPONENTS = (14, 15, 16, 17, 18, 19)


@dataclass(frozen=True)
class CampaignConfig:
    """One campaign's worth of knobs; defaults mirror the 8192-shot studies."""

    dims: tuple[int, ...] = (2,)
    trials: int = 2000
    shots: int = 8192
    N: int = 10
    z: float = 3.29
    d_a: int = 2
    seed: int = 0
    evolution: str = "haar_unitary"
    weight: float = 0.08
    mode: str = "simulate"
    shots_list: tuple[int, ...] | None = None
    workers: int = 1
    output_dir: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if self.shots_list is not None:
            object.__setattr__(self, "shots_list", tuple(int(s) for s in self.shots_list))
        if not self.dims or any(d < 2 for d in self.dims):
            raise ContractViolationError(f"dims must all be >= 2, got {self.dims}")
        if self.trials < 1 or self.shots < 1 or self.N < 2:
            raise ContractViolationError("trials and shots must be >= 1, N >= 2")
        if not (0.0 <= self.weight <= 1.0):
            raise ContractViolationError(f"weight must lie in [0, 1], got {self.weight}")
        if self.seed < 0:
            raise ContractViolationError("seed must be nonnegative")
        if self.mode not in MODES:
            raise ContractViolationError(f"unknown mode {self.mode!r}")
        if self.evolution not in EVOLUTIONS:
            raise ContractViolationError(f"unknown evolution {self.evolution!r}")
        if self.workers < 1:
            raise ContractViolationError("workers must be >= 1")

    def validation(self) -> ValidationConfig:
        return ValidationConfig(N=self.N, shots=self.shots, z=self.z, d_a=self.d_a)

    def to_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "trials": self.trials,
            "shots": self.shots,
            "N": self.N,
            "z": self.z,
            "d_a": self.d_a,
            "seed": self.seed,
            "evolution": self.evolution,
            "weight": self.weight,
            "mode": self.mode,
            "shots_list": None if self.shots_list is None else list(self.shots_list),
            "workers": self.workers,
            "output_dir": self.output_dir,
        }


def resolve_evolution(evolution: str, dim: int) -> str:
    """'auto' pairs dim 4 with the CNOT step family, everything else with Haar."""
    if evolution != "auto":
        return evolution
    return "two_qubit_step" if dim == 4 else "haar_unitary"


def draw_trial(
    dim: int, evolution: str, weight: float, rng: np.random.Generator
) -> tuple[Superoperator, QuantumState, Observable]:
    """Random (evolution, initial state, observable) triple for one trial.

    Draw order: evolution, preparation, measurement frame. The initial state
    is rank one (a randomly rotated |0><0|) and the observable is a randomly
    rotated basis-parity operator; the CNOT-step family uses independent
    per-qubit rotations for all three, mirroring its circuit realization.
    """
    evolution = resolve_evolution(evolution, dim)
    if evolution == "haar_unitary":
        t = unitary_superop(haar_unitary(dim, rng))
    elif evolution == "mixed_cptp":
        noise = random_cptp(dim, rng)
        coherent = unitary_superop(haar_unitary(dim, rng))
        t = mix_superops([weight, 1.0 - weight], [noise, coherent])
    elif evolution == "two_qubit_step":
        if dim != 4:
            raise ContractViolationError("two_qubit_step requires dim = 4")
        step = qasm.cnot_matrix() @ np.kron(haar_unitary(2, rng), haar_unitary(2, rng))
        t = unitary_superop(step)
    else:
        raise ContractViolationError(f"unknown evolution {evolution!r}")

    if evolution == "two_qubit_step":
        u_p = np.kron(haar_unitary(2, rng), haar_unitary(2, rng))
        u_m = np.kron(haar_unitary(2, rng), haar_unitary(2, rng))
    else:
        u_p = haar_unitary(dim, rng)
        u_m = haar_unitary(dim, rng)
    rho0 = QuantumState(dim, u_p @ basis_state(dim).matrix @ u_p.conj().T)
    m = conjugated_observable(basis_parity_observable(dim), u_m)
    return t, rho0, m


def _run_trial(args: tuple) -> RankReport:
    seed, dim, shots, trial, evolution, weight, n_delays, z, d_a = args
    rng = np.random.default_rng([seed, dim, shots, trial])
    t, rho0, m = draw_trial(dim, evolution, weight, rng)
    exact = exact_series(t, rho0, m, n_delays)
    sampled = sample_series(exact, shots, rng, seed=[seed, dim, shots, trial])
    return analyze(sampled, ValidationConfig(N=n_delays, shots=shots, z=z, d_a=d_a))


@dataclass(frozen=True)
class CampaignReport:
    """Aggregated outcome of one (dim, shots) campaign cell."""

    dim: int
    evolution: str
    shots: int
    trials: int
    histogram: dict[int, int]
    rejection_fraction: float
    reports: tuple[RankReport, ...]
    config: CampaignConfig
    runtime_seconds: float = 0.0

    def __post_init__(self):
        if sum(self.histogram.values()) != self.trials:
            raise ContractViolationError("histogram frequencies must sum to trials")

    def to_dict(self) -> dict:
        # runtime_seconds is wall clock and lives in the run manifest instead,
        # keeping this serialization bit-reproducible for a fixed config.
        return {
            "dim": self.dim,
            "evolution": self.evolution,
            "shots": self.shots,
            "trials": self.trials,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "rejection_fraction": self.rejection_fraction,
            "config": self.config.to_dict(),
            "reports": [r.to_dict() for r in self.reports],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def histogram_csv(self) -> str:
        lines = ["validated_rank,count"]
        lines += [f"{k},{v}" for k, v in sorted(self.histogram.items())]
        return "\n".join(lines) + "\n"


def run_simulation_campaign(config: CampaignConfig, shots: int | None = None) -> CampaignReport:
    """Run config.trials independent simulated experiments for one dimension.

    The config must carry exactly one entry in ``dims``; sweeping dimensions
    or shot counts is the calling layer's job.
    """
    if len(config.dims) != 1:
        raise ContractViolationError(
            f"a campaign runs one dimension at a time, got dims = {config.dims}"
        )
    dim = config.dims[0]
    shots = config.shots if shots is None else shots
    evolution = resolve_evolution(config.evolution, dim)
    started = time.perf_counter()
    jobs = [
        (config.seed, dim, shots, trial, evolution, config.weight, config.N, config.z, config.d_a)
        for trial in range(config.trials)
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            reports = list(pool.map(_run_trial, jobs, chunksize=max(1, len(jobs) // (4 * config.workers))))
    else:
        reports = [_run_trial(job) for job in jobs]
    histogram = {rank: 0 for rank in range(config.N + 1)}
    for report in reports:
        histogram[report.validated_rank] += 1
    watermark = config.d_a * config.d_a
    rejections = sum(1 for r in reports if r.validated_rank > watermark)
    return CampaignReport(
        dim=dim,
        evolution=evolution,
        shots=shots,
        trials=config.trials,
        histogram=histogram,
        rejection_fraction=rejections / config.trials,
        reports=tuple(reports),
        config=config,
        runtime_seconds=time.perf_counter() - started,
    )


def power_study(config: CampaignConfig) -> list[CampaignReport]:
    """One campaign per (dim, shots) cell over the configured shot ladder."""
    shots_list = config.shots_list or tuple(2**x for x in POWER_SHOT_EXPONENTS)
    cells = []
    for dim in config.dims:
        for shots in shots_list:
            cell_config = replace(config, dims=(dim,))
            cells.append(run_simulation_campaign(cell_config, shots=shots))
    return cells


def load_series_auto(path: str | Path) -> TimeSeries:
    """Load a series from CSV+sidecar, a counts JSON array, or a counts dir."""
    path = Path(path)
    if path.is_dir():
        return qasm.ingest_counts(qasm.load_counts_dir(path))
    if path.suffix == ".csv":
        return read_series(path)
    return qasm.ingest_counts(qasm.load_counts(path))


def analyze_series_file(
    path: str | Path,
    n_delays: int | None = None,
    shots: int | None = None,
    z: float = 3.29,
    d_a: int = 2,
) -> RankReport:
    """Analyze a serialized series or counts file against dimension d_a.

    N defaults to the largest delay matrix the series supports; shots
    defaults to the recorded per-point count. Raises IngestError when the
    file, N or shots are unusable.
    """
    series = load_series_auto(path)
    if n_delays is None:
        n_delays = series.delay_size
    if len(series) < 2 * n_delays - 1:
        raise IngestError(
            f"series of length {len(series)} too short for N = {n_delays}: "
            f"need 2N-1 = {2 * n_delays - 1} points"
        )
    if shots is None:
        shots = series.shots
    if shots < 1:
        raise IngestError(
            "series does not record a shot count; pass the shots explicitly"
        )
    config = ValidationConfig(N=n_delays, shots=shots, z=z, d_a=d_a)
    return analyze(series, config)


def build_spectrum_evolution(
    kind: str, dim: int, weight: float, rng: np.random.Generator
) -> Superoperator:
    """Evolutions for spectrum flows; unitary ones are slowed to a cube root
    so the eigenvalue trajectories stay legible."""
    if kind == "identity":
        return identity_superop(dim)
    if kind == "haar_unitary":
        y = root_unitary(haar_unitary(dim, rng), 3)
        return unitary_superop(y)
    if kind == "mixed_cptp":
        noise = random_cptp(dim, rng)
        y = root_unitary(haar_unitary(dim, rng), 3)
        return mix_superops([weight, 1.0 - weight], [noise, unitary_superop(y)])
    if kind == "two_qubit_step":
        if dim != 4:
            raise ContractViolationError("two_qubit_step requires dim = 4")
        step = qasm.cnot_matrix() @ np.kron(haar_unitary(2, rng), haar_unitary(2, rng))
        return unitary_superop(root_unitary(step, 3))
    raise ContractViolationError(f"unknown spectrum evolution {kind!r}")


def spectrum_dump(t: Superoperator, powers: np.ndarray) -> np.ndarray:
    """Eigenvalue trajectories lambda_j^s, one row per power s.

    Principal powers are used; a unitary evolution must keep every
    trajectory on the unit circle to within 1e-10.
    """
    powers = np.asarray(powers, dtype=float)
    if powers.ndim != 1 or powers.size == 0 or np.any(powers < 0):
        raise ContractViolationError("powers must be a nonempty array of nonnegative reals")
    w, vectors = np.linalg.eig(t.matrix)
    cond = np.linalg.cond(vectors)
    if not np.isfinite(cond) or cond > 1e8:
        raise DefectiveEvolutionError(
            f"eigenvector condition number {cond:.3e} exceeds 1e8; spectrum flow unreliable"
        )
    flow = np.power(w[None, :], powers[:, None])
    if is_unitary_matrix(t.matrix):
        drift = np.max(np.abs(np.abs(flow) - 1.0))
        if drift > 1e-10:
            raise NumericalDriftError(
                f"unitary spectrum left the unit circle by {drift:.3e}"
            )
    return flow
