"""Stroboscopic expectation time series and finite-shot sampling.

A series holds <M(t)> for t = 0 ... 2N-2; the odd length 2N-1 is exactly
what an N x N matrix of delayed vectors consumes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractViolationError, DimensionMismatchError, IngestError
from .quantum import Observable, QuantumState, Superoperator, apply, expectation

__all__ = [
    "TimeSeries",
    "exact_series",
    "sample_series",
    "write_series",
    "read_series",
]

VALUE_TOL = 1e-9

PROVENANCES = ("exact", "sampled", "ingested")


@dataclass(frozen=True)
class TimeSeries:
    """Ordered +-1-observable expectation estimates with shot metadata.

    ``shots == 0`` marks an exact (infinite-shot) series.
    """

    values: np.ndarray
    shots: int
    provenance: str
    seed: int | list[int] | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 3 or v.size % 2 == 0:
            raise ContractViolationError(
                f"series length must be odd and >= 3 (L = 2N-1), got {v.size}"
            )
        if np.max(np.abs(v)) > 1.0 + VALUE_TOL:
            raise ContractViolationError(
                f"series values must lie in [-1, 1], max |value| = {np.max(np.abs(v))!r}"
            )
        if self.provenance not in PROVENANCES:
            raise ContractViolationError(f"unknown provenance {self.provenance!r}")
        if self.shots < 0:
            raise ContractViolationError("shots must be >= 0")
        v = np.ascontiguousarray(v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size

    @property
    def delay_size(self) -> int:
        """The N for which this series fills an N x N delay matrix."""
        return (self.values.size + 1) // 2


def exact_series(
    t: Superoperator, rho0: QuantumState, m: Observable, n_delays: int
) -> TimeSeries:
    """Exact series <M(t)> = Tr(M E^t[rho0]) for t = 0 ... 2*n_delays - 2.

    The state is updated iteratively (rho -> T rho) rather than by powering
    T: fewer flops and numerically gentler.
    """
    if n_delays < 2:
        raise ContractViolationError(f"n_delays must be >= 2, got {n_delays}")
    if t.dim != rho0.dim or t.dim != m.dim:
        raise DimensionMismatchError("superoperator, state and observable dims must agree")
    length = 2 * n_delays - 1
    values = np.empty(length)
    state = rho0
    for step in range(length):
        values[step] = expectation(m, state)
        if step + 1 < length:
            state = apply(t, state)
    return TimeSeries(values, shots=0, provenance="exact")


def sample_series(
    exact: TimeSeries,
    shots: int,
    rng: np.random.Generator,
    seed: int | list[int] | None = None,
) -> TimeSeries:
    """Corrupt an exact series with binomial shot noise.

    Each point draws n_plus ~ Binomial(shots, (1+value)/2) and reports
    2 n_plus / shots - 1. Every point consumes its own child stream of
    ``rng``, so consumers that need the raw counts (see qasm.simulate_counts)
    can reproduce the identical +-1 estimates from the same root stream.
    """
    if exact.provenance != "exact":
        raise ContractViolationError(
            f"sample_series needs an exact input series, got provenance {exact.provenance!r}"
        )
    if shots < 1:
        raise ContractViolationError("shots must be >= 1")
    p_plus = np.clip((1.0 + exact.values) / 2.0, 0.0, 1.0)
    children = rng.spawn(len(exact))
    n_plus = np.array(
        [children[i].binomial(shots, p_plus[i]) for i in range(len(exact))], dtype=float
    )
    values = 2.0 * n_plus / shots - 1.0
    return TimeSeries(values, shots=shots, provenance="sampled", seed=seed)


def write_series(series: TimeSeries, path: str | Path) -> None:
    """Write a series as CSV (header ``t,value``) plus a JSON metadata sidecar.

    Values use shortest round-trip float formatting, so read_series restores
    them bit-exactly. The sidecar shares the stem: ``foo.csv`` -> ``foo.json``.
    """
    path = Path(path)
    lines = ["t,value"]
    lines += [f"{t},{float(value)!r}" for t, value in enumerate(series.values)]
    path.write_text("\n".join(lines) + "\n")
    sidecar = {"shots": series.shots, "provenance": series.provenance, "seed": series.seed}
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2) + "\n")


def read_series(path: str | Path) -> TimeSeries:
    path = Path(path)
    try:
        lines = path.read_text().strip().splitlines()
    except OSError as exc:
        raise IngestError(f"cannot read series file {path}: {exc}") from exc
    if not lines or lines[0].strip() != "t,value":
        raise IngestError(f"{path}: expected CSV header 't,value'")
    values = []
    for ln, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != 2:
            raise IngestError(f"{path}: malformed row {ln + 1}: {line!r}")
        t, value = parts
        if int(t) != ln:
            raise IngestError(f"{path}: non-contiguous time index at row {ln + 1}")
        values.append(float(value))
    sidecar_path = path.with_suffix(".json")
    try:
        meta = json.loads(sidecar_path.read_text())
    except OSError as exc:
        raise IngestError(f"cannot read series sidecar {sidecar_path}: {exc}") from exc
    try:
        return TimeSeries(
            np.array(values),
            shots=int(meta["shots"]),
            provenance=str(meta["provenance"]),
            seed=meta.get("seed"),
        )
    except (KeyError, ContractViolationError) as exc:
        raise IngestError(f"{path}: invalid series: {exc}") from exc
