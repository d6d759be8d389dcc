"""Matrix of delayed vectors, worst-case shot-noise validation and rank bounds.

The N x N delay matrix V has V[k, l] = series[k + l] (0-based), so it is
Hankel and real symmetric; its singular values are the sorted absolute
eigenvalues. A singular value survives validation when it exceeds the
worst-case noise threshold h = z * N / sqrt(n), and the count of survivors
estimates the rank — and hence bounds the dimension — of the generating
process.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import TimeSeries
from .errors import ContractViolationError, InvalidDimensionError
from .quantum import _freeze

__all__ = [
    "DelayMatrix",
    "ValidationConfig",
    "RankReport",
    "delay_matrix",
    "singular_values",
    "threshold",
    "validated_rank",
    "p_value_bound",
    "rank_ceiling",
    "analyze",
]

DEFAULT_Z = 3.29  # one-sided p = 0.001 in the worst-case normal bound

RANK_ASSUMPTIONS = (
    "general",
    "unitary",
    "unitary_degenerate",
    "product_general",
    "product_unitary",
)


@dataclass(frozen=True)
class DelayMatrix:
    """Square Hankel matrix of time-series values."""

    N: int
    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.shape != (self.N, self.N):
            raise ContractViolationError(f"entries shape {e.shape} != ({self.N}, {self.N})")
        idx = np.add.outer(np.arange(self.N), np.arange(self.N))
        diag = e[0, :].tolist() + e[1:, -1].tolist()
        if not np.array_equal(e, np.asarray(diag)[idx]):
            raise ContractViolationError("entries are not Hankel")
        object.__setattr__(self, "entries", _freeze(e))


def delay_matrix(series: TimeSeries, n_delays: int) -> DelayMatrix:
    """Build the N x N matrix of delayed vectors from the first 2N-1 points."""
    if n_delays < 1:
        raise InvalidDimensionError(f"n_delays must be >= 1, got {n_delays}")
    needed = 2 * n_delays - 1
    if len(series) < needed:
        raise ContractViolationError(
            f"series of length {len(series)} too short for N = {n_delays}: "
            f"need 2N-1 = {needed} points"
        )
    idx = np.add.outer(np.arange(n_delays), np.arange(n_delays))
    return DelayMatrix(n_delays, series.values[idx])


def singular_values(v: DelayMatrix) -> np.ndarray:
    """Descending singular values; for real symmetric V these are |eigenvalues|."""
    return np.sort(np.abs(np.linalg.eigvalsh(v.entries)))[::-1]


@dataclass(frozen=True)
class ValidationConfig:
    """Parameters of the worst-case shot-noise test.

    ``d_a`` is the advertised dimension whose null hypothesis the test may
    reject; ``z`` converts to the significance level 1 - erf(z / sqrt(2)).
    """

    N: int
    shots: int
    z: float = DEFAULT_Z
    d_a: int = 2

    def __post_init__(self):
        if self.N < 1 or self.shots < 1 or self.d_a < 1:
            raise ContractViolationError("N, shots and d_a must all be >= 1")
        if not (self.z > 0 and math.isfinite(self.z)):
            raise ContractViolationError(f"z must be finite and positive, got {self.z}")

    @property
    def threshold(self) -> float:
        return threshold(self)


def threshold(config: ValidationConfig) -> float:
    """Worst-case noise tolerance h = z * N / sqrt(n)."""
    return config.z * config.N / math.sqrt(config.shots)


def _check_sorted_svals(svals: np.ndarray) -> np.ndarray:
    svals = np.asarray(svals, dtype=float)
    if svals.ndim != 1 or svals.size == 0:
        raise ContractViolationError("singular values must be a nonempty 1-d array")
    if np.any(svals < 0) or np.any(np.diff(svals) > 0):
        raise ContractViolationError("singular values must be nonnegative and sorted descending")
    return svals


def validated_rank(svals: np.ndarray, config: ValidationConfig) -> int:
    """min{k : s_{k+1} <= h}, with the virtual value s_{N+1} = 0.

    Because the values are sorted, this equals the number of singular values
    strictly above the threshold.
    """
    svals = _check_sorted_svals(svals)
    return int(np.count_nonzero(svals > threshold(config)))


def p_value_bound(svals: np.ndarray, config: ValidationConfig) -> float:
    """Data-driven upper bound on the p value for rejecting dimension d_a.

    This is the worst-case probability of shot noise alone producing a
    singular value at least as large as the observed s_{1 + d_a^2}.
    """
    svals = _check_sorted_svals(svals)
    watermark = config.d_a * config.d_a  # 0-based index of s'_{1 + d_a^2}
    if config.N < watermark + 1 or svals.size < watermark + 1:
        raise ContractViolationError(
            f"delay matrix clips dimension d_a = {config.d_a}: "
            f"N = {config.N} < d_a^2 + 1 = {watermark + 1}"
        )
    arg = math.sqrt(config.shots) * svals[watermark] / (config.N * math.sqrt(2.0))
    return 1.0 - math.erf(arg)


def rank_ceiling(dims, assumption: str, q: int | None = None) -> int:
    """Theoretical ceiling on rank(V) for a given evolution class.

    general / product_general: d^2 with d the total dimension.
    unitary:                   d^2 - d + 1 (the d phase-free eigenvalues merge).
    unitary_degenerate:        2 * C(q, 2) + 1 for q distinct eigenvalues.
    product_unitary:           prod_i (d_i^2 - d_i + 1) for independent factors.
    """
    dims = [int(d) for d in dims]
    if not dims or any(d < 1 for d in dims):
        raise InvalidDimensionError("dims must be a nonempty list of positive integers")
    total = math.prod(dims)
    if assumption in ("general", "product_general"):
        return total * total
    if assumption == "unitary":
        return total * total - total + 1
    if assumption == "unitary_degenerate":
        if q is None or q < 1 or q > total:
            raise ContractViolationError(f"q must lie in [1, {total}], got {q}")
        return 2 * math.comb(q, 2) + 1
    if assumption == "product_unitary":
        return math.prod(d * d - d + 1 for d in dims)
    raise ContractViolationError(
        f"unknown assumption {assumption!r}; expected one of {RANK_ASSUMPTIONS}"
    )


@dataclass(frozen=True)
class RankReport:
    """Everything the validation run concluded about one series."""

    singular_values: np.ndarray
    threshold: float
    validated_rank: int
    p_value_bound: float | None
    dimension_clipped: bool
    config: ValidationConfig

    def __post_init__(self):
        svals = _check_sorted_svals(self.singular_values)
        object.__setattr__(self, "singular_values", _freeze(svals))
        if self.validated_rank != int(np.count_nonzero(svals > self.threshold)):
            raise ContractViolationError("validated_rank inconsistent with singular values")
        if self.p_value_bound is not None and not (0.0 <= self.p_value_bound <= 1.0):
            raise ContractViolationError("p_value_bound must lie in [0, 1]")

    @property
    def rejects_advertised_dimension(self) -> bool:
        """True when more than d_a^2 singular values survived validation."""
        return self.validated_rank > self.config.d_a * self.config.d_a

    def to_dict(self) -> dict:
        return {
            "singular_values": [float(s) for s in self.singular_values],
            "threshold": self.threshold,
            "validated_rank": self.validated_rank,
            "p_value_bound": self.p_value_bound,
            "dimension_clipped": self.dimension_clipped,
            "config": {
                "N": self.config.N,
                "shots": self.config.shots,
                "z": self.config.z,
                "d_a": self.config.d_a,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "RankReport":
        cfg = data["config"]
        return cls(
            singular_values=np.array(data["singular_values"], dtype=float),
            threshold=float(data["threshold"]),
            validated_rank=int(data["validated_rank"]),
            p_value_bound=None if data["p_value_bound"] is None else float(data["p_value_bound"]),
            dimension_clipped=bool(data["dimension_clipped"]),
            config=ValidationConfig(
                N=int(cfg["N"]), shots=int(cfg["shots"]), z=float(cfg["z"]), d_a=int(cfg["d_a"])
            ),
        )

    @classmethod
    def from_json(cls, text: str) -> "RankReport":
        return cls.from_dict(json.loads(text))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")


def analyze(series: TimeSeries, config: ValidationConfig) -> RankReport:
    """Full pipeline: delay matrix -> singular values -> validation -> report."""
    v = delay_matrix(series, config.N)
    svals = singular_values(v)
    h = threshold(config)
    clipped = config.N < config.d_a * config.d_a + 1
    p = None if clipped else p_value_bound(svals, config)
    return RankReport(
        singular_values=svals,
        threshold=h,
        validated_rank=validated_rank(svals, config),
        p_value_bound=p,
        dimension_clipped=clipped,
        config=config,
    )
