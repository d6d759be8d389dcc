"""openQASM 2.0 circuit-suite emission and measurement-count ingestion.

A suite holds one program per step count t = 0 ... 2N-2. Each program
prepares with a u3 gate, repeats the step block t times (barriers between
repetitions stop a remote compiler from collapsing them), rotates the
measurement frame with a final u3 per qubit, and measures in the Z basis.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .dynamics import TimeSeries, exact_series
from .errors import ContractViolationError, IngestError, InvalidDimensionError
from .quantum import (
    Observable,
    QuantumState,
    Superoperator,
    apply,
    basis_state,
    haar_unitary,
    is_unitary_matrix,
    observable_from_plus_projector,
    unitary_superop,
)

__all__ = [
    "CircuitSuite",
    "CountsRecord",
    "u3_angles",
    "u3_matrix",
    "emit_single_qubit_suite",
    "emit_two_qubit_suite",
    "cnot_matrix",
    "write_suite",
    "read_manifest",
    "target_evolution",
    "target_observable",
    "parity_sign",
    "frame_observable",
    "ingest_counts",
    "save_counts",
    "load_counts",
    "load_counts_dir",
    "simulate_counts",
]

QASM_HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    """The standard three-angle single-qubit gate."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
        ],
        dtype=complex,
    )


def _wrap_angle(a: float) -> float:
    # map into (-pi, pi]
    a = math.remainder(a, 2 * math.pi)
    if a <= -math.pi:
        a += 2 * math.pi
    return a


def u3_angles(u: np.ndarray) -> tuple[float, float, float]:
    """Angles (theta, phi, lambda) with u3(theta, phi, lambda) = U up to phase."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not is_unitary_matrix(u):
        raise ContractViolationError("u3_angles requires a 2x2 unitary")
    a, b = u[0, 0], u[1, 0]
    theta = 2.0 * math.atan2(abs(b), abs(a))
    if abs(b) < 1e-12:  # diagonal: theta ~ 0
        phi = 0.0
        lam = _wrap_angle(float(np.angle(u[1, 1]) - np.angle(a)))
    elif abs(a) < 1e-12:  # antidiagonal: theta ~ pi
        phi = 0.0
        lam = _wrap_angle(float(np.angle(-u[0, 1]) - np.angle(b)))
    else:
        alpha = float(np.angle(a))
        phi = _wrap_angle(float(np.angle(b)) - alpha)
        lam = _wrap_angle(float(np.angle(-u[0, 1])) - alpha)
    return theta, phi, lam


def _fmt_real(x: float) -> str:
    """Shortest round-trip decimal with a mandatory '.' (QASM 2.0 real syntax)."""
    s = repr(float(x))
    mantissa, sep, exponent = s.partition("e")
    if "." not in mantissa:
        mantissa += ".0"
    return mantissa + sep + exponent


def _u3_line(angles: tuple[float, float, float], qubit: int) -> str:
    t, p, l = (_fmt_real(a) for a in angles)
    return f"u3({t},{p},{l}) q[{qubit}];"


AngleTriple = tuple[float, float, float]


@dataclass(frozen=True)
class CircuitSuite:
    """2N-1 openQASM programs realizing one target evolution family."""

    qubit_count: int
    N: int
    programs: dict[int, str]
    gate_params: dict[str, AngleTriple]
    seed: int
    control: int | None = None
    target: int | None = None

    def __post_init__(self):
        expected = set(range(2 * self.N - 1))
        if set(self.programs) != expected:
            raise ContractViolationError(
                f"programs must cover t = 0 ... {2 * self.N - 2} exactly"
            )


def emit_single_qubit_suite(seed: int, n_delays: int) -> CircuitSuite:
    """Suite for a single qubit: prep u3, t step gates, measurement u3.

    Gate unitaries for preparation, step and measurement frame are drawn
    Haar-randomly, in that order, from the seed.
    """
    if n_delays < 2:
        raise ContractViolationError(f"N must be >= 2, got {n_delays}")
    rng = np.random.default_rng(seed)
    params = {
        "u_p": u3_angles(haar_unitary(2, rng)),
        "u_1": u3_angles(haar_unitary(2, rng)),
        "u_m": u3_angles(haar_unitary(2, rng)),
    }
    programs = {}
    for t in range(2 * n_delays - 1):
        lines = [QASM_HEADER + "qreg q[1];\ncreg c[1];"]
        lines.append(_u3_line(params["u_p"], 0))
        for rep in range(t):
            if rep > 0:
                lines.append("barrier q[0];")
            lines.append(_u3_line(params["u_1"], 0))
        lines.append(_u3_line(params["u_m"], 0))
        lines.append("measure q[0] -> c[0];")
        programs[t] = "\n".join(lines) + "\n"
    return CircuitSuite(1, n_delays, programs, params, seed)


def emit_two_qubit_suite(seed: int, n_delays: int, control: int, target: int) -> CircuitSuite:
    """Suite whose step block is (u3 on control, u3 on target, CNOT).

    Preparation and measurement-frame gates are independent per qubit.
    Draw order: prep control, prep target, step control, step target,
    measure control, measure target.
    """
    if n_delays < 2:
        raise ContractViolationError(f"N must be >= 2, got {n_delays}")
    if control == target or control < 0 or target < 0:
        raise ContractViolationError(f"invalid qubit pair ({control}, {target})")
    rng = np.random.default_rng(seed)
    params = {
        "u_p_control": u3_angles(haar_unitary(2, rng)),
        "u_p_target": u3_angles(haar_unitary(2, rng)),
        "u_1": u3_angles(haar_unitary(2, rng)),
        "u_2": u3_angles(haar_unitary(2, rng)),
        "u_m_control": u3_angles(haar_unitary(2, rng)),
        "u_m_target": u3_angles(haar_unitary(2, rng)),
    }
    size = max(control, target) + 1
    programs = {}
    for t in range(2 * n_delays - 1):
        lines = [QASM_HEADER + f"qreg q[{size}];\ncreg c0[1];\ncreg c1[1];"]
        lines.append(_u3_line(params["u_p_control"], control))
        lines.append(_u3_line(params["u_p_target"], target))
        for rep in range(t):
            if rep > 0:
                lines.append(f"barrier q[{control}],q[{target}];")
            lines.append(_u3_line(params["u_1"], control))
            lines.append(_u3_line(params["u_2"], target))
            lines.append(f"cx q[{control}],q[{target}];")
        lines.append(_u3_line(params["u_m_control"], control))
        lines.append(_u3_line(params["u_m_target"], target))
        lines.append(f"measure q[{control}] -> c0[0];")
        lines.append(f"measure q[{target}] -> c1[0];")
        programs[t] = "\n".join(lines) + "\n"
    return CircuitSuite(2, n_delays, programs, params, seed, control=control, target=target)


def write_suite(suite: CircuitSuite, directory: str | Path) -> None:
    """Write step_<t>.qasm files plus a manifest.json with the gate angles."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for t, text in sorted(suite.programs.items()):
        (directory / f"step_{t}.qasm").write_text(text)
    manifest = {
        "qubit_count": suite.qubit_count,
        "N": suite.N,
        "seed": suite.seed,
        "control": suite.control,
        "target": suite.target,
        "gate_params": {k: list(v) for k, v in suite.gate_params.items()},
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def read_manifest(directory: str | Path) -> CircuitSuite:
    """Rebuild a suite from a directory written by write_suite."""
    directory = Path(directory)
    meta = json.loads((directory / "manifest.json").read_text())
    params = {k: tuple(float(x) for x in v) for k, v in meta["gate_params"].items()}
    if meta["qubit_count"] == 1:
        suite = emit_single_qubit_suite(meta["seed"], meta["N"])
    else:
        suite = emit_two_qubit_suite(meta["seed"], meta["N"], meta["control"], meta["target"])
    if suite.gate_params != params:
        raise IngestError(f"{directory}: manifest angles do not match the recorded seed")
    return suite


def cnot_matrix() -> np.ndarray:
    """CNOT in the |control, target> product basis."""
    m = np.eye(4, dtype=complex)
    m[[2, 3]] = m[[3, 2]]
    return m


def parity_sign(bitstring: str) -> int:
    """+1 for even-parity bitstrings, -1 for odd: the Z (x) ... (x) Z outcome."""
    return 1 - 2 * (bitstring.count("1") % 2)


def target_evolution(suite: CircuitSuite) -> tuple[Superoperator, QuantumState, np.ndarray]:
    """Ideal (T, rho0, measurement frame) encoded by a suite.

    The frame is the unitary applied right before the Z-basis measurement;
    the induced observable is its conjugated basis-parity operator.
    """
    p = suite.gate_params
    if suite.qubit_count == 1:
        u_p = u3_matrix(*p["u_p"])
        step = u3_matrix(*p["u_1"])
        frame = u3_matrix(*p["u_m"])
    else:
        u_p = np.kron(u3_matrix(*p["u_p_control"]), u3_matrix(*p["u_p_target"]))
        step = cnot_matrix() @ np.kron(u3_matrix(*p["u_1"]), u3_matrix(*p["u_2"]))
        frame = np.kron(u3_matrix(*p["u_m_control"]), u3_matrix(*p["u_m_target"]))
    dim = 2**suite.qubit_count
    rho0 = QuantumState(dim, u_p @ basis_state(dim).matrix @ u_p.conj().T)
    return unitary_superop(step), rho0, frame


def frame_observable(frame: np.ndarray, plus_indices: Sequence[int]) -> Observable:
    """Observable measured by applying ``frame`` and then reading the Z basis,
    with the listed basis outcomes counted as +1."""
    frame = np.asarray(frame, dtype=complex)
    dim = frame.shape[0]
    diag = np.zeros((dim, dim), dtype=complex)
    for i in plus_indices:
        diag[i, i] = 1.0
    plus = frame.conj().T @ diag @ frame
    return observable_from_plus_projector((plus + plus.conj().T) / 2)


def target_observable(
    suite: CircuitSuite, parity_map: Callable[[str], int] = parity_sign
) -> Observable:
    """The +-1 observable a suite's measurement realizes under a parity map."""
    _, _, frame = target_evolution(suite)
    labels = [format(i, f"0{suite.qubit_count}b") for i in range(2**suite.qubit_count)]
    plus_indices = [i for i, b in enumerate(labels) if parity_map(b) == 1]
    return frame_observable(frame, plus_indices)


@dataclass(frozen=True)
class CountsRecord:
    """Measured bitstring counts for the program at one step index."""

    t: int
    shots: int
    counts: dict[str, int]

    def __post_init__(self):
        if self.t < 0 or self.shots < 1:
            raise IngestError(f"invalid step index {self.t} or shots {self.shots}")
        widths = {len(b) for b in self.counts}
        if len(widths) != 1:
            raise IngestError(f"t={self.t}: inconsistent bitstring lengths {sorted(widths)}")
        for b, c in self.counts.items():
            if set(b) - {"0", "1"}:
                raise IngestError(f"t={self.t}: invalid bitstring {b!r}")
            if int(c) != c or c < 0:
                raise IngestError(f"t={self.t}: invalid count {c!r} for {b!r}")
        total = sum(self.counts.values())
        if total != self.shots:
            raise IngestError(
                f"t={self.t}: counts sum to {total} but shots = {self.shots}"
            )


def ingest_counts(
    records: Sequence[CountsRecord],
    parity_map: Callable[[str], int] = parity_sign,
) -> TimeSeries:
    """Reduce bitstring counts to a +-1 expectation series.

    Records must cover t = 0 ... 2N-2 contiguously with uniform shots.
    """
    if not records:
        raise IngestError("no counts records")
    by_t = sorted(records, key=lambda r: r.t)
    steps = [r.t for r in by_t]
    if steps != list(range(len(by_t))):
        raise IngestError(f"step indices {steps} do not cover 0 ... {len(by_t) - 1} contiguously")
    shots = by_t[0].shots
    if any(r.shots != shots for r in by_t):
        raise IngestError("shot counts differ between records")
    values = np.empty(len(by_t))
    for i, rec in enumerate(by_t):
        signed = sum(parity_map(b) * c for b, c in rec.counts.items())
        values[i] = signed / shots
    try:
        return TimeSeries(values, shots=shots, provenance="ingested")
    except ContractViolationError as exc:
        raise IngestError(str(exc)) from exc


def save_counts(records: Sequence[CountsRecord], path: str | Path) -> None:
    data = [{"t": r.t, "shots": r.shots, "counts": dict(r.counts)} for r in records]
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def _record_from_obj(obj: Mapping) -> CountsRecord:
    try:
        return CountsRecord(
            t=int(obj["t"]), shots=int(obj["shots"]), counts={str(k): int(v) for k, v in obj["counts"].items()}
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise IngestError(f"malformed counts record: {exc}") from exc


def load_counts(path: str | Path) -> list[CountsRecord]:
    """Load a JSON array of counts records."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise IngestError(f"cannot parse counts file {path}: {exc}") from exc
    if not isinstance(data, list):
        raise IngestError(f"{path}: expected a JSON array of counts records")
    return [_record_from_obj(obj) for obj in data]


def load_counts_dir(directory: str | Path) -> list[CountsRecord]:
    """Load a directory holding one counts_<t>.json file per circuit."""
    directory = Path(directory)
    paths = sorted(directory.glob("counts_*.json"))
    if not paths:
        raise IngestError(f"no counts_<t>.json files in {directory}")
    records = []
    for p in paths:
        try:
            data = json.loads(p.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise IngestError(f"cannot parse {p}: {exc}") from exc
        records.append(_record_from_obj(data))
    return records


def simulate_counts(
    t_super: Superoperator,
    rho0: QuantumState,
    frame: np.ndarray,
    n_delays: int,
    shots: int,
    rng: np.random.Generator,
    labels: Sequence[str] | None = None,
) -> list[CountsRecord]:
    """Finite-shot Z-basis counts for an ideal evolution, one record per step.

    ``labels[i]`` names the classical bitstring reported for basis outcome i;
    the default is the binary expansion (a leaky d-level system can alias
    several levels onto one label). The +-1 estimate recoverable from the
    counts is drawn first, from a per-point child stream, exactly as
    dynamics.sample_series draws it; the individual outcomes then split the
    two sides multinomially. Ingesting these records therefore reproduces
    sample_series values bit-for-bit when both start from the same stream.
    """
    dim = t_super.dim
    if labels is None:
        width = max(1, (dim - 1).bit_length())
        labels = [format(i, f"0{width}b") for i in range(dim)]
    if len(labels) != dim:
        raise ContractViolationError(f"need one label per basis state ({dim}), got {len(labels)}")
    plus_indices = [i for i, b in enumerate(labels) if parity_sign(b) == 1]
    minus_indices = [i for i in range(dim) if i not in plus_indices]
    m_eff = frame_observable(frame, plus_indices)
    exact = exact_series(t_super, rho0, m_eff, n_delays)
    p_plus = np.clip((1.0 + exact.values) / 2.0, 0.0, 1.0)

    length = 2 * n_delays - 1
    children = rng.spawn(length)
    records = []
    state = rho0
    for step in range(length):
        probs = np.real(np.diagonal(frame @ state.matrix @ frame.conj().T))
        probs = np.clip(probs, 0.0, None)
        n_plus = int(children[step].binomial(shots, p_plus[step]))
        counts: dict[str, int] = {}
        for side, n_side in ((plus_indices, n_plus), (minus_indices, shots - n_plus)):
            if n_side == 0:
                continue
            if not side:
                raise ContractViolationError(
                    "shots landed on an outcome side with no basis labels"
                )
            side_probs = probs[side]
            total = side_probs.sum()
            if total <= 0.0:
                side_probs = np.full(len(side), 1.0 / len(side))
            else:
                side_probs = side_probs / total
            draws = children[step].multinomial(n_side, side_probs)
            for idx, c in zip(side, draws):
                if c:
                    counts[labels[idx]] = counts.get(labels[idx], 0) + int(c)
        records.append(CountsRecord(t=step, shots=shots, counts=counts))
        if step + 1 < length:
            state = apply(t_super, state)
    return records
