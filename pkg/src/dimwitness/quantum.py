"""States, two-outcome observables, superoperators and random ensembles.

Operators are vectorized by row-major stacking, so a conjugation
``rho -> U rho U^dag`` becomes the matrix ``kron(U, conj(U))`` acting on
``rho.reshape(-1)``, and the operator inner product is
``<<A|B>> = Tr(A^dag B) = vec(A).conj() @ vec(B)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    ContractViolationError,
    DefectiveEvolutionError,
    DimensionMismatchError,
    InvalidDimensionError,
    NumericalDriftError,
)

__all__ = [
    "QuantumState",
    "Observable",
    "Superoperator",
    "SpectralData",
    "HaarAngles",
    "vec",
    "unvec",
    "basis_state",
    "pure_state",
    "maximally_mixed",
    "basis_parity_observable",
    "observable_from_plus_projector",
    "conjugated_observable",
    "haar_unitary",
    "qubit_unitary_from_angles",
    "random_cptp",
    "unitary_superop",
    "identity_superop",
    "root_unitary",
    "mix_superops",
    "tensor_superop",
    "choi_matrix",
    "is_trace_preserving",
    "is_unitary_matrix",
    "apply",
    "expectation",
    "spectral_decompose",
]

HERMITICITY_TOL = 1e-10
PSD_TOL = 1e-10
UNITARY_TOL = 1e-10
EIG_CONDITION_LIMIT = 1e8


def vec(a: np.ndarray) -> np.ndarray:
    """Row-major vectorization |A>> of a square matrix."""
    return np.asarray(a).reshape(-1)


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    return np.asarray(v).reshape(dim, dim)


def _dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def is_unitary_matrix(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return np.max(np.abs(u @ _dagger(u) - np.eye(u.shape[0]))) <= tol


@dataclass(frozen=True)
class QuantumState:
    """Density matrix, possibly subnormalized (trace <= 1)."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if self.dim < 1:
            raise InvalidDimensionError(f"state dimension must be >= 1, got {self.dim}")
        if m.shape != (self.dim, self.dim):
            raise DimensionMismatchError(
                f"state matrix shape {m.shape} does not match dim {self.dim}"
            )
        herm = np.max(np.abs(m - _dagger(m)))
        if herm > HERMITICITY_TOL:
            raise ContractViolationError(f"state not Hermitian: |A - A^dag| = {herm:.3e}")
        evals = np.linalg.eigvalsh((m + _dagger(m)) / 2)
        if evals.min() < -PSD_TOL:
            raise ContractViolationError(
                f"state not positive semidefinite: min eigenvalue {evals.min():.3e}"
            )
        tr = m.trace()
        if abs(tr.imag) > HERMITICITY_TOL or not (0.0 < tr.real <= 1.0 + HERMITICITY_TOL):
            raise ContractViolationError(f"state trace {tr} outside (0, 1]")
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def trace(self) -> float:
        return float(self.matrix.trace().real)


def basis_state(dim: int, k: int = 0) -> QuantumState:
    """|k><k| in the computational basis."""
    m = np.zeros((dim, dim), dtype=complex)
    m[k, k] = 1.0
    return QuantumState(dim, m)


def pure_state(ket: np.ndarray) -> QuantumState:
    ket = np.asarray(ket, dtype=complex).reshape(-1)
    ket = ket / np.linalg.norm(ket)
    return QuantumState(ket.size, np.outer(ket, ket.conj()))


def maximally_mixed(dim: int) -> QuantumState:
    return QuantumState(dim, np.eye(dim, dtype=complex) / dim)


@dataclass(frozen=True)
class Observable:
    """Hermitian operator with eigenvalues +-1 and a declared +1 projector.

    The two-outcome model M = 2 P_plus - I is what finite-shot sampling
    assumes: each shot yields +1 (probability Tr(P_plus rho)) or -1.
    """

    dim: int
    matrix: np.ndarray
    plus_projector: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        p = np.asarray(self.plus_projector, dtype=complex)
        if m.shape != (self.dim, self.dim) or p.shape != (self.dim, self.dim):
            raise DimensionMismatchError("observable matrices must be dim x dim")
        if np.max(np.abs(m - _dagger(m))) > HERMITICITY_TOL:
            raise ContractViolationError("observable not Hermitian")
        if np.max(np.abs(p @ p - p)) > HERMITICITY_TOL or np.max(np.abs(p - _dagger(p))) > HERMITICITY_TOL:
            raise ContractViolationError("plus_projector is not an orthogonal projector")
        if np.max(np.abs(m - (2 * p - np.eye(self.dim)))) > HERMITICITY_TOL:
            raise ContractViolationError("matrix != 2 * plus_projector - identity")
        object.__setattr__(self, "matrix", _freeze(m))
        object.__setattr__(self, "plus_projector", _freeze(p))


def observable_from_plus_projector(p: np.ndarray) -> Observable:
    p = np.asarray(p, dtype=complex)
    dim = p.shape[0]
    return Observable(dim, 2 * p - np.eye(dim), p)


def basis_parity_observable(dim: int) -> Observable:
    """Diagonal +-1 observable assigning (-1)^popcount(k) to basis state k.

    For dim 2 this is Pauli Z; for dim 4 it is the two-qubit parity Z (x) Z.
    """
    signs = np.array([(-1) ** bin(k).count("1") for k in range(dim)], dtype=float)
    plus = np.diag(((signs + 1) / 2).astype(complex))
    return observable_from_plus_projector(plus)


def conjugated_observable(obs: Observable, u: np.ndarray) -> Observable:
    """Observable for measuring ``obs`` after the frame change ``u``: U M U^dag."""
    if not is_unitary_matrix(u):
        raise ContractViolationError("conjugation requires a unitary matrix")
    p = u @ obs.plus_projector @ _dagger(u)
    p = (p + _dagger(p)) / 2
    return observable_from_plus_projector(p)


@dataclass(frozen=True)
class Superoperator:
    """Linear map on row-major vectorized operators (a d^2 x d^2 matrix)."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if self.dim < 1:
            raise InvalidDimensionError(f"dimension must be >= 1, got {self.dim}")
        d2 = self.dim * self.dim
        if m.shape != (d2, d2):
            raise DimensionMismatchError(
                f"superoperator shape {m.shape} does not match dim {self.dim} (need {d2}x{d2})"
            )
        object.__setattr__(self, "matrix", _freeze(m))


def identity_superop(dim: int) -> Superoperator:
    return Superoperator(dim, np.eye(dim * dim, dtype=complex))


def is_trace_preserving(t: Superoperator, tol: float = UNITARY_TOL) -> bool:
    """True when <<I| is a left eigenvector of T with eigenvalue 1."""
    ident = vec(np.eye(t.dim, dtype=complex))
    return np.max(np.abs(ident @ t.matrix - ident)) <= tol


@dataclass(frozen=True)
class HaarAngles:
    """Angle triple parameterizing a Haar-random qubit unitary.

    ``phi`` is derived from ``xi`` as arcsin(sqrt(xi)) and lies in [0, pi/2].
    """

    psi: float
    chi: float
    xi: float
    phi: float = field(init=False)

    def __post_init__(self):
        if not (0.0 <= self.xi < 1.0):
            raise ContractViolationError(f"xi must lie in [0, 1), got {self.xi}")
        if not (0.0 <= self.psi < 2 * np.pi) or not (0.0 <= self.chi < 2 * np.pi):
            raise ContractViolationError("psi and chi must lie in [0, 2*pi)")
        object.__setattr__(self, "phi", float(np.arcsin(np.sqrt(self.xi))))

    @classmethod
    def sample(cls, rng: np.random.Generator) -> "HaarAngles":
        return cls(
            psi=float(rng.uniform(0.0, 2 * np.pi)),
            chi=float(rng.uniform(0.0, 2 * np.pi)),
            xi=float(rng.uniform(0.0, 1.0)),
        )


def qubit_unitary_from_angles(angles: HaarAngles) -> np.ndarray:
    """2x2 unitary built from an Euler-angle triple."""
    c, s = np.cos(angles.phi), np.sin(angles.phi)
    ep, ec = np.exp(1j * angles.psi), np.exp(1j * angles.chi)
    return np.array([[c * ep, s * ec], [-s * ec.conj(), c * ep.conj()]], dtype=complex)


def _ginibre(dim_rows: int, dim_cols: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((dim_rows, dim_cols)) + 1j * rng.standard_normal((dim_rows, dim_cols))


def _haar_qr(dim: int, rng: np.random.Generator) -> np.ndarray:
    # QR of a Ginibre matrix; fixing the phases of diag(R) makes the
    # factorization unique and the Q factor Haar-distributed.
    q, r = np.linalg.qr(_ginibre(dim, dim, rng))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random dim x dim unitary.

    Qubits use the explicit Euler-angle construction (psi, chi uniform on
    [0, 2*pi), phi = arcsin(sqrt(xi)) with xi uniform on [0, 1)); larger
    dimensions use phase-normalized QR of a Ginibre matrix.
    """
    if dim < 1:
        raise InvalidDimensionError(f"unitary dimension must be >= 1, got {dim}")
    if dim == 2:
        return qubit_unitary_from_angles(HaarAngles.sample(rng))
    return _haar_qr(dim, rng)


def _superop_to_choi_4d(t4: np.ndarray) -> np.ndarray:
    # superop indices [i, j, k, l] (output row/col, input row/col)
    # -> Choi indices [k, i, l, j] (input factor first, output factor second)
    return t4.transpose(2, 0, 3, 1)


def choi_matrix(t: Superoperator) -> np.ndarray:
    """Choi matrix sum_kl |k><l| (x) E(|k><l|); PSD iff the map is CP."""
    d = t.dim
    return _superop_to_choi_4d(t.matrix.reshape(d, d, d, d)).reshape(d * d, d * d)


def random_cptp(dim: int, rng: np.random.Generator) -> Superoperator:
    """Random full-rank CPTP map via a trace-normalized Wishart Choi matrix."""
    if dim < 2:
        raise InvalidDimensionError(f"random_cptp requires dim >= 2, got {dim}")
    d2 = dim * dim
    g = _ginibre(d2, d2, rng)
    w = g @ _dagger(g)
    # input marginal: trace out the output factor of the Choi candidate
    y = np.einsum("aibi->ab", w.reshape(dim, dim, dim, dim))
    yvals, yvecs = np.linalg.eigh(y)
    y_isqrt = yvecs @ np.diag(yvals**-0.5) @ _dagger(yvecs)
    z = np.kron(y_isqrt, np.eye(dim))
    choi = z @ w @ z
    t4 = choi.reshape(dim, dim, dim, dim).transpose(1, 3, 0, 2)
    return Superoperator(dim, t4.reshape(d2, d2))


def unitary_superop(u: np.ndarray) -> Superoperator:
    """Superoperator of rho -> U rho U^dag, i.e. kron(U, conj(U))."""
    u = np.asarray(u, dtype=complex)
    if not is_unitary_matrix(u):
        raise ContractViolationError("unitary_superop requires a unitary matrix")
    return Superoperator(u.shape[0], np.kron(u, u.conj()))


def root_unitary(u: np.ndarray, k: int) -> np.ndarray:
    """Principal k-th root of a unitary: each eigenphase in (-pi, pi] divided by k."""
    u = np.asarray(u, dtype=complex)
    if k < 1:
        raise ContractViolationError(f"root order must be >= 1, got {k}")
    if not is_unitary_matrix(u):
        raise ContractViolationError("root_unitary requires a unitary matrix")
    # Schur of a normal matrix is a unitary diagonalization, immune to the
    # eigenvector conditioning issues of a general eig call.
    tri, q = scipy.linalg.schur(u, output="complex")
    phases = np.angle(np.diagonal(tri))
    return q @ np.diag(np.exp(1j * phases / k)) @ _dagger(q)


def mix_superops(weights, ops) -> Superoperator:
    """Entrywise convex combination of equal-dimension superoperators."""
    weights = [float(w) for w in weights]
    ops = list(ops)
    if len(weights) != len(ops) or not ops:
        raise ContractViolationError("need one weight per superoperator")
    if any(w < 0 for w in weights):
        raise ContractViolationError("weights must be nonnegative")
    if abs(sum(weights) - 1.0) > 1e-12:
        raise ContractViolationError(f"weights must sum to 1, got {sum(weights)!r}")
    dim = ops[0].dim
    if any(op.dim != dim for op in ops):
        raise DimensionMismatchError("mixed superoperators must share a dimension")
    acc = np.zeros_like(ops[0].matrix)
    for w, op in zip(weights, ops):
        acc = acc + w * op.matrix
    return Superoperator(dim, acc)


def tensor_superop(t1: Superoperator, t2: Superoperator) -> Superoperator:
    """Superoperator acting as t1 on factor 1 and t2 on factor 2."""
    d1, d2 = t1.dim, t2.dim
    a = t1.matrix.reshape(d1, d1, d1, d1)
    b = t2.matrix.reshape(d2, d2, d2, d2)
    # composite row-major vec index order is (row1, row2, col1, col2)
    comp = np.einsum("abAB,cdCD->acbdACBD", a, b)
    dd = (d1 * d2) ** 2
    return Superoperator(d1 * d2, comp.reshape(dd, dd))


def apply(t: Superoperator, rho: QuantumState) -> QuantumState:
    """Apply a superoperator to a state, re-Hermitizing tiny numerical drift."""
    if t.dim != rho.dim:
        raise DimensionMismatchError(
            f"superoperator dim {t.dim} does not match state dim {rho.dim}"
        )
    out = unvec(t.matrix @ vec(rho.matrix), t.dim)
    drift = np.max(np.abs(out - _dagger(out)))
    if drift > 1e-9:
        raise NumericalDriftError(f"Hermiticity drift {drift:.3e} exceeds 1e-9")
    return QuantumState(t.dim, (out + _dagger(out)) / 2)


def expectation(m: Observable, rho: QuantumState) -> float:
    """Tr(M rho), checked to be real up to a 1e-9 residue."""
    if m.dim != rho.dim:
        raise DimensionMismatchError(
            f"observable dim {m.dim} does not match state dim {rho.dim}"
        )
    val = np.einsum("ij,ji->", m.matrix, rho.matrix)
    if abs(val.imag) > 1e-9:
        raise NumericalDriftError(f"imaginary residue {val.imag:.3e} in expectation value")
    return float(val.real)


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues of a superoperator with the overlap coefficients that
    reconstruct the expectation time series as sum_j lambda_j^t m_j r_j."""

    eigenvalues: np.ndarray
    left_overlaps: np.ndarray
    right_overlaps: np.ndarray
    unitary_phases: np.ndarray | None = None

    def __post_init__(self):
        w = np.asarray(self.eigenvalues, dtype=complex)
        n = w.size
        root = round(n**0.5)
        if root * root != n:
            raise DimensionMismatchError(f"eigenvalue count {n} is not a perfect square")
        object.__setattr__(self, "eigenvalues", _freeze(w))
        object.__setattr__(self, "left_overlaps", _freeze(np.asarray(self.left_overlaps, dtype=complex)))
        object.__setattr__(self, "right_overlaps", _freeze(np.asarray(self.right_overlaps, dtype=complex)))
        if self.unitary_phases is not None:
            phases = np.asarray(self.unitary_phases, dtype=float)
            diffs = np.exp(1j * (phases[:, None] - phases[None, :])).reshape(-1)
            dist = np.abs(w[:, None] - diffs[None, :]).min(axis=1)
            if dist.max() > 1e-8:
                raise ContractViolationError(
                    "eigenvalues are not phase differences of the supplied unitary spectrum"
                )
            object.__setattr__(self, "unitary_phases", _freeze(phases))

    def reconstruct(self, t: int) -> float:
        """Series value at integer time t from the spectral expansion."""
        val = np.sum(self.eigenvalues**t * self.left_overlaps * self.right_overlaps)
        return float(val.real)


def spectral_decompose(
    t: Superoperator,
    m: Observable,
    rho: QuantumState,
    unitary: np.ndarray | None = None,
) -> SpectralData:
    """Diagonalize T and record the overlaps of M and rho with its eigenbasis.

    Uses the biorthogonal left/right eigenvector pair, so the reconstruction
    holds for any diagonalizable T, not only normal ones. Refuses when the
    eigenvector matrix is ill-conditioned (near-defective T).
    """
    if t.dim != m.dim or t.dim != rho.dim:
        raise DimensionMismatchError("superoperator, observable and state dims must agree")
    w, r = np.linalg.eig(t.matrix)
    cond = np.linalg.cond(r)
    if not np.isfinite(cond) or cond > EIG_CONDITION_LIMIT:
        raise DefectiveEvolutionError(
            f"eigenvector condition number {cond:.3e} exceeds {EIG_CONDITION_LIMIT:.1e}; "
            "evolution is defective or nearly so"
        )
    left = vec(m.matrix).conj() @ r
    right = np.linalg.solve(r, vec(rho.matrix))
    phases = None
    if unitary is not None:
        if not is_unitary_matrix(np.asarray(unitary, dtype=complex)):
            raise ContractViolationError("unitary_phases source must be unitary")
        phases = np.angle(np.linalg.eigvals(np.asarray(unitary, dtype=complex)))
    return SpectralData(w, left, right, phases)
