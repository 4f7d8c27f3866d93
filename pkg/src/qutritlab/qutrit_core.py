"""Core linear algebra for registers of three-level systems.

States live in dimension 3**n with the first qutrit most significant,
so for two qutrits the basis order is 00, 01, 02, 10, ..., 22 and
the label "21" sits at index 7.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DIM = 3


class QutritLabError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(QutritLabError, ValueError):
    """Operands describe registers of different sizes."""


class StateValidationError(QutritLabError, ValueError):
    """A state or distribution failed its structural checks."""


def _as_complex_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise StateValidationError(f"{name} contains non-finite entries")
    return arr


def n_qutrits_for_dim(dim: int) -> int:
    n = 0
    d = 1
    while d < dim:
        d *= DIM
        n += 1
    if d != dim or n == 0:
        raise DimensionMismatchError(f"dimension {dim} is not a positive power of 3")
    return n


@dataclass(frozen=True)
class BasisLabel:
    """Ternary register label, e.g. BasisLabel((2, 1)) for |21>."""

    digits: tuple[int, ...]

    def __post_init__(self):
        if len(self.digits) == 0:
            raise StateValidationError("a basis label needs at least one digit")
        if any(d not in (0, 1, 2) for d in self.digits):
            raise StateValidationError(f"digits must be 0, 1 or 2: {self.digits}")
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))

    @property
    def n_qutrits(self) -> int:
        return len(self.digits)

    @property
    def index(self) -> int:
        # first qutrit is the most significant ternary digit:
        idx = 0
        for d in self.digits:
            idx = idx * DIM + d
        return idx

    @classmethod
    def from_index(cls, index: int, n_qutrits: int) -> "BasisLabel":
        if n_qutrits < 1 or not 0 <= index < DIM**n_qutrits:
            raise StateValidationError(f"index {index} out of range for {n_qutrits} qutrits")
        digits = []
        for _ in range(n_qutrits):
            digits.append(index % DIM)
            index //= DIM
        return cls(tuple(reversed(digits)))

    @classmethod
    def parse(cls, text: str) -> "BasisLabel":
        if not text or any(c not in "012" for c in text):
            raise StateValidationError(f"cannot parse basis label {text!r}")
        return cls(tuple(int(c) for c in text))

    def __str__(self) -> str:
        return "".join(str(d) for d in self.digits)


@dataclass(frozen=True)
class PureState:
    """Normalized state vector over one or more qutrits."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _as_complex_array(self.amplitudes, "amplitudes")
        if amps.ndim != 1:
            raise StateValidationError("amplitudes must be a vector")
        n_qutrits_for_dim(amps.shape[0])
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > 1e-9:
            raise StateValidationError(f"state norm {norm} is not 1 within 1e-9")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, label: BasisLabel | str) -> "PureState":
        if isinstance(label, str):
            label = BasisLabel.parse(label)
        amps = np.zeros(DIM**label.n_qutrits, dtype=complex)
        amps[label.index] = 1.0
        return cls(amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def n_qutrits(self) -> int:
        return n_qutrits_for_dim(self.dim)

    def probabilities(self) -> "ProbDist":
        return ProbDist(np.abs(self.amplitudes) ** 2)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite operator."""

    matrix: np.ndarray

    def __post_init__(self):
        rho = _as_complex_array(self.matrix, "density matrix")
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise StateValidationError("density matrix must be square")
        n_qutrits_for_dim(rho.shape[0])
        if np.max(np.abs(rho - rho.conj().T)) > 1e-8:
            raise StateValidationError("density matrix is not Hermitian within 1e-8")
        tr = complex(np.trace(rho))
        if abs(tr - 1.0) > 1e-6:
            raise StateValidationError(f"trace {tr} is not 1 within 1e-6")
        min_eig = float(np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)))
        if min_eig < -1e-6:
            raise StateValidationError(f"negative eigenvalue {min_eig} beyond -1e-6")
        object.__setattr__(self, "matrix", rho)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qutrits(self) -> int:
        return n_qutrits_for_dim(self.dim)

    def diagonal_probs(self) -> "ProbDist":
        return ProbDist(np.real(np.diag(self.matrix)))


@dataclass(frozen=True)
class ProbDist:
    """Probability distribution over register basis states."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1:
            raise StateValidationError("probabilities must form a vector")
        n_qutrits_for_dim(p.shape[0])
        if np.min(p) < -1e-9:
            raise StateValidationError(f"negative probability {np.min(p)}")
        p = np.clip(p, 0.0, None)
        s = float(p.sum())
        if abs(s - 1.0) > 1e-6:
            raise StateValidationError(f"probabilities sum to {s}, not 1 within 1e-6")
        object.__setattr__(self, "probs", p)

    @property
    def dim(self) -> int:
        return self.probs.shape[0]

    def prob_of(self, label: BasisLabel | str) -> float:
        if isinstance(label, str):
            label = BasisLabel.parse(label)
        return float(self.probs[label.index])

    def argmax_label(self) -> BasisLabel:
        # np.argmax returns the lowest index on ties:
        n = n_qutrits_for_dim(self.dim)
        return BasisLabel.from_index(int(np.argmax(self.probs)), n)


def tensor(*operands):
    """Kronecker product of states, operators or distributions.

    Mixed input kinds are not combined; all operands must share a kind.
    """
    if len(operands) < 1:
        raise DimensionMismatchError("tensor needs at least one operand")
    if all(isinstance(op, PureState) for op in operands):
        amps = operands[0].amplitudes
        for op in operands[1:]:
            amps = np.kron(amps, op.amplitudes)
        return PureState(amps)
    if all(isinstance(op, DensityMatrix) for op in operands):
        rho = operands[0].matrix
        for op in operands[1:]:
            rho = np.kron(rho, op.matrix)
        return DensityMatrix(rho)
    if all(isinstance(op, ProbDist) for op in operands):
        p = operands[0].probs
        for op in operands[1:]:
            p = np.kron(p, op.probs)
        return ProbDist(p)
    arrs = [np.asarray(op) for op in operands]
    out = arrs[0]
    for a in arrs[1:]:
        out = np.kron(out, a)
    return out


def _coerce_state(state):
    if isinstance(state, (PureState, DensityMatrix)):
        return state
    arr = np.asarray(state, dtype=complex)
    if arr.ndim == 1:
        return PureState(arr)
    if arr.ndim == 2:
        return DensityMatrix(arr)
    raise StateValidationError("expected a state vector or a density matrix")


def fidelity(a, b) -> float:
    """Uhlmann fidelity between two states (squared-overlap convention).

    Pure/pure reduces to |<a|b>|**2 and pure/mixed to <a|rho|a>.
    """
    a = _coerce_state(a)
    b = _coerce_state(b)
    if a.dim != b.dim:
        raise DimensionMismatchError(f"state dims differ: {a.dim} vs {b.dim}")
    if isinstance(a, PureState) and isinstance(b, PureState):
        return float(np.abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
    if isinstance(a, PureState):
        psi = a.amplitudes
        return float(np.real(np.vdot(psi, b.matrix @ psi)))
    if isinstance(b, PureState):
        psi = b.amplitudes
        return float(np.real(np.vdot(psi, a.matrix @ psi)))
    sqrt_a = _psd_sqrt(a.matrix)
    inner = _psd_sqrt(sqrt_a @ b.matrix @ sqrt_a)
    val = float(np.real(np.trace(inner)) ** 2)
    return min(max(val, 0.0), 1.0 + 1e-12)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def sso(p, q) -> float:
    """Squared statistical overlap (sum of sqrt(p*q), squared)."""
    p = p.probs if isinstance(p, ProbDist) else np.asarray(p, dtype=float)
    q = q.probs if isinstance(q, ProbDist) else np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimensionMismatchError(f"distribution shapes differ: {p.shape} vs {q.shape}")
    if np.min(p) < -1e-12 or np.min(q) < -1e-12:
        raise StateValidationError("sso requires nonnegative entries")
    return float(np.sum(np.sqrt(np.clip(p, 0, None) * np.clip(q, 0, None))) ** 2)


def partial_trace(rho: np.ndarray, keep: int, n_qutrits: int) -> np.ndarray:
    """Trace out all qutrits except position `keep` (0-based)."""
    if not 0 <= keep < n_qutrits:
        raise DimensionMismatchError(f"keep={keep} out of range for {n_qutrits} qutrits")
    rho = np.asarray(rho, dtype=complex)
    shape = (DIM,) * (2 * n_qutrits)
    t = rho.reshape(shape)
    for pos in reversed(range(n_qutrits)):
        if pos == keep:
            continue
        t = np.trace(t, axis1=pos, axis2=pos + (t.ndim // 2))
    return t
