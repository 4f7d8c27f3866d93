"""Readout error mitigation: confusion-matrix forward model, linear
inversion, and a constrained least-squares repair of unphysical counts.

Inverting a measured confusion matrix on finite-shot data can return
negative counts. The repair picks the closest physical count vector in a
weighted least-squares sense, with every entry floored at the shot-noise
scale sqrt(N) and the total held at N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .qutrit_core import DIM, ProbDist, QutritLabError


class MitigationError(QutritLabError, ValueError):
    """Base for readout-mitigation failures."""


class IllConditionedError(MitigationError):
    """The confusion matrix cannot be inverted reliably."""


class InfeasibleError(MitigationError):
    """No count vector satisfies the floor and total constraints."""


@dataclass(frozen=True)
class ConfusionMatrix:
    """Column-stochastic assignment matrix: M[i, j] = P(assigned i | prepared j)."""

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise MitigationError("confusion matrix must be square")
        if np.min(m) < -1e-12 or np.max(m) > 1.0 + 1e-12:
            raise MitigationError("entries must lie in [0, 1]")
        col_sums = m.sum(axis=0)
        if np.max(np.abs(col_sums - 1.0)) > 1e-9:
            raise MitigationError(f"columns must sum to 1 within 1e-9, got {col_sums}")
        object.__setattr__(self, "m", m)

    @property
    def dim(self) -> int:
        return self.m.shape[0]

    def condition_number(self) -> float:
        return float(np.linalg.cond(self.m))


def synthetic_confusion(dim: int = DIM * DIM, diagonal: float = 0.85) -> ConfusionMatrix:
    """Uniform-leakage model: `diagonal` on the diagonal, the rest spread
    evenly over the other outcomes of each column."""
    if not 0.0 < diagonal <= 1.0:
        raise MitigationError("diagonal must be in (0, 1]")
    if dim < 2:
        raise MitigationError("need at least two outcomes")
    off = (1.0 - diagonal) / (dim - 1)
    m = np.full((dim, dim), off)
    np.fill_diagonal(m, diagonal)
    return ConfusionMatrix(m)


@dataclass(frozen=True)
class SignedCounts:
    """Possibly negative count vector from inversion, still summing to N."""

    q: np.ndarray
    shots: float

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        if q.ndim != 1:
            raise MitigationError("counts must form a vector")
        if self.shots <= 0:
            raise MitigationError("total shots must be positive")
        if abs(q.sum() - self.shots) > 1e-6 * max(1.0, self.shots):
            raise MitigationError(f"counts sum to {q.sum()}, expected {self.shots}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "shots", float(self.shots))


def apply_confusion(true_probs, matrix: ConfusionMatrix) -> ProbDist:
    """Distribution actually observed when measuring `true_probs`."""
    p = true_probs.probs if isinstance(true_probs, ProbDist) else np.asarray(true_probs, dtype=float)
    if p.shape[0] != matrix.dim:
        raise MitigationError(f"distribution size {p.shape[0]} does not match matrix {matrix.dim}")
    return ProbDist(matrix.m @ p)


def invert_confusion(measured_counts, matrix: ConfusionMatrix) -> SignedCounts:
    """Undo the assignment model by direct linear inversion.

    The result can carry negative entries; downstream repair handles them.
    """
    counts = np.asarray(measured_counts, dtype=float)
    if counts.shape[0] != matrix.dim:
        raise MitigationError("counts size does not match the matrix")
    cond = matrix.condition_number()
    if not math.isfinite(cond) or cond > 1e6:
        raise IllConditionedError(f"condition number {cond:.3g} exceeds 1e6")
    q = np.linalg.solve(matrix.m, counts)
    return SignedCounts(q, float(counts.sum()))


def mle_correct(signed: SignedCounts, floor: float | None = None) -> np.ndarray:
    """Closest physical counts to an inverted vector.

    Minimizes sum(((p_i - q_i)/w_i)**2) subject to p_i >= floor and
    sum(p) = N, where w_i is q_i with a sqrt(N) guard for small entries
    and the floor defaults to sqrt(N). Solved exactly by an active-set
    pass: free coordinates share a common Lagrange multiplier, floored
    ones pin to the floor, repeated until the free set is stable.
    """
    q = signed.q
    n = signed.shots
    root_n = math.sqrt(n)
    f = root_n if floor is None else float(floor)
    d = q.shape[0]
    if d * f > n + 1e-9:
        raise InfeasibleError(f"{d} entries at floor {f:.6g} exceed the total {n}")
    weights = np.where(np.abs(q) < root_n, root_n, np.abs(q))
    w2 = weights**2

    free = np.ones(d, dtype=bool)
    for _ in range(d + 1):
        # stationarity: p_i = q_i + lam * w_i^2 / 2 on the free set,
        # with lam chosen so the total lands on N:
        lam = 2.0 * (n - f * np.sum(~free) - q[free].sum()) / w2[free].sum()
        p = np.where(free, q + 0.5 * lam * w2, f)
        violating = free & (p < f - 1e-12)
        if not violating.any():
            break
        free &= ~violating
        if not free.any():
            p = np.full(d, f)
            break
    p = np.where(p < f, f, p)
    # tiny residual from the final clipping is spread over interior entries:
    slack = n - p.sum()
    if abs(slack) > 1e-9:
        interior = p > f + 1e-12
        if interior.any():
            p[interior] += slack / interior.sum()
    return p


def mitigate_counts(measured_counts, matrix: ConfusionMatrix, floor: float | None = None) -> np.ndarray:
    """Inversion followed by repair, the full pipeline on raw counts."""
    return mle_correct(invert_confusion(measured_counts, matrix), floor)


def save_confusion(matrix: ConfusionMatrix, path) -> None:
    """Plain-text table, row-major, with the convention in the header."""
    lines = [
        "# confusion matrix, row-major: entry (i, j) = P(assigned i | prepared j)",
        f"# {matrix.dim} x {matrix.dim}, columns sum to 1",
    ]
    for row in matrix.m:
        lines.append(" ".join(repr(float(x)) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_confusion(path) -> ConfusionMatrix:
    """Read a plain-text matrix saved by save_confusion (or hand-written)."""
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rows.append([float(x) for x in line.split()])
    if not rows:
        raise MitigationError(f"no numeric rows found in {path}")
    if len({len(r) for r in rows}) != 1:
        raise MitigationError(f"rows in {path} have unequal lengths")
    m = np.array(rows, dtype=float)
    return ConfusionMatrix(m)
