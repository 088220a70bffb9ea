"""Preference matrices and score arithmetic.

A preference matrix P over K arms holds P[i, j] = probability that arm i
wins a duel against arm j.  Valid matrices have a 0.5 diagonal, entries in
[0, 1] and P[i, j] + P[j, i] = 1.  Two score summaries are used throughout:

* the tournament score of arm i, the average win probability of i against
  the other K - 1 arms, and
* the self-inclusive score, the average win probability of i against an
  opponent drawn uniformly from all K arms (including i itself).

The two are affinely related: self_inclusive = (K-1)/K * tournament + 1/(2K),
so they rank arms identically and their regrets differ by the fixed factor
K/(K-1).
"""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import (
    DiagonalError,
    DimensionError,
    EmptySequenceError,
    EntryRangeError,
    SkewError,
)

SKEW_TOL = 1e-12


class PreferenceMatrix:
    """Validated, immutable K x K duel-probability matrix."""

    def __init__(self, p: np.ndarray):
        self._p = p
        self._p.flags.writeable = False

    @property
    def p(self) -> np.ndarray:
        return self._p

    @property
    def num_arms(self) -> int:
        return self._p.shape[0]

    @cached_property
    def tournament_scores(self) -> np.ndarray:
        """Average win probability against the other K - 1 arms, shape (K,)."""
        k = self.num_arms
        return (self._p.sum(axis=1) - 0.5) / (k - 1)

    @cached_property
    def self_inclusive_scores(self) -> np.ndarray:
        """Average win probability against a uniform opponent, shape (K,)."""
        return self._p.mean(axis=1)

    def __repr__(self):
        return f"PreferenceMatrix(K={self.num_arms})"


def validate(raw) -> PreferenceMatrix:
    """Check and wrap a raw array as a preference matrix.

    Raises DimensionError, EntryRangeError, DiagonalError or SkewError with
    the offending indices in the message.
    """
    p = np.asarray(raw, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise DimensionError(f"preference matrix must be square 2-D, got shape {p.shape}")
    k = p.shape[0]
    if k < 2:
        raise DimensionError(f"need at least 2 arms, got {k}")
    bad = np.argwhere((p < 0.0) | (p > 1.0) | ~np.isfinite(p))
    if bad.size:
        i, j = bad[0]
        raise EntryRangeError(f"entry ({i}, {j}) = {p[i, j]} outside [0, 1]")
    diag = np.abs(np.diagonal(p) - 0.5)
    if diag.max() > 0.0:
        i = int(diag.argmax())
        raise DiagonalError(f"diagonal entry ({i}, {i}) = {p[i, i]}, expected 0.5")
    skew = np.abs(p + p.T - 1.0)
    if skew.max() > SKEW_TOL:
        i, j = np.unravel_index(int(skew.argmax()), skew.shape)
        raise SkewError(
            f"P({i},{j}) + P({j},{i}) = {p[i, j] + p[j, i]!r}, "
            f"deviates from 1 by more than {SKEW_TOL}"
        )
    return PreferenceMatrix(p.copy())


class ScoreKind(Enum):
    TOURNAMENT = "tournament"
    SELF_INCLUSIVE = "self_inclusive"
    ESTIMATED = "estimated"


@dataclass(frozen=True)
class ScoreVector:
    """Per-arm scores of one kind for a single round."""

    values: np.ndarray  # (K,)
    kind: ScoreKind

    def __post_init__(self):
        self.values.flags.writeable = False


def borda_scores(matrix: PreferenceMatrix) -> ScoreVector:
    return ScoreVector(matrix.tournament_scores, ScoreKind.TOURNAMENT)


def shifted_borda_scores(matrix: PreferenceMatrix) -> ScoreVector:
    return ScoreVector(matrix.self_inclusive_scores, ScoreKind.SELF_INCLUSIVE)


@dataclass(frozen=True)
class BenchmarkResult:
    """Best fixed arm in hindsight for a preference sequence.

    best_arm is the lowest index among ties; ties lists every arm whose
    cumulative tournament score equals the maximum exactly.
    """

    best_arm: int
    cumulative: np.ndarray  # (K,) summed tournament scores
    ties: tuple

    @property
    def best_value(self) -> float:
        return float(self.cumulative[self.best_arm])


def benchmark(sequence) -> BenchmarkResult:
    """Scan a preference-matrix iterable and pick the best fixed arm.

    Tie-breaking is exact float equality against the maximum after
    summation; the reported best arm is the lowest tied index.
    """
    total = None
    for matrix in sequence:
        scores = matrix.tournament_scores
        if total is None:
            total = scores.copy()
        elif scores.shape != total.shape:
            raise DimensionError(
                f"sequence mixes arm counts: {total.shape[0]} then {scores.shape[0]}"
            )
        else:
            total += scores
    if total is None:
        raise EmptySequenceError("cannot benchmark an empty preference sequence")
    best = float(total.max())
    ties = tuple(int(i) for i in np.flatnonzero(total == best))
    return BenchmarkResult(best_arm=ties[0], cumulative=total, ties=ties)
