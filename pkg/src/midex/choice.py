"""Winner feedback over a played multiset of arms.

When a size-m multiset A of arms is played, the environment announces a
single winning position.  Position i wins with probability proportional to
the total duel-win probability of its arm against the arms at the other
positions:

    W(i | A, P) = sum_{j != i} P(A[i], A[j]) * 2 / (m * (m - 1)).

These weights sum to one because P(a, b) + P(b, a) = 1 pairs off across
positions.  For m = 2 the law reduces to an ordinary duel.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ArmOutOfRangeError, SubsetSizeError
from .preferences import PreferenceMatrix


@dataclass(frozen=True)
class ArmMultiset:
    """Ordered multiset of 0-based arm indices; repeats allowed."""

    items: tuple

    def __post_init__(self):
        if len(self.items) < 2:
            raise SubsetSizeError(f"need at least 2 positions, got {len(self.items)}")

    def __len__(self):
        return len(self.items)


@dataclass(frozen=True)
class WinnerDistribution:
    """Winning probability of each position of a played multiset."""

    probs: np.ndarray  # (m,)

    def __post_init__(self):
        self.probs.flags.writeable = False


def _as_positions(subset) -> np.ndarray:
    items = subset.items if isinstance(subset, ArmMultiset) else subset
    arr = np.asarray(items, dtype=np.intp)
    if arr.ndim != 1 or arr.size < 2:
        raise SubsetSizeError(f"need a 1-D multiset of size >= 2, got shape {arr.shape}")
    return arr

def categorical(probs: np.ndarray, u: float) -> int:
    """Inverse-CDF draw: smallest index whose cumulative mass exceeds u."""
    idx = int(np.searchsorted(np.cumsum(probs), u, side="right"))
    return min(idx, len(probs) - 1)


def winner_distribution(subset, matrix: PreferenceMatrix) -> WinnerDistribution:
    """Winning-position law of a multiset under a preference matrix."""
    arms = _as_positions(subset)
    k = matrix.num_arms
    if arms.min() < 0 or arms.max() >= k:
        raise ArmOutOfRangeError(f"multiset {arms.tolist()} has arms outside [0, {k})")
    m = arms.size
    sub = matrix.p[arms][:, arms]  # (m, m) duel probs between positions
    probs = (sub.sum(axis=1) - 0.5) * (2.0 / (m * (m - 1)))
    return WinnerDistribution(probs)


def sample_winner(subset, matrix: PreferenceMatrix, rng: np.random.Generator) -> int:
    """Draw the winning position; consumes exactly one uniform."""
    dist = winner_distribution(subset, matrix)
    return categorical(dist.probs, rng.random())


def duel(i: int, j: int, matrix: PreferenceMatrix, rng: np.random.Generator) -> int:
    """Single duel between arms i and j; 1 if i wins, else 0."""
    k = matrix.num_arms
    if not (0 <= i < k and 0 <= j < k):
        raise ArmOutOfRangeError(f"duel arms ({i}, {j}) outside [0, {k})")
    return int(rng.random() < matrix.p[i, j])


def two_block_subset(x: int, y: int, c_x: int, m: int) -> np.ndarray:
    """Multiset with c_x copies of x at the low positions, then y copies."""
    arr = np.empty(m, dtype=np.intp)
    arr[:c_x] = x
    arr[c_x:] = y
    return arr


def two_block_position_probs(c_x: int, c_y: int, p_xy: float, p_yx: float) -> tuple:
    """Per-position winning probs (one for x positions, one for y positions).

    Closed form of winner_distribution for a two-block multiset; used on the
    hot path to avoid building the m x m submatrix every round.
    """
    m = c_x + c_y
    scale = 2.0 / (m * (m - 1))
    w_x = ((c_x - 1) * 0.5 + c_y * p_xy) * scale
    w_y = ((c_y - 1) * 0.5 + c_x * p_yx) * scale
    return w_x, w_y


def sample_two_block_winner(c_x: int, c_y: int, p_xy: float, p_yx: float, u: float) -> int:
    """Inverse-CDF winner draw over a two-block multiset from one uniform."""
    w_x, w_y = two_block_position_probs(c_x, c_y, p_xy, p_yx)
    mass_x = c_x * w_x
    if u < mass_x:
        return min(int(u / w_x), c_x - 1) if w_x > 0.0 else 0
    if w_y <= 0.0:  # unreachable except at u == total mass under rounding
        return c_x + c_y - 1
    return c_x + min(int((u - mass_x) / w_y), c_y - 1)
