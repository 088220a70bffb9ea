"""Oblivious preference-sequence generators.

Each spec is a pure function of (spec parameters, round): the whole sequence
P_1..P_T is fixed before any learner acts, so replays are bit-identical and
no generator can react to play.  All emitted matrices are valid preference
matrices by construction.
"""

from dataclasses import dataclass
from functools import cached_property
import hashlib
import math

import numpy as np

from .errors import AdversarySpecError, EmptySequenceError
from .preferences import PreferenceMatrix, validate
from .rng import substream

RANDOM_ENTRY_MARGIN = 0.05  # keeps random duels away from degenerate 0/1 probs

_TRIU_CACHE = {}


def _upper_indices(k: int):
    pair = _TRIU_CACHE.get(k)
    if pair is None:
        pair = np.triu_indices(k, k=1)
        _TRIU_CACHE[k] = pair
    return pair


def _matrix_digest(matrix: PreferenceMatrix) -> str:
    h = hashlib.sha1(np.ascontiguousarray(matrix.p).tobytes())
    return h.hexdigest()


class AdversarySpec:
    """Base for all sequence generators; subclasses define preference_at."""

    kind = "abstract"

    @property
    def num_arms(self) -> int:
        raise NotImplementedError

    def preference_at(self, t: int) -> PreferenceMatrix:
        raise NotImplementedError

    def fingerprint(self) -> tuple:
        """Hashable identity used for caching benchmark computations."""
        raise NotImplementedError

    def cumulative_tournament(self, T: int):
        """Closed-form summed tournament scores when available, else None."""
        return None

    def _check_round(self, t: int):
        if t < 1:
            raise AdversarySpecError(f"rounds are 1-based, got t = {t}")


@dataclass(frozen=True, eq=False)
class Constant(AdversarySpec):
    """The same matrix every round."""

    matrix: PreferenceMatrix
    kind = "constant"

    def __post_init__(self):
        if not isinstance(self.matrix, PreferenceMatrix):
            object.__setattr__(self, "matrix", validate(self.matrix))

    @property
    def num_arms(self):
        return self.matrix.num_arms

    def preference_at(self, t):
        self._check_round(t)
        return self.matrix

    def fingerprint(self):
        return (self.kind, _matrix_digest(self.matrix))

    def cumulative_tournament(self, T):
        return T * self.matrix.tournament_scores


@dataclass(frozen=True, eq=False)
class AbruptSwitch(AdversarySpec):
    """Piecewise-constant sequence; switch_times[i] is the last round on
    matrices[i], so a single switch at t0 means matrix 0 through round t0
    and matrix 1 afterwards."""

    matrices: tuple
    switch_times: tuple
    kind = "abrupt_switch"

    def __post_init__(self):
        mats = tuple(
            m if isinstance(m, PreferenceMatrix) else validate(m) for m in self.matrices
        )
        object.__setattr__(self, "matrices", mats)
        times = tuple(int(t) for t in self.switch_times)
        object.__setattr__(self, "switch_times", times)
        if len(mats) < 2:
            raise AdversarySpecError("switching needs at least two matrices")
        if len(times) != len(mats) - 1:
            raise AdversarySpecError(
                f"{len(mats)} matrices need {len(mats) - 1} switch times, got {len(times)}"
            )
        if any(t < 1 for t in times) or any(a >= b for a, b in zip(times, times[1:])):
            raise AdversarySpecError(f"switch times must be positive and increasing: {times}")
        k = mats[0].num_arms
        if any(m.num_arms != k for m in mats):
            raise AdversarySpecError("all matrices must share the same arm count")

    @property
    def num_arms(self):
        return self.matrices[0].num_arms

    def preference_at(self, t):
        self._check_round(t)
        idx = int(np.searchsorted(self.switch_times, t, side="left"))
        return self.matrices[idx]

    def fingerprint(self):
        return (self.kind, tuple(_matrix_digest(m) for m in self.matrices),
                self.switch_times)

    def cumulative_tournament(self, T):
        total = np.zeros(self.num_arms)
        prev = 0
        for idx, mat in enumerate(self.matrices):
            last = self.switch_times[idx] if idx < len(self.switch_times) else T
            last = min(last, T)
            if last > prev:
                total += (last - prev) * mat.tournament_scores
            prev = last
            if prev >= T:
                break
        return total


@dataclass(frozen=True, eq=False)
class SinusoidalDrift(AdversarySpec):
    """Every above-diagonal entry of a base matrix oscillates by
    amplitude * sin(2 pi t / period); below-diagonal entries stay exact
    complements.  With the default all-0.5 base the top arm swings from one
    end of the index range to the other every period."""

    amplitude: float
    period: float
    K: int = 0
    base: PreferenceMatrix = None
    kind = "sinusoidal_drift"

    def __post_init__(self):
        if not (0.0 <= self.amplitude <= 0.5):
            raise AdversarySpecError(f"amplitude {self.amplitude} outside [0, 0.5]")
        if not self.period > 0:
            raise AdversarySpecError(f"period must be positive, got {self.period}")
        if self.base is None:
            if self.K < 2:
                raise AdversarySpecError("need K >= 2 when no base matrix is given")
            base = PreferenceMatrix(np.full((self.K, self.K), 0.5))
        else:
            base = self.base if isinstance(self.base, PreferenceMatrix) else validate(self.base)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "K", base.num_arms)
        iu = _upper_indices(base.num_arms)
        upper = base.p[iu]
        if (upper + self.amplitude).max() > 1.0 or (upper - self.amplitude).min() < 0.0:
            raise AdversarySpecError(
                "amplitude pushes some base entry outside [0, 1]"
            )
        object.__setattr__(self, "_iu", iu)
        object.__setattr__(self, "_upper", upper)

    @property
    def num_arms(self):
        return self.K

    def preference_at(self, t):
        self._check_round(t)
        delta = self.amplitude * math.sin(2.0 * math.pi * t / self.period)
        k = self.K
        p = np.full((k, k), 0.5)
        vals = self._upper + delta
        rows, cols = self._iu
        p[rows, cols] = vals
        p[cols, rows] = 1.0 - vals
        return PreferenceMatrix(p)

    def fingerprint(self):
        return (self.kind, repr(float(self.amplitude)), repr(float(self.period)),
                _matrix_digest(self.base))


@dataclass(frozen=True, eq=False)
class SeededRandom(AdversarySpec):
    """Fresh random matrix each round, derived purely from (seed, t).

    Above-diagonal entries are uniform on [0.05, 0.95]; below-diagonal
    entries are exact complements.  The seed belongs to the spec, not to
    the run: the sequence is fixed before any learner acts.  Draws for
    rounds are generated in blocks of 1024 from the stream derived as
    (seed, block index), consumed row-major within the block, so P_t is
    still a pure function of (seed, t) while sequential replay stays cheap.
    """

    K: int
    seed: int = 0
    kind = "seeded_random"

    _BLOCK = 1024

    def __post_init__(self):
        if self.K < 2:
            raise AdversarySpecError(f"need at least 2 arms, got K = {self.K}")
        object.__setattr__(self, "_blocks", {})

    def __getstate__(self):
        return {"K": self.K, "seed": self.seed}

    def __setstate__(self, state):
        object.__setattr__(self, "K", state["K"])
        object.__setattr__(self, "seed", state["seed"])
        object.__setattr__(self, "_blocks", {})

    @property
    def num_arms(self):
        return self.K

    def _block_values(self, block: int) -> np.ndarray:
        vals = self._blocks.get(block)
        if vals is None:
            n = self.K * (self.K - 1) // 2
            gen = substream(self.seed, block)
            vals = RANDOM_ENTRY_MARGIN \
                + (1.0 - 2.0 * RANDOM_ENTRY_MARGIN) * gen.random((self._BLOCK, n))
            if len(self._blocks) >= 8:  # sequential access needs no deep history
                self._blocks.clear()
            self._blocks[block] = vals
        return vals

    def preference_at(self, t):
        self._check_round(t)
        k = self.K
        block, offset = divmod(t - 1, self._BLOCK)
        vals = self._block_values(block)[offset]
        p = np.full((k, k), 0.5)
        rows, cols = _upper_indices(k)
        p[rows, cols] = vals
        p[cols, rows] = 1.0 - vals
        return PreferenceMatrix(p)

    def fingerprint(self):
        return (self.kind, self.K, int(self.seed))


@dataclass(frozen=True, eq=False)
class CyclicNoCondorcet(AdversarySpec):
    """Rotationally symmetric instance with no arm beating all others.

    Each arm beats the (K-1)/2 arms after it (cyclically) with probability
    0.5 + margin and loses to the rest, so no single arm dominates while
    every tournament score is exactly 0.5.  Requires odd K.
    """

    K: int
    margin: float
    kind = "cyclic_no_condorcet"

    def __post_init__(self):
        if self.K < 3 or self.K % 2 == 0:
            raise AdversarySpecError(f"need odd K >= 3, got K = {self.K}")
        if not (0.0 < self.margin <= 0.5):
            raise AdversarySpecError(f"margin {self.margin} outside (0, 0.5]")
        k = self.K
        p = np.full((k, k), 0.5)
        for i in range(k):
            for d in range(1, (k - 1) // 2 + 1):
                j = (i + d) % k
                p[i, j] = 0.5 + self.margin
                p[j, i] = 0.5 - self.margin
        object.__setattr__(self, "_matrix", PreferenceMatrix(p))

    @property
    def num_arms(self):
        return self.K

    def preference_at(self, t):
        self._check_round(t)
        return self._matrix

    def fingerprint(self):
        return (self.kind, self.K, repr(float(self.margin)))

    def cumulative_tournament(self, T):
        return T * self._matrix.tournament_scores


class PreferenceSequence:
    """Lazy length-T view over a spec; index 1-based via at(), 0-based via []."""

    def __init__(self, spec: AdversarySpec, T: int):
        self.spec = spec
        self.T = T

    def __len__(self):
        return self.T

    def at(self, t: int) -> PreferenceMatrix:
        if not 1 <= t <= self.T:
            raise AdversarySpecError(f"round {t} outside [1, {self.T}]")
        return self.spec.preference_at(t)

    def __getitem__(self, idx: int) -> PreferenceMatrix:
        if idx < 0:
            idx += self.T
        return self.at(idx + 1)

    def __iter__(self):
        for t in range(1, self.T + 1):
            yield self.spec.preference_at(t)


def build_sequence(spec: AdversarySpec, T: int) -> PreferenceSequence:
    """Length-T lazy sequence of matrices for a spec."""
    if T < 1:
        raise EmptySequenceError(f"horizon must be at least 1, got T = {T}")
    return PreferenceSequence(spec, T)


def borda_gap_instance(K: int, gap: float) -> Constant:
    """Constant instance where arm 0 leads every other arm by an exact
    tournament-score gap: P(0, j) = 0.5 + gap * (K-1) / K, all other duels
    fair."""
    if K < 2:
        raise AdversarySpecError(f"need at least 2 arms, got K = {K}")
    edge = gap * (K - 1) / K
    if not (0.0 < edge <= 0.5):
        raise AdversarySpecError(
            f"gap {gap} needs P(0, j) = {0.5 + edge}, outside (0.5, 1]"
        )
    p = np.full((K, K), 0.5)
    p[0, 1:] = 0.5 + edge
    p[1:, 0] = 0.5 - edge
    return Constant(PreferenceMatrix(p))
