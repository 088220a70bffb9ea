"""Per-round regret accounting.

A ledger records, for every round, the tournament score of the benchmark
arm and the average tournament score of the played positions, plus the
self-inclusive counterparts.  Cumulative regrets are computed at finalize
time, together with two consistency checks: every per-round increment lies
in [-1, 1], and the two regret notions agree through the fixed conversion
factor K / (K - 1) at every prefix.
"""

import numpy as np

from .errors import MidexError


def compensated_cumsum(x: np.ndarray) -> np.ndarray:
    """Cumulative sum with first-order rounding compensation.

    A plain running sum drifts by about ulp(total) per step, which adds up
    to ~1e-9 over 1e5 rounds of unit-scale increments - right at the
    tolerance of the ledger consistency check.  Each step's rounding error
    is recovered exactly (the running total and its increment are close
    enough in magnitude that both subtractions are exact) and subtracted
    back out, leaving per-entry error at the ulp of the entry itself.
    """
    c = np.cumsum(x)
    prev = np.empty_like(c)
    prev[0] = 0.0
    prev[1:] = c[:-1]
    step_err = (c - prev) - x
    return c - np.cumsum(step_err)


class RegretLedger:
    """Fixed-horizon regret record for one episode."""

    def __init__(self, K: int, T: int):
        self.K = K
        self.T = T
        self.bench_score = np.empty(T)     # tournament score of the benchmark arm
        self.played_score = np.empty(T)    # mean tournament score over played positions
        self.bench_shifted = np.empty(T)   # self-inclusive analogues
        self.played_shifted = np.empty(T)
        self.filled = 0
        self._regret_cum = None
        self._shifted_cum = None

    def record(self, bench_score, played_score, bench_shifted, played_shifted):
        """Append one round; rounds must arrive in order."""
        i = self.filled
        if i >= self.T:
            raise MidexError(f"ledger already holds all {self.T} rounds")
        self.bench_score[i] = bench_score
        self.played_score[i] = played_score
        self.bench_shifted[i] = bench_shifted
        self.played_shifted[i] = played_shifted
        self.filled = i + 1

    def finalize(self, tol: float = 1e-9):
        """Compute cumulative regrets and enforce the ledger invariants."""
        if self.filled != self.T:
            raise MidexError(f"ledger holds {self.filled} of {self.T} rounds")
        inc = self.bench_score - self.played_score
        if inc.min() < -1.0 or inc.max() > 1.0:
            t = int(np.argmax(np.abs(inc)))
            raise MidexError(
                f"regret increment {inc[t]} at round {t + 1} outside [-1, 1]"
            )
        self._regret_cum = compensated_cumsum(inc)
        self._shifted_cum = compensated_cumsum(self.bench_shifted - self.played_shifted)
        factor = self.K / (self.K - 1)
        gap = np.abs(self._regret_cum - factor * self._shifted_cum)
        worst = float(gap.max())
        if worst > tol:
            t = int(gap.argmax())
            raise MidexError(
                f"regret conversion identity broken at round {t + 1}: "
                f"|R - K/(K-1) R_shifted| = {worst} > {tol}"
            )
        return self

    @property
    def regret_cum(self) -> np.ndarray:
        if self._regret_cum is None:
            raise MidexError("ledger not finalized")
        return self._regret_cum

    @property
    def shifted_cum(self) -> np.ndarray:
        if self._shifted_cum is None:
            raise MidexError("ledger not finalized")
        return self._shifted_cum

    @property
    def final_regret(self) -> float:
        return float(self.regret_cum[-1])

    @property
    def final_shifted(self) -> float:
        return float(self.shifted_cum[-1])

    def sample(self, t_points: np.ndarray) -> dict:
        """Rows for the listed 1-based rounds, as parallel arrays."""
        idx = np.asarray(t_points, dtype=np.int64) - 1
        if idx.size and (idx.min() < 0 or idx.max() >= self.T):
            raise MidexError(f"sample rounds outside [1, {self.T}]")
        return {
            "t": np.asarray(t_points, dtype=np.int64),
            "regret_cum": self.regret_cum[idx],
            "shifted_regret_cum": self.shifted_cum[idx],
            "bench_score": self.bench_score[idx],
            "played_avg_score": self.played_score[idx],
        }
