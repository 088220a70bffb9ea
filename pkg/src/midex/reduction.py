"""Playing a dueling-bandit instance through a multiset learner.

The wrapped learner proposes its usual size-m multiset, but only one
uniformly chosen ordered pair of positions actually duels.  The duel's
Bernoulli outcome picks which of the two positions is reported back as the
"winner".  The reported position then has exactly the winner law of the
full multiset play, so the learner cannot tell the difference, while the
pair that was really played costs the dueling regret.  Averaged over the
pair choice the two instantaneous regrets coincide, which is why both are
logged in one pass.
"""

from dataclasses import dataclass

import numpy as np

from .choice import duel
from .errors import SubsetSizeError, WinnerIndexError
from .ledger import RegretLedger


def propose_pair(m: int, rng: np.random.Generator):
    """Ordered pair (i, j), i != j, uniform over the m(m-1) choices."""
    if m < 2:
        raise SubsetSizeError(f"need at least 2 positions to pick a pair, got m = {m}")
    i = int(rng.integers(m))
    j = int(rng.integers(m - 1))
    if j >= i:
        j += 1
    return i, j


def feedback_to_index(i: int, j: int, w: int) -> int:
    """Winning position: i when the duel bit w is 1, else j."""
    if i == j:
        raise WinnerIndexError(f"pair positions must differ, got ({i}, {j})")
    if w not in (0, 1):
        raise WinnerIndexError(f"duel outcome must be 0 or 1, got {w!r}")
    return i if w else j


@dataclass
class ReductionTrace:
    """One wrapped round (0-based positions and arms)."""
    __slots__ = ("t", "subset", "i", "j", "pair", "w", "index")
    t: int
    subset: np.ndarray
    i: int
    j: int
    pair: tuple  # (arm at i, arm at j)
    w: int
    index: int


def run_reduced(learner, spec, T: int, learner_rng, env_rng, pair_rng,
                benchmark_arm: int, tracing: bool = False):
    """Drive a learner through T dueling rounds against an oblivious spec.

    Returns (dueling ledger, multiset ledger, traces).  The dueling ledger
    charges the pair actually played; the multiset ledger charges the whole
    proposed multiset, as if it had been played directly.
    """
    k = spec.num_arms
    duel_ledger = RegretLedger(k, T)
    multi_ledger = RegretLedger(k, T)
    traces = [] if tracing else None
    istar = benchmark_arm
    for t in range(1, T + 1):
        matrix = spec.preference_at(t)
        b = matrix.tournament_scores
        s = matrix.self_inclusive_scores
        subset = learner.select(learner_rng)
        m_t = len(subset)
        i, j = propose_pair(m_t, pair_rng)
        arm_i = int(subset[i])
        arm_j = int(subset[j])
        w = duel(arm_i, arm_j, matrix, env_rng)
        index = feedback_to_index(i, j, w)
        learner.step(index)

        bench_b = float(b[istar])
        bench_s = float(s[istar])
        pair_b = 0.5 * (float(b[arm_i]) + float(b[arm_j]))
        pair_s = 0.5 * (float(s[arm_i]) + float(s[arm_j]))
        multi_b = float(b[subset].mean())
        multi_s = float(s[subset].mean())
        duel_ledger.record(bench_b, pair_b, bench_s, pair_s)
        multi_ledger.record(bench_b, multi_b, bench_s, multi_s)
        if tracing:
            traces.append(ReductionTrace(
                t=t, subset=subset, i=i, j=j, pair=(arm_i, arm_j), w=w, index=index,
            ))
    return duel_ledger, multi_ledger, traces
