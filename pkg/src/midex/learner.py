"""Exponential-weights learner driven by winner feedback on played multisets.

Each round the learner draws two arms x, y i.i.d. from its sampling
distribution, fills a size-m multiset with copies of them (one arm gets the
ceil(m/2) low positions by a fair coin), observes which position wins, and
converts that single bit into an unbiased estimate of the self-inclusive
score of x.  Weights follow a softmax of the accumulated estimates, mixed
with a uniform floor so no arm's probability drops below gamma / K.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
import math

import numpy as np

from .choice import two_block_subset
from .errors import (
    FloorViolationError,
    InfeasibleParamsError,
    SubsetSizeError,
    WinnerIndexError,
)

FULL_BOUND_CONST = 3.78
SIMPLE_BOUND_CONST = 8.13


# -- feedback transform ------------------------------------------------------

@lru_cache(maxsize=None)
def _g_branches(m: int):
    """Exact (win, loss) values of the feedback transform for subset size m."""
    if m % 2 == 0:
        offset = Fraction(m - 2, 4 * (m - 1))
        scale = Fraction(m, 2 * (m - 1))
    else:
        offset = Fraction(m - 1, 4 * m)
        scale = Fraction(m + 1, 2 * m)
    return (1 - offset) / scale, (0 - offset) / scale


def g_transform_exact(m: int, won: bool) -> Fraction:
    """Rational-valued feedback transform; see g_transform."""
    if not isinstance(m, (int, np.integer)) or m < 2:
        raise SubsetSizeError(f"subset size must be an integer >= 2, got {m!r}")
    win, loss = _g_branches(int(m))
    return win if won else loss


def g_transform(m: int, won: bool) -> float:
    """Map the win/lose bit for subset size m to a score-estimate numerator.

    The affine map is chosen so that the expectation over the winning
    position equals the duel probability P(x, y) exactly, for any m >= 2.
    For m = 2 it is the identity on the bit; for larger m the losing branch
    is negative.
    """
    return float(g_transform_exact(m, won))


def g_magnitude_limit(m: int) -> float:
    """Largest possible |g| for subset size m: (3m + 1) / (2m + 2)."""
    return (3 * m + 1) / (2 * m + 2)


# -- parameter schedule ------------------------------------------------------

def m_prime(m: int) -> float:
    """Variance scale of the feedback transform for subset size m.

    Equals sqrt(3/2) + sqrt(2/3) * (3m+1)^2 / (4(m+1)^2), i.e.
    sqrt(3/2) + sqrt(2/3) * g_magnitude_limit(m)^2; increasing in m with
    limit sqrt(3/2) + sqrt(2/3) * 9/4.
    """
    if not isinstance(m, (int, np.integer)) or m < 2:
        raise SubsetSizeError(f"subset size must be an integer >= 2, got {m!r}")
    gmax2 = (3 * m + 1) ** 2 / (4 * (m + 1) ** 2)
    return math.sqrt(1.5) + math.sqrt(2.0 / 3.0) * gmax2


def normalize_schedule(m_schedule, K: int, T: int):
    """Normalize a subset-size schedule to an int or an int array of length T."""
    if isinstance(m_schedule, (int, np.integer)):
        m = int(m_schedule)
        if not 2 <= m <= K:
            raise SubsetSizeError(f"m = {m} outside [2, K = {K}]")
        return m
    sched = np.asarray(m_schedule)
    if sched.ndim != 1 or sched.size != T:
        raise SubsetSizeError(
            f"schedule must be a scalar or length-T sequence, got shape {sched.shape}"
        )
    if not np.issubdtype(sched.dtype, np.integer):
        if not np.all(sched == sched.astype(np.int64)):
            raise SubsetSizeError("schedule entries must be integers")
    sched = sched.astype(np.int64)
    if sched.min() < 2 or sched.max() > K:
        raise SubsetSizeError(
            f"schedule entries must lie in [2, K = {K}], "
            f"got range [{sched.min()}, {sched.max()}]"
        )
    return sched


@dataclass(frozen=True, eq=False)
class MidexParams:
    """Fixed inputs of one learner run.

    gamma must satisfy gamma^2 >= 3 * eta * K / 2 (up to rounding); that is
    what keeps every scaled estimate eta * shat within a constant of 1.
    Construct via default_params unless overriding eta or gamma on purpose.
    """

    K: int
    T: int
    eta: float
    gamma: float
    m_prime: float
    m_schedule: object  # int, or int64 array of length T

    def __post_init__(self):
        if self.K < 2:
            raise InfeasibleParamsError(f"need at least 2 arms, got K = {self.K}")
        if self.T < 1:
            raise InfeasibleParamsError(f"horizon must be positive, got T = {self.T}")
        if not (self.eta > 0.0 and math.isfinite(self.eta)):
            raise InfeasibleParamsError(f"eta must be finite and positive, got {self.eta}")
        if not 0.0 < self.gamma <= 1.0:
            raise InfeasibleParamsError(
                f"gamma = {self.gamma} outside (0, 1]; the instance admits no "
                "valid exploration floor at this learning rate"
            )
        required = math.sqrt(1.5 * self.eta * self.K)
        if self.gamma < required * (1.0 - 1e-12):
            raise InfeasibleParamsError(
                f"gamma = {self.gamma} below sqrt(3*eta*K/2) = {required}; "
                "scaled estimates would be unbounded"
            )

    @property
    def constant_m(self):
        """The schedule value if constant, else None."""
        return self.m_schedule if isinstance(self.m_schedule, int) else None

    def m_at(self, t: int) -> int:
        """Subset size for 1-based round t."""
        if isinstance(self.m_schedule, int):
            return self.m_schedule
        return int(self.m_schedule[t - 1])


def default_params(K: int, T: int, m_schedule=2, eta=None, gamma=None) -> MidexParams:
    """Parameters tuned for horizon T; eta and gamma may be overridden.

    eta defaults to (2 ln K / (T sqrt(K) m'))^(2/3) with m' the largest
    variance scale along the schedule, and gamma to sqrt(3 eta K / 2).
    Raises InfeasibleParamsError when the derived or supplied pair is
    invalid, rather than clamping silently.
    """
    if K < 2:
        raise InfeasibleParamsError(f"need at least 2 arms, got K = {K}")
    if T < 1:
        raise InfeasibleParamsError(f"horizon must be positive, got T = {T}")
    sched = normalize_schedule(m_schedule, K, T)
    if isinstance(sched, int):
        mp = m_prime(sched)
    else:
        mp = max(m_prime(int(v)) for v in np.unique(sched))
    if eta is None:
        eta = (2.0 * math.log(K) / (T * math.sqrt(K) * mp)) ** (2.0 / 3.0)
    if gamma is None:
        gamma = math.sqrt(1.5 * float(eta) * K)
    return MidexParams(K=int(K), T=int(T), eta=float(eta), gamma=float(gamma),
                       m_prime=mp, m_schedule=sched)


def regret_bound(K: int, T: int, m_prime_value: float) -> float:
    """Worst-case expected-regret guarantee for the tuned learner."""
    return FULL_BOUND_CONST * m_prime_value ** (2.0 / 3.0) \
        * (K * math.log(K)) ** (1.0 / 3.0) * T ** (2.0 / 3.0)


def simplified_regret_bound(K: int, T: int) -> float:
    """Schedule-independent form of regret_bound with a larger constant."""
    return SIMPLE_BOUND_CONST * (K * math.log(K)) ** (1.0 / 3.0) * T ** (2.0 / 3.0)


# -- state update pieces -----------------------------------------------------

def mixed_distribution(scores: np.ndarray, eta: float, gamma: float):
    """Softmax of eta * scores mixed with a uniform gamma floor.

    Returns (weights, dist); the max is subtracted before exponentiation so
    arbitrarily large cumulative scores stay finite.
    """
    z = eta * scores
    z -= z.max()
    w = np.exp(z)
    w /= w.sum()
    k = scores.shape[0]
    return w, (1.0 - gamma) * w + gamma / k


def estimate_scores(x: int, y: int, g: float, dist: np.ndarray, floor: float = 0.0):
    """Sparse score estimate: value at arm x, zero elsewhere.

    The nonzero entry is g / (K * dist[x] * dist[y]); importance weighting
    by both draw probabilities makes it unbiased for the self-inclusive
    score of x under the two-arm sampling scheme.
    """
    qx = float(dist[x])
    qy = float(dist[y])
    if qx < floor or qy < floor or qx <= 0.0 or qy <= 0.0:
        raise FloorViolationError(
            f"sampling probs ({qx}, {qy}) below floor {floor}; "
            "estimate would be unbounded"
        )
    return g / (dist.shape[0] * qx * qy)


# -- run state ---------------------------------------------------------------

@dataclass
class MidexState:
    """Mutable per-run state; t is the 1-based index of the next round."""

    scores: np.ndarray    # cumulative estimated self-inclusive scores, (K,)
    weights: np.ndarray   # softmax weights, (K,)
    dist: np.ndarray      # floor-mixed sampling distribution, (K,)
    cum_dist: np.ndarray  # prefix sums of dist, for inverse-CDF draws
    t: int = 1


@dataclass
class RoundTrace:
    """Everything observable about one learner round (0-based arms)."""
    __slots__ = ("t", "x", "y", "split", "subset", "winner_index", "o",
                 "g_value", "shat_arm", "shat_value")
    t: int
    x: int
    y: int
    split: str            # "x" or "y": which draw got the ceil(m/2) copies
    subset: np.ndarray    # (m,) played multiset
    winner_index: int     # winning position in [0, m)
    o: int                # arm at the winning position
    g_value: float
    shat_arm: int         # the single arm with a nonzero estimate (== x)
    shat_value: float


@dataclass
class RunDiagnostics:
    """Extrema and run sums used by the invariant checks."""

    rounds: int = 0
    g_abs_max: float = 0.0
    scaled_estimate_min: float = math.inf   # min over rounds of eta * shat
    scaled_estimate_max: float = -math.inf
    weighted_sq_sum: float = 0.0            # sum over rounds of sum_i dist[i]*shat[i]^2
    floor_margin_min: float = math.inf      # min of used dist entries minus gamma/K
    potential_margin_min: float = math.inf  # slack of the softmax growth inequality

    def merge(self, other: "RunDiagnostics") -> "RunDiagnostics":
        return RunDiagnostics(
            rounds=self.rounds + other.rounds,
            g_abs_max=max(self.g_abs_max, other.g_abs_max),
            scaled_estimate_min=min(self.scaled_estimate_min, other.scaled_estimate_min),
            scaled_estimate_max=max(self.scaled_estimate_max, other.scaled_estimate_max),
            weighted_sq_sum=self.weighted_sq_sum + other.weighted_sq_sum,
            floor_margin_min=min(self.floor_margin_min, other.floor_margin_min),
            potential_margin_min=min(self.potential_margin_min,
                                     other.potential_margin_min),
        )


class MidexLearner:
    """Stateful driver; call select then step once per round, in order."""

    def __init__(self, params: MidexParams, tracing: bool = False):
        self.params = params
        k = params.K
        u = np.full(k, 1.0 / k)
        self.state = MidexState(
            scores=np.zeros(k),
            weights=u.copy(),
            dist=u.copy(),
            cum_dist=np.cumsum(u),
        )
        self.tracing = tracing
        self.traces = []
        self.diagnostics = RunDiagnostics()
        self._floor = params.gamma / k
        self._pending = None

    @property
    def pending(self):
        """(x, y, c_x, m_t) of the selected-but-unresolved round, or None."""
        if self._pending is None:
            return None
        x, y, c_x, m_t, _, _ = self._pending
        return x, y, c_x, m_t

    def select(self, rng: np.random.Generator) -> np.ndarray:
        """Draw x, y and the split coin; returns the played multiset.

        Consumes exactly three uniforms from rng, in the order x, y, coin.
        """
        if self._pending is not None:
            raise WinnerIndexError("select called twice without an intervening step")
        st = self.state
        u = rng.random(3)
        k = self.params.K
        cum = st.cum_dist
        x = int(np.searchsorted(cum, u[0], side="right"))
        x = k - 1 if x >= k else x
        y = int(np.searchsorted(cum, u[1], side="right"))
        y = k - 1 if y >= k else y
        m_t = self.params.m_at(st.t)
        hi = (m_t + 1) // 2
        if u[2] < 0.5:
            c_x, split = hi, "x"
        else:
            c_x, split = m_t - hi, "y"
        subset = two_block_subset(x, y, c_x, m_t)
        self._pending = (x, y, c_x, m_t, split, subset)
        return subset

    def step(self, winner_index: int):
        """Consume the winning position and update the sampling distribution.

        Returns the RoundTrace when tracing is on, else None.
        """
        if self._pending is None:
            raise WinnerIndexError("step called before select")
        x, y, c_x, m_t, split, subset = self._pending
        self._pending = None
        if not 0 <= winner_index < m_t:
            raise WinnerIndexError(
                f"winner index {winner_index} outside played positions [0, {m_t})"
            )
        # won is keyed to the replica block, not the arm label: when x == y the
        # two blocks hold the same arm but land on opposite g branches, which is
        # exactly what keeps the score estimate unbiased on coincident draws.
        won = winner_index < c_x
        g = g_transform(m_t, won)
        st = self.state
        params = self.params
        shat = estimate_scores(x, y, g, st.dist, self._floor)
        st.scores[x] += shat

        diag = self.diagnostics
        diag.rounds += 1
        ag = abs(g)
        if ag > diag.g_abs_max:
            diag.g_abs_max = ag
        scaled = params.eta * shat
        if scaled < diag.scaled_estimate_min:
            diag.scaled_estimate_min = scaled
        if scaled > diag.scaled_estimate_max:
            diag.scaled_estimate_max = scaled
        diag.weighted_sq_sum += float(st.dist[x]) * shat * shat
        margin = min(float(st.dist[x]), float(st.dist[y])) - self._floor
        if margin < diag.floor_margin_min:
            diag.floor_margin_min = margin
        # growth of the softmax normalizer this round, against its standard
        # second-order envelope: ln E_w[e^z] <= E_w[z] + E_w[z^2] for z <= 1,
        # where z = eta * shat is nonzero only at arm x
        wx = float(st.weights[x])
        growth = math.log1p(wx * math.expm1(scaled))
        envelope = wx * scaled + wx * scaled * scaled
        pot_margin = envelope - growth
        if pot_margin < diag.potential_margin_min:
            diag.potential_margin_min = pot_margin

        st.weights, st.dist = mixed_distribution(st.scores, params.eta, params.gamma)
        st.cum_dist = np.cumsum(st.dist)
        trace = None
        if self.tracing:
            trace = RoundTrace(
                t=st.t, x=x, y=y, split=split, subset=subset,
                winner_index=int(winner_index), o=int(subset[winner_index]),
                g_value=g, shat_arm=x, shat_value=shat,
            )
            self.traces.append(trace)
        st.t += 1
        return trace
