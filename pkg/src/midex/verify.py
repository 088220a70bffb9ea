"""Numeric self-verification battery.

Eight checks cover the identities and envelopes the learner's correctness
rests on: unbiasedness of the feedback transform and of the sparse score
estimate, exact extrema of the transform, boundedness of scaled estimates,
the softmax growth envelope, the weighted second-moment budget, the
per-position play marginals, and regret preservation under the pair
reduction.  The exhaustive level enumerates all randomness analytically on
small instances (tolerance 1e-12); the sampled level adds Monte-Carlo runs
at larger sizes judged by 3-sigma bands.  Failures are report entries, not
exceptions.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .adversaries import Constant, SeededRandom
from .choice import two_block_position_probs, two_block_subset
from .harness import RunConfig, cached_benchmark, run_episode
from .learner import (
    MidexLearner,
    default_params,
    g_magnitude_limit,
    g_transform,
    g_transform_exact,
)
from .preferences import PreferenceMatrix, validate
from .reduction import run_reduced
from .rng import substream

CHECK_IDS = (
    "g_unbiased",
    "estimate_unbiased",
    "g_magnitude",
    "estimate_range",
    "potential_step",
    "weighted_second_moment",
    "position_marginal",
    "reduction_regret",
)

EXACT_TOL = 1e-12


# -- analytic enumerators ----------------------------------------------------

def expected_g(m: int, p_xy: float) -> float:
    """Exact E[g] for a two-block play of arms with duel probability p_xy.

    Averages over the split coin and the winner law; equals p_xy when the
    transform is correctly calibrated.
    """
    hi = (m + 1) // 2
    g_win = g_transform(m, True)
    g_loss = g_transform(m, False)
    total = 0.0
    for c_x in (hi, m - hi):
        w_x, _ = two_block_position_probs(c_x, m - c_x, p_xy, 1.0 - p_xy)
        p_win = c_x * w_x
        total += 0.5 * (p_win * g_win + (1.0 - p_win) * g_loss)
    return total


def expected_estimates(dist: np.ndarray, matrix: PreferenceMatrix, m: int) -> np.ndarray:
    """Exact per-arm E[shat] when x, y are drawn i.i.d. from dist."""
    k = dist.shape[0]
    hi = (m + 1) // 2
    g_win = g_transform(m, True)
    g_loss = g_transform(m, False)
    out = np.zeros(k)
    p = matrix.p
    for x in range(k):
        for y in range(k):
            draw_pr = dist[x] * dist[y]
            if draw_pr == 0.0:
                continue
            for c_x in (hi, m - hi):
                w_x, _ = two_block_position_probs(c_x, m - c_x, p[x, y], p[y, x])
                p_win = c_x * w_x
                e_g = p_win * g_win + (1.0 - p_win) * g_loss
                # the estimate divides by the same draw probability, so the
                # contribution to arm x is just the conditional mean of g / K
                out[x] += 0.5 * e_g / k
    return out


def position_marginals(dist: np.ndarray, m: int) -> np.ndarray:
    """Exact (m, K) matrix of P(position j holds arm i) under two-block play."""
    k = dist.shape[0]
    hi = (m + 1) // 2
    out = np.zeros((m, k))
    for x in range(k):
        for y in range(k):
            pr = dist[x] * dist[y] * 0.5
            for c_x in (hi, m - hi):
                subset = two_block_subset(x, y, c_x, m)
                for j in range(m):
                    out[j, subset[j]] += pr
    return out


def pair_average_gap(values: np.ndarray, subset) -> float:
    """|mean over ordered pairs of pair averages - multiset mean|."""
    arr = np.asarray(subset, dtype=np.intp)
    m = arr.size
    total = 0.0
    for i in range(m):
        for j in range(m):
            if i != j:
                total += 0.5 * (values[arr[i]] + values[arr[j]])
    return abs(total / (m * (m - 1)) - values[arr].mean())


# -- report structure --------------------------------------------------------

@dataclass
class CheckResult:
    check: str
    level: str
    passed: bool
    deviation: float
    tolerance: float
    detail: str

    def to_dict(self):
        return {
            "check": self.check,
            "level": self.level,
            "passed": self.passed,
            "deviation": self.deviation,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


@dataclass
class VerificationReport:
    level: str
    seed: int
    results: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_dict(self):
        return {
            "level": self.level,
            "seed": self.seed,
            "passed": self.passed,
            "results": [r.to_dict() for r in self.results],
        }


# -- individual checks -------------------------------------------------------

def _check_g_unbiased(level, rng):
    if level == "exhaustive":
        worst = 0.0
        for m in (2, 3, 4, 5):
            for p in (0.0, 0.25, 0.5, 0.7, 1.0):
                worst = max(worst, abs(expected_g(m, p) - p))
        return CheckResult("g_unbiased", level, worst <= EXACT_TOL, worst, EXACT_TOL,
                           "enumerated E[g] vs duel probability, m in 2..5")
    # Monte-Carlo at sizes beyond the enumeration grid
    worst_sigmas = 0.0
    n = 400_000
    for m, p in ((8, 0.7), (9, 0.25)):
        hi = (m + 1) // 2
        coins = rng.random(n) < 0.5
        c_x = np.where(coins, hi, m - hi)
        scale = 2.0 / (m * (m - 1))
        w_x = ((c_x - 1) * 0.5 + (m - c_x) * p) * scale
        p_win = c_x * w_x
        wins = rng.random(n) < p_win
        g = np.where(wins, g_transform(m, True), g_transform(m, False))
        se = g.std(ddof=1) / np.sqrt(n)
        worst_sigmas = max(worst_sigmas, abs(g.mean() - p) / se)
    return CheckResult("g_unbiased", level, worst_sigmas <= 3.0, worst_sigmas, 3.0,
                       f"Monte-Carlo E[g] gap in sigma units, {n} draws, m in (8, 9)")


def _random_instance(rng, k):
    """Random valid matrix with entries away from 0/1, plus a floored dist."""
    n = k * (k - 1) // 2
    vals = 0.05 + 0.9 * rng.random(n)
    p = np.full((k, k), 0.5)
    rows, cols = np.triu_indices(k, k=1)
    p[rows, cols] = vals
    p[cols, rows] = 1.0 - vals
    gamma = 0.1 + 0.4 * rng.random()
    raw = rng.random(k) + 1e-3
    dist = (1.0 - gamma) * raw / raw.sum() + gamma / k
    return validate(p), dist


def _check_estimate_unbiased(level, rng):
    if level == "exhaustive":
        worst = 0.0
        cases = 0
        for k in (2, 3, 4, 5):
            for m in range(2, k + 1):
                for _ in range(2):
                    matrix, dist = _random_instance(rng, k)
                    gap = np.abs(expected_estimates(dist, matrix, m)
                                 - matrix.self_inclusive_scores).max()
                    worst = max(worst, gap)
                    cases += 1
        return CheckResult("estimate_unbiased", level, worst <= EXACT_TOL, worst,
                           EXACT_TOL, f"enumerated E[shat] vs scores, {cases} instances")
    k, m, n = 10, 6, 400_000
    matrix, dist = _random_instance(rng, k)
    cum = np.cumsum(dist)
    x = np.minimum(np.searchsorted(cum, rng.random(n), side="right"), k - 1)
    y = np.minimum(np.searchsorted(cum, rng.random(n), side="right"), k - 1)
    hi = (m + 1) // 2
    c_x = np.where(rng.random(n) < 0.5, hi, m - hi)
    scale = 2.0 / (m * (m - 1))
    w_x = ((c_x - 1) * 0.5 + (m - c_x) * matrix.p[x, y]) * scale
    wins = rng.random(n) < c_x * w_x
    g = np.where(wins, g_transform(m, True), g_transform(m, False))
    shat = g / (k * dist[x] * dist[y])
    mean = np.bincount(x, weights=shat, minlength=k) / n
    second = np.bincount(x, weights=shat * shat, minlength=k) / n
    se = np.sqrt(np.maximum(second - mean ** 2, 1e-300) / n)
    sigmas = float((np.abs(mean - matrix.self_inclusive_scores) / se).max())
    return CheckResult("estimate_unbiased", level, sigmas <= 3.0, sigmas, 3.0,
                       f"Monte-Carlo per-arm E[shat] gap in sigma units, K={k}, m={m}")


def _check_g_magnitude(level, rng):
    worst = Fraction(0)
    for m in range(2, 65):
        win = g_transform_exact(m, True)
        loss = g_transform_exact(m, False)
        limit = Fraction(3 * m + 1, 2 * m + 2)
        expected_win = limit if m % 2 else Fraction(3 * m - 2, 2 * m)
        if win != expected_win:
            return CheckResult("g_magnitude", level, False, float(abs(win - expected_win)),
                               0.0, f"win branch mismatch at m={m}")
        worst = max(worst, abs(win) - limit, abs(loss) - limit)
    passed = worst <= 0
    return CheckResult("g_magnitude", level, passed, float(max(worst, 0)), 0.0,
                       "exact extrema of both transform branches, m in 2..64")


def _diagnostic_runs(level, seed):
    """One learner run per subset size; shared by the three run-based checks."""
    if level == "exhaustive":
        k, t, ms = 5, 2000, (2, 3)
    else:
        k, t, ms = 10, 10_000, (2, 3, 4, 5)
    runs = []
    for m in ms:
        config = RunConfig(K=k, T=t, adversary=SeededRandom(k, seed=7),
                           m_schedule=m, algorithm="midex", seed=seed,
                           replications=1)
        ep = run_episode(config, 0)
        runs.append((m, ep.params, ep.diagnostics))
    return runs


def _check_estimate_range(level, runs):
    worst = 0.0
    details = []
    passed = True
    for m, params, diag in runs:
        envelope = (2.0 / 3.0) * g_magnitude_limit(m) * (1.0 + 1e-9)
        excess = max(diag.scaled_estimate_max - envelope,
                     -envelope - diag.scaled_estimate_min,
                     diag.scaled_estimate_max - 1.0, 0.0)
        if m == 2:
            excess = max(excess, -diag.scaled_estimate_min)
        if excess > 0.0:
            passed = False
        worst = max(worst, excess)
        details.append(f"m={m}: eta*shat in [{diag.scaled_estimate_min:.3e}, "
                       f"{diag.scaled_estimate_max:.3e}], envelope {envelope:.3e}")
    return CheckResult("estimate_range", level, passed, worst, 0.0, "; ".join(details))


def _check_potential_step(level, runs):
    worst = min(diag.potential_margin_min for _, _, diag in runs)
    deviation = max(0.0, -worst)
    return CheckResult("potential_step", level, deviation <= EXACT_TOL, deviation,
                       EXACT_TOL, f"min softmax-growth slack {worst:.3e} across runs")


def _check_weighted_second_moment(level, runs):
    worst_ratio = 0.0
    for m, params, diag in runs:
        budget = g_magnitude_limit(m) ** 2 * params.K / params.gamma
        avg = diag.weighted_sq_sum / diag.rounds
        worst_ratio = max(worst_ratio, avg / budget)
    return CheckResult("weighted_second_moment", level, worst_ratio <= 1.0,
                       worst_ratio, 1.0,
                       "run-averaged sum_i dist[i]*shat[i]^2 over budget, worst ratio")


def _check_position_marginal(level, rng):
    if level == "exhaustive":
        worst = 0.0
        fixed = np.array([0.2, 0.3, 0.5])
        worst = max(worst, float(np.abs(position_marginals(fixed, 4) - fixed).max()))
        for k in (2, 3, 5):
            for m in (2, 3, 4, 5, 6):
                raw = rng.random(k) + 1e-3
                dist = raw / raw.sum()
                gap = np.abs(position_marginals(dist, m) - dist).max()
                worst = max(worst, float(gap))
        return CheckResult("position_marginal", level, worst <= EXACT_TOL, worst,
                           EXACT_TOL, "enumerated position marginals vs dist, m up to 6")
    k, m, n = 10, 8, 400_000
    raw = rng.random(k) + 1e-3
    dist = raw / raw.sum()
    cum = np.cumsum(dist)
    x = np.minimum(np.searchsorted(cum, rng.random(n), side="right"), k - 1)
    y = np.minimum(np.searchsorted(cum, rng.random(n), side="right"), k - 1)
    hi = (m + 1) // 2
    c_x = np.where(rng.random(n) < 0.5, hi, m - hi)
    worst_sigmas = 0.0
    for j in range(m):
        arm = np.where(j < c_x, x, y)
        freq = np.bincount(arm, minlength=k) / n
        se = np.sqrt(dist * (1.0 - dist) / n)
        worst_sigmas = max(worst_sigmas, float((np.abs(freq - dist) / se).max()))
    return CheckResult("position_marginal", level, worst_sigmas <= 3.0, worst_sigmas,
                       3.0, f"Monte-Carlo position frequencies, K={k}, m={m}")


def _check_reduction_regret(level, rng, seed):
    worst = 0.0
    for _ in range(300):
        k = int(rng.integers(2, 9))
        values = rng.random(k)
        m = int(rng.integers(2, 9))
        subset = rng.integers(0, k, size=m)
        worst = max(worst, pair_average_gap(values, subset))
    if level == "exhaustive":
        return CheckResult("reduction_regret", level, worst <= EXACT_TOL, worst,
                           EXACT_TOL, "pair-average identity, 300 random multisets")
    if worst > EXACT_TOL:
        return CheckResult("reduction_regret", level, False, worst, EXACT_TOL,
                           "pair-average identity broken")
    # paired Monte-Carlo: dueling-minus-multiset final regret should be mean 0
    k, t, reps = 5, 2000, 200
    matrix = SeededRandom(k, seed=3).preference_at(1)
    spec = Constant(matrix)
    istar = cached_benchmark(spec, t).best_arm
    diffs = np.empty(reps)
    for r in range(reps):
        params = default_params(k, t, 3)
        learner = MidexLearner(params)
        duel_ledger, multi_ledger, _ = run_reduced(
            learner, spec, t,
            substream(seed, 500 + r, 0), substream(seed, 500 + r, 1),
            substream(seed, 500 + r, 2), benchmark_arm=istar)
        diffs[r] = duel_ledger.finalize().final_regret - multi_ledger.finalize().final_regret
    se = diffs.std(ddof=1) / np.sqrt(reps)
    sigmas = abs(diffs.mean()) / se
    return CheckResult("reduction_regret", level, sigmas <= 3.0, float(sigmas), 3.0,
                       f"paired dueling-vs-multiset regret gap, {reps} replications")


def run_battery(level: str = "exhaustive", seed: int = 0) -> VerificationReport:
    """Run all eight checks at the given level and collect a report."""
    if level not in ("exhaustive", "sampled"):
        raise ValueError(f"level must be 'exhaustive' or 'sampled', got {level!r}")
    rng = substream(seed, 9)
    runs = _diagnostic_runs(level, seed)
    results = [
        _check_g_unbiased(level, rng),
        _check_estimate_unbiased(level, rng),
        _check_g_magnitude(level, rng),
        _check_estimate_range(level, runs),
        _check_potential_step(level, runs),
        _check_weighted_second_moment(level, runs),
        _check_position_marginal(level, rng),
        _check_reduction_regret(level, rng, seed),
    ]
    return VerificationReport(level=level, seed=seed, results=results)
