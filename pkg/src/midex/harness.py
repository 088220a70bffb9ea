"""Episode and replication runner.

A RunConfig fully determines an experiment: instance, algorithm, horizon,
seeding and snapshot cadence.  run_episode plays one replication and
returns full per-round ledgers; run_replications aggregates many
replications into mean/std regret curves sampled at the snapshot points.
Replications can be executed in worker processes; results are
byte-identical to sequential execution because every random stream is
derived purely from (master seed, replication, role).
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .adversaries import AdversarySpec, build_sequence
from .choice import sample_two_block_winner, sample_winner
from .errors import ConfigValidationError
from .ledger import RegretLedger
from .learner import (
    MidexLearner,
    MidexParams,
    RunDiagnostics,
    default_params,
    m_prime,
    normalize_schedule,
    regret_bound,
    simplified_regret_bound,
)
from .preferences import BenchmarkResult, benchmark
from .reduction import run_reduced
from .rng import replication_streams

ALGORITHMS = ("midex", "uniform", "fixed-arm", "reduced")


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Everything that identifies an experiment (not where its files go)."""

    K: int
    T: int
    adversary: AdversarySpec
    m_schedule: object = 2        # int or length-T integer sequence
    algorithm: str = "midex"
    seed: int = 0
    replications: int = 1
    eta: float = None             # override; None means tuned default
    gamma: float = None
    snapshot_cadence: int = 0     # 0 means max(1, T // 1000)
    fixed_arm: int = None         # required by the fixed-arm algorithm, 0-based
    trace: bool = False
    out_dir: str = None
    m_cycle: tuple = None         # display form when m_schedule came from a cycle

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigValidationError(
                f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}"
            )
        if self.T < 1:
            raise ConfigValidationError(f"T must be at least 1, got {self.T}")
        if self.K < 2:
            raise ConfigValidationError(f"K must be at least 2, got {self.K}")
        if self.adversary.num_arms != self.K:
            raise ConfigValidationError(
                f"K = {self.K} but the adversary has {self.adversary.num_arms} arms"
            )
        if self.replications < 1:
            raise ConfigValidationError(
                f"replications must be at least 1, got {self.replications}"
            )
        if self.snapshot_cadence < 0:
            raise ConfigValidationError(
                f"snapshot cadence must be >= 0, got {self.snapshot_cadence}"
            )
        normalize_schedule(self.m_schedule, self.K, self.T)
        if self.algorithm == "fixed-arm":
            if self.fixed_arm is None:
                raise ConfigValidationError("fixed-arm algorithm needs fixed_arm")
            if not 0 <= self.fixed_arm < self.K:
                raise ConfigValidationError(
                    f"fixed_arm = {self.fixed_arm} outside [0, {self.K})"
                )
        for name in ("eta", "gamma"):
            v = getattr(self, name)
            if v is not None and not (isinstance(v, (int, float)) and v > 0):
                raise ConfigValidationError(f"{name} override must be positive, got {v!r}")

    @property
    def cadence(self) -> int:
        return self.snapshot_cadence if self.snapshot_cadence else max(1, self.T // 1000)

    def snapshot_points(self) -> np.ndarray:
        """1-based rounds at which trajectories are reported; always ends at T."""
        c = self.cadence
        pts = np.arange(c, self.T + 1, c, dtype=np.int64)
        if pts.size == 0 or pts[-1] != self.T:
            pts = np.append(pts, self.T)
        return pts

    def build_params(self) -> MidexParams:
        return default_params(self.K, self.T, self.m_schedule,
                              eta=self.eta, gamma=self.gamma)


# benchmark results keyed by (spec fingerprint, T); specs are oblivious so
# the best fixed arm is shared by every replication and algorithm
_BENCH_CACHE = {}


def cached_benchmark(spec: AdversarySpec, T: int) -> BenchmarkResult:
    key = (spec.fingerprint(), T)
    hit = _BENCH_CACHE.get(key)
    if hit is not None:
        return hit
    total = spec.cumulative_tournament(T)
    if total is None:
        result = benchmark(build_sequence(spec, T))
    else:
        best = float(total.max())
        ties = tuple(int(i) for i in np.flatnonzero(total == best))
        result = BenchmarkResult(best_arm=ties[0], cumulative=total, ties=ties)
    _BENCH_CACHE[key] = result
    return result


# -- baseline learners -------------------------------------------------------

class UniformLearner:
    """Plays m i.i.d. uniform arms every round; ignores feedback."""

    def __init__(self, K: int, T: int, m_schedule=2):
        self.K = K
        self._sched = normalize_schedule(m_schedule, K, T)
        self._t = 1

    def select(self, rng):
        m = self._sched if isinstance(self._sched, int) else int(self._sched[self._t - 1])
        return rng.integers(0, self.K, size=m)

    def step(self, winner_index):
        self._t += 1


class FixedArmLearner:
    """Plays m copies of one arm every round; ignores feedback."""

    def __init__(self, K: int, T: int, arm: int, m_schedule=2):
        if not 0 <= arm < K:
            raise ConfigValidationError(f"arm {arm} outside [0, {K})")
        self.K = K
        self.arm = arm
        self._sched = normalize_schedule(m_schedule, K, T)
        self._t = 1

    def select(self, rng):
        m = self._sched if isinstance(self._sched, int) else int(self._sched[self._t - 1])
        return np.full(m, self.arm, dtype=np.intp)

    def step(self, winner_index):
        self._t += 1


# -- episodes ----------------------------------------------------------------

@dataclass
class EpisodeResult:
    """One replication's ledgers plus whatever the algorithm exposes."""

    config: RunConfig
    rep: int
    ledger: RegretLedger                  # dueling ledger for "reduced"
    multi_ledger: RegretLedger = None     # only for "reduced"
    params: MidexParams = None
    diagnostics: RunDiagnostics = None
    traces: list = None
    reduction_traces: list = None
    benchmark: BenchmarkResult = None


def _drive_direct(spec, T, learner, lrng, erng, ledger, istar, fast_two_block):
    """Shared select/observe/update loop for directly played episodes."""
    bench_b = ledger.bench_score
    played_b = ledger.played_score
    bench_s = ledger.bench_shifted
    played_s = ledger.played_shifted
    for t in range(1, T + 1):
        matrix = spec.preference_at(t)
        b = matrix.tournament_scores
        s = matrix.self_inclusive_scores
        subset = learner.select(lrng)
        if fast_two_block:
            # closed-form winner draw over the two replica blocks; same
            # one-uniform consumption and law as the generic path
            x, y, c_x, m_t = learner.pending
            p = matrix.p
            widx = sample_two_block_winner(c_x, m_t - c_x, p[x, y], p[y, x],
                                           erng.random())
            learner.step(widx)
            c_y = m_t - c_x
            pb = (c_x * b[x] + c_y * b[y]) / m_t
            ps = (c_x * s[x] + c_y * s[y]) / m_t
        else:
            widx = sample_winner(subset, matrix, erng)
            learner.step(widx)
            pb = b[subset].mean()
            ps = s[subset].mean()
        i = t - 1
        bench_b[i] = b[istar]
        played_b[i] = pb
        bench_s[i] = s[istar]
        played_s[i] = ps
    ledger.filled = T


def run_episode(config: RunConfig, rep: int) -> EpisodeResult:
    """Play replication rep of a config and return finalized ledgers."""
    spec = config.adversary
    bench = cached_benchmark(spec, config.T)
    istar = bench.best_arm
    lrng, erng, rrng = replication_streams(config.seed, rep)
    algo = config.algorithm
    params = None
    diagnostics = None
    traces = None
    red_traces = None
    multi_ledger = None

    if algo == "reduced":
        params = config.build_params()
        learner = MidexLearner(params, tracing=config.trace)
        ledger, multi_ledger, red_traces = run_reduced(
            learner, spec, config.T, lrng, erng, rrng,
            benchmark_arm=istar, tracing=config.trace,
        )
        diagnostics = learner.diagnostics
        traces = learner.traces if config.trace else None
        multi_ledger.finalize()
    else:
        ledger = RegretLedger(config.K, config.T)
        if algo == "midex":
            params = config.build_params()
            learner = MidexLearner(params, tracing=config.trace)
            _drive_direct(spec, config.T, learner, lrng, erng, ledger, istar, True)
            diagnostics = learner.diagnostics
            traces = learner.traces if config.trace else None
        elif algo == "uniform":
            learner = UniformLearner(config.K, config.T, config.m_schedule)
            _drive_direct(spec, config.T, learner, lrng, erng, ledger, istar, False)
        else:  # fixed-arm
            learner = FixedArmLearner(config.K, config.T, config.fixed_arm,
                                      config.m_schedule)
            _drive_direct(spec, config.T, learner, lrng, erng, ledger, istar, False)
    ledger.finalize()
    return EpisodeResult(config=config, rep=rep, ledger=ledger,
                         multi_ledger=multi_ledger, params=params,
                         diagnostics=diagnostics, traces=traces,
                         reduction_traces=red_traces, benchmark=bench)


# -- replication aggregation -------------------------------------------------

@dataclass
class CurveStats:
    """Across-replication summary of one regret ledger family."""

    t_points: np.ndarray
    regret_mean: np.ndarray
    regret_std: np.ndarray
    shifted_mean: np.ndarray
    shifted_std: np.ndarray
    bench_score: np.ndarray    # instantaneous benchmark-arm score (rep-invariant)
    played_mean: np.ndarray    # mean instantaneous played average score
    final_regrets: np.ndarray  # (replications,)
    final_shifted: np.ndarray

    @property
    def mean_final(self) -> float:
        return float(self.final_regrets.mean())

    @property
    def std_final(self) -> float:
        return float(self.final_regrets.std())


@dataclass
class AggregateResult:
    """run_replications output: curves, benchmark, bounds, diagnostics."""

    config: RunConfig
    curve: CurveStats
    multi_curve: CurveStats = None
    benchmark: BenchmarkResult = None
    bound_full: float = None
    bound_simplified: float = None
    params: MidexParams = None
    diagnostics: RunDiagnostics = None


def _episode_stats(args):
    """Worker payload: one episode thinned to the snapshot points."""
    config, rep, t_points = args
    ep = run_episode(config, rep)
    out = {
        "rep": rep,
        "sample": ep.ledger.sample(t_points),
        "final": ep.ledger.final_regret,
        "final_shifted": ep.ledger.final_shifted,
        "diagnostics": ep.diagnostics,
    }
    if ep.multi_ledger is not None:
        out["multi_sample"] = ep.multi_ledger.sample(t_points)
        out["multi_final"] = ep.multi_ledger.final_regret
        out["multi_final_shifted"] = ep.multi_ledger.final_shifted
    return out


def _stack_curve(samples, finals, finals_shifted, t_points) -> CurveStats:
    regret = np.stack([s["regret_cum"] for s in samples])
    shifted = np.stack([s["shifted_regret_cum"] for s in samples])
    played = np.stack([s["played_avg_score"] for s in samples])
    return CurveStats(
        t_points=t_points,
        regret_mean=regret.mean(axis=0),
        regret_std=regret.std(axis=0),
        shifted_mean=shifted.mean(axis=0),
        shifted_std=shifted.std(axis=0),
        bench_score=samples[0]["bench_score"],
        played_mean=played.mean(axis=0),
        final_regrets=np.asarray(finals),
        final_shifted=np.asarray(finals_shifted),
    )


def run_replications(config: RunConfig, workers: int = 1) -> AggregateResult:
    """Run every replication of a config and aggregate the regret curves.

    workers > 1 distributes replications over processes; the aggregate is
    identical to the sequential result because stream derivation depends
    only on (seed, replication, role).
    """
    t_points = config.snapshot_points()
    jobs = [(config, rep, t_points) for rep in range(config.replications)]
    if workers > 1 and config.replications > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(_episode_stats, jobs))
    else:
        stats = [_episode_stats(j) for j in jobs]
    stats.sort(key=lambda s: s["rep"])

    curve = _stack_curve([s["sample"] for s in stats],
                         [s["final"] for s in stats],
                         [s["final_shifted"] for s in stats], t_points)
    multi_curve = None
    if "multi_sample" in stats[0]:
        multi_curve = _stack_curve([s["multi_sample"] for s in stats],
                                   [s["multi_final"] for s in stats],
                                   [s["multi_final_shifted"] for s in stats],
                                   t_points)

    sched = normalize_schedule(config.m_schedule, config.K, config.T)
    if isinstance(sched, int):
        mp = m_prime(sched)
    else:
        mp = max(m_prime(int(v)) for v in np.unique(sched))
    diagnostics = None
    if stats[0]["diagnostics"] is not None:
        diagnostics = RunDiagnostics()
        for s in stats:
            diagnostics = diagnostics.merge(s["diagnostics"])
    params = None
    if config.algorithm in ("midex", "reduced"):
        params = config.build_params()
    return AggregateResult(
        config=config,
        curve=curve,
        multi_curve=multi_curve,
        benchmark=cached_benchmark(config.adversary, config.T),
        bound_full=regret_bound(config.K, config.T, mp),
        bound_simplified=simplified_regret_bound(config.K, config.T),
        params=params,
        diagnostics=diagnostics,
    )
