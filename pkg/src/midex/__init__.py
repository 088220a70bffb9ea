"""Multi-dueling bandit simulation toolkit.

Core pieces: preference matrices and tournament scores (preferences),
the winner-feedback choice model (choice), the exponential-weights learner
(learner), oblivious instance generators (adversaries), the dueling-bandit
reduction (reduction), the experiment runner (harness), a numeric
verification battery (verify) and a CLI (cli).
"""

from .adversaries import (
    AbruptSwitch,
    AdversarySpec,
    Constant,
    CyclicNoCondorcet,
    SeededRandom,
    SinusoidalDrift,
    borda_gap_instance,
    build_sequence,
)
from .choice import ArmMultiset, WinnerDistribution, duel, sample_winner, winner_distribution
from .errors import MidexError
from .harness import (
    AggregateResult,
    EpisodeResult,
    RunConfig,
    run_episode,
    run_replications,
)
from .ledger import RegretLedger
from .learner import (
    MidexLearner,
    MidexParams,
    RoundTrace,
    default_params,
    g_transform,
    m_prime,
    regret_bound,
    simplified_regret_bound,
)
from .preferences import (
    BenchmarkResult,
    PreferenceMatrix,
    ScoreVector,
    benchmark,
    borda_scores,
    shifted_borda_scores,
    validate,
)
from .reduction import feedback_to_index, propose_pair, run_reduced
from .verify import VerificationReport, run_battery

__version__ = "0.1.0"
