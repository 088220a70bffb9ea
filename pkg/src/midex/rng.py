"""Deterministic derivation of independent random streams.

Every source of randomness in a run is a PCG64 generator derived from the
master seed plus an integer path, e.g. (replication, role).  Derivation is
pure: the same (seed, path) always yields the same stream, regardless of
creation order or process, which is what makes parallel replications
byte-identical to sequential ones.
"""

import numpy as np

# role slots within one replication
ROLE_LEARNER = 0
ROLE_ENVIRONMENT = 1
ROLE_REDUCTION = 2


def substream(seed: int, *path: int) -> np.random.Generator:
    """Return the generator for the given derivation path.

    Parameters
    ----------
    seed : master seed of the run.
    path : integers naming the branch, e.g. (rep, role).
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.PCG64(ss))


def replication_streams(seed: int, rep: int):
    """Learner, environment and reduction streams for one replication."""
    return (
        substream(seed, rep, ROLE_LEARNER),
        substream(seed, rep, ROLE_ENVIRONMENT),
        substream(seed, rep, ROLE_REDUCTION),
    )
