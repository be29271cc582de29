"""Counter-based seed derivation.

Every random task derives its seed from the run's master seed and a tuple
of nonnegative integer counters (task kind, replication index, ...) using
``numpy.random.SeedSequence(master, spawn_key=counters)``. A task's stream
depends only on its own key, never on how many other tasks ran before it
or in what order, so parallel and serial runs give identical results.
"""
import numpy as np


def derive_seed(master, *key):
    """32-bit seed for the task identified by ``key``."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def derive_rng(master, *key):
    return np.random.default_rng(np.random.SeedSequence(int(master),
                                                        spawn_key=tuple(int(k) for k in key)))


# task-kind counters
CV_STEP1, CV_STEP2, BOOTSTRAP, SYNTH, SIMULATE, ESTIMATE = range(6)
