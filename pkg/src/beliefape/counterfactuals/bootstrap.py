"""Cluster bootstrap of a full estimation pipeline."""
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .. import seeding
from ..econometrics.resample import cluster_resample


def bootstrap_ape(pipeline, panel, n_boot, seed=0, workers=1):
    """Bootstrap standard errors of every cell of an :class:`ApeResult`.

    Parameters
    ----------
    pipeline : callable
        ``pipeline(panel, seed) -> ApeResult``; it should rebuild everything
        that depends on the data (belief estimates, fits, counterfactual
        states) so that the bootstrap reflects all estimation steps.
    panel : Panel
    n_boot : int
        Number of replications, at least 1.
    seed : int
        Master seed; replication ``b`` resamples with the stream keyed by
        ``(BOOTSTRAP, b)`` and passes a derived seed to the pipeline.
    workers : int
        Threads running replications; results do not depend on it.

    Returns
    -------
    se : ndarray, shape (cells, 3)
        Standard deviation across replications (0 with one replication).
    draws : ndarray, shape (n_boot, cells, 3)
    """
    if n_boot < 1:
        raise ValueError("bootstrap needs at least one replication")

    def one(b):
        rng = seeding.derive_rng(seed, seeding.BOOTSTRAP, b)
        bp = cluster_resample(panel, rng)
        return pipeline(bp, seeding.derive_seed(seed, seeding.BOOTSTRAP, b, 1)).estimates()

    if workers > 1:
        with ThreadPoolExecutor(max_workers=int(workers)) as ex:
            draws = np.array(list(ex.map(one, range(n_boot))))
    else:
        draws = np.array([one(b) for b in range(n_boot)])
    se = draws.std(axis=0, ddof=1) if n_boot > 1 else np.zeros(draws.shape[1:])
    return se, draws
