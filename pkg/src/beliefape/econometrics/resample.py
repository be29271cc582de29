"""Cluster resampling."""
import numpy as np

from .panel import Panel


def cluster_resample(panel, rng):
    """Draw clusters with replacement; repeated households get fresh ids.

    Every drawn copy of a household becomes a distinct household, so first
    differences stay within copies.
    """
    cl = panel.cluster
    labels, inv = np.unique(cl, return_inverse=True)
    draw = rng.integers(0, len(labels), size=len(labels))
    rows_of = np.argsort(inv, kind="mergesort")
    counts = np.bincount(inv, minlength=len(labels))
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    size = counts[draw]
    copy_id = np.repeat(np.arange(len(draw)), size)
    offset = np.arange(size.sum()) - np.repeat(np.cumsum(size) - size, size)
    idx = rows_of[np.repeat(starts[draw], size) + offset]
    frame = panel.frame.iloc[idx].reset_index(drop=True)
    hh_rank = np.unique(panel.household_id, return_inverse=True)[1]
    n_hh = int(hh_rank.max()) + 1 if len(hh_rank) else 1
    frame["household_id"] = copy_id * n_hh + hh_rank[idx]
    if "cluster_id" in frame.columns:
        frame["cluster_id"] = copy_id
    # rows of a cluster keep their (household, wave) order and copies are
    # numbered in order, so the frame is already sorted and valid
    return Panel.from_valid_frame(frame, panel.controls)
