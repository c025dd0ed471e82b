# encoding: utf-8
import logging
from collections import OrderedDict

import numpy as np

from pyaud.errors import InconsistentAlignment, UnknownLabel
from pyaud.hmm.gmm import GaussianMixture
from pyaud.hmm.viterbi import score_alignment
from pyaud.workers import run_jobs

__all__ = [
    "StateStats",
    "Accumulators",
    "accumulate",
    "reestimate",
    "mixup",
    "total_log_likelihood",
]

logger = logging.getLogger(__name__)

DEFAULT_TRANSITION_FLOOR = 0.01


class StateStats(object):
    """Sufficient statistics of one state.

    Per mixture component: soft occupancy, first and second order sums.
    Transition counts follow the transitions scored on the path: one
    self loop per repeated frame, one leave per entry followed by
    another entry.
    """

    def __init__(self, n_components, dim):
        super(StateStats, self).__init__()
        self.frames = 0
        self.occ = np.zeros(n_components)
        self.sum_x = np.zeros((n_components, dim))
        self.sum_xx = np.zeros((n_components, dim))
        self.stay = 0
        self.leave = 0

    def add_frames(self, gmm, frames):
        resp = gmm.responsibilities(frames)
        self.frames += len(frames)
        self.occ += resp.sum(axis=0)
        self.sum_x += resp.T @ frames
        self.sum_xx += resp.T @ (frames * frames)

    def merge(self, other):
        self.frames += other.frames
        self.occ += other.occ
        self.sum_x += other.sum_x
        self.sum_xx += other.sum_xx
        self.stay += other.stay
        self.leave += other.leave


class Accumulators(object):
    """label -> list of StateStats, in inventory order."""

    def __init__(self, inv):
        super(Accumulators, self).__init__()
        self.stats = OrderedDict(
            (
                unit.label,
                [StateStats(g.n_components, inv.feature_dim) for g in unit.states],
            )
            for unit in inv
        )

    def merge(self, other):
        for label, states in self.stats.items():
            for mine, theirs in zip(states, other.stats[label]):
                mine.merge(theirs)
        return self


def _check(inv, frames, alignment):
    if alignment.n_frames != len(frames):
        msg = "Alignment covers {0} frames, features have {1}."
        raise InconsistentAlignment(msg.format(alignment.n_frames, len(frames)))
    for e in alignment.entries:
        if e.label not in inv:
            raise InconsistentAlignment("Alignment uses unknown unit {0}.".format(e.label))
        if not 0 <= e.state < inv[e.label].n_states:
            msg = "Alignment uses state {0} of {1}."
            raise InconsistentAlignment(msg.format(e.state, e.label))


def accumulate(inv, features, alignment):
    """Statistics of one utterance under its alignment."""
    frames = np.asarray(getattr(features, "frames", features), dtype=np.float64)
    _check(inv, frames, alignment)
    acc = Accumulators(inv)
    entries = alignment.entries
    for i, e in enumerate(entries):
        stats = acc.stats[e.label][e.state]
        stats.add_frames(inv[e.label].states[e.state], frames[e.start:e.end])
        stats.stay += e.end - e.start - 1
        if i + 1 < len(entries):
            stats.leave += 1
    return acc


def _accumulate_job(job):
    inv, features, alignment = job
    return accumulate(inv, features, alignment)


def _new_state(old, stats, floor):
    occ = stats.occ
    weights = occ / occ.sum()
    means = old.means.copy()
    variances = old.variances.copy()
    used = occ > 0
    means[used] = stats.sum_x[used] / occ[used, None]
    second = stats.sum_xx[used] / occ[used, None]
    variances[used] = np.maximum(second - means[used] ** 2, floor)
    return GaussianMixture(weights, means, variances)


def reestimate(inv, alignments, transition_floor=DEFAULT_TRANSITION_FLOOR, n_jobs=1):
    """New inventory from (features, alignment) pairs.

    Each state gets the statistics of the frames aligned to it. States
    without frames keep their parameters and are listed in
    ``meta["empty_states"]``.
    """
    for _, alignment in alignments:
        for e in alignment.entries:
            if e.label not in inv:
                raise InconsistentAlignment("Alignment uses unknown unit {0}.".format(e.label))
    jobs = [(inv, features, alignment) for features, alignment in alignments]
    acc = Accumulators(inv)
    # merged in input order
    for part in run_jobs(_accumulate_job, jobs, n_jobs):
        acc.merge(part)

    floor = inv.variance_floor
    lo, hi = transition_floor, 1.0 - transition_floor
    units = []
    empty = []
    for unit in inv:
        states = []
        transitions = unit.transitions.copy()
        occupancy = unit.occupancy.copy()
        for s, (old, stats) in enumerate(zip(unit.states, acc.stats[unit.label])):
            if stats.frames == 0:
                empty.append("{0}:{1}".format(unit.label, s))
                states.append(old)
                continue
            states.append(_new_state(old, stats, floor))
            occupancy[s] = stats.frames
            counted = stats.stay + stats.leave
            if counted > 0:
                p = min(max(stats.stay / float(counted), lo), hi)
                transitions[s, s] = p
                transitions[s, s + 1] = 1.0 - p
        units.append(unit.replace(states=states, transitions=transitions, occupancy=occupancy))
    if empty:
        logger.warning("%d states received no frames: %s", len(empty), ", ".join(empty))
    meta = OrderedDict(inv.meta)
    meta["empty_states"] = empty
    return inv.with_units(units, meta)


def mixup(inv, max_components=4, frames_per_component=10):
    """Double mixture components where occupancy allows it."""
    units = []
    for unit in inv:
        states = []
        for g, frames in zip(unit.states, unit.occupancy):
            target = 2 * g.n_components
            if target <= max_components and frames >= target * frames_per_component:
                g = g.split()
            states.append(g)
        units.append(unit.replace(states=states))
    return inv.with_units(units)


def total_log_likelihood(inv, alignments, insertion_penalty=0.0):
    """Sum of path scores of fixed alignments under inv."""
    try:
        return sum(
            score_alignment(inv, features, alignment, insertion_penalty)
            for features, alignment in alignments
        )
    except UnknownLabel as e:
        raise InconsistentAlignment(str(e))
