# encoding: utf-8
"""Kind-stratified k-means merging of trained units."""
import logging
from collections import OrderedDict

import numpy as np
from sklearn.cluster import KMeans

from pyaud.errors import ConfigError, TargetExceedsKinds
from pyaud.hmm.gmm import GaussianMixture
from pyaud.hmm.unit import (
    OFFSET,
    ONSET,
    RHYME,
    SILENCE,
    TRANSIENT,
    HmmUnit,
    unit_label,
)

__all__ = ["KIND_GROUPS", "unit_embedding", "split_target", "merge_units"]

logger = logging.getLogger(__name__)

KIND_GROUPS = OrderedDict([("transient", (ONSET, OFFSET, TRANSIENT)), ("steady", (RHYME,))])


def _state_moments(g):
    """Mean and variance of a whole mixture."""
    mean = g.weights @ g.means
    second = g.weights @ (g.variances + g.means ** 2)
    return mean, second - mean ** 2


def unit_embedding(unit):
    """Concatenated state means scaled by relative state occupancy."""
    occupancy = unit.occupancy
    if occupancy.sum() > 0:
        scale = occupancy / occupancy.sum() * unit.n_states
    else:
        scale = np.ones(unit.n_states)
    return np.concatenate([_state_moments(g)[0] * w for g, w in zip(unit.states, scale)])


def split_target(target, sizes):
    """Clusters per group, proportional to group sizes, at least 1 each."""
    total = float(sum(sizes))
    ks = [min(n, max(1, int(round(target * n / total)))) for n in sizes]
    while sum(ks) > target:
        i = max((i for i, k in enumerate(ks) if k > 1), key=lambda i: ks[i])
        ks[i] -= 1
    while sum(ks) < target:
        i = max(
            (i for i, k in enumerate(ks) if k < sizes[i]), key=lambda i: sizes[i] - ks[i]
        )
        ks[i] += 1
    return ks


def _kmeans_groups(embeddings, k, seed):
    n = len(embeddings)
    if k >= n:
        return list(range(n))
    model = KMeans(n_clusters=k, init="k-means++", n_init=10, random_state=seed)
    raw = model.fit_predict(np.vstack(embeddings))
    # renumber by first member
    renumber = {}
    for r in raw:
        renumber.setdefault(int(r), len(renumber))
    return [renumber[int(r)] for r in raw]


def _merged_unit(label, kind, members, floor):
    n_states = {u.n_states for u in members}
    if len(n_states) != 1:
        raise ConfigError("Cannot merge units with different state counts.")
    states = []
    occupancy = []
    for s in range(members[0].n_states):
        occ = np.array([u.occupancy[s] for u in members], dtype=np.float64)
        weights = occ / occ.sum() if occ.sum() > 0 else np.full(len(members), 1.0 / len(members))
        moments = [_state_moments(u.states[s]) for u in members]
        mean = sum(w * m for w, (m, _) in zip(weights, moments))
        second = sum(w * (v + m ** 2) for w, (m, v) in zip(weights, moments))
        var = np.maximum(second - mean ** 2, floor)
        states.append(GaussianMixture([1.0], mean[None, :], var[None, :]))
        occupancy.append(occ.sum())
    return HmmUnit(label, kind, states, occupancy=occupancy)


def merge_units(inv, target, cfg):
    """Merge non-silence units down to ``target``.

    Returns (inventory, label map). Units of the transient group and of
    the steady group never share a merged unit unless
    ``training.merge_stratified`` is off.
    """
    if target < 1:
        raise ConfigError("merge target must be at least 1.")
    speech = [u for u in inv if u.kind != SILENCE]
    if target >= len(speech):
        logger.info("Merge target %d covers all %d units, nothing merged.", target, len(speech))
        return inv, OrderedDict((label, label) for label in inv.labels())

    if cfg.training.merge_stratified:
        groups = [
            [u for u in speech if u.kind in kinds] for kinds in KIND_GROUPS.values()
        ]
        groups = [g for g in groups if g]
    else:
        groups = [speech]
    if target < len(groups):
        msg = "Target {0} is smaller than the {1} unit kinds present."
        raise TargetExceedsKinds(msg.format(target, len(groups)))

    ks = split_target(target, [len(g) for g in groups])
    new_label = {}
    merged = OrderedDict()
    for group, k in zip(groups, ks):
        assignment = _kmeans_groups([unit_embedding(u) for u in group], k, cfg.training.seed)
        clusters = OrderedDict()
        for unit, cid in zip(group, assignment):
            clusters.setdefault(cid, []).append(unit)
        for index, members in enumerate(clusters.values()):
            kinds = {u.kind for u in members}
            kind = kinds.pop() if len(kinds) == 1 else TRANSIENT
            label = unit_label(kind, index)
            merged[label] = _merged_unit(label, kind, members, inv.variance_floor)
            for u in members:
                new_label[u.label] = label

    units = []
    label_map = OrderedDict()
    for unit in inv:
        if unit.kind == SILENCE:
            units.append(unit)
            label_map[unit.label] = unit.label
            continue
        label = new_label[unit.label]
        label_map[unit.label] = label
        if label in merged:
            units.append(merged.pop(label))
    meta = OrderedDict(inv.meta)
    meta["merge"] = OrderedDict(
        [("target", target), ("label_map", OrderedDict(label_map))]
    )
    logger.info("Merged %d units into %d.", len(speech), len(units) - len(inv.labels_of_kind(SILENCE)))
    return inv.with_units(units, meta), label_map
