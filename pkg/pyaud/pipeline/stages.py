# encoding: utf-8
"""Segment preparation and the two self-training stages."""
import logging
from collections import OrderedDict

import numpy as np

from pyaud.errors import ConfigError, EmptyCorpus, InfeasibleAlignment, NoUsableClusters
from pyaud.frontend.features import compute_energy_contour, compute_mfcc
from pyaud.hmm.gmm import variance_floor_for
from pyaud.hmm.reestimate import mixup, reestimate, total_log_likelihood
from pyaud.hmm.unit import (
    CVC_KINDS,
    UnitInventory,
    flat_start_silence,
    flat_start_unit,
    split_feasible,
    unit_label,
)
from pyaud.hmm.viterbi import UnitLoopGrammar, viterbi_align, viterbi_decode
from pyaud.segmenter import extract_segment_features, segment_syllables
from pyaud.workers import run_jobs

__all__ = [
    "Utterance",
    "prepare_utterance",
    "inter_segment_chunks",
    "usable_clusters",
    "stage1_train",
    "stage2_train",
    "decode_corpus",
    "make_grammar",
    "decode_utterance",
]

logger = logging.getLogger(__name__)


class Utterance(object):
    """Features, energy contour and segments of one utterance."""

    def __init__(self, utterance_id, features, energy=None, segments=(), waveform=None):
        super(Utterance, self).__init__()
        self.utterance_id = utterance_id
        self.features = features
        self.energy = energy
        self.segments = list(segments)
        self.waveform = waveform

    def segment_features(self):
        return [extract_segment_features(self.features, s) for s in self.segments]

    def __repr__(self):
        tpl = "<Utterance {0} T: {1} segments: {2}>"
        return tpl.format(self.utterance_id, len(self.features), len(self.segments))


def prepare_utterance(utterance_id, waveform, cfg):
    features = compute_mfcc(waveform, cfg.frontend)
    energy = compute_energy_contour(waveform, cfg.frontend)
    segments = segment_syllables(energy, cfg.segmenter, utterance_id)
    return Utterance(utterance_id, features, energy, segments, waveform)


def inter_segment_chunks(utterance):
    """Frames not covered by any segment, one array per gap."""
    frames = utterance.features.frames
    chunks = []
    cursor = 0
    for s in utterance.segments:
        if s.start_frame > cursor:
            chunks.append(frames[cursor:s.start_frame])
        cursor = max(cursor, s.end_frame)
    if cursor < len(frames):
        chunks.append(frames[cursor:])
    return chunks


def _frames(seq):
    return np.asarray(getattr(seq, "frames", seq), dtype=np.float64)


def _cvc_transcript(index, fractions):
    return [unit_label(kind, index) for kind, f in zip(CVC_KINDS, fractions) if f > 0]


def usable_clusters(clusters, seg_feats, cfg):
    """(cluster id, usable members) of clusters large enough to train on.

    A member is usable when it has at least three times n_states frames
    and its flat start split gives every state a frame.
    """
    hcfg = cfg.hmm
    min_frames = len(CVC_KINDS) * hcfg.n_states
    usable = []
    for cid, members in clusters.clusters.items():
        ok = [
            m
            for m in members
            if len(seg_feats[m]) >= min_frames
            and split_feasible(len(seg_feats[m]), hcfg.fractions, hcfg.n_states)
        ]
        if len(ok) >= cfg.cluster.min_cluster_size:
            usable.append((cid, ok))
        else:
            logger.debug("Cluster %s rejected: %d usable members.", cid, len(ok))
    return usable


def _relative_change(ll_old, ll_new):
    if ll_old == ll_new:
        return 0.0
    return (ll_new - ll_old) / max(abs(ll_old), np.finfo(np.float64).tiny)


def _align_job(job):
    inv, frames, transcript = job
    return viterbi_align(inv, frames, transcript)


def decode_utterance(inv, frames, grammar, mask=None):
    """Decode, forcing masked frames to silence when that leaves a path."""
    if mask is not None and np.any(mask) and inv.silence_label is not None:
        try:
            return viterbi_decode(inv, frames, grammar, mask)
        except InfeasibleAlignment:
            logger.warning("Silence gating left no valid path, decoding without it.")
    return viterbi_decode(inv, frames, grammar)


def _decode_job(job):
    return decode_utterance(*job)


def _self_train(inv, label, max_iter, cfg, relabel, features, penalty=0.0):
    """Relabel, reestimate and rescore until the relative gain is small."""
    tcfg = cfg.training
    hcfg = cfg.hmm
    history = []
    for iteration in range(1, max_iter + 1):
        if iteration in hcfg.mixup_at:
            inv = mixup(inv, hcfg.max_components)
            logger.info("%s: mixture components doubled at iteration %d.", label, iteration)
        alignments = relabel(inv)
        ll = float(sum(a.total_log_likelihood for a in alignments))
        pairs = list(zip(features, alignments))
        inv = reestimate(inv, pairs, hcfg.transition_floor, tcfg.n_jobs)
        ll_new = float(total_log_likelihood(inv, pairs, penalty))
        change = _relative_change(ll, ll_new)
        history.append(
            OrderedDict([("iteration", iteration), ("ll", ll), ("ll_reestimated", ll_new)])
        )
        logger.info(
            "%s iteration %d: log-likelihood %.4f -> %.4f (relative change %.3g)",
            label,
            iteration,
            ll,
            ll_new,
            change,
        )
        if change < tcfg.rel_ll_tol:
            break
    return inv, history


def stage1_train(
    clusters, seg_feats, cfg, silence_chunks=(), inventory=None, label_map=None
):
    """Train onset, rhyme and offset units on clustered segments.

    Every usable member of usable cluster i is transcribed as
    (OS_i, RH_i, OF_i), cluster indices renumbered consecutively. The
    silence unit is trained on ``silence_chunks``. With ``inventory``
    and ``label_map`` the transcripts are mapped and training starts
    from the given inventory instead of a flat start.
    """
    hcfg = cfg.hmm
    usable = usable_clusters(clusters, seg_feats, cfg)
    if not usable:
        msg = "No cluster has {0} members long enough to train on."
        raise NoUsableClusters(msg.format(cfg.cluster.min_cluster_size))
    logger.info("Stage 1: %d usable clusters out of %d.", len(usable), len(clusters))

    chunks = [_frames(c) for c in silence_chunks if len(c) >= hcfg.n_states]
    features = []
    transcripts = []
    for index, (_, members) in enumerate(usable):
        transcript = _cvc_transcript(index, hcfg.fractions)
        if label_map is not None:
            transcript = [label_map[label] for label in transcript]
        for m in members:
            features.append(_frames(seg_feats[m]))
            transcripts.append(transcript)

    if inventory is None:
        everything = np.vstack([_frames(f) for f in seg_feats] + list(chunks))
        floor = variance_floor_for(everything, hcfg.variance_floor_scale)
        units = []
        for index, (_, members) in enumerate(usable):
            units.extend(
                flat_start_unit(
                    [seg_feats[m] for m in members], hcfg.fractions, hcfg.n_states, floor, index
                )
            )
        units.append(flat_start_silence(chunks, hcfg.n_states, floor, everything))
        inventory = UnitInventory(units, everything.shape[1], floor)
    silence = inventory.silence_label
    if silence is not None:
        for chunk in chunks:
            features.append(chunk)
            transcripts.append([silence])

    def relabel(inv):
        jobs = [(inv, f, t) for f, t in zip(features, transcripts)]
        return run_jobs(_align_job, jobs, cfg.training.n_jobs)

    inv, history = _self_train(
        inventory, "Stage 1", cfg.training.stage1_max_iter, cfg, relabel, features
    )
    meta = OrderedDict(inv.meta)
    meta["stage"] = "stage1"
    meta["clusters"] = [str(cid) for cid, _ in usable]
    meta["stage1_iterations"] = history
    meta["frontend"] = OrderedDict(sorted(cfg.frontend.to_strings().items()))
    return inv.with_units(list(inv), meta)


def make_grammar(inv, cfg, labels=None):
    return UnitLoopGrammar(
        inv.labels() if labels is None else labels,
        cfg.hmm.insertion_penalty,
        cfg.hmm.sequencing,
    )


def decode_corpus(inv, utterances, cfg, masks=None):
    grammar = make_grammar(inv, cfg)
    masks = masks or [None] * len(utterances)
    jobs = [(inv, _frames(u), grammar, m) for u, m in zip(utterances, masks)]
    return run_jobs(_decode_job, jobs, cfg.training.n_jobs)


def stage2_train(inv, utterances, cfg):
    """Self-train on continuous utterances under the unit-loop grammar."""
    if not utterances:
        raise EmptyCorpus("Stage 2 needs at least one utterance.")
    if "stage" not in inv.meta:
        raise ConfigError("Stage 2 needs an inventory trained by stage 1.")
    features = [_frames(u) for u in utterances]

    def relabel(current):
        return decode_corpus(current, features, cfg)

    trained, history = _self_train(
        inv,
        "Stage 2",
        cfg.training.stage2_max_iter,
        cfg,
        relabel,
        features,
        cfg.hmm.insertion_penalty,
    )
    meta = OrderedDict(trained.meta)
    meta["stage"] = "stage2"
    meta["stage2_iterations"] = history
    return trained.with_units(list(trained), meta)
