# encoding: utf-8
"""Encoding audio to unit sequences and exemplar resynthesis."""
import json
import logging
import os
from collections import OrderedDict

import numpy as np

from pyaud.errors import CorruptFile, MissingOccurrence, NotFound, UnknownUnit
from pyaud.frontend.features import compute_energy_contour, compute_mfcc, frame_geometry
from pyaud.frontend.wavio import Waveform, read_wav, write_wav
from pyaud.graph import Clustering, cluster_medoid, pairwise_distances
from pyaud.hmm.unit import SILENCE_LABEL
from pyaud.hmm.viterbi import UnitToken
from pyaud.pipeline.stages import decode_utterance, make_grammar

__all__ = [
    "Transcription",
    "save_transcriptions",
    "load_transcriptions",
    "silence_mask",
    "check_frontend",
    "encode",
    "encode_features",
    "ExemplarStore",
    "build_exemplar_store",
    "decode_exemplar",
]

logger = logging.getLogger(__name__)

EXEMPLAR_INDEX = "exemplars.json"


class Transcription(object):
    """Unit tokens with frame spans tiling an utterance."""

    def __init__(self, tokens, frame_shift, utterance_id=""):
        super(Transcription, self).__init__()
        self.tokens = [UnitToken(*t) for t in tokens]
        self.frame_shift = float(frame_shift)
        self.utterance_id = utterance_id

    @classmethod
    def from_alignment(cls, alignment, frame_shift, utterance_id=""):
        return cls(alignment.unit_tokens(), frame_shift, utterance_id)

    def labels(self):
        return [t.label for t in self.tokens]

    def __len__(self):
        return len(self.tokens)

    @property
    def n_frames(self):
        return self.tokens[-1].end if self.tokens else 0

    @property
    def duration(self):
        return self.n_frames * self.frame_shift

    def to_dict(self):
        return OrderedDict(
            [
                ("utterance_id", self.utterance_id),
                ("frame_shift", self.frame_shift),
                (
                    "tokens",
                    [
                        OrderedDict(
                            [
                                ("label", t.label),
                                ("start_frame", t.start),
                                ("end_frame", t.end),
                                ("start_s", round(t.start * self.frame_shift, 6)),
                                ("end_s", round(t.end * self.frame_shift, 6)),
                            ]
                        )
                        for t in self.tokens
                    ],
                ),
            ]
        )

    @classmethod
    def from_dict(cls, data):
        tokens = [(t["label"], t["start_frame"], t["end_frame"]) for t in data["tokens"]]
        return cls(tokens, data["frame_shift"], data.get("utterance_id", ""))

    def __eq__(self, other):
        return (
            isinstance(other, Transcription)
            and self.tokens == other.tokens
            and self.frame_shift == other.frame_shift
        )

    def __repr__(self):
        return "<Transcription {0} tokens: {1}>".format(self.utterance_id, len(self))


def save_transcriptions(path, transcriptions, extra=None):
    document = OrderedDict()
    if extra:
        document.update(extra)
    document["transcriptions"] = [t.to_dict() for t in transcriptions]
    with open(path, "w") as fid:
        json.dump(document, fid, indent=2)
        fid.write("\n")


def load_transcriptions(path):
    try:
        with open(path) as fid:
            document = json.load(fid)
    except FileNotFoundError:
        raise NotFound("File not found: {0}".format(path))
    except ValueError as e:
        raise CorruptFile("Invalid JSON in {0}: {1}".format(path, e))
    if isinstance(document, dict) and "tokens" in document:
        return [Transcription.from_dict(document)]
    try:
        return [Transcription.from_dict(t) for t in document["transcriptions"]]
    except (KeyError, TypeError) as e:
        raise CorruptFile("Incomplete transcription document {0}: {1}".format(path, e))


def silence_mask(energy, margin):
    """Frames at or below floor + margin."""
    return energy.values <= energy.floor + margin


def check_frontend(inv, frontend):
    """Names of frontend properties that differ from the ones recorded at training."""
    recorded = inv.meta.get("frontend")
    if not recorded:
        return []
    current = frontend.to_strings()
    names = set(recorded) | set(current)
    changed = sorted(k for k in names if recorded.get(k) != current.get(k))
    if changed:
        msg = "Inventory was trained with other frontend settings: %s"
        logger.warning(msg, ", ".join(changed))
    return changed


def encode_features(inv, features, cfg, mask=None):
    return decode_utterance(inv, features, make_grammar(inv, cfg), mask)


def encode(inv, w, cfg, utterance_id=""):
    features = compute_mfcc(w, cfg.frontend)
    energy = compute_energy_contour(w, cfg.frontend)
    mask = silence_mask(energy, cfg.segmenter.silence_margin)
    alignment = encode_features(inv, features, cfg, mask)
    t = Transcription.from_alignment(alignment, cfg.frontend.frame_shift, utterance_id)
    logger.debug("Encoded %s: %d tokens.", utterance_id or "<waveform>", len(t))
    return t


class ExemplarStore(object):
    """Maintain the exemplar waveform of every unit label.

    Labels whose unit was never decoded are kept in ``missing``.
    """

    def __init__(self, sample_rate, silence_label=SILENCE_LABEL):
        super(ExemplarStore, self).__init__()
        self.sample_rate = int(sample_rate)
        self.silence_label = silence_label
        self._stock = OrderedDict()
        self.missing = []

    def register(self, label, waveform):
        if waveform.sample_rate != self.sample_rate:
            msg = "Exemplar {0} at {1} Hz, store holds {2} Hz."
            raise CorruptFile(msg.format(label, waveform.sample_rate, self.sample_rate))
        if label in self._stock:
            logger.info("Warning, replacing exemplar %s", label)
        self._stock[label] = waveform
        if label in self.missing:
            self.missing.remove(label)
        logger.debug("Exemplar %s registered (%.3f s).", label, waveform.duration)

    def flag_missing(self, label):
        if label not in self.missing:
            self.missing.append(label)

    def get(self, label):
        """Exemplar of label, UnknownUnit if there is none."""
        try:
            return self._stock[label]
        except KeyError:
            raise UnknownUnit("No exemplar registered for unit {0!r}".format(label))

    def labels(self):
        return list(self._stock.keys())

    def __len__(self):
        return len(self._stock)

    def save(self, dir_path):
        if not os.path.isdir(dir_path):
            os.makedirs(dir_path)
        files = OrderedDict()
        for label, waveform in self._stock.items():
            fname = "{0}.wav".format(label)
            write_wav(os.path.join(dir_path, fname), waveform)
            files[label] = fname
        index = OrderedDict(
            [
                ("sample_rate", self.sample_rate),
                ("silence_label", self.silence_label),
                ("exemplars", files),
                ("missing", self.missing),
            ]
        )
        with open(os.path.join(dir_path, EXEMPLAR_INDEX), "w") as fid:
            json.dump(index, fid, indent=2)
        logger.info("Saved %d exemplars to %s", len(self), dir_path)

    @classmethod
    def load(cls, dir_path):
        path = os.path.join(dir_path, EXEMPLAR_INDEX)
        try:
            with open(path) as fid:
                index = json.load(fid)
        except FileNotFoundError:
            raise NotFound("No exemplar index in {0}".format(dir_path))
        except ValueError as e:
            raise CorruptFile("Invalid JSON in {0}: {1}".format(path, e))
        try:
            store = cls(index["sample_rate"], index.get("silence_label", SILENCE_LABEL))
            files = list(index["exemplars"].items())
        except (KeyError, TypeError, AttributeError, ValueError) as e:
            raise CorruptFile("Incomplete exemplar index {0}: {1}".format(path, e))
        for label, fname in files:
            store.register(label, read_wav(os.path.join(dir_path, fname)))
        for label in index.get("missing", []):
            store.flag_missing(label)
        return store

    def __repr__(self):
        return "<ExemplarStore exemplars: {0} missing: {1}>".format(len(self), len(self.missing))


def build_exemplar_store(inv, alignments, waveforms, features, cfg, rng=None, strict=False):
    """Medoid occurrence of every non-silence unit, by DTW.

    ``alignments``, ``waveforms`` and ``features`` are parallel lists
    over utterances. Up to ``training.exemplar_sample`` occurrences are
    sampled per unit. A unit without occurrence is flagged missing, or
    raises MissingOccurrence when ``strict``.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.training.seed)
    sample_rate = waveforms[0].sample_rate if waveforms else cfg.frontend.sample_rate
    silence = inv.silence_label
    store = ExemplarStore(sample_rate, silence or SILENCE_LABEL)

    occurrences = OrderedDict((label, []) for label in inv.labels())
    for u, alignment in enumerate(alignments):
        for token in alignment.unit_tokens():
            occurrences[token.label].append((u, token.start, token.end))

    limit = cfg.training.exemplar_sample
    for label, items in occurrences.items():
        if label == silence:
            continue
        if not items:
            if strict:
                raise MissingOccurrence("Unit {0} was never decoded.".format(label))
            logger.warning("Unit %s was never decoded, no exemplar.", label)
            store.flag_missing(label)
            continue
        if len(items) > limit:
            picked = np.sort(rng.choice(len(items), size=limit, replace=False))
            items = [items[i] for i in picked]
        if len(items) == 1:
            chosen = items[0]
        else:
            seqs = [features[u].frames[s:e] for u, s, e in items]
            d = pairwise_distances(seqs, cfg.cluster.band, cfg.training.n_jobs)
            chosen = items[cluster_medoid(Clustering([0] * len(items)), d, 0)]
        u, start, end = chosen
        flen, fshift = frame_geometry(waveforms[u].sample_rate, cfg.frontend)
        store.register(label, waveforms[u].slice(start * fshift, (end - 1) * fshift + flen))
    return store


def decode_exemplar(store, t, crossfade):
    """Concatenate exemplars with linear crossfades of ``crossfade`` seconds.

    Silence tokens become zeros of the token duration.
    """
    sr = store.sample_rate
    pieces = []
    for token in t.tokens:
        if token.label == store.silence_label:
            nsamples = int(round((token.end - token.start) * t.frame_shift * sr))
            pieces.append(np.zeros(nsamples))
        else:
            pieces.append(store.get(token.label).samples)
    if not pieces:
        return Waveform(np.zeros(0), sr)

    overlap = int(round(crossfade * sr))
    out = pieces[0].copy()
    for prev, piece in zip(pieces[:-1], pieces[1:]):
        n = min(overlap, len(prev), len(piece))
        if n > 0:
            ramp = (np.arange(n) + 0.5) / n
            out[-n:] = out[-n:] * (1.0 - ramp) + piece[:n] * ramp
        out = np.concatenate([out, piece[n:]])
    return Waveform(out, sr)
