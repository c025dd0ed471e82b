# encoding: utf-8
"""Objective metrics of unit encodings.

The bitrate is the unigram-entropy convention, NMI is normalized by the
geometric mean of the two entropies and ABX errors are flat averages over
triplets. Reports carry these conventions in their ``conventions`` field.
"""
import csv
import io
import json
import logging
import math
from collections import OrderedDict, namedtuple

import numpy as np
from scipy.stats import entropy
from sklearn.metrics import normalized_mutual_info_score
from sklearn.metrics.cluster import contingency_matrix

from pyaud.errors import (
    ConfigError,
    EmptyInput,
    EmptySequence,
    EmptyTranscriptions,
    LengthMismatch,
    OutOfRange,
)
from pyaud.graph import dtw_distance
from pyaud.workers import run_jobs

__all__ = [
    "DISTANCE_MAP",
    "register_distance",
    "bitrate",
    "edit_distance",
    "token_accuracy",
    "abx_error",
    "TripletItem",
    "read_triplets_jsonl",
    "resolve_feature_triplets",
    "resolve_label_triplets",
    "cluster_quality",
    "MetricReport",
]

logger = logging.getLogger(__name__)

CONVENTIONS = OrderedDict(
    [
        ("bitrate", "symbols per second times unigram entropy in bits"),
        ("nmi", "mutual information over geometric mean of entropies"),
        ("abx", "flat average over triplets, ties count 0.5"),
    ]
)


def _labels(t):
    return t.labels() if hasattr(t, "labels") else list(t)


def bitrate(transcriptions, total_duration_s, strict=False):
    """Symbol rate times the entropy of the unigram symbol distribution."""
    if not total_duration_s > 0 or math.isinf(total_duration_s):
        raise ConfigError("Total duration must be positive, got {0}.".format(total_duration_s))
    symbols = [label for t in transcriptions for label in _labels(t)]
    if not symbols:
        if strict:
            raise EmptyTranscriptions("No symbols to compute a bitrate on.")
        logger.warning("No symbols in the transcriptions, bitrate is 0.")
        return 0.0
    _, counts = np.unique([str(s) for s in symbols], return_counts=True)
    h = float(entropy(counts, base=2))
    return len(symbols) / float(total_duration_s) * h


def edit_distance(a, b):
    """Levenshtein distance between two label sequences."""
    a = list(a)
    b = list(b)
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        row = [i] + [0] * len(b)
        for j, y in enumerate(b, 1):
            row[j] = min(prev[j] + 1, row[j - 1] + 1, prev[j - 1] + (x != y))
        prev = row
    return prev[-1]


def token_accuracy(hyp, ref):
    """1 - edit distance / reference length. Negative for long insertions."""
    ref = list(ref)
    if not ref:
        raise EmptySequence("Token accuracy needs a non-empty reference.")
    return 1.0 - edit_distance(hyp, ref) / float(len(ref))


#
# ABX
#
DistanceDescription = namedtuple("DistanceDescription", ["name", "func", "label"])

DISTANCE_MAP = {}


def register_distance(name, func, label=None):
    if label is None:
        label = name
    if name in DISTANCE_MAP:
        logger.debug("Replacing registered distance %s", name)
    DISTANCE_MAP[name] = DistanceDescription(name, func, label)


register_distance("dtw", dtw_distance, "DTW over feature frames")
register_distance("edit", edit_distance, "edit distance over decoded labels")


def _distance_func(distance):
    if callable(distance):
        return distance
    try:
        return DISTANCE_MAP[distance].func
    except KeyError:
        msg = "Unknown distance {0!r}, registered: {1}."
        raise ConfigError(msg.format(distance, ", ".join(sorted(DISTANCE_MAP))))


def _abx_job(job):
    func, a, b, x = job
    d_xa = func(x, a)
    d_xb = func(x, b)
    if d_xb < d_xa:
        return 1.0
    if d_xb == d_xa:
        return 0.5
    return 0.0


def abx_error(triplets, distance="dtw", n_jobs=1):
    """Fraction of (A, B, X) triplets where X is closer to B than to A.

    X belongs to the category of A. Ties count one half.
    """
    func = _distance_func(distance)
    jobs = [(func, a, b, x) for a, b, x in triplets]
    if not jobs:
        raise EmptyInput("ABX needs at least one triplet.")
    scores = run_jobs(_abx_job, jobs, n_jobs)
    return float(np.mean(scores))


TripletItem = namedtuple("TripletItem", ["utterance_id", "start_s", "end_s"])


def read_triplets_jsonl(fileobj):
    """Triplets from JSON lines ``{"A": [utt, start_s, end_s], "B": ..., "X": ...}``."""
    triplets = []
    for lineno, line in enumerate(fileobj, 1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
            triplets.append(tuple(TripletItem(*record[key]) for key in ("A", "B", "X")))
        except (ValueError, KeyError, TypeError) as e:
            raise ConfigError("Bad triplet on line {0}: {1}".format(lineno, e))
    return triplets


def resolve_feature_triplets(triplets, features):
    """Frame slices of triplet items; ``features`` maps utterance ids to sequences."""

    def frames(item):
        try:
            seq = features[item.utterance_id]
        except KeyError:
            msg = "Triplet item names unknown utterance {0!r}"
            raise OutOfRange(msg.format(item.utterance_id))
        start = int(round(item.start_s / seq.frame_shift))
        end = int(round(item.end_s / seq.frame_shift))
        if start < 0 or end > len(seq) or start >= end:
            msg = "Triplet item {0} [{1}, {2}) outside of {3} frames."
            raise OutOfRange(msg.format(item.utterance_id, start, end, len(seq)))
        return seq.frames[start:end]

    return [tuple(frames(item) for item in t) for t in triplets]


def resolve_label_triplets(triplets, transcriptions):
    """Labels of the tokens overlapping each triplet item."""
    by_id = {t.utterance_id: t for t in transcriptions}

    def labels(item):
        try:
            t = by_id[item.utterance_id]
        except KeyError:
            msg = "No transcription for utterance {0!r}"
            raise OutOfRange(msg.format(item.utterance_id))
        start = item.start_s / t.frame_shift
        end = item.end_s / t.frame_shift
        return [k.label for k in t.tokens if k.end > start and k.start < end]

    return [tuple(labels(item) for item in t) for t in triplets]


#
# Clustering quality
#
def cluster_quality(predicted, reference):
    """(purity, nmi) of a predicted labeling against a reference one."""
    predicted = [str(p) for p in predicted]
    reference = [str(r) for r in reference]
    if len(predicted) != len(reference):
        msg = "{0} predicted labels for {1} reference labels."
        raise LengthMismatch(msg.format(len(predicted), len(reference)))
    if not predicted:
        raise EmptyInput("Cluster quality needs labeled items.")
    table = contingency_matrix(reference, predicted)
    purity = table.max(axis=0).sum() / float(len(predicted))
    n_ref, n_pred = table.shape
    if n_ref == 1 or n_pred == 1:
        # a single cluster carries no information
        nmi = 1.0 if n_ref == n_pred else 0.0
    else:
        nmi = normalized_mutual_info_score(reference, predicted, average_method="geometric")
    return float(purity), float(min(max(nmi, 0.0), 1.0))


#
# Reports
#
class MetricReport(object):
    """Metrics of one evaluation run, None where not computed."""

    FIELDS = (
        "bitrate",
        "abx_error",
        "purity",
        "nmi",
        "symbol_count",
        "duration_s",
        "inventory_size",
    )
    UNIT_RANGE = ("abx_error", "purity", "nmi")

    def __init__(self, **values):
        super(MetricReport, self).__init__()
        unknown = set(values) - set(self.FIELDS)
        if unknown:
            raise ConfigError("Unknown metrics: {0}".format(", ".join(sorted(unknown))))
        for name in self.FIELDS:
            setattr(self, name, values.get(name))
        self.validate()

    def validate(self):
        for name in self.FIELDS:
            value = getattr(self, name)
            if value is None:
                continue
            if not math.isfinite(value) or value < 0:
                msg = "Metric {0} is not a finite non-negative value: {1}"
                raise ConfigError(msg.format(name, value))
            if name in self.UNIT_RANGE and value > 1:
                raise ConfigError("Metric {0} above 1: {1}".format(name, value))

    def to_dict(self):
        data = OrderedDict((name, getattr(self, name)) for name in self.FIELDS)
        data["conventions"] = CONVENTIONS
        return data

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def csv_header(self):
        return ",".join(self.FIELDS)

    def to_csv(self):
        """Values as one CSV line, empty where not computed."""
        buff = io.StringIO()
        row = ["" if getattr(self, n) is None else repr(getattr(self, n)) for n in self.FIELDS]
        csv.writer(buff, lineterminator="").writerow(row)
        return buff.getvalue()

    def __repr__(self):
        return "<MetricReport {0}>".format(self.to_csv())
