# encoding: utf-8
import json
import logging
import os
import platform
from collections import OrderedDict

import numpy as np
from textgrid import TextGrid

from pyaud.errors import ConfigError, EmptyCorpus, NotFound
from pyaud.frontend.matrixio import write_csv
from pyaud.frontend.wavio import read_wav
from pyaud.graph import cluster_segments, write_dot
from pyaud.hmm.inventoryio import alignment_tiers, save_inventory, write_alignments_jsonl
from pyaud.pipeline.codec import (
    Transcription,
    build_exemplar_store,
    encode,
    silence_mask,
)
from pyaud.pipeline.config import PipelineConfig
from pyaud.pipeline.merge import merge_units
from pyaud.pipeline.stages import (
    decode_corpus,
    inter_segment_chunks,
    prepare_utterance,
    stage1_train,
    stage2_train,
)
from pyaud.segmenter import segments_tier, write_segments_jsonl

__all__ = ["PRESETS", "PipelineRunner", "package_versions"]

logger = logging.getLogger(__name__)


#
# Presets
#
PRESETS = OrderedDict(
    [
        ("system1", ("discover", "train_stage2")),
        ("system2", ("discover", "train_stage2", "merge", "retrain_merged")),
    ]
)


def package_versions():
    import scipy
    import sklearn

    import pyaud

    return OrderedDict(
        [
            ("pyaud", pyaud.__version__),
            ("numpy", np.__version__),
            ("scipy", scipy.__version__),
            ("scikit-learn", sklearn.__version__),
            ("python", platform.python_version()),
        ]
    )


#
# Runner class
#
class PipelineRunner(object):
    """Runs the discovery pipeline over a corpus.

    Utterances are added from a manifest or one by one, then the steps
    (discover, train_stage2, merge, retrain_merged) run in order. Each
    step keeps its result on the runner; ``save`` writes them all.
    """

    def __init__(self, cfg=None):
        super(PipelineRunner, self).__init__()
        self.cfg = cfg if cfg is not None else PipelineConfig()
        self.rng = np.random.default_rng(self.cfg.seed)
        self.utterances = OrderedDict()
        self.segments = []
        self.distances = None
        self.graph = None
        self.clustering = None
        self.inventory = None
        self.label_map = None
        self.alignments = None
        self.trajectories = OrderedDict()

    def add_waveform(self, utterance_id, waveform):
        utt = prepare_utterance(utterance_id, waveform, self.cfg)
        self.utterances[utterance_id] = utt
        logger.debug("Added %r", utt)
        return utt

    def add_from_manifest(self, manifest, splits=("train_unit",)):
        entries = manifest.by_split(*splits) if splits else list(manifest)
        for entry in entries:
            self.add_waveform(entry.utterance_id, read_wav(entry.path))
        logger.info("%d utterances loaded.", len(entries))

    def get_utterance(self, utterance_id):
        try:
            return self.utterances[utterance_id]
        except KeyError:
            raise NotFound("Utterance {0} not loaded.".format(utterance_id))

    def _require_corpus(self):
        if not self.utterances:
            raise EmptyCorpus("No utterances loaded.")

    def _require_inventory(self):
        if self.inventory is None:
            raise ConfigError("No inventory: run discover or load one first.")

    def segment_names(self):
        shift = self.cfg.frontend.frame_shift
        return [
            "{0}@{1:.3f}".format(s.utterance_id, s.start_frame * shift) for s in self.segments
        ]

    def _segment_features(self):
        seg_feats = []
        for utt in self.utterances.values():
            seg_feats.extend(utt.segment_features())
        return seg_feats

    def _silence_chunks(self):
        chunks = []
        for utt in self.utterances.values():
            chunks.extend(inter_segment_chunks(utt))
        return chunks

    def _record(self, key):
        self.trajectories[key] = self.inventory.meta.get(key.split(":")[0] + "_iterations", [])

    def discover(self):
        """Segment, cluster and train the stage 1 inventory."""
        self._require_corpus()
        self.segments = [s for u in self.utterances.values() for s in u.segments]
        if not self.segments:
            raise EmptyCorpus("The segmenter found no syllable in the corpus.")
        seg_feats = self._segment_features()
        self.distances, self.graph, self.clustering = cluster_segments(
            seg_feats, self.cfg.cluster, self.cfg.training.n_jobs
        )
        self.inventory = stage1_train(
            self.clustering, seg_feats, self.cfg, self._silence_chunks()
        )
        self.label_map = None
        self._record("stage1")
        return self.inventory

    def train_stage2(self):
        self._require_corpus()
        self._require_inventory()
        features = [u.features for u in self.utterances.values()]
        self.inventory = stage2_train(self.inventory, features, self.cfg)
        self._record("stage2")
        self.alignments = None
        return self.inventory

    def merge(self, target=None):
        self._require_inventory()
        target = self.cfg.training.merge_target if target is None else target
        self.inventory, self.label_map = merge_units(self.inventory, target, self.cfg)
        self.alignments = None
        return self.inventory, self.label_map

    def retrain_merged(self):
        """Repeat both training stages with merged labels."""
        self._require_corpus()
        self._require_inventory()
        if self.label_map is None or self.clustering is None:
            raise ConfigError("retrain_merged needs discover and merge first.")
        self.inventory = stage1_train(
            self.clustering,
            self._segment_features(),
            self.cfg,
            self._silence_chunks(),
            inventory=self.inventory,
            label_map=self.label_map,
        )
        self._record("stage1:merged")
        features = [u.features for u in self.utterances.values()]
        self.inventory = stage2_train(self.inventory, features, self.cfg)
        self._record("stage2:merged")
        self.alignments = None
        return self.inventory

    def run_preset(self, name):
        try:
            steps = PRESETS[name]
        except KeyError:
            msg = "Unknown preset {0!r}, expected one of {1}."
            raise ConfigError(msg.format(name, ", ".join(PRESETS)))
        logger.info("Running preset %s: %s", name, " -> ".join(steps))
        for step in steps:
            getattr(self, step)()
        return self.inventory

    def silence_masks(self):
        margin = self.cfg.segmenter.silence_margin
        return [silence_mask(u.energy, margin) for u in self.utterances.values()]

    def decode(self):
        """Decode every loaded utterance with the current inventory."""
        self._require_corpus()
        self._require_inventory()
        features = [u.features for u in self.utterances.values()]
        masks = self.silence_masks() if self.inventory.silence_label else None
        self.alignments = decode_corpus(self.inventory, features, self.cfg, masks)
        return self.alignments

    def transcriptions(self):
        alignments = self.alignments if self.alignments is not None else self.decode()
        shift = self.cfg.frontend.frame_shift
        return [
            Transcription.from_alignment(a, shift, utt_id)
            for utt_id, a in zip(self.utterances, alignments)
        ]

    def build_exemplars(self):
        alignments = self.alignments if self.alignments is not None else self.decode()
        utts = list(self.utterances.values())
        return build_exemplar_store(
            self.inventory,
            alignments,
            [u.waveform for u in utts],
            [u.features for u in utts],
            self.cfg,
            self.rng,
        )

    def encode(self, waveform, utterance_id=""):
        self._require_inventory()
        return encode(self.inventory, waveform, self.cfg, utterance_id)

    def metadata(self, command):
        meta = OrderedDict()
        meta["command"] = command
        meta["config_hash"] = self.cfg.config_hash()
        meta["seed"] = self.cfg.seed
        meta["versions"] = package_versions()
        meta["utterances"] = len(self.utterances)
        meta["segments"] = len(self.segments)
        if self.clustering is not None:
            meta["clusters"] = len(self.clustering)
        meta["trajectories"] = self.trajectories
        if self.inventory is not None:
            meta["inventory_size"] = len(self.inventory.labels())
        return meta

    def textgrid(self, utterance_id):
        """Segment tier, plus unit and state tiers once decoded."""
        utt = self.get_utterance(utterance_id)
        shift = self.cfg.frontend.frame_shift
        max_time = len(utt.features) * shift
        grid = TextGrid(utterance_id, 0.0, max_time)
        grid.append(segments_tier(utt.segments, shift, max_time))
        if self.alignments is not None:
            index = list(self.utterances).index(utterance_id)
            for tier in alignment_tiers(self.alignments[index], shift):
                grid.append(tier)
        return grid

    def save(self, outdir, command="run", debug_csv=False):
        """Write every available result to outdir.

        With ``debug_csv`` the distance matrix and the features of every
        utterance are also written as CSV.
        """
        if not os.path.isdir(outdir):
            os.makedirs(outdir)

        def path(*names):
            return os.path.join(outdir, *names)

        if self.segments:
            shift = self.cfg.frontend.frame_shift
            with open(path("segments.jsonl"), "w") as fid:
                write_segments_jsonl(fid, self.segments, shift)
        if self.utterances:
            os.makedirs(path("textgrids"), exist_ok=True)
            for utt_id, utt in self.utterances.items():
                if len(utt.features):
                    self.textgrid(utt_id).write(path("textgrids", utt_id + ".TextGrid"))
        if self.clustering is not None:
            names = self.segment_names()
            with open(path("clustering.json"), "w") as fid:
                self.clustering.save(fid, names)
            with open(path("graph.dot"), "w") as fid:
                write_dot(fid, self.graph, self.clustering, names)
            self.distances.save(path("distances.mat"))
            if debug_csv:
                write_csv(path("distances.csv"), self.distances.d, names)
        if debug_csv and self.utterances:
            os.makedirs(path("features"), exist_ok=True)
            for utt_id, utt in self.utterances.items():
                write_csv(path("features", utt_id + ".csv"), utt.features.frames)
        if self.inventory is not None:
            save_inventory(path("inventory.json"), self.inventory)
        if self.alignments is not None:
            with open(path("alignments.jsonl"), "w") as fid:
                write_alignments_jsonl(fid, zip(self.utterances, self.alignments))
        if self.label_map is not None:
            with open(path("label_map.json"), "w") as fid:
                json.dump(self.label_map, fid, indent=2)
        with open(path("metadata.json"), "w") as fid:
            json.dump(self.metadata(command), fid, indent=2)
        logger.info("Results written to %s", outdir)
