# encoding: utf-8
import os
import sys
import unittest

import numpy as np

pyaud_basedir = os.path.abspath(os.path.dirname(os.path.dirname(os.path.realpath(__file__))))
if pyaud_basedir not in sys.path:
    sys.path.insert(0, pyaud_basedir)

import support
from pyaud.errors import ConfigError, EmptyCorpus, NoUsableClusters
from pyaud.evaluation import bitrate, cluster_quality, edit_distance
from pyaud.graph import Clustering
from pyaud.hmm.unit import SILENCE, SILENCE_LABEL, UnitInventory
from pyaud.hmm.viterbi import UnitLoopGrammar
from pyaud.pipeline.config import PipelineConfig
from pyaud.pipeline.merge import merge_units
from pyaud.pipeline.stages import (
    decode_corpus,
    decode_utterance,
    inter_segment_chunks,
    prepare_utterance,
    stage1_train,
    stage2_train,
    usable_clusters,
)


def check_trajectory(test, history):
    for step in history:
        slack = 1e-9 * abs(step["ll"])
        test.assertGreaterEqual(step["ll_reestimated"], step["ll"] - slack)
    for prev, step in zip(history[:-1], history[1:]):
        slack = 1e-9 * abs(prev["ll_reestimated"])
        test.assertGreaterEqual(step["ll"], prev["ll_reestimated"] - slack)


class TestStage1(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.cfg = PipelineConfig()
        cls.segments, cls.templates = support.cvc_corpus()
        cls.clusters = Clustering(cls.templates)
        cls.chunks = support.silence_chunks()
        cls.inv = stage1_train(cls.clusters, cls.segments, cls.cfg, cls.chunks)

    def test_labels(self):
        expected = []
        for i in range(3):
            expected.extend(["OS_%d" % i, "RH_%d" % i, "OF_%d" % i])
        self.assertEqual(self.inv.labels(), expected + [SILENCE_LABEL])
        self.assertEqual(self.inv.meta["stage"], "stage1")
        self.assertEqual(self.inv.meta["frontend"], self.cfg.frontend.to_strings())

    def test_trajectory(self):
        history = self.inv.meta["stage1_iterations"]
        self.assertLess(len(history), self.cfg.training.stage1_max_iter)
        check_trajectory(self, history)

    def test_rhyme_means(self):
        for template, (_, rhyme, _) in enumerate(support.TEMPLATES):
            for g in self.inv["RH_%d" % template].states:
                np.testing.assert_allclose(g.means[0], rhyme, atol=0.3)

    def test_usable_clusters(self):
        segments = list(self.segments) + [np.zeros((8, 2))]
        clusters = Clustering(self.templates + [0])
        usable = usable_clusters(clusters, segments, self.cfg)
        self.assertEqual([cid for cid, _ in usable], [0, 1, 2])
        # the 8 frame segment is too short for three regions of three states
        self.assertNotIn(len(segments) - 1, usable[0][1])

    def test_no_usable_clusters(self):
        cfg = self.cfg.replace(**{"cluster.min_cluster_size": 100})
        self.assertRaises(NoUsableClusters, stage1_train, self.clusters, self.segments, cfg)

    def test_deterministic(self):
        again = stage1_train(self.clusters, self.segments, self.cfg, self.chunks)
        for a, b in zip(self.inv, again):
            self.assertEqual(a.states, b.states)
            np.testing.assert_array_equal(a.transitions, b.transitions)


class TestStage2(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.cfg = PipelineConfig()
        segments, templates = support.cvc_corpus()
        cls.segments = segments
        cls.clusters = Clustering(templates)
        cls.chunks = support.silence_chunks()
        cls.stage1 = stage1_train(cls.clusters, segments, cls.cfg, cls.chunks)
        cls.utterances, cls.references, cls.rhymes = support.continuous_utterances()
        cls.inv = stage2_train(cls.stage1, cls.utterances, cls.cfg)
        cls.alignments = decode_corpus(cls.inv, cls.utterances, cls.cfg)

    def test_trajectory(self):
        self.assertEqual(self.inv.meta["stage"], "stage2")
        history = self.inv.meta["stage2_iterations"]
        self.assertTrue(1 <= len(history) <= self.cfg.training.stage2_max_iter)
        check_trajectory(self, history)
        # stage 1 history is kept
        self.assertIn("stage1_iterations", self.inv.meta)

    def test_token_accuracy(self):
        errors = sum(
            edit_distance(a.labels(), ref) for a, ref in zip(self.alignments, self.references)
        )
        total = sum(len(ref) for ref in self.references)
        self.assertGreaterEqual(1.0 - errors / float(total), 0.9)

    def test_rhyme_identity(self):
        predicted = []
        reference = []
        for a, middles in zip(self.alignments, self.rhymes):
            tokens = a.unit_tokens()
            for template, frame in middles:
                token = [t for t in tokens if t.start <= frame < t.end][0]
                predicted.append(token.label)
                reference.append(template)
        _, nmi = cluster_quality(predicted, reference)
        self.assertGreaterEqual(nmi, 0.8)

    def test_alignments_tile(self):
        for a, f in zip(self.alignments, self.utterances):
            self.assertEqual(a.n_frames, len(f))

    def test_single_iteration(self):
        cfg = self.cfg.replace(**{"training.rel_ll_tol": float("inf")})
        inv = stage2_train(self.stage1, self.utterances[:3], cfg)
        self.assertEqual(len(inv.meta["stage2_iterations"]), 1)

    def test_errors(self):
        self.assertRaises(EmptyCorpus, stage2_train, self.stage1, [], self.cfg)
        untrained = support.two_unit_inventory()
        self.assertRaises(ConfigError, stage2_train, untrained, self.utterances, self.cfg)

    def test_silence_masks(self):
        masks = [np.zeros(len(f), dtype=bool) for f in self.utterances[:2]]
        masks[0][:8] = True
        alignments = decode_corpus(self.inv, self.utterances[:2], self.cfg, masks)
        path = alignments[0].state_path()
        self.assertTrue(all(label == SILENCE_LABEL for label, _ in path[:8]))

    def test_merged_retraining_lowers_bitrate(self):
        cfg = self.cfg.replace(**{"training.merge_target": 3})
        merged, label_map = merge_units(self.inv, 3, cfg)
        retrained = stage1_train(
            self.clusters, self.segments, cfg, self.chunks, inventory=merged, label_map=label_map
        )
        retrained = stage2_train(retrained, self.utterances, cfg)
        self.assertEqual(len(retrained.labels()), 4)
        duration = sum(len(f) for f in self.utterances) * support.FRAME_SHIFT
        full = bitrate(self.alignments, duration)
        small = bitrate(decode_corpus(retrained, self.utterances, cfg), duration)
        self.assertLess(small, full)


class TestDecodeUtterance(unittest.TestCase):
    def test_gating_fallback(self):
        inv = support.two_unit_inventory()
        silence = support.random_inventory(1, [(SILENCE_LABEL, SILENCE)], n_states=3)
        inv = UnitInventory(list(inv) + list(silence), 1, 1e-3)
        grammar = UnitLoopGrammar(inv.labels())
        frames = np.array([[0.0], [0.1]])
        with self.assertLogs("pyaud.pipeline.stages", "WARNING"):
            a = decode_utterance(inv, frames, grammar, np.array([True, True]))
        self.assertEqual(a.labels(), ["A"])

    def test_mask_without_silence_unit(self):
        inv = support.two_unit_inventory()
        grammar = UnitLoopGrammar(inv.labels())
        a = decode_utterance(inv, np.array([[5.0], [5.0]]), grammar, np.array([True, True]))
        self.assertEqual(a.labels(), ["B"])


class TestPrepareUtterance(unittest.TestCase):
    def test_segments_and_chunks(self):
        cfg = support.audio_config()
        utt = prepare_utterance("u", support.syllable_utterance([0, 1]), cfg)
        self.assertEqual(len(utt.segments), 2)
        self.assertEqual(utt.features.dim, 13)
        covered = sum(s.end_frame - s.start_frame for s in utt.segments)
        chunks = inter_segment_chunks(utt)
        self.assertEqual(covered + sum(len(c) for c in chunks), len(utt.features))
        self.assertEqual(len(chunks), 3)
        self.assertEqual(len(utt.segment_features()), 2)


if __name__ == "__main__":
    unittest.main()
