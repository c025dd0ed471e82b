# encoding: utf-8
import json
import os
import shutil
import sys
import tempfile
import unittest

import numpy as np

pyaud_basedir = os.path.abspath(os.path.dirname(os.path.dirname(os.path.realpath(__file__))))
if pyaud_basedir not in sys.path:
    sys.path.insert(0, pyaud_basedir)

import support
from pyaud.errors import CorruptFile, MissingOccurrence, NotFound, UnknownUnit
from pyaud.frontend import FeatureSequence, FrontendConfig, Waveform
from pyaud.hmm.unit import RHYME, SILENCE, SILENCE_LABEL
from pyaud.hmm.viterbi import Alignment
from pyaud.pipeline.codec import (
    ExemplarStore,
    Transcription,
    build_exemplar_store,
    check_frontend,
    decode_exemplar,
    encode,
    load_transcriptions,
    save_transcriptions,
)
from pyaud.pipeline.config import PipelineConfig


class TestTranscription(unittest.TestCase):
    def setUp(self):
        self.t = Transcription([("SIL", 0, 10), ("RH_0", 10, 25), ("SIL", 25, 30)], 0.01, "u1")

    def test_properties(self):
        self.assertEqual(self.t.labels(), ["SIL", "RH_0", "SIL"])
        self.assertEqual(self.t.n_frames, 30)
        self.assertAlmostEqual(self.t.duration, 0.3)
        self.assertEqual(Transcription([], 0.01).n_frames, 0)

    def test_dict(self):
        data = self.t.to_dict()
        self.assertEqual(data["tokens"][1]["start_s"], 0.1)
        self.assertEqual(Transcription.from_dict(data), self.t)

    def test_from_alignment(self):
        a = Alignment([("A", 0, 0, 2), ("A", 1, 2, 4), ("A", 0, 4, 5)], -3.0)
        t = Transcription.from_alignment(a, 0.01)
        self.assertEqual([tuple(k) for k in t.tokens], [("A", 0, 4), ("A", 4, 5)])


class TestTranscriptionFiles(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def test_save_load(self):
        path = os.path.join(self.tmpdir, "t.json")
        ts = [
            Transcription([("RH_0", 0, 5)], 0.01, "a"),
            Transcription([("SIL", 0, 2), ("OS_1", 2, 9)], 0.01, "b"),
        ]
        save_transcriptions(path, ts, {"config_hash": "abc"})
        with open(path) as fid:
            self.assertEqual(json.load(fid)["config_hash"], "abc")
        loaded = load_transcriptions(path)
        self.assertEqual(loaded, ts)
        self.assertEqual([t.utterance_id for t in loaded], ["a", "b"])

    def test_single_document(self):
        path = os.path.join(self.tmpdir, "one.json")
        t = Transcription([("RH_0", 0, 5)], 0.01, "a")
        with open(path, "w") as fid:
            json.dump(t.to_dict(), fid)
        self.assertEqual(load_transcriptions(path), [t])

    def test_errors(self):
        self.assertRaises(NotFound, load_transcriptions, os.path.join(self.tmpdir, "none.json"))
        path = os.path.join(self.tmpdir, "bad.json")
        with open(path, "w") as fid:
            fid.write("{not json")
        self.assertRaises(CorruptFile, load_transcriptions, path)
        with open(path, "w") as fid:
            fid.write('{"something": 1}')
        self.assertRaises(CorruptFile, load_transcriptions, path)


class TestExemplarStore(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def test_register_get(self):
        store = ExemplarStore(16000)
        store.flag_missing("RH_0")
        store.register("RH_0", Waveform(np.zeros(100), 16000))
        self.assertEqual(store.missing, [])
        self.assertEqual(store.labels(), ["RH_0"])
        self.assertRaises(UnknownUnit, store.get, "RH_9")

    def test_rate_mismatch(self):
        store = ExemplarStore(16000)
        self.assertRaises(CorruptFile, store.register, "RH_0", Waveform(np.zeros(10), 8000))

    def test_save_load(self):
        store = ExemplarStore(16000)
        samples = np.linspace(-0.5, 0.5, 320)
        store.register("RH_0", Waveform(samples, 16000))
        store.flag_missing("OS_1")
        store.save(self.tmpdir)
        loaded = ExemplarStore.load(self.tmpdir)
        self.assertEqual(loaded.labels(), ["RH_0"])
        self.assertEqual(loaded.missing, ["OS_1"])
        np.testing.assert_allclose(loaded.get("RH_0").samples, samples, atol=1e-4)

    def test_load_missing_index(self):
        self.assertRaises(NotFound, ExemplarStore.load, self.tmpdir)

    def test_corrupt_index(self):
        with open(os.path.join(self.tmpdir, "exemplars.json"), "w") as fid:
            fid.write("{}")
        self.assertRaises(CorruptFile, ExemplarStore.load, self.tmpdir)
        with open(os.path.join(self.tmpdir, "exemplars.json"), "w") as fid:
            fid.write("{nope")
        self.assertRaises(CorruptFile, ExemplarStore.load, self.tmpdir)


class TestBuildExemplarStore(unittest.TestCase):
    def setUp(self):
        self.cfg = PipelineConfig()
        self.inv = support.kinds_inventory()
        # 1-D features 0, 1, 5 as three one-frame RH_0 occurrences
        self.features = [FeatureSequence(np.array([[0.0], [1.0], [5.0]]), 0.01, 0.025)]
        self.alignments = [Alignment([("RH_0", 0, 0, 1), ("RH_0", 0, 1, 2), ("RH_0", 0, 2, 3)], 0.0)]
        self.waveforms = [Waveform(np.arange(100) / 100.0, 1000)]

    def test_medoid(self):
        store = build_exemplar_store(self.inv, self.alignments, self.waveforms, self.features, self.cfg)
        # frame 1 spans samples [10, 35) at 1 kHz
        np.testing.assert_allclose(store.get("RH_0").samples, np.arange(10, 35) / 100.0)
        self.assertEqual(store.missing, ["OS_0", "OF_0"])
        self.assertNotIn(SILENCE_LABEL, store.labels())

    def test_strict(self):
        self.assertRaises(
            MissingOccurrence,
            build_exemplar_store,
            self.inv,
            self.alignments,
            self.waveforms,
            self.features,
            self.cfg,
            strict=True,
        )

    def test_sampling(self):
        cfg = self.cfg.replace(**{"training.exemplar_sample": 1})
        store = build_exemplar_store(
            self.inv, self.alignments, self.waveforms, self.features, cfg, rng=np.random.default_rng(0)
        )
        self.assertEqual(len(store.get("RH_0")), 25)


class TestDecodeExemplar(unittest.TestCase):
    def setUp(self):
        self.store = ExemplarStore(16000)
        self.store.register("A", Waveform(np.ones(3200), 16000))
        self.store.register("B", Waveform(-np.ones(3200), 16000))

    def test_crossfade(self):
        t = Transcription([("A", 0, 20), ("B", 20, 40)], 0.01)
        w = decode_exemplar(self.store, t, 0.01)
        self.assertEqual(len(w), 6240)
        self.assertEqual(w.samples[0], 1.0)
        self.assertEqual(w.samples[-1], -1.0)
        self.assertTrue(np.all(np.abs(w.samples) <= 1.0))

    def test_silence_tokens(self):
        t = Transcription([("SIL", 0, 5), ("A", 5, 25)], 0.01)
        w = decode_exemplar(self.store, t, 0.0)
        self.assertEqual(len(w), 800 + 3200)
        self.assertTrue(np.all(w.samples[:800] == 0.0))

    def test_empty(self):
        self.assertEqual(len(decode_exemplar(self.store, Transcription([], 0.01), 0.01)), 0)

    def test_unknown(self):
        t = Transcription([("C", 0, 20)], 0.01)
        self.assertRaises(UnknownUnit, decode_exemplar, self.store, t, 0.01)


class TestEncode(unittest.TestCase):
    def test_digital_silence(self):
        cfg = PipelineConfig()
        inv = support.random_inventory(26, [("RH_0", RHYME), (SILENCE_LABEL, SILENCE)])
        w = Waveform(np.zeros(16000), 16000)
        t = encode(inv, w, cfg, "quiet")
        self.assertEqual(set(t.labels()), {SILENCE_LABEL})
        self.assertEqual(t.n_frames, 98)
        self.assertEqual(t.utterance_id, "quiet")
        self.assertEqual(encode(inv, w, cfg, "quiet"), t)

    def test_check_frontend(self):
        inv = support.random_inventory(26, [("RH_0", RHYME), (SILENCE_LABEL, SILENCE)])
        self.assertEqual(check_frontend(inv, FrontendConfig()), [])
        trained = inv.with_units(list(inv), {"frontend": FrontendConfig().to_strings()})
        self.assertEqual(check_frontend(trained, FrontendConfig()), [])
        with self.assertLogs("pyaud.pipeline.codec", "WARNING"):
            changed = check_frontend(trained, FrontendConfig(cmvn=False))
        self.assertEqual(changed, ["cmvn"])


if __name__ == "__main__":
    unittest.main()
