# encoding: utf-8
import os
import sys
import shutil
import tempfile
import unittest

import numpy as np
import scipy.io.wavfile
from scipy.signal import find_peaks

pyaud_basedir = os.path.abspath(os.path.dirname(os.path.dirname(os.path.realpath(__file__))))
if pyaud_basedir not in sys.path:
    sys.path.insert(0, pyaud_basedir)

import support  # noqa: F401
from pyaud.errors import ConfigError, CorruptFile, NotFound, OutOfRange, TooShort, UnsupportedFormat
from pyaud.frontend import (
    FeatureSequence,
    FrontendConfig,
    Waveform,
    compute_energy_contour,
    compute_mfcc,
    frame_geometry,
    load_features,
    raw_log_energy,
    read_matrix,
    read_wav,
    save_features,
    write_matrix,
    write_wav,
)


class TestFrameGeometry(unittest.TestCase):
    def test_16khz(self):
        self.assertEqual(frame_geometry(16000, FrontendConfig()), (400, 160))

    def test_one_second(self):
        w = Waveform(np.random.default_rng(0).normal(0, 0.1, 16000), 16000)
        f = compute_mfcc(w, FrontendConfig())
        self.assertEqual(len(f), 98)
        self.assertEqual(f.dim, 26)
        self.assertEqual(len(compute_energy_contour(w, FrontendConfig())), 98)

    def test_too_short(self):
        w = Waveform(np.zeros(100), 16000)
        self.assertRaises(TooShort, compute_mfcc, w, FrontendConfig())

    def test_rate_mismatch(self):
        w = Waveform(np.zeros(16000), 16000)
        cfg = FrontendConfig(sample_rate=8000)
        self.assertRaises(ConfigError, compute_mfcc, w, cfg)

    def test_invalid_config(self):
        self.assertRaises(ConfigError, FrontendConfig, frame_shift=0.05)
        self.assertRaises(ConfigError, FrontendConfig, n_cepstra=50)


class TestMfcc(unittest.TestCase):
    def setUp(self):
        rng = np.random.default_rng(1)
        t = np.arange(16000) / 16000.0
        samples = 0.3 * np.sin(2 * np.pi * 440 * t) * np.hanning(16000)
        self.w = Waveform(samples + rng.normal(0, 0.01, 16000), 16000)

    def test_cmvn_mean(self):
        f = compute_mfcc(self.w, FrontendConfig())
        np.testing.assert_allclose(f.frames.mean(axis=0), 0.0, atol=1e-9)

    def test_cmvn_variance(self):
        f = compute_mfcc(self.w, FrontendConfig(cmvn_variance=True))
        np.testing.assert_allclose(f.frames.std(axis=0), 1.0, atol=1e-6)

    def test_no_deltas(self):
        cfg = FrontendConfig(use_deltas=False, cmvn=False)
        f = compute_mfcc(self.w, cfg)
        self.assertEqual(f.dim, 13)
        self.assertEqual(cfg.feature_dim, 13)

    def test_digital_silence_is_finite(self):
        f = compute_mfcc(Waveform(np.zeros(8000), 16000), FrontendConfig())
        self.assertTrue(np.all(np.isfinite(f.frames)))

    def test_gain_invariance(self):
        f = compute_mfcc(self.w, FrontendConfig())
        for gain in (0.25, 2.0):
            scaled = compute_mfcc(Waveform(gain * self.w.samples, 16000), FrontendConfig())
            np.testing.assert_allclose(scaled.frames[:, 1:], f.frames[:, 1:], atol=1e-6)

    def test_raw_energy_shift(self):
        e = raw_log_energy(self.w, FrontendConfig())
        for gain in (0.25, 2.0):
            scaled = raw_log_energy(Waveform(gain * self.w.samples, 16000), FrontendConfig())
            np.testing.assert_allclose(scaled - e, 20.0 * np.log10(gain), atol=1e-9)

    def test_deterministic(self):
        a = compute_mfcc(self.w, FrontendConfig())
        b = compute_mfcc(Waveform(self.w.samples.copy(), 16000), FrontendConfig())
        self.assertEqual(a.frames.tobytes(), b.frames.tobytes())

    def test_slice(self):
        f = compute_mfcc(self.w, FrontendConfig())
        self.assertEqual(len(f.slice(5, 10)), 5)
        self.assertRaises(OutOfRange, f.slice, 5, len(f) + 1)


class TestEnergyContour(unittest.TestCase):
    def test_digital_silence(self):
        e = compute_energy_contour(Waveform(np.zeros(16000), 16000), FrontendConfig())
        self.assertTrue(np.all(e.values == -60.0))
        raw = raw_log_energy(Waveform(np.zeros(16000), 16000), FrontendConfig())
        self.assertTrue(np.all(np.isneginf(raw)))

    def test_tone_burst_single_peak(self):
        sr = 16000
        samples = np.zeros(sr)
        n = int(0.3 * sr)
        t = np.arange(n) / float(sr)
        samples[5000:5000 + n] = 0.5 * np.sin(2 * np.pi * 1000 * t) * np.hanning(n)
        e = compute_energy_contour(Waveform(samples, sr), FrontendConfig())
        peaks, _ = find_peaks(e.values, prominence=3.0)
        self.assertEqual(len(peaks), 1)
        self.assertGreaterEqual(e.values.min(), -60.0)

    def test_modulated_noise_four_peaks(self):
        sr = 16000
        rng = np.random.default_rng(2)
        t = np.arange(sr) / float(sr)
        samples = np.abs(np.sin(2 * np.pi * 2 * t)) * rng.normal(0, 0.3, sr)
        e = compute_energy_contour(Waveform(samples, sr), FrontendConfig())
        peaks, _ = find_peaks(e.values, prominence=3.0)
        self.assertEqual(len(peaks), 4)
        self.assertTrue(np.all(e.values[peaks] > e.floor + 6.0))

    def test_shifted(self):
        e = compute_energy_contour(Waveform(np.zeros(1600), 16000), FrontendConfig())
        s = e.shifted(12.0)
        self.assertEqual(s.floor, -48.0)
        np.testing.assert_allclose(s.values, e.values + 12.0)


class TestWavIO(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def path(self, name):
        return os.path.join(self.tmpdir, name)

    def test_write_read(self):
        samples = np.linspace(-0.5, 0.5, 1000)
        write_wav(self.path("a.wav"), Waveform(samples, 16000))
        w = read_wav(self.path("a.wav"))
        self.assertEqual(w.sample_rate, 16000)
        self.assertEqual(len(w), 1000)
        np.testing.assert_allclose(w.samples, samples, atol=1.0 / 16000)

    def test_float32(self):
        samples = np.linspace(-0.5, 0.5, 400).astype(np.float32)
        scipy.io.wavfile.write(self.path("f.wav"), 8000, samples)
        w = read_wav(self.path("f.wav"))
        np.testing.assert_allclose(w.samples, samples, atol=1e-7)

    def test_stereo(self):
        data = np.zeros((1000, 2), dtype=np.int16)
        scipy.io.wavfile.write(self.path("s.wav"), 16000, data)
        self.assertRaises(UnsupportedFormat, read_wav, self.path("s.wav"))

    def test_8bit(self):
        data = np.full(1000, 128, dtype=np.uint8)
        scipy.io.wavfile.write(self.path("u8.wav"), 16000, data)
        self.assertRaises(UnsupportedFormat, read_wav, self.path("u8.wav"))

    def test_truncated(self):
        write_wav(self.path("t.wav"), Waveform(np.zeros(2000), 16000))
        with open(self.path("t.wav"), "rb") as fid:
            data = fid.read()
        with open(self.path("t.wav"), "wb") as fid:
            fid.write(data[:-100])
        self.assertRaises(CorruptFile, read_wav, self.path("t.wav"))

    def test_not_riff(self):
        with open(self.path("x.wav"), "w") as fid:
            fid.write("this is not audio at all")
        self.assertRaises(UnsupportedFormat, read_wav, self.path("x.wav"))

    def test_missing(self):
        self.assertRaises(NotFound, read_wav, self.path("missing.wav"))

    def test_waveform_checks(self):
        self.assertRaises(UnsupportedFormat, Waveform, np.zeros((10, 2)), 16000)
        self.assertRaises(ConfigError, Waveform, np.zeros(10), 0)
        self.assertRaises(ConfigError, Waveform, [0.0, np.nan], 16000)

    def test_waveform_slice(self):
        w = Waveform(np.arange(10.0) / 10.0, 10)
        self.assertEqual(len(w.slice(2, 5)), 3)
        self.assertEqual(len(w.slice(8, 50)), 2)
        self.assertEqual(w.duration, 1.0)


class TestMatrixIO(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def test_features(self):
        path = os.path.join(self.tmpdir, "f.mat")
        f = FeatureSequence(np.arange(12.0).reshape(4, 3), 0.01, 0.025)
        save_features(path, f)
        g = load_features(path)
        np.testing.assert_array_equal(g.frames, f.frames)
        self.assertEqual(g.frame_shift, 0.01)

    def test_bad_magic(self):
        path = os.path.join(self.tmpdir, "bad.mat")
        with open(path, "wb") as fid:
            fid.write(b"NOTAMATRIX" + b"\0" * 40)
        self.assertRaises(UnsupportedFormat, read_matrix, path)

    def test_truncated(self):
        path = os.path.join(self.tmpdir, "t.mat")
        write_matrix(path, np.ones((5, 2)))
        with open(path, "rb") as fid:
            data = fid.read()
        with open(path, "wb") as fid:
            fid.write(data[:-8])
        self.assertRaises(CorruptFile, read_matrix, path)

    def test_missing(self):
        self.assertRaises(NotFound, read_matrix, os.path.join(self.tmpdir, "nope.mat"))


if __name__ == "__main__":
    unittest.main()
