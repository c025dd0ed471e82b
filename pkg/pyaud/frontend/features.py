# encoding: utf-8
import logging

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.fftpack import dct
from scipy.ndimage import uniform_filter1d
from scipy.signal import get_window

from pyaud.errors import ConfigError, OutOfRange, TooShort
from pyaud.section import ConfigSection

__all__ = [
    "FrontendConfig",
    "FeatureSequence",
    "EnergyContour",
    "frame_geometry",
    "frame_count",
    "mel_filterbank",
    "compute_deltas",
    "compute_mfcc",
    "raw_log_energy",
    "compute_energy_contour",
]

logger = logging.getLogger(__name__)


class FrontendConfig(ConfigSection):
    name = "frontend"
    defaults = {
        "frame_len": 0.025,
        "frame_shift": 0.010,
        "n_mels": 40,
        "n_cepstra": 13,
        "fmin": 0.0,
        "fmax": 0.0,
        "preemphasis": 0.97,
        "window": "hann",
        "use_deltas": True,
        "delta_window": 2,
        "cmvn": True,
        "cmvn_variance": False,
        "energy_smooth_win": 0.050,
        "energy_floor": -60.0,
        "sample_rate": 0,
    }

    def validate(self):
        if not 0 < self.frame_shift <= self.frame_len:
            raise ConfigError("Expected 0 < frame_shift <= frame_len.")
        if not 0 < self.n_cepstra <= self.n_mels:
            raise ConfigError("Expected 0 < n_cepstra <= n_mels.")
        if not 0.0 <= self.preemphasis < 1.0:
            raise ConfigError("preemphasis must be in [0, 1).")
        if self.delta_window < 1:
            raise ConfigError("delta_window must be positive.")
        if self.energy_smooth_win < 0:
            raise ConfigError("energy_smooth_win must not be negative.")
        if self.sample_rate < 0:
            raise ConfigError("sample_rate must not be negative.")

    @property
    def feature_dim(self):
        return self.n_cepstra * (2 if self.use_deltas else 1)


class FeatureSequence(object):
    """T x D matrix of feature frames on a regular frame grid."""

    def __init__(self, frames, frame_shift, frame_len):
        super(FeatureSequence, self).__init__()
        frames = np.asarray(frames, dtype=np.float64)
        if frames.ndim == 1:
            frames = frames.reshape(-1, 1)
        if frames.ndim != 2:
            raise ConfigError("Feature frames must be a T x D matrix.")
        if not np.all(np.isfinite(frames)):
            raise ConfigError("Feature frames must be finite.")
        self.frames = frames
        self.frame_shift = float(frame_shift)
        self.frame_len = float(frame_len)

    def __len__(self):
        return self.frames.shape[0]

    @property
    def dim(self):
        return self.frames.shape[1]

    @property
    def duration(self):
        return len(self) * self.frame_shift

    def slice(self, start, end):
        if start < 0 or end > len(self) or start > end:
            msg = "Span [{0}, {1}) outside of [0, {2})"
            raise OutOfRange(msg.format(start, end, len(self)))
        return FeatureSequence(
            self.frames[start:end].copy(), self.frame_shift, self.frame_len
        )

    def __repr__(self):
        tpl = "<FeatureSequence T: {0} D: {1}>"
        return tpl.format(len(self), self.dim)


class EnergyContour(object):
    """Smoothed per-frame log energy in dB, never below ``floor``."""

    def __init__(self, values, frame_shift, floor):
        super(EnergyContour, self).__init__()
        self.values = np.asarray(values, dtype=np.float64)
        self.frame_shift = float(frame_shift)
        self.floor = float(floor)

    def __len__(self):
        return len(self.values)

    def shifted(self, offset):
        """Same contour with values and floor moved by offset dB."""
        return EnergyContour(
            self.values + offset, self.frame_shift, self.floor + offset
        )

    def __repr__(self):
        return "<EnergyContour T: {0}>".format(len(self))


def frame_geometry(sample_rate, cfg):
    """Frame length and shift in samples."""
    flen = int(round(cfg.frame_len * sample_rate))
    fshift = int(round(cfg.frame_shift * sample_rate))
    if fshift < 1 or flen < fshift:
        raise ConfigError("Frame geometry too small for {0} Hz.".format(sample_rate))
    return flen, fshift


def frame_count(nsamples, flen, fshift):
    if nsamples < flen:
        return 0
    return (nsamples - flen) // fshift + 1


def _frames(samples, flen, fshift):
    nframes = frame_count(len(samples), flen, fshift)
    if nframes == 0:
        msg = "Need at least {0} samples for one frame, got {1}."
        raise TooShort(msg.format(flen, len(samples)))
    return sliding_window_view(samples, flen)[::fshift][:nframes]


def _check_rate(w, cfg):
    if cfg.sample_rate and w.sample_rate != cfg.sample_rate:
        msg = "Sample rate {0} Hz does not match configured {1} Hz."
        raise ConfigError(msg.format(w.sample_rate, cfg.sample_rate))


def _hz_to_mel(hz):
    return 2595.0 * np.log10(1.0 + np.asarray(hz) / 700.0)


def _mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel) / 2595.0) - 1.0)


def mel_filterbank(n_mels, nfft, sample_rate, fmin=0.0, fmax=0.0):
    """Triangular filters on the rfft bins, shape (n_mels, nfft // 2 + 1)."""
    fmax = fmax or sample_rate / 2.0
    edges = _mel_to_hz(np.linspace(_hz_to_mel(fmin), _hz_to_mel(fmax), n_mels + 2))
    freqs = np.arange(nfft // 2 + 1) * sample_rate / float(nfft)
    lower = edges[:-2, None]
    center = edges[1:-1, None]
    upper = edges[2:, None]
    rising = (freqs[None, :] - lower) / (center - lower)
    falling = (upper - freqs[None, :]) / (upper - center)
    return np.maximum(0.0, np.minimum(rising, falling))


def compute_deltas(feats, window=2):
    """Regression deltas over +/- window frames with edge replication."""
    if len(feats) == 0:
        return feats.copy()
    denom = 2.0 * sum(n * n for n in range(1, window + 1))
    padded = np.pad(feats, ((window, window), (0, 0)), mode="edge")
    nframes = len(feats)
    deltas = np.zeros_like(feats)
    for n in range(1, window + 1):
        ahead = padded[window + n:window + n + nframes]
        behind = padded[window - n:window - n + nframes]
        deltas += n * (ahead - behind)
    return deltas / denom


def _normalize(feats, variance):
    normed = feats - feats.mean(axis=0)
    if variance and len(feats) > 1:
        std = normed.std(axis=0)
        # constant dimensions stay at zero
        std[std == 0.0] = 1.0
        normed = normed / std
    return normed


def compute_mfcc(w, cfg):
    _check_rate(w, cfg)
    flen, fshift = frame_geometry(w.sample_rate, cfg)
    x = w.samples
    emphasized = np.append(x[:1], x[1:] - cfg.preemphasis * x[:-1])
    frames = _frames(emphasized, flen, fshift) * get_window(cfg.window, flen)

    nfft = 1 << (flen - 1).bit_length()
    power = np.square(np.abs(np.fft.rfft(frames, nfft))) / nfft
    fbank = mel_filterbank(cfg.n_mels, nfft, w.sample_rate, cfg.fmin, cfg.fmax)
    melspec = np.maximum(power @ fbank.T, np.finfo(np.float64).eps)
    cepstra = dct(np.log(melspec), type=2, axis=1, norm="ortho")[:, : cfg.n_cepstra]

    feats = cepstra
    if cfg.use_deltas:
        feats = np.hstack([cepstra, compute_deltas(cepstra, cfg.delta_window)])
    if cfg.cmvn:
        feats = _normalize(feats, cfg.cmvn_variance)
    logger.debug("MFCC: %d frames x %d dims.", feats.shape[0], feats.shape[1])
    return FeatureSequence(feats, cfg.frame_shift, cfg.frame_len)


def raw_log_energy(w, cfg):
    """Per-frame mean-square energy in dB, -inf for digital silence."""
    _check_rate(w, cfg)
    flen, fshift = frame_geometry(w.sample_rate, cfg)
    frames = _frames(w.samples, flen, fshift)
    meansq = np.mean(np.square(frames), axis=1)
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(meansq)


def smoothing_frames(cfg):
    """Odd moving average length in frames."""
    nframes = max(1, int(round(cfg.energy_smooth_win / cfg.frame_shift)))
    if nframes % 2 == 0:
        nframes += 1
    return nframes


def compute_energy_contour(w, cfg):
    floored = np.maximum(raw_log_energy(w, cfg), cfg.energy_floor)
    smoothed = uniform_filter1d(floored, size=smoothing_frames(cfg), mode="nearest")
    values = np.maximum(smoothed, cfg.energy_floor)
    return EnergyContour(values, cfg.frame_shift, cfg.energy_floor)
