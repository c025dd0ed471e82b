# encoding: utf-8
"""Synthetic corpora shared by the test cases."""
import os
import sys

import numpy as np

pyaud_basedir = os.path.abspath(os.path.dirname(os.path.dirname(os.path.realpath(__file__))))
if pyaud_basedir not in sys.path:
    sys.path.insert(0, pyaud_basedir)

from pyaud.frontend.features import FeatureSequence  # noqa: E402
from pyaud.frontend.wavio import Waveform, write_wav  # noqa: E402
from pyaud.hmm.gmm import GaussianMixture  # noqa: E402
from pyaud.hmm.unit import (  # noqa: E402
    OFFSET,
    ONSET,
    RHYME,
    SILENCE,
    SILENCE_LABEL,
    HmmUnit,
    UnitInventory,
)

FRAME_SHIFT = 0.010
FRAME_LEN = 0.025

# onset, rhyme and offset means of three well separated templates, D = 2
TEMPLATES = (
    ((4.0, 0.0), (8.0, 8.0), (0.0, 4.0)),
    ((-4.0, 0.0), (-8.0, 8.0), (0.0, -4.0)),
    ((4.0, -4.0), (8.0, -8.0), (-4.0, 4.0)),
)
NOISE = 0.3
ONSET_FRAMES = 5
OFFSET_FRAMES = 5


def cvc_instance(rng, template, rhyme_frames=15):
    onset, rhyme, offset = TEMPLATES[template]
    means = (
        [onset] * ONSET_FRAMES + [rhyme] * rhyme_frames + [offset] * OFFSET_FRAMES
    )
    means = np.array(means, dtype=np.float64)
    return means + NOISE * rng.standard_normal(means.shape)


def cvc_corpus(seed=0, per_template=20):
    """Segment frames interleaved by template, with their template ids."""
    rng = np.random.default_rng(seed)
    segments = []
    labels = []
    for _ in range(per_template):
        for template in range(len(TEMPLATES)):
            segments.append(cvc_instance(rng, template, int(rng.integers(13, 18))))
            labels.append(template)
    return segments, labels


def silence_frames(rng, n_frames, dim=2):
    return NOISE * rng.standard_normal((n_frames, dim))


def silence_chunks(seed=1, n_chunks=20, n_frames=8):
    rng = np.random.default_rng(seed)
    return [silence_frames(rng, n_frames) for _ in range(n_chunks)]


def continuous_utterances(seed=2, n_utterances=10, per_utterance=3, gap=6):
    """Silence separated template instances.

    Returns (list of FeatureSequence, list of reference label lists, list of
    (template, rhyme middle frame) lists).
    """
    rng = np.random.default_rng(seed)
    utterances = []
    references = []
    rhymes = []
    for _ in range(n_utterances):
        parts = [silence_frames(rng, 8)]
        reference = [SILENCE_LABEL]
        middles = []
        cursor = 8
        for k in range(per_utterance):
            template = int(rng.integers(0, len(TEMPLATES)))
            rhyme_frames = int(rng.integers(13, 18))
            parts.append(cvc_instance(rng, template, rhyme_frames))
            reference.extend(["OS_%d" % template, "RH_%d" % template, "OF_%d" % template])
            middles.append((template, cursor + ONSET_FRAMES + rhyme_frames // 2))
            cursor += ONSET_FRAMES + rhyme_frames + OFFSET_FRAMES
            tail = 8 if k == per_utterance - 1 else gap
            parts.append(silence_frames(rng, tail))
            reference.append(SILENCE_LABEL)
            cursor += tail
        utterances.append(FeatureSequence(np.vstack(parts), FRAME_SHIFT, FRAME_LEN))
        references.append(reference)
        rhymes.append(middles)
    return utterances, references, rhymes


def single_state_unit(label, kind, mean, var=1.0, self_loop=0.5):
    mean = np.atleast_1d(np.asarray(mean, dtype=np.float64))
    g = GaussianMixture([1.0], mean[None, :], np.full((1, len(mean)), var))
    return HmmUnit(label, kind, [g], [[self_loop, 1.0 - self_loop]], occupancy=[10])


def two_unit_inventory(mean_a=0.0, mean_b=5.0, self_a=0.5, self_b=0.5):
    """1-D inventory of two single state rhyme units A and B."""
    units = [
        single_state_unit("A", RHYME, [mean_a], self_loop=self_a),
        single_state_unit("B", RHYME, [mean_b], self_loop=self_b),
    ]
    return UnitInventory(units, 1, 1e-3)


def kinds_inventory():
    """1-D single state units, one per kind."""
    units = [
        single_state_unit("OS_0", ONSET, [0.0]),
        single_state_unit("RH_0", RHYME, [3.0]),
        single_state_unit("OF_0", OFFSET, [6.0]),
        single_state_unit(SILENCE_LABEL, SILENCE, [-3.0]),
    ]
    return UnitInventory(units, 1, 1e-3)


def random_inventory(dim, labels_kinds, seed=3, n_states=3):
    rng = np.random.default_rng(seed)
    units = []
    for label, kind in labels_kinds:
        states = [
            GaussianMixture([1.0], rng.normal(0.0, 2.0, (1, dim)), np.ones((1, dim)))
            for _ in range(n_states)
        ]
        units.append(HmmUnit(label, kind, states, occupancy=[10] * n_states))
    return UnitInventory(units, dim, 1e-3)


#
# Audio
#
SAMPLE_RATE = 8000

# (onset Hz, rhyme fundamental Hz, offset Hz)
AUDIO_TEMPLATES = ((3500.0, 300.0, 2200.0), (1200.0, 500.0, 1800.0), (2800.0, 700.0, 3200.0))


def _ramped(x, sr, ramp=0.005):
    n = min(int(ramp * sr), len(x) // 2)
    if n > 0:
        env = np.ones(len(x))
        env[:n] = np.linspace(0.0, 1.0, n)
        env[-n:] = np.linspace(1.0, 0.0, n)
        x = x * env
    return x


def _tone(freq, dur, sr, amp):
    t = np.arange(int(round(dur * sr))) / float(sr)
    return amp * np.sin(2.0 * np.pi * freq * t)


def syllable_samples(template, sr=SAMPLE_RATE):
    """40 ms onset tone, 120 ms harmonic rhyme, 40 ms offset tone."""
    f_on, f0, f_off = AUDIO_TEMPLATES[template]
    onset = _ramped(_tone(f_on, 0.04, sr, 0.15), sr)
    rhyme = sum(_tone(f0 * h, 0.12, sr, 0.3 / h) for h in (1, 2, 3))
    rhyme = _ramped(rhyme, sr)
    offset = _ramped(_tone(f_off, 0.04, sr, 0.15), sr)
    return np.concatenate([onset, rhyme, offset])


def syllable_utterance(templates, sr=SAMPLE_RATE, edge=0.2, gap=0.15):
    """Digital silence around and between the syllables of templates."""
    pieces = [np.zeros(int(edge * sr))]
    for i, template in enumerate(templates):
        if i:
            pieces.append(np.zeros(int(gap * sr)))
        pieces.append(syllable_samples(template, sr))
    pieces.append(np.zeros(int(edge * sr)))
    return Waveform(np.concatenate(pieces), sr)


AUDIO_SEQUENCES = (
    (0, 1, 2, 0),
    (1, 2, 0, 1),
    (2, 0, 1, 2),
    (0, 2, 1, 0),
    (1, 0, 2, 1),
    (2, 1, 0, 2),
)


def write_audio_corpus(dirname, sequences=AUDIO_SEQUENCES):
    """WAV files and a CSV manifest, returns the manifest path."""
    lines = ["utterance_id,path,split"]
    for i, templates in enumerate(sequences):
        name = "utt%02d" % i
        write_wav(os.path.join(dirname, name + ".wav"), syllable_utterance(templates))
        lines.append("{0},{0}.wav,train_unit".format(name))
    path = os.path.join(dirname, "manifest.csv")
    with open(path, "w") as fid:
        fid.write("\n".join(lines) + "\n")
    return path


def audio_config():
    """Config for the audio corpus, small enough for unit tests."""
    from pyaud.pipeline.config import PipelineConfig

    return PipelineConfig().replace(
        **{
            "frontend.cmvn": False,
            "frontend.use_deltas": False,
            "cluster.knn_k": 5,
            "cluster.min_cluster_size": 2,
            "training.stage1_max_iter": 5,
            "training.stage2_max_iter": 3,
            "training.merge_target": 3,
        }
    )
