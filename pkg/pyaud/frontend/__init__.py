# encoding: utf-8
from pyaud.frontend.features import (
    EnergyContour,
    FeatureSequence,
    FrontendConfig,
    compute_energy_contour,
    compute_mfcc,
    frame_geometry,
    raw_log_energy,
)
from pyaud.frontend.matrixio import read_matrix, write_csv, write_matrix
from pyaud.frontend.wavio import Waveform, read_wav, write_wav

__all__ = [
    "Waveform",
    "FrontendConfig",
    "FeatureSequence",
    "EnergyContour",
    "read_wav",
    "write_wav",
    "compute_mfcc",
    "compute_energy_contour",
    "raw_log_energy",
    "frame_geometry",
    "write_matrix",
    "read_matrix",
    "write_csv",
    "save_features",
    "load_features",
]


def save_features(path, features):
    write_matrix(path, features.frames, features.frame_shift)


def load_features(path, frame_len=0.025):
    frames, frame_shift = read_matrix(path)
    return FeatureSequence(frames, frame_shift, frame_len)
