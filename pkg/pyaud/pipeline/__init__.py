# encoding: utf-8
from pyaud.pipeline.codec import (
    ExemplarStore,
    Transcription,
    build_exemplar_store,
    decode_exemplar,
    encode,
)
from pyaud.pipeline.config import HmmConfig, PipelineConfig, TrainingConfig
from pyaud.pipeline.manifest import CorpusManifest
from pyaud.pipeline.merge import merge_units
from pyaud.pipeline.runner import PRESETS, PipelineRunner
from pyaud.pipeline.stages import stage1_train, stage2_train

__all__ = [
    "PipelineConfig",
    "HmmConfig",
    "TrainingConfig",
    "CorpusManifest",
    "PipelineRunner",
    "PRESETS",
    "stage1_train",
    "stage2_train",
    "merge_units",
    "encode",
    "Transcription",
    "ExemplarStore",
    "build_exemplar_store",
    "decode_exemplar",
]
