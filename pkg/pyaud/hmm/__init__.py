# encoding: utf-8
from pyaud.hmm.gmm import GaussianMixture, log_emission, variance_floor_for
from pyaud.hmm.inventoryio import load_inventory, save_inventory
from pyaud.hmm.reestimate import mixup, reestimate, total_log_likelihood
from pyaud.hmm.unit import (
    SILENCE_LABEL,
    HmmUnit,
    UnitInventory,
    flat_start_silence,
    flat_start_unit,
    unit_label,
)
from pyaud.hmm.viterbi import (
    Alignment,
    UnitLoopGrammar,
    score_alignment,
    viterbi_align,
    viterbi_decode,
)

__all__ = [
    "GaussianMixture",
    "HmmUnit",
    "UnitInventory",
    "Alignment",
    "UnitLoopGrammar",
    "SILENCE_LABEL",
    "log_emission",
    "variance_floor_for",
    "unit_label",
    "flat_start_unit",
    "flat_start_silence",
    "viterbi_align",
    "viterbi_decode",
    "score_alignment",
    "reestimate",
    "mixup",
    "total_log_likelihood",
    "save_inventory",
    "load_inventory",
]
