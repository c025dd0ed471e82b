# encoding: utf-8
"""Inventory JSON documents, alignment JSON lines and TextGrid tiers."""
import json
import logging
from collections import OrderedDict

import numpy as np
from textgrid import IntervalTier

from pyaud.errors import CorruptFile, NotFound, UnsupportedFormat
from pyaud.hmm.gmm import GaussianMixture
from pyaud.hmm.unit import HmmUnit, UnitInventory
from pyaud.hmm.viterbi import Alignment

__all__ = [
    "INVENTORY_FORMAT",
    "INVENTORY_VERSION",
    "inventory_to_dict",
    "inventory_from_dict",
    "dumps_inventory",
    "save_inventory",
    "load_inventory",
    "write_alignments_jsonl",
    "read_alignments_jsonl",
    "alignment_tiers",
]

logger = logging.getLogger(__name__)

INVENTORY_FORMAT = "pyaud-inventory"
INVENTORY_VERSION = 1


def inventory_to_dict(inv):
    units = []
    for unit in inv:
        units.append(
            OrderedDict(
                [
                    ("label", unit.label),
                    ("kind", unit.kind),
                    ("transitions", unit.transitions.tolist()),
                    ("occupancy", unit.occupancy.tolist()),
                    ("states", [g.to_dict() for g in unit.states]),
                ]
            )
        )
    return OrderedDict(
        [
            ("format", INVENTORY_FORMAT),
            ("version", INVENTORY_VERSION),
            ("feature_dim", inv.feature_dim),
            ("variance_floor", inv.variance_floor.tolist()),
            ("meta", inv.meta),
            ("units", units),
        ]
    )


def inventory_from_dict(data):
    if data.get("format") != INVENTORY_FORMAT:
        raise UnsupportedFormat("Not a pyaud inventory document.")
    if data.get("version") != INVENTORY_VERSION:
        msg = "Unsupported inventory version: {0!r}"
        raise UnsupportedFormat(msg.format(data.get("version")))
    try:
        units = [
            HmmUnit(
                u["label"],
                u["kind"],
                [GaussianMixture.from_dict(g) for g in u["states"]],
                np.asarray(u["transitions"]),
                u.get("occupancy"),
            )
            for u in data["units"]
        ]
        return UnitInventory(
            units, data["feature_dim"], data["variance_floor"], data.get("meta")
        )
    except (KeyError, TypeError) as e:
        raise CorruptFile("Incomplete inventory document: {0}".format(e))


def dumps_inventory(inv):
    return json.dumps(inventory_to_dict(inv), indent=1)


def save_inventory(path, inv):
    with open(path, "w") as fid:
        fid.write(dumps_inventory(inv))
        fid.write("\n")
    logger.info("Saved %d units to %s", len(inv), path)


def load_inventory(path):
    try:
        with open(path) as fid:
            data = json.load(fid, object_pairs_hook=OrderedDict)
    except FileNotFoundError:
        raise NotFound("File not found: {0}".format(path))
    except ValueError as e:
        raise CorruptFile("Invalid JSON in {0}: {1}".format(path, e))
    return inventory_from_dict(data)


def write_alignments_jsonl(fileobj, alignments):
    """alignments: iterable of (utterance_id, Alignment)."""
    for utt_id, alignment in alignments:
        record = OrderedDict([("utterance_id", utt_id)])
        record.update(alignment.to_dict())
        fileobj.write(json.dumps(record) + "\n")


def read_alignments_jsonl(fileobj):
    out = []
    for line in fileobj:
        line = line.strip()
        if line:
            record = json.loads(line)
            out.append((record["utterance_id"], Alignment.from_dict(record)))
    return out


def alignment_tiers(alignment, frame_shift, offset=0.0):
    """Unit tier and state tier of an alignment, both spanning [offset, end]."""
    max_time = offset + alignment.n_frames * frame_shift
    units = IntervalTier("units", offset, max_time)
    for token in alignment.unit_tokens():
        units.add(offset + token.start * frame_shift, offset + token.end * frame_shift, token.label)
    states = IntervalTier("states", offset, max_time)
    for e in alignment.entries:
        states.add(
            offset + e.start * frame_shift,
            offset + e.end * frame_shift,
            "{0}.{1}".format(e.label, e.state),
        )
    return [units, states]
