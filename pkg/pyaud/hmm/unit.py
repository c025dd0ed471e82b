# encoding: utf-8
import logging
import math
from collections import OrderedDict

import numpy as np

from pyaud.errors import ConfigError, SegmentTooShort, UnknownLabel
from pyaud.hmm.gmm import GaussianMixture, variance_floor_for

__all__ = [
    "ONSET",
    "RHYME",
    "OFFSET",
    "SILENCE",
    "TRANSIENT",
    "SILENCE_LABEL",
    "HmmUnit",
    "UnitInventory",
    "unit_label",
    "region_bounds",
    "split_feasible",
    "flat_start_unit",
    "flat_start_silence",
    "unit_from_state_frames",
]

logger = logging.getLogger(__name__)

ONSET = "onset"
RHYME = "rhyme"
OFFSET = "offset"
SILENCE = "silence"
TRANSIENT = "transient"

KIND_PREFIX = OrderedDict(
    [(ONSET, "OS"), (RHYME, "RH"), (OFFSET, "OF"), (TRANSIENT, "TR")]
)
SILENCE_LABEL = "SIL"
DEFAULT_FRACTIONS = (0.2, 0.6, 0.2)
CVC_KINDS = (ONSET, RHYME, OFFSET)


def unit_label(kind, index):
    if kind == SILENCE:
        return SILENCE_LABEL
    return "{0}_{1}".format(KIND_PREFIX[kind], index)


def initial_transitions(n_states, self_loop=0.5):
    trans = np.zeros((n_states, n_states + 1))
    for s in range(n_states):
        trans[s, s] = self_loop
        trans[s, s + 1] = 1.0 - self_loop
    return trans


class HmmUnit(object):
    """Left-to-right unit with self loops.

    ``transitions`` is S x (S + 1): entry [s, s] is the self loop, entry
    [s, s + 1] the advance to the next state, or the exit for the last
    state.
    """

    def __init__(self, label, kind, states, transitions=None, occupancy=None):
        super(HmmUnit, self).__init__()
        if not states:
            raise ConfigError("Unit {0} has no states.".format(label))
        n_states = len(states)
        if transitions is None:
            transitions = initial_transitions(n_states)
        transitions = np.asarray(transitions, dtype=np.float64)
        if transitions.shape != (n_states, n_states + 1):
            raise ConfigError("Unit {0}: bad transition matrix shape.".format(label))
        allowed = np.zeros_like(transitions, dtype=bool)
        for s in range(n_states):
            allowed[s, s] = allowed[s, s + 1] = True
        if np.any(transitions[~allowed] != 0) or np.any(transitions < 0):
            raise ConfigError("Unit {0}: transitions must be left to right.".format(label))
        if np.any(np.abs(transitions.sum(axis=1) - 1.0) > 1e-9):
            raise ConfigError("Unit {0}: transition rows must sum to 1.".format(label))
        dims = {g.dim for g in states}
        if len(dims) != 1:
            raise ConfigError("Unit {0}: states differ in dimension.".format(label))
        self.label = label
        self.kind = kind
        self.states = list(states)
        self.transitions = transitions
        if occupancy is None:
            occupancy = np.zeros(n_states)
        self.occupancy = np.asarray(occupancy, dtype=np.float64)
        with np.errstate(divide="ignore"):
            self.log_self = np.log(np.diag(transitions))
            self.log_advance = np.log(transitions[np.arange(n_states), np.arange(1, n_states + 1)])

    @property
    def n_states(self):
        return len(self.states)

    @property
    def dim(self):
        return self.states[0].dim

    def emission_matrix(self, frames):
        """T x S state log likelihoods."""
        return np.stack([g.log_likelihoods(frames) for g in self.states], axis=1)

    def replace(self, **changes):
        params = {
            "label": self.label,
            "kind": self.kind,
            "states": self.states,
            "transitions": self.transitions,
            "occupancy": self.occupancy,
        }
        params.update(changes)
        return HmmUnit(**params)

    def __repr__(self):
        return "<HmmUnit {0} ({1}) S: {2}>".format(self.label, self.kind, self.n_states)


class UnitInventory(object):
    """Ordered label -> HmmUnit mapping, the order decides decoding ties."""

    def __init__(self, units, feature_dim, variance_floor, meta=None):
        super(UnitInventory, self).__init__()
        self.units = OrderedDict()
        self.feature_dim = int(feature_dim)
        self.variance_floor = np.broadcast_to(
            np.asarray(variance_floor, dtype=np.float64), (self.feature_dim,)
        ).copy()
        self.meta = OrderedDict(meta or {})
        for unit in units:
            self.add(unit)

    def add(self, unit):
        if unit.label in self.units:
            raise ConfigError("Duplicate unit label: {0}".format(unit.label))
        if unit.dim != self.feature_dim:
            msg = "Unit {0} has dimension {1}, inventory expects {2}."
            raise ConfigError(msg.format(unit.label, unit.dim, self.feature_dim))
        self.units[unit.label] = unit

    def __getitem__(self, label):
        try:
            return self.units[label]
        except KeyError:
            raise UnknownLabel("Unknown unit label: {0!r}".format(label))

    def __contains__(self, label):
        return label in self.units

    def __len__(self):
        return len(self.units)

    def __iter__(self):
        return iter(self.units.values())

    def labels(self):
        return list(self.units.keys())

    def labels_of_kind(self, *kinds):
        return [u.label for u in self if u.kind in kinds]

    @property
    def silence_label(self):
        for unit in self:
            if unit.kind == SILENCE:
                return unit.label
        return None

    def with_units(self, units, meta=None):
        """New inventory sharing dim and floor, with the given units."""
        return UnitInventory(
            units,
            self.feature_dim,
            self.variance_floor,
            self.meta if meta is None else meta,
        )

    def __repr__(self):
        return "<UnitInventory units: {0} D: {1}>".format(len(self), self.feature_dim)


def region_bounds(n_frames, fractions):
    """[start, end) of each region when n_frames are split by fractions."""
    total = float(sum(fractions))
    if total <= 0 or any(f < 0 for f in fractions):
        raise ConfigError("Region fractions must be non-negative and not all zero.")
    edges = [0]
    acc = 0.0
    for f in fractions:
        acc += f / total
        edges.append(int(math.floor(acc * n_frames + 0.5)))
    edges[-1] = n_frames
    return list(zip(edges[:-1], edges[1:]))


def split_feasible(n_frames, fractions, n_states):
    bounds = region_bounds(n_frames, fractions)
    return all(
        end - start >= n_states
        for (start, end), f in zip(bounds, fractions)
        if f > 0
    )


def unit_from_state_frames(label, kind, state_frames, variance_floor):
    states = [GaussianMixture.from_frames(frames, variance_floor) for frames in state_frames]
    occupancy = [len(frames) for frames in state_frames]
    return HmmUnit(label, kind, states, occupancy=occupancy)


def flat_start_unit(
    segments, fractions=DEFAULT_FRACTIONS, n_states=3, variance_floor=None, index=0
):
    """Onset, rhyme and offset units from uniformly split segments.

    Every segment is split by ``fractions`` into regions, each region in
    turn uniformly into ``n_states`` parts, and the part frames are
    pooled per state. Regions with a zero fraction produce no unit.
    """
    if not segments:
        raise SegmentTooShort("Flat start needs at least one segment.")
    if len(fractions) != len(CVC_KINDS):
        raise ConfigError("Expected one fraction per onset, rhyme and offset.")
    arrays = [np.asarray(getattr(s, "frames", s), dtype=np.float64) for s in segments]
    for frames in arrays:
        if not split_feasible(len(frames), fractions, n_states):
            msg = "A {0} frame segment cannot give {1} frames to every state."
            raise SegmentTooShort(msg.format(len(frames), n_states))
    if variance_floor is None:
        variance_floor = variance_floor_for(np.vstack(arrays))

    pools = [[[] for _ in range(n_states)] for _ in CVC_KINDS]
    for frames in arrays:
        for region, (start, end) in enumerate(region_bounds(len(frames), fractions)):
            if fractions[region] <= 0:
                continue
            region_frames = frames[start:end]
            for s, (a, b) in enumerate(region_bounds(len(region_frames), [1.0] * n_states)):
                pools[region][s].append(region_frames[a:b])

    units = []
    for region, kind in enumerate(CVC_KINDS):
        if fractions[region] <= 0:
            continue
        state_frames = [np.vstack(parts) for parts in pools[region]]
        units.append(
            unit_from_state_frames(unit_label(kind, index), kind, state_frames, variance_floor)
        )
    return units


def flat_start_silence(chunks, n_states, variance_floor, fallback_frames):
    """Silence unit from inter-segment chunks.

    Chunks with at least ``n_states`` frames are split uniformly over the
    states, shorter ones feed the middle state. States left without
    frames use the pooled silence frames, or ``fallback_frames`` when no
    chunk has any frame.
    """
    chunks = [np.asarray(c, dtype=np.float64) for c in chunks if len(c)]
    if not chunks:
        logger.warning("No inter-segment frames, silence starts from global statistics.")
        chunks = [np.asarray(fallback_frames, dtype=np.float64)]
    pooled = np.vstack(chunks)
    parts = [[] for _ in range(n_states)]
    for chunk in chunks:
        if len(chunk) >= n_states:
            for s, (a, b) in enumerate(region_bounds(len(chunk), [1.0] * n_states)):
                parts[s].append(chunk[a:b])
        else:
            parts[n_states // 2].append(chunk)
    state_frames = [np.vstack(p) if p else pooled for p in parts]
    return unit_from_state_frames(SILENCE_LABEL, SILENCE, state_frames, variance_floor)
