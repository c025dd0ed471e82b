# encoding: utf-8
"""Forced alignment and unit-loop decoding over left-to-right units."""
import logging
from collections import namedtuple

import numpy as np

from pyaud.errors import (
    ConfigError,
    DimensionMismatch,
    EmptyInput,
    InconsistentAlignment,
    InfeasibleAlignment,
)
from pyaud.hmm.unit import OFFSET, ONSET, RHYME, SILENCE, TRANSIENT

__all__ = [
    "AlignmentEntry",
    "UnitToken",
    "Alignment",
    "UnitLoopGrammar",
    "viterbi_align",
    "viterbi_decode",
    "score_alignment",
]

logger = logging.getLogger(__name__)

NEG_INF = -np.inf
STAY = -1
ADVANCE = -2

AlignmentEntry = namedtuple("AlignmentEntry", ["label", "state", "start", "end"])
UnitToken = namedtuple("UnitToken", ["label", "start", "end"])


class Alignment(object):
    """State level path: entries tile [0, T) in order."""

    def __init__(self, entries, total_log_likelihood):
        super(Alignment, self).__init__()
        self.entries = [AlignmentEntry(*e) for e in entries]
        self.total_log_likelihood = float(total_log_likelihood)
        cursor = 0
        for e in self.entries:
            if e.start != cursor or e.end <= e.start:
                msg = "Alignment entries must tile the frames, got {0}."
                raise InconsistentAlignment(msg.format(e))
            cursor = e.end

    @property
    def n_frames(self):
        return self.entries[-1].end if self.entries else 0

    def unit_tokens(self):
        """Entries merged into unit occurrences.

        A new occurrence starts whenever the label changes or the state
        index does not increase.
        """
        tokens = []
        prev = None
        for e in self.entries:
            if prev is None or e.label != prev.label or e.state <= prev.state:
                tokens.append([e.label, e.start, e.end])
            else:
                tokens[-1][2] = e.end
            prev = e
        return [UnitToken(*t) for t in tokens]

    def labels(self):
        return [t.label for t in self.unit_tokens()]

    def state_path(self):
        """(label, state) of every frame."""
        path = []
        for e in self.entries:
            path.extend([(e.label, e.state)] * (e.end - e.start))
        return path

    def to_dict(self):
        return {
            "total_log_likelihood": self.total_log_likelihood,
            "entries": [list(e) for e in self.entries],
        }

    @classmethod
    def from_dict(cls, data):
        return cls([tuple(e) for e in data["entries"]], data["total_log_likelihood"])

    def __eq__(self, other):
        return (
            isinstance(other, Alignment)
            and self.entries == other.entries
            and self.total_log_likelihood == other.total_log_likelihood
        )

    def __repr__(self):
        tpl = "<Alignment entries: {0} T: {1} ll: {2:.3f}>"
        return tpl.format(len(self.entries), self.n_frames, self.total_log_likelihood)


def _frames_of(inv, f):
    frames = np.asarray(getattr(f, "frames", f), dtype=np.float64)
    if frames.ndim == 1:
        frames = frames.reshape(-1, 1)
    if len(frames) and frames.shape[1] != inv.feature_dim:
        msg = "Features have dimension {0}, inventory expects {1}."
        raise DimensionMismatch(msg.format(frames.shape[1], inv.feature_dim))
    return frames


def viterbi_align(inv, f, transcript):
    frames = _frames_of(inv, f)
    if not transcript:
        raise EmptyInput("Cannot align an empty transcript.")
    units = [inv[label] for label in transcript]
    chain = [(u, s) for u in units for s in range(u.n_states)]
    n_chain = len(chain)
    n_frames = len(frames)
    if n_chain > n_frames:
        msg = "Transcript needs {0} states, only {1} frames available."
        raise InfeasibleAlignment(msg.format(n_chain, n_frames))

    emissions = {}
    for u in units:
        if u.label not in emissions:
            emissions[u.label] = u.emission_matrix(frames)
    emis = np.column_stack([emissions[u.label][:, s] for u, s in chain])
    log_self = np.array([u.log_self[s] for u, s in chain])
    log_adv = np.array([u.log_advance[s] for u, s in chain])

    delta = np.full(n_chain, NEG_INF)
    delta[0] = emis[0, 0]
    moved = np.zeros((n_frames, n_chain), dtype=bool)
    for t in range(1, n_frames):
        stay = delta + log_self
        move = np.concatenate(([NEG_INF], delta[:-1] + log_adv[:-1]))
        moved[t] = move > stay
        delta = np.where(moved[t], move, stay) + emis[t]

    total = delta[-1]
    if not np.isfinite(total):
        raise InfeasibleAlignment("No path reaches the last state.")
    # backtrack to frame level chain positions
    positions = np.zeros(n_frames, dtype=int)
    n = n_chain - 1
    for t in range(n_frames - 1, -1, -1):
        positions[t] = n
        if t > 0 and moved[t, n]:
            n -= 1
    entries = []
    start = 0
    for t in range(1, n_frames + 1):
        if t == n_frames or positions[t] != positions[start]:
            u, s = chain[positions[start]]
            entries.append((u.label, s, start, t))
            start = t
    return Alignment(entries, total)


class UnitLoopGrammar(object):
    """Any unit may follow any unit, each unit entry adds insertion_penalty.

    With ``sequencing`` the successors follow onset -> rhyme -> offset,
    offsets, transients and silence lead to onsets, transients or
    silence, and utterances start and end outside a syllable.
    """

    def __init__(self, labels, insertion_penalty=0.0, sequencing=False):
        super(UnitLoopGrammar, self).__init__()
        self.labels = list(labels)
        if len(set(self.labels)) != len(self.labels):
            raise ConfigError("Grammar labels must be unique.")
        self.insertion_penalty = float(insertion_penalty)
        self.sequencing = bool(sequencing)

    @classmethod
    def for_inventory(cls, inv, **kwargs):
        return cls(inv.labels(), **kwargs)

    def connections(self, kinds):
        """(successor matrix [from, to], start flags, end flags)."""
        n = len(kinds)
        if not self.sequencing:
            return np.ones((n, n), dtype=bool), np.ones(n, dtype=bool), np.ones(n, dtype=bool)
        outside = (OFFSET, TRANSIENT, SILENCE)
        follows = {
            ONSET: (RHYME,),
            RHYME: (OFFSET,),
            OFFSET: (ONSET, TRANSIENT, SILENCE),
            SILENCE: (ONSET, TRANSIENT, SILENCE),
            TRANSIENT: (ONSET, OFFSET, TRANSIENT, SILENCE),
        }
        allowed = np.array([[b in follows.get(a, ()) for b in kinds] for a in kinds])
        starts = np.array([k in (ONSET, TRANSIENT, SILENCE) for k in kinds])
        ends = np.array([k in outside for k in kinds])
        return allowed, starts, ends


def viterbi_decode(inv, f, grammar, silence_mask=None):
    """Best unit sequence and state path under a unit-loop grammar.

    ``silence_mask`` marks frames that may only be explained by the
    silence unit. Ties prefer staying in a state, then the unit listed
    first in the grammar.
    """
    frames = _frames_of(inv, f)
    n_frames = len(frames)
    if n_frames == 0:
        raise EmptyInput("Cannot decode an empty feature sequence.")
    if not grammar.labels:
        raise EmptyInput("The grammar has no active unit.")
    units = [inv[label] for label in grammar.labels]
    n_units = len(units)
    allowed, starts, ends = grammar.connections([u.kind for u in units])
    penalty = grammar.insertion_penalty

    sizes = [u.n_states for u in units]
    first = np.cumsum([0] + sizes[:-1])
    last = first + np.array(sizes) - 1
    n_states = int(sum(sizes))
    emis = np.hstack([u.emission_matrix(frames) for u in units])
    log_self = np.concatenate([u.log_self for u in units])
    log_adv = np.concatenate([u.log_advance for u in units])
    is_first = np.zeros(n_states, dtype=bool)
    is_first[first] = True

    if silence_mask is not None:
        silence_mask = np.asarray(silence_mask, dtype=bool)
        if len(silence_mask) != n_frames:
            raise ConfigError("Silence mask length differs from the frame count.")
        keep = np.zeros(n_states, dtype=bool)
        for u, a, b in zip(units, first, last):
            keep[a:b + 1] = u.kind == SILENCE
        if silence_mask.any() and not keep.any():
            raise ConfigError("A silence mask needs a silence unit in the grammar.")
        emis = emis.copy()
        emis[np.ix_(silence_mask, ~keep)] = NEG_INF

    back = np.full((n_frames, n_states), STAY, dtype=np.int64)
    delta = np.full(n_states, NEG_INF)
    delta[first] = np.where(starts, penalty, NEG_INF)
    delta = delta + emis[0]
    for t in range(1, n_frames):
        stay = delta + log_self
        advance = np.full(n_states, NEG_INF)
        advance[1:] = delta[:-1] + log_adv[:-1]
        advance[is_first] = NEG_INF
        exits = delta[last] + log_adv[last]
        candidates = np.where(allowed, exits[:, None], NEG_INF)
        best_prev = np.argmax(candidates, axis=0)
        entry = candidates[best_prev, np.arange(n_units)] + penalty
        advance[first] = entry

        take = advance > stay
        new_delta = np.where(take, advance, stay)
        back[t] = np.where(take, ADVANCE, STAY)
        entered = take[first]
        back[t, first[entered]] = best_prev[entered]
        delta = new_delta + emis[t]

    final = np.where(ends, delta[last], NEG_INF)
    best_unit = int(np.argmax(final))
    total = final[best_unit]
    if not np.isfinite(total):
        raise InfeasibleAlignment("No grammar path explains the frames.")

    # backtrack, remembering where unit entries happened
    state = int(last[best_unit])
    unit_of = np.repeat(np.arange(n_units), sizes)
    path = np.zeros(n_frames, dtype=int)
    starts_entry = np.zeros(n_frames, dtype=bool)
    for t in range(n_frames - 1, -1, -1):
        path[t] = state
        bp = back[t, state]
        if t == 0:
            starts_entry[t] = True
        elif bp == ADVANCE:
            starts_entry[t] = True
            state -= 1
        elif bp >= 0:
            starts_entry[t] = True
            state = int(last[bp])

    entries = []
    start = 0
    for t in range(1, n_frames + 1):
        if t == n_frames or starts_entry[t]:
            u = unit_of[path[start]]
            entries.append((units[u].label, int(path[start] - first[u]), start, t))
            start = t
    return Alignment(entries, total)


def score_alignment(inv, f, alignment, insertion_penalty=0.0):
    """Rescore a path: emissions plus transitions taken.

    ``insertion_penalty`` is added once per unit occurrence, as in
    decoding. Illegal transitions raise InconsistentAlignment.
    """
    frames = _frames_of(inv, f)
    if alignment.n_frames != len(frames):
        msg = "Alignment covers {0} frames, features have {1}."
        raise InconsistentAlignment(msg.format(alignment.n_frames, len(frames)))
    total = 0.0
    prev = None
    for e in alignment.entries:
        unit = inv[e.label]
        if not 0 <= e.state < unit.n_states:
            raise InconsistentAlignment("State {0} out of range for {1}.".format(e.state, e.label))
        total += unit.states[e.state].log_likelihoods(frames[e.start:e.end]).sum()
        total += (e.end - e.start - 1) * unit.log_self[e.state]
        if prev is not None:
            prev_unit = inv[prev.label]
            within = e.label == prev.label and e.state == prev.state + 1
            entering = e.state == 0 and prev.state == prev_unit.n_states - 1
            if not (within or entering):
                raise InconsistentAlignment("Illegal transition {0} -> {1}.".format(prev, e))
            total += prev_unit.log_advance[prev.state]
        prev = e
    total += insertion_penalty * len(alignment.unit_tokens())
    return float(total)
