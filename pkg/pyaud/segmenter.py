# encoding: utf-8
import json
import logging
import math
from collections import namedtuple

import numpy as np
from scipy.signal import find_peaks

from pyaud.errors import ConfigError, OutOfRange
from pyaud.section import ConfigSection
from textgrid import IntervalTier

__all__ = [
    "Segment",
    "SegmenterConfig",
    "segment_syllables",
    "extract_segment_features",
    "write_segments_jsonl",
    "read_segments_jsonl",
    "segments_tier",
]

logger = logging.getLogger(__name__)

Segment = namedtuple(
    "Segment", ["utterance_id", "start_frame", "end_frame", "peak_frame"]
)


class SegmenterConfig(ConfigSection):
    name = "segmenter"
    defaults = {
        "min_seg_dur": 0.08,
        "max_seg_dur": 0.60,
        "valley_depth": 3.0,
        "silence_margin": 6.0,
    }

    def validate(self):
        if not 0 < self.min_seg_dur < self.max_seg_dur:
            raise ConfigError("Expected 0 < min_seg_dur < max_seg_dur.")
        if self.valley_depth < 0 or self.silence_margin < 0:
            raise ConfigError("valley_depth and silence_margin must be >= 0.")

    def frame_limits(self, frame_shift):
        """(min_frames, max_frames) for a frame grid."""
        min_frames = max(1, int(math.ceil(self.min_seg_dur / frame_shift - 1e-9)))
        max_frames = int(math.floor(self.max_seg_dur / frame_shift + 1e-9))
        return min_frames, max(min_frames, max_frames)


def _active_runs(mask):
    """Half open [start, end) runs of True values."""
    padded = np.concatenate(([False], mask, [False])).astype(np.int8)
    changes = np.flatnonzero(np.diff(padded))
    return list(zip(changes[0::2].tolist(), changes[1::2].tolist()))


def _run_spans(values, start, end, depth):
    """Valley to valley spans around the significant peaks of a run."""
    run = values[start:end]
    peaks, _ = find_peaks(run, prominence=depth)
    if len(peaks) == 0:
        peaks = [int(np.argmax(run))]
    bounds = [start]
    for left, right in zip(peaks[:-1], peaks[1:]):
        valley = left + int(np.argmin(run[left:right + 1]))
        bounds.append(start + valley)
    bounds.append(end)
    return [[s, e] for s, e in zip(bounds[:-1], bounds[1:]) if e > s]


def _merge_short(spans, values, min_frames):
    spans = [list(s) for s in spans]
    while True:
        short = None
        for i, (s, e) in enumerate(spans):
            if e - s < min_frames:
                short = i
                break
        if short is None:
            return spans
        s, e = spans[short]
        has_left = short > 0
        has_right = short + 1 < len(spans)
        if not has_left and not has_right:
            logger.debug("Dropping isolated short segment [%d, %d).", s, e)
            del spans[short]
            continue
        if has_left and has_right:
            # "lower" valley means lower depth: cross the boundary with more energy, ties go left
            into_left = values[s] >= values[e]
        else:
            into_left = has_left
        if into_left:
            spans[short - 1][1] = e
        else:
            spans[short + 1][0] = s
        del spans[short]


def _split_long(spans, values, min_frames, max_frames):
    out = []
    pending = list(reversed(spans))
    while pending:
        s, e = pending.pop()
        if e - s <= max_frames:
            out.append([s, e])
            continue
        lo, hi = s + min_frames, e - min_frames
        if lo <= hi:
            cut = lo + int(np.argmin(values[lo:hi + 1]))
        else:
            cut = (s + e) // 2
        pending.append([cut, e])
        pending.append([s, cut])
    return out


def segment_syllables(e, cfg, utterance_id=""):
    """Split an energy contour into syllable-like segments."""
    values = e.values
    if len(values) == 0:
        return []
    min_frames, max_frames = cfg.frame_limits(e.frame_shift)
    if max_frames < 2 * min_frames:
        msg = "max_seg_dur below twice min_seg_dur, split parts may be short."
        logger.warning(msg)

    threshold = e.floor + cfg.silence_margin
    segments = []
    for start, end in _active_runs(values > threshold):
        spans = _run_spans(values, start, end, cfg.valley_depth)
        spans = _merge_short(spans, values, min_frames)
        spans = _split_long(spans, values, min_frames, max_frames)
        for s, t in spans:
            peak = s + int(np.argmax(values[s:t]))
            segments.append(Segment(utterance_id, s, t, peak))
    logger.debug("%s: %d segments.", utterance_id or "<utterance>", len(segments))
    return segments


def extract_segment_features(f, s):
    if s.start_frame < 0 or s.end_frame > len(f) or s.start_frame >= s.end_frame:
        msg = "Segment [{0}, {1}) outside of a {2} frame sequence."
        raise OutOfRange(msg.format(s.start_frame, s.end_frame, len(f)))
    return f.slice(s.start_frame, s.end_frame)


def write_segments_jsonl(fileobj, segments, frame_shift):
    for s in segments:
        record = {
            "utterance_id": s.utterance_id,
            "start_s": round(s.start_frame * frame_shift, 6),
            "end_s": round(s.end_frame * frame_shift, 6),
            "peak_s": round(s.peak_frame * frame_shift, 6),
        }
        fileobj.write(json.dumps(record) + "\n")


def read_segments_jsonl(fileobj, frame_shift):
    segments = []
    for line in fileobj:
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        segments.append(
            Segment(
                record["utterance_id"],
                int(round(record["start_s"] / frame_shift)),
                int(round(record["end_s"] / frame_shift)),
                int(round(record["peak_s"] / frame_shift)),
            )
        )
    return segments


def segments_tier(segments, frame_shift, max_time=None, name="syllables"):
    """Praat interval tier with one interval per segment, labeled by index."""
    tier = IntervalTier(name, 0.0, max_time)
    for i, s in enumerate(segments):
        tier.add(s.start_frame * frame_shift, s.end_frame * frame_shift, str(i))
    return tier
