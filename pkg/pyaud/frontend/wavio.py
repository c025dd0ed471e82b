# encoding: utf-8
import logging
import os
import struct
from collections import namedtuple

import numpy as np
import scipy.io.wavfile

from pyaud.errors import ConfigError, CorruptFile, NotFound, UnsupportedFormat

__all__ = ["Waveform", "read_wav", "write_wav", "WavInfo", "scan_wav"]

logger = logging.getLogger(__name__)

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

SUPPORTED_ENCODINGS = {
    (WAVE_FORMAT_PCM, 16): "int16",
    (WAVE_FORMAT_IEEE_FLOAT, 32): "float32",
}

WavInfo = namedtuple(
    "WavInfo",
    ["format_tag", "channels", "sample_rate", "bits", "block_align", "nsamples"],
)


class Waveform(object):
    """Mono signal with samples in [-1, 1]."""

    def __init__(self, samples, sample_rate):
        super(Waveform, self).__init__()
        samples = np.asarray(samples, dtype=np.float64)
        if samples.ndim != 1:
            raise UnsupportedFormat("Only mono waveforms are supported.")
        if int(sample_rate) != sample_rate or sample_rate <= 0:
            msg = "Invalid sample rate: {0!r}".format(sample_rate)
            raise ConfigError(msg)
        if not np.all(np.isfinite(samples)):
            raise ConfigError("Waveform samples must be finite.")
        self.samples = samples
        self.sample_rate = int(sample_rate)

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self):
        return len(self.samples) / float(self.sample_rate)

    def slice(self, start, end):
        """Return samples [start, end) as a new waveform."""
        start = max(0, int(start))
        end = min(len(self.samples), int(end))
        return Waveform(self.samples[start:max(start, end)].copy(), self.sample_rate)

    def __repr__(self):
        tpl = "<Waveform samples: {0} sample_rate: {1}>"
        return tpl.format(len(self.samples), self.sample_rate)


def _read_fmt(payload):
    if len(payload) < 16:
        raise CorruptFile("fmt chunk too small.")
    format_tag, channels, rate, _, block_align, bits = struct.unpack(
        "<HHIIHH", payload[:16]
    )
    if format_tag == WAVE_FORMAT_EXTENSIBLE:
        if len(payload) < 26:
            raise CorruptFile("Extensible fmt chunk too small.")
        # first two bytes of the sub format GUID hold the real format tag
        format_tag = struct.unpack("<H", payload[24:26])[0]
    return format_tag, channels, rate, bits, block_align


def scan_wav(path):
    """Walk the RIFF chunks of path and return a WavInfo.

    Only the header arithmetic is checked here, the samples are not read.
    """
    fsize = os.path.getsize(path)
    fmt = None
    nsamples = None
    with open(path, "rb") as fid:
        header = fid.read(12)
        if len(header) < 12:
            raise CorruptFile("File too small for a RIFF header: {0}".format(path))
        riff, _, wave = struct.unpack("<4sI4s", header)
        if riff != b"RIFF" or wave != b"WAVE":
            msg = "Not a RIFF/WAVE file: {0}".format(path)
            raise UnsupportedFormat(msg)
        offset = 12
        while offset + 8 <= fsize:
            chunk_id, size = struct.unpack("<4sI", fid.read(8))
            offset += 8
            if offset + size > fsize:
                msg = "Chunk '{0}' claims {1} bytes, only {2} available."
                raise CorruptFile(
                    msg.format(chunk_id.decode("latin-1"), size, fsize - offset)
                )
            if chunk_id == b"fmt ":
                fmt = _read_fmt(fid.read(size))
            elif chunk_id == b"data":
                if fmt is None:
                    raise CorruptFile("data chunk found before fmt chunk.")
                block_align = fmt[4]
                if block_align <= 0 or size % block_align:
                    raise CorruptFile("data chunk is not a whole number of frames.")
                nsamples = size // block_align
                fid.seek(size, os.SEEK_CUR)
            else:
                fid.seek(size, os.SEEK_CUR)
            # chunks are word aligned
            pad = size % 2
            fid.seek(pad, os.SEEK_CUR)
            offset += size + pad
    if fmt is None or nsamples is None:
        raise CorruptFile("Missing fmt or data chunk: {0}".format(path))
    format_tag, channels, rate, bits, block_align = fmt
    return WavInfo(format_tag, channels, rate, bits, block_align, nsamples)


def read_wav(path):
    """Read a mono 16-bit integer or 32-bit float WAV file."""
    if not os.path.isfile(path):
        raise NotFound("File not found: {0}".format(path))
    info = scan_wav(path)
    if info.channels != 1:
        msg = "Only mono audio is supported, {0} has {1} channels."
        raise UnsupportedFormat(msg.format(path, info.channels))
    encoding = SUPPORTED_ENCODINGS.get((info.format_tag, info.bits))
    if encoding is None:
        msg = "Unsupported encoding (format tag {0}, {1} bits) in {2}"
        raise UnsupportedFormat(msg.format(info.format_tag, info.bits, path))
    try:
        rate, data = scipy.io.wavfile.read(path)
    except ValueError as e:
        raise CorruptFile("Unable to decode {0}: {1}".format(path, e))
    if len(data) != info.nsamples:
        msg = "Decoded {0} samples, header declares {1}."
        raise CorruptFile(msg.format(len(data), info.nsamples))
    if encoding == "int16":
        samples = data.astype(np.float64) / 32768.0
    else:
        samples = np.clip(data.astype(np.float64), -1.0, 1.0)
    if not np.all(np.isfinite(samples)):
        raise CorruptFile("Non finite samples in {0}".format(path))
    logger.debug("Read %s: %d samples at %d Hz.", path, len(samples), rate)
    return Waveform(samples, rate)


def write_wav(path, waveform):
    """Write waveform as 16-bit PCM, clipping to [-1, 1]."""
    clipped = np.clip(waveform.samples, -1.0, 1.0)
    pcm = np.round(clipped * 32767.0).astype(np.int16)
    scipy.io.wavfile.write(path, waveform.sample_rate, pcm)
    logger.info("Wrote %s (%.3f s).", path, waveform.duration)
