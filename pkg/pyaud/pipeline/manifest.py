# encoding: utf-8
import csv
import json
import logging
import os
from collections import namedtuple

from pyaud.errors import ManifestError, NotFound

__all__ = ["SPLITS", "ManifestEntry", "CorpusManifest"]

logger = logging.getLogger(__name__)

SPLITS = ("train_unit", "train_voice", "test")
DEFAULT_SPLIT = "train_unit"

ManifestEntry = namedtuple("ManifestEntry", ["utterance_id", "path", "split"])


class CorpusManifest(object):
    """Utterances of a corpus with their audio paths and split tags.

    Files are CSV with a header (``utterance_id,path[,split]``) or JSON
    lines with the same keys. Relative paths are resolved against the
    manifest directory.
    """

    def __init__(self, entries=(), check_paths=True):
        super(CorpusManifest, self).__init__()
        self.entries = []
        self._ids = set()
        for entry in entries:
            self.add(*entry, check_path=check_paths)

    def add(self, utterance_id, path, split=DEFAULT_SPLIT, check_path=True):
        utterance_id = str(utterance_id).strip()
        split = (split or DEFAULT_SPLIT).strip()
        if not utterance_id:
            raise ManifestError("Empty utterance id for {0}".format(path))
        if utterance_id in self._ids:
            raise ManifestError("Duplicate utterance id: {0}".format(utterance_id))
        if split not in SPLITS:
            msg = "Unknown split '{0}' for {1}, expected one of {2}."
            raise ManifestError(msg.format(split, utterance_id, ", ".join(SPLITS)))
        if check_path and not os.path.isfile(path):
            raise ManifestError("Audio file for {0} not found: {1}".format(utterance_id, path))
        self._ids.add(utterance_id)
        self.entries.append(ManifestEntry(utterance_id, path, split))

    @classmethod
    def load(cls, path, check_paths=True):
        if not os.path.isfile(path):
            raise NotFound("File not found: {0}".format(path))
        basedir = os.path.dirname(os.path.abspath(path))
        if path.endswith((".jsonl", ".json")):
            records = cls._read_jsonl(path)
        else:
            records = cls._read_csv(path)
        manifest = cls(check_paths=check_paths)
        for record in records:
            try:
                utt_id = record["utterance_id"]
                audio = record["path"]
            except KeyError as e:
                raise ManifestError("Manifest record misses {0}: {1}".format(e, path))
            if not os.path.isabs(audio):
                audio = os.path.join(basedir, audio)
            manifest.add(utt_id, audio, record.get("split"), check_path=check_paths)
        logger.info("Loaded %d utterances from %s", len(manifest), path)
        return manifest

    @staticmethod
    def _read_csv(path):
        with open(path, newline="") as fid:
            reader = csv.DictReader(fid)
            if reader.fieldnames is None:
                raise ManifestError("Empty manifest: {0}".format(path))
            return [row for row in reader]

    @staticmethod
    def _read_jsonl(path):
        records = []
        with open(path) as fid:
            for lineno, line in enumerate(fid, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    records.append(json.loads(line))
                except ValueError as e:
                    raise ManifestError("{0}:{1}: {2}".format(path, lineno, e))
        return records

    def save(self, path):
        with open(path, "w", newline="") as fid:
            writer = csv.writer(fid)
            writer.writerow(ManifestEntry._fields)
            for entry in self.entries:
                writer.writerow(entry)

    def by_split(self, *splits):
        return [e for e in self.entries if e.split in splits]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __repr__(self):
        return "<CorpusManifest utterances: {0}>".format(len(self))
