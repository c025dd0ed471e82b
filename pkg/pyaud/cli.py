# encoding: utf-8
"""Command line entry point: ``pyaud <command> ...``."""
import argparse
import csv
import json
import logging
import os
import sys
from collections import OrderedDict

from pyaud.errors import AudError, ConfigError, LengthMismatch, NotFound
from pyaud.evaluation import (
    MetricReport,
    abx_error,
    bitrate,
    cluster_quality,
    read_triplets_jsonl,
    resolve_feature_triplets,
    resolve_label_triplets,
)
from pyaud.frontend.wavio import read_wav, write_wav
from pyaud.hmm.inventoryio import load_inventory
from pyaud.pipeline.codec import (
    ExemplarStore,
    check_frontend,
    decode_exemplar,
    load_transcriptions,
    save_transcriptions,
)
from pyaud.pipeline.config import PipelineConfig
from pyaud.pipeline.manifest import SPLITS, CorpusManifest
from pyaud.pipeline.runner import PRESETS, PipelineRunner

logger = logging.getLogger(__name__)

LOGLEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def load_config(args):
    cfg = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    changes = {}
    for item in args.set or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError("Expected section.property=value, got {0!r}".format(item))
        changes[key.strip()] = value.strip()
    if args.jobs is not None:
        changes["training.n_jobs"] = args.jobs
    return cfg.replace(**changes) if changes else cfg


def _write_json(path, data):
    with open(path, "w") as fid:
        json.dump(data, fid, indent=2)
        fid.write("\n")


def _metadata_path(output):
    base, _ = os.path.splitext(output)
    return base + ".metadata.json"


def _runner_from_manifest(cfg, manifest_path, splits):
    runner = PipelineRunner(cfg)
    runner.add_from_manifest(CorpusManifest.load(manifest_path), splits)
    return runner


def _finish_training(runner, outdir, command, debug_csv=False):
    runner.decode()
    store = runner.build_exemplars()
    store.save(os.path.join(outdir, "exemplars"))
    transcriptions = runner.transcriptions()
    duration = sum(u.waveform.duration for u in runner.utterances.values())
    rate = bitrate(transcriptions, duration)
    save_transcriptions(
        os.path.join(outdir, "transcriptions.json"),
        transcriptions,
        OrderedDict([("bitrate", rate), ("duration_s", duration)]),
    )
    runner.save(outdir, command, debug_csv)
    runner.cfg.save(os.path.join(outdir, "config.xml"))


#
# Commands
#
def cmd_discover(args, cfg):
    runner = _runner_from_manifest(cfg, args.manifest, args.split)
    runner.discover()
    runner.decode()
    runner.save(args.output, "discover", args.csv)
    cfg.save(os.path.join(args.output, "config.xml"))


def cmd_train_stage2(args, cfg):
    runner = _runner_from_manifest(cfg, args.manifest, args.split)
    runner.inventory = load_inventory(args.inventory)
    runner.train_stage2()
    _finish_training(runner, args.output, "train-stage2", args.csv)


def cmd_merge(args, cfg):
    runner = PipelineRunner(cfg)
    runner.inventory = load_inventory(args.inventory)
    runner.merge(args.target)
    runner.save(args.output, "merge")


def cmd_run(args, cfg):
    runner = _runner_from_manifest(cfg, args.manifest, args.split)
    runner.run_preset(args.preset)
    command = "run --preset {0}".format(args.preset)
    _finish_training(runner, args.output, command, args.csv)


def _audio_inputs(args):
    if args.manifest:
        manifest = CorpusManifest.load(args.manifest)
        entries = manifest.by_split(*args.split) if args.split else list(manifest)
        return [(e.utterance_id, e.path) for e in entries]
    return [(os.path.splitext(os.path.basename(p))[0], p) for p in args.audio]


def cmd_encode(args, cfg):
    runner = PipelineRunner(cfg)
    runner.inventory = load_inventory(args.inventory)
    check_frontend(runner.inventory, cfg.frontend)
    inputs = _audio_inputs(args)
    if not inputs:
        raise ConfigError("Nothing to encode: give audio files or a manifest.")
    transcriptions = []
    duration = 0.0
    for utt_id, path in inputs:
        w = read_wav(path)
        duration += w.duration
        transcriptions.append(runner.encode(w, utt_id))
    rate = bitrate(transcriptions, duration)
    extra = OrderedDict([("bitrate", rate), ("duration_s", duration)])
    save_transcriptions(args.output, transcriptions, extra)
    _write_json(_metadata_path(args.output), runner.metadata("encode"))
    logger.info("%d utterances encoded at %.2f bits/s", len(transcriptions), rate)


def cmd_resynth(args, cfg):
    store = ExemplarStore.load(args.exemplars)
    transcriptions = load_transcriptions(args.transcriptions)
    crossfade = cfg.training.crossfade if args.crossfade is None else args.crossfade
    if len(transcriptions) == 1 and args.output.lower().endswith(".wav"):
        targets = [args.output]
    else:
        if not os.path.isdir(args.output):
            os.makedirs(args.output)
        targets = [
            os.path.join(args.output, "{0}.wav".format(t.utterance_id or i))
            for i, t in enumerate(transcriptions)
        ]
    for t, target in zip(transcriptions, targets):
        write_wav(target, decode_exemplar(store, t, crossfade))
        logger.info("Wrote %s", target)


def _read_labels_csv(path):
    """item -> label from a two column CSV file."""
    if not os.path.isfile(path):
        raise NotFound("File not found: {0}".format(path))
    labels = OrderedDict()
    with open(path, newline="") as fid:
        for row in csv.reader(fid):
            if len(row) >= 2 and row[0] != "item":
                labels[row[0]] = row[1]
    return labels


def cmd_eval(args, cfg):
    values = {}
    if args.transcriptions:
        transcriptions = load_transcriptions(args.transcriptions)
        duration = args.duration
        if duration is None:
            duration = sum(t.duration for t in transcriptions)
        values["bitrate"] = bitrate(transcriptions, duration)
        values["symbol_count"] = sum(len(t) for t in transcriptions)
        values["duration_s"] = duration
    if args.inventory:
        values["inventory_size"] = len(load_inventory(args.inventory).labels())
    if args.triplets:
        if not os.path.isfile(args.triplets):
            raise NotFound("File not found: {0}".format(args.triplets))
        with open(args.triplets) as fid:
            triplets = read_triplets_jsonl(fid)
        if args.distance == "edit":
            if not args.transcriptions:
                raise ConfigError("The edit distance needs --transcriptions.")
            resolved = resolve_label_triplets(triplets, transcriptions)
        else:
            if not args.manifest:
                raise ConfigError("ABX over features needs --manifest.")
            runner = _runner_from_manifest(cfg, args.manifest, None)
            features = {k: u.features for k, u in runner.utterances.items()}
            resolved = resolve_feature_triplets(triplets, features)
        values["abx_error"] = abx_error(resolved, args.distance, cfg.training.n_jobs)
    if args.predicted or args.reference:
        if not (args.predicted and args.reference):
            raise ConfigError("Cluster quality needs both --predicted and --reference.")
        predicted = _read_labels_csv(args.predicted)
        reference = _read_labels_csv(args.reference)
        items = [k for k in predicted if k in reference]
        if len(items) != len(predicted) or len(items) != len(reference):
            raise LengthMismatch("Predicted and reference label files list different items.")
        values["purity"], values["nmi"] = cluster_quality(
            [predicted[k] for k in items], [reference[k] for k in items]
        )
    report = MetricReport(**values)
    text = report.to_json()
    if args.output:
        with open(args.output, "w") as fid:
            fid.write(text + "\n")
        base, _ = os.path.splitext(args.output)
        with open(base + ".csv", "w") as fid:
            fid.write(report.csv_header() + "\n" + report.to_csv() + "\n")
    else:
        print(text)
    print(report.to_csv())


#
# Parser
#
def _add_csv(parser):
    parser.add_argument(
        "--csv", action="store_true", help="also dump features and distances as CSV"
    )


def _add_common(parser):
    parser.add_argument("-c", "--config", help="pipeline definition file (XML)")
    parser.add_argument(
        "--set",
        action="append",
        metavar="SECTION.PROPERTY=VALUE",
        help="override one config property, may repeat",
    )
    parser.add_argument("-j", "--jobs", type=int, help="worker processes")


def build_parser():
    parser = argparse.ArgumentParser(prog="pyaud", description="Acoustic unit discovery.")
    parser.add_argument("--loglevel", default="WARNING", type=str.upper, choices=LOGLEVELS)
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("discover", help="segment, cluster and train stage 1")
    p.add_argument("manifest")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--split", nargs="+", default=["train_unit"], choices=SPLITS)
    _add_common(p)
    _add_csv(p)
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("train-stage2", help="self-train on continuous speech")
    p.add_argument("manifest")
    p.add_argument("inventory")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--split", nargs="+", default=["train_unit"], choices=SPLITS)
    _add_common(p)
    _add_csv(p)
    p.set_defaults(func=cmd_train_stage2)

    p = sub.add_parser("merge", help="merge units with stratified k-means")
    p.add_argument("inventory")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--target", type=int, help="number of non-silence units")
    _add_common(p)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("run", help="run a complete system")
    p.add_argument("manifest")
    p.add_argument("--preset", choices=list(PRESETS), default="system1")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--split", nargs="+", default=["train_unit"], choices=SPLITS)
    _add_common(p)
    _add_csv(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("encode", help="transcribe audio into units")
    p.add_argument("inventory")
    p.add_argument("audio", nargs="*", help="WAV files")
    p.add_argument("-m", "--manifest")
    p.add_argument("--split", nargs="+", choices=SPLITS)
    p.add_argument("-o", "--output", required=True, help="transcriptions JSON")
    _add_common(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("resynth", help="concatenate unit exemplars")
    p.add_argument("exemplars", help="exemplar directory")
    p.add_argument("transcriptions")
    p.add_argument("-o", "--output", required=True, help="WAV file or directory")
    p.add_argument("--crossfade", type=float, help="seconds")
    _add_common(p)
    p.set_defaults(func=cmd_resynth)

    p = sub.add_parser("eval", help="compute metrics")
    p.add_argument("-t", "--transcriptions")
    p.add_argument("--duration", type=float, help="total seconds, default from spans")
    p.add_argument("-i", "--inventory")
    p.add_argument("--triplets", help="ABX triplets, JSON lines")
    p.add_argument("--distance", default="dtw", choices=("dtw", "edit"))
    p.add_argument("-m", "--manifest")
    p.add_argument("--predicted", help="CSV item,label")
    p.add_argument("--reference", help="CSV item,label")
    p.add_argument("-o", "--output", help="report JSON, a CSV line goes next to it")
    _add_common(p)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.loglevel),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args)
        args.func(args, cfg)
    except AudError as e:
        message = " ".join(str(e).split())
        sys.stderr.write("error: {0}: {1}\n".format(e.category, message))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
