"""Command-line entry point.

Every subcommand accepts ``--config FILE`` (a JSON object of option values,
keyed by the long flag name with dashes or underscores). Precedence is
built-in defaults < config file < explicit flags. The resolved configuration
is echoed to stderr and embedded in written artifacts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from ._io import atomic_write_text, dump_json
from .cepstra import features_to_csv, waveform_features
from .dtw import DtwConfig
from .evaluation import (
    ExperimentConfig,
    FeatureConfig,
    HmmConfig,
    corpus_features,
    enroll,
    rank,
    run_experiment,
    utterance_formants,
)
from .exceptions import VocalTractError
from .formants import FormantFilterConfig, extract_formants
from .hmm import Codebook, HmmModel
from .lpc import area_to_predictor, frequency_response, read_area_file
from .signals import read_wav
from .style import STYLES, generate_corpus, load_corpus, save_corpus

ENROLLMENT_FILE = "enrollment.json"


class CliError(Exception):
    pass


def _ints(text):
    try:
        return [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _styles(text):
    names = [t.strip().lower() for t in str(text).split(",") if t.strip()]
    valid = {s.value for s in STYLES}
    bad = [n for n in names if n not in valid]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown style(s) {bad or text!r}; choose from {sorted(valid)}")
    return names


def _opt_int(text):
    if text is None or str(text).lower() in ("none", ""):
        return None
    return int(text)


# (flag, dest, type, default, help); type None means store_true
SYNTH_OPTS = [
    ("--seed", "seed", int, 0, "master seed for all randomness"),
    ("--speakers", "speakers", int, 9, "number of speakers"),
    ("--reps", "reps", int, 9, "repetitions per speaker and style"),
    ("--styles", "styles", _styles, [s.value for s in STYLES], "comma-separated styles"),
    ("--duration", "duration", float, 0.5, "Normal-rate utterance duration in seconds"),
    ("--sample-rate", "sample_rate", float, 8000.0, "sample rate in Hz"),
    ("--speaker-scatter", "speaker_scatter", float, 0.20, "relative per-section area scatter between speakers"),
    ("--intra-jitter", "intra_jitter", float, 0.02, "relative per-utterance area jitter within a speaker"),
    ("--noise-level", "noise_level", float, 0.0, "additive white noise relative to peak"),
    ("--unvoiced", "unvoiced", None, False, "use white-noise excitation instead of an impulse train"),
]

FEATURE_OPTS = [
    ("--order", "order", int, 8, "LPC order"),
    ("--num-ceps", "num_ceps", int, 12, "cepstral coefficients per frame"),
    ("--frame-ms", "frame_ms", float, 30.0, "frame length in ms"),
    ("--hop-ms", "hop_ms", float, 10.0, "frame hop in ms"),
    ("--pre-emphasis", "pre_emphasis", float, 0.95, "pre-emphasis coefficient for recognition features"),
]

RECOGNIZER_OPTS = [
    ("--recognizer", "recognizer", str, "dtw", "dtw or hmm"),
    ("--train-reps", "train_reps", _ints, [0, 1, 2, 3, 4], "Normal repetitions used for enrollment"),
    ("--band-radius", "band_radius", _opt_int, None, "Sakoe-Chiba band radius for DTW (none = off)"),
    ("--hmm-states", "hmm_states", int, 5, "HMM states"),
    ("--codebook-size", "codebook_size", int, 32, "VQ codebook size"),
    ("--hmm-iters", "hmm_iters", int, 15, "Baum-Welch iterations"),
    ("--topology", "topology", str, "left-right", "HMM topology: left-right or ergodic"),
]

ANALYZE_OPTS = [
    ("--area", "area", str, None, "area-function file (one area per line, glottis first); bypasses estimation"),
    ("--sample-rate", "sample_rate", float, 8000.0, "sample rate for --area input"),
    ("--order", "order", int, 8, "LPC order for WAV input"),
    ("--frame-ms", "frame_ms", float, 30.0, "frame length in ms"),
    ("--hop-ms", "hop_ms", float, 10.0, "frame hop in ms"),
    ("--pre-emphasis", "pre_emphasis", float, 0.0, "pre-emphasis before formant estimation"),
    ("--num-ceps", "num_ceps", int, 12, "cepstral coefficients per frame"),
    ("--min-freq", "min_freq", float, 50.0, "drop formants below this frequency (Hz)"),
    ("--max-bandwidth", "max_bandwidth", float, 700.0, "drop formants wider than this (Hz)"),
    ("--out", "out", str, None, "formant CSV path (default: stdout)"),
    ("--cepstra", "cepstra", str, None, "also write per-frame cepstral features to this CSV"),
    ("--response", "response", str, None, "also write the model's frequency response (plot data) to this CSV"),
    ("--response-points", "response_points", int, 257, "frequency-response grid size"),
]


def _add_opts(parser, opts):
    for flag, dest, typ, default, text in opts:
        shown = ",".join(map(str, default)) if isinstance(default, list) else default
        help_text = f"{text} (default: {shown})"
        if typ is None:
            parser.add_argument(flag, dest=dest, action="store_true", default=argparse.SUPPRESS, help=help_text)
        else:
            parser.add_argument(flag, dest=dest, type=typ, default=argparse.SUPPRESS, help=help_text)


def build_parser():
    p = argparse.ArgumentParser(prog="vocaltract", description="LPC formant analysis and styled-speech speaker identification.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    specs = {}

    def add(name, help_text, opts, extra=None):
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.add_argument("--config", default=None, help="JSON file of option values (default: none)")
        _add_opts(sp, opts)
        if extra:
            extra(sp)
        specs[name] = opts
        return sp

    add(
        "synth-corpus", "synthesize the styled-speech corpus",
        [("--out", "out", str, None, "output corpus directory (required)")] + SYNTH_OPTS,
    )
    add(
        "analyze", "formants (and optionally cepstra) of a WAV or an area-function file",
        ANALYZE_OPTS,
        lambda sp: sp.add_argument("input", nargs="?", help="16-bit mono PCM WAV file"),
    )
    add(
        "enroll", "train DTW templates or codebook+HMMs from a corpus's Normal utterances",
        [
            ("--corpus", "corpus", str, None, "corpus directory (required)"),
            ("--out", "out", str, None, "model directory (required)"),
            ("--seed", "seed", int, 0, "seed for codebook and HMM initialization"),
        ] + RECOGNIZER_OPTS + FEATURE_OPTS,
    )
    add(
        "identify", "rank enrolled speakers for a WAV file",
        [("--models", "models", str, None, "model directory written by enroll (required)"),
         ("--top", "top", int, 0, "print only the best N speakers (0 = all)")],
        lambda sp: sp.add_argument("input", help="16-bit mono PCM WAV file"),
    )
    add(
        "experiment", "train on Normal, test every style, write report.json/report.csv/displacement.csv",
        [
            ("--corpus", "corpus", str, None, "existing corpus directory"),
            ("--synth", "synth", None, False, "synthesize the corpus in memory instead of loading it"),
            ("--out", "out", str, None, "report directory (required)"),
            ("--test-reps", "test_reps", _ints, [5, 6, 7, 8], "repetitions tested in every style"),
        ] + SYNTH_OPTS + RECOGNIZER_OPTS + FEATURE_OPTS,
    )
    return p, specs


def _load_config_file(path, opts, command):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as e:
        raise CliError(f"cannot read config file {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise CliError(f"config file {path} is not valid JSON: {e}") from None
    if not isinstance(data, dict):
        raise CliError(f"config file {path} must hold a JSON object")
    # a config may be shared between subcommands: {"experiment": {...}, ...}
    if command in data and isinstance(data[command], dict):
        data = data[command]
    by_name = {}
    for flag, dest, typ, _, _ in opts:
        by_name[flag[2:]] = (dest, typ)
        by_name[dest] = (dest, typ)
    out = {}
    for key, value in data.items():
        if key not in by_name:
            raise CliError(f"config file {path}: unknown option {key!r}")
        dest, typ = by_name[key]
        if typ is None:
            out[dest] = bool(value)
        elif typ in (_ints, _styles):
            out[dest] = typ(",".join(map(str, value)) if isinstance(value, list) else value)
        else:
            out[dest] = value if value is None else typ(value)
    return out


def resolve(args, opts, command):
    """Merge defaults, config file and explicit flags (in that order)."""
    resolved = {dest: default for _, dest, _, default, _ in opts}
    if args.config:
        resolved.update(_load_config_file(args.config, opts, command))
    given = {k: v for k, v in vars(args).items() if k not in ("config", "command")}
    resolved.update(given)
    return resolved


def _echo(command, cfg):
    print(f"# {command} resolved config: {json.dumps(cfg, sort_keys=True)}", file=sys.stderr)


def _require(cfg, *names):
    for n in names:
        if cfg.get(n) in (None, ""):
            raise CliError(f"--{n.replace('_', '-')} is required")


def _corpus_kwargs(cfg):
    return dict(
        speakers=cfg["speakers"],
        repetitions=cfg["reps"],
        styles=cfg["styles"],
        seed=cfg["seed"],
        sample_rate_hz=cfg["sample_rate"],
        duration_s=cfg["duration"],
        speaker_scatter=cfg["speaker_scatter"],
        intra_speaker_jitter=cfg["intra_jitter"],
        noise_level=cfg["noise_level"],
        unvoiced=cfg["unvoiced"],
    )


def _feature_config(cfg):
    return FeatureConfig(cfg["order"], cfg["num_ceps"], cfg["frame_ms"], cfg["hop_ms"], cfg["pre_emphasis"])


def _experiment_config(cfg, test_reps):
    return ExperimentConfig(
        recognizer=cfg["recognizer"],
        train_repetitions=tuple(cfg["train_reps"]),
        test_repetitions=tuple(test_reps),
        features=_feature_config(cfg),
        dtw=DtwConfig(band_radius=cfg["band_radius"]),
        hmm=HmmConfig(cfg["hmm_states"], cfg["codebook_size"], cfg["hmm_iters"], cfg["topology"]),
        master_seed=cfg["seed"],
    )


def cmd_synth_corpus(cfg):
    _require(cfg, "out")
    corpus = generate_corpus(**_corpus_kwargs(cfg))
    try:
        os.makedirs(cfg["out"], exist_ok=True)
    except OSError as e:
        raise CliError(f"cannot create {cfg['out']}: {e.strerror}") from None
    save_corpus(corpus, cfg["out"])
    print(f"wrote {len(corpus)} utterances to {cfg['out']}")
    return 0


def cmd_analyze(cfg):
    if bool(cfg["area"]) == bool(cfg.get("input")):
        raise CliError("give exactly one of a WAV input or --area FILE")
    filt = FormantFilterConfig(min_freq_hz=cfg["min_freq"], max_bandwidth_hz=cfg["max_bandwidth"])
    if cfg["area"]:
        fs = cfg["sample_rate"]
        poly = area_to_predictor(read_area_file(cfg["area"]))
        fset = extract_formants(poly, fs, filt)
        if cfg["cepstra"]:
            raise CliError("--cepstra needs a WAV input")
    else:
        w = read_wav(cfg["input"])
        fs = w.sample_rate_hz
        fc = FeatureConfig(cfg["order"], cfg["num_ceps"], cfg["frame_ms"], cfg["hop_ms"], cfg["pre_emphasis"])
        fset, poly = utterance_formants(w, fc, filt, return_polynomial=True)
        if cfg["cepstra"]:
            feats = waveform_features(w, cfg["order"], cfg["num_ceps"], cfg["frame_ms"], cfg["hop_ms"], cfg["pre_emphasis"])
            atomic_write_text(cfg["cepstra"], features_to_csv(feats))
    if cfg["response"]:
        freqs, db = frequency_response(poly, cfg["response_points"], fs)
        rows = ["frequency_hz,magnitude_db"] + [f"{f!r},{d!r}" for f, d in zip(freqs.tolist(), db.tolist())]
        atomic_write_text(cfg["response"], "\n".join(rows) + "\n")
    text = fset.to_csv()
    if cfg["out"]:
        atomic_write_text(cfg["out"], text)
    else:
        sys.stdout.write(text)
    return 0


def _load_corpus_dir(path):
    if not os.path.isdir(path):
        raise CliError(f"corpus directory {path} does not exist")
    return load_corpus(path)


def cmd_enroll(cfg):
    _require(cfg, "corpus", "out")
    corpus = _load_corpus_dir(cfg["corpus"])
    # enrollment never tests; any repetition outside the training set will do
    spare = max(cfg["train_reps"]) + 1
    ecfg = _experiment_config(cfg, [spare])
    enrolled = enroll(corpus, ecfg, corpus_features(corpus, ecfg.features))
    doc = {"kind": enrolled["kind"], "config": cfg, "experiment": ecfg.to_dict()}
    if enrolled["kind"] == "dtw":
        doc["templates"] = {s: [t.tolist() for t in ts] for s, ts in enrolled["templates"].items()}
    else:
        doc["codebook"] = enrolled["codebook"].to_dict()
        doc["models"] = {s: m.to_dict() for s, m in enrolled["models"].items()}
    os.makedirs(cfg["out"], exist_ok=True)
    atomic_write_text(os.path.join(cfg["out"], ENROLLMENT_FILE), dump_json(doc))
    print(f"enrolled {len(corpus.speaker_ids)} speakers ({enrolled['kind']}) into {cfg['out']}")
    return 0


def load_enrollment(model_dir):
    path = os.path.join(model_dir, ENROLLMENT_FILE)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise CliError(f"no trained models in {model_dir} (missing {ENROLLMENT_FILE}; run enroll first)") from None
    except json.JSONDecodeError as e:
        raise CliError(f"{path} is not valid JSON: {e}") from None
    ecfg = ExperimentConfig.from_dict(doc["experiment"])
    if doc["kind"] == "dtw":
        enrolled = {"kind": "dtw", "templates": {s: [np.array(t) for t in ts] for s, ts in doc["templates"].items()}}
    else:
        enrolled = {
            "kind": "hmm",
            "codebook": Codebook.from_dict(doc["codebook"]),
            "models": {s: HmmModel.from_dict(m) for s, m in doc["models"].items()},
        }
    return enrolled, ecfg


def cmd_identify(cfg):
    _require(cfg, "models")
    enrolled, ecfg = load_enrollment(cfg["models"])
    w = read_wav(cfg["input"])
    fc = ecfg.features
    feats = waveform_features(w, fc.order, fc.num_ceps, fc.frame_ms, fc.hop_ms, fc.pre_emphasis)
    ranked = rank(enrolled, feats, ecfg)
    if cfg["top"]:
        ranked = ranked[: cfg["top"]]
    label = "distance" if enrolled["kind"] == "dtw" else "log_likelihood"
    print(f"rank,speaker,{label}")
    for i, (spk, score) in enumerate(ranked, 1):
        print(f"{i},{spk},{score!r}")
    return 0


def cmd_experiment(cfg):
    _require(cfg, "out")
    if bool(cfg["synth"]) == bool(cfg["corpus"]):
        raise CliError("give exactly one of --corpus DIR or --synth")
    corpus = generate_corpus(**_corpus_kwargs(cfg)) if cfg["synth"] else _load_corpus_dir(cfg["corpus"])
    report = run_experiment(corpus, _experiment_config(cfg, cfg["test_reps"]))
    # where the report lands is not part of the experiment
    report.config["cli"] = {k: v for k, v in cfg.items() if k != "out"}
    report.write(cfg["out"])
    print(report.table())
    return 0


COMMANDS = {
    "synth-corpus": cmd_synth_corpus,
    "analyze": cmd_analyze,
    "enroll": cmd_enroll,
    "identify": cmd_identify,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    parser, specs = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    try:
        opts = specs[command]
        cfg = resolve(args, opts, command)
        _echo(command, cfg)
        return COMMANDS[command](cfg)
    except (CliError, VocalTractError, OSError) as e:
        msg = e.strerror + f": {e.filename}" if isinstance(e, OSError) and e.filename else str(e)
        print(f"vocaltract {command}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
