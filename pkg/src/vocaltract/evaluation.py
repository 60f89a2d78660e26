"""Styled-speech speaker identification experiments.

Models are enrolled from Normal-style training repetitions only, then every
test repetition of every style is identified. Results are reported per style
together with the formant displacement of that style.
"""

from __future__ import annotations

import csv
import io
import os
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from ._io import atomic_write_text, dump_json
from .cepstra import DEFAULT_NUM_CEPS, waveform_features
from .dtw import DtwConfig, dtw_rank
from .exceptions import VocalTractError
from .formants import Formant, FormantFilterConfig, FormantSet, extract_formants, formant_displacement
from .hmm import baum_welch_train, hmm_rank, quantize, train_codebook
from .lpc import levinson_durbin
from .signals import frame_ms, pre_emphasize, window_hamming, autocorrelate
from .style import STYLES, Corpus, TalkingStyle

_CODEBOOK_DOMAIN = 11
_HMM_DOMAIN = 12


@dataclass(frozen=True)
class FeatureConfig:
    order: int = 8
    num_ceps: int = DEFAULT_NUM_CEPS
    frame_ms: float = 30.0
    hop_ms: float = 10.0
    pre_emphasis: float = 0.95


# Formant measurement skips pre-emphasis: the synthetic impulse-train source
# has no glottal tilt, and the extra zero pulls order-8 fits off F1.
ANALYSIS_CONFIG = FeatureConfig(pre_emphasis=0.0)


@dataclass(frozen=True)
class HmmConfig:
    n_states: int = 5
    codebook_size: int = 32
    iters: int = 15
    topology: str = "left-right"
    emission_floor: float = 1e-6


@dataclass(frozen=True)
class ExperimentConfig:
    recognizer: str = "dtw"
    train_repetitions: tuple = (0, 1, 2, 3, 4)
    test_repetitions: tuple = (5, 6, 7, 8)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    analysis: FeatureConfig = field(default_factory=lambda: ANALYSIS_CONFIG)
    dtw: DtwConfig = field(default_factory=DtwConfig)
    hmm: HmmConfig = field(default_factory=HmmConfig)
    master_seed: int = 0
    allow_overlap: bool = False

    def __post_init__(self):
        if self.recognizer not in ("dtw", "hmm"):
            raise VocalTractError(f"recognizer must be 'dtw' or 'hmm', got {self.recognizer!r}")
        object.__setattr__(self, "train_repetitions", tuple(int(r) for r in self.train_repetitions))
        object.__setattr__(self, "test_repetitions", tuple(int(r) for r in self.test_repetitions))
        if not self.train_repetitions or not self.test_repetitions:
            raise VocalTractError("train and test repetition sets must be non-empty")
        if not self.allow_overlap and set(self.train_repetitions) & set(self.test_repetitions):
            raise VocalTractError("train and test repetitions overlap")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["train_repetitions"] = list(self.train_repetitions)
        d["test_repetitions"] = list(self.test_repetitions)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        for key in ("features", "analysis"):
            if key in d:
                d[key] = FeatureConfig(**d[key])
        if "dtw" in d:
            d["dtw"] = DtwConfig(**d["dtw"])
        if "hmm" in d:
            d["hmm"] = HmmConfig(**d["hmm"])
        return cls(**d)


@dataclass
class StyleReport:
    """Per-style recognition rates, confusion matrices and displacements."""

    speakers: list
    rates: dict
    counts: dict
    confusion: dict
    displacement: dict
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "speakers": list(self.speakers),
            "styles": [s for s in self.rates],
            "rates": self.rates,
            "counts": self.counts,
            "confusion": self.confusion,
            "displacement": self.displacement,
        }

    def to_json(self) -> str:
        return dump_json(self.to_dict())

    def rates_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["style", "rate"])
        for style, rate in self.rates.items():
            w.writerow([style, f"{rate:.6f}"])
        return buf.getvalue()

    def displacement_csv(self) -> str:
        return displacement_csv(self.displacement)

    def table(self) -> str:
        styles = list(self.rates)
        head = "Style            " + "".join(f"{s.capitalize():>9}" for s in styles)
        row = "Recognition rate " + "".join(f"{100 * self.rates[s]:>8.0f}%" for s in styles)
        return head + "\n" + row

    def write(self, out_dir) -> None:
        os.makedirs(out_dir, exist_ok=True)
        atomic_write_text(os.path.join(out_dir, "report.json"), self.to_json())
        atomic_write_text(os.path.join(out_dir, "report.csv"), self.rates_csv())
        atomic_write_text(os.path.join(out_dir, "displacement.csv"), self.displacement_csv())


def displacement_csv(table: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["style", "mean_displacement", "f1_displacement", "n_utterances"])
    for style, row in table.items():
        w.writerow([style, f"{row['mean_displacement']:.6f}", f"{row['f1_displacement']:.6f}", row["n_utterances"]])
    return buf.getvalue()


def corpus_features(corpus: Corpus, fc: FeatureConfig) -> dict:
    """Cepstral feature matrix for every utterance key."""
    return {
        key: waveform_features(u.waveform, fc.order, fc.num_ceps, fc.frame_ms, fc.hop_ms, fc.pre_emphasis)
        for key, u in sorted(corpus.utterances.items(), key=lambda kv: (kv[0][0], STYLES.index(kv[0][1]), kv[0][2]))
    }


def _seed_rng(master_seed, *key):
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))


def _enroll_dtw(feats, speakers, train_reps):
    return {
        spk: [feats[(spk, TalkingStyle.NORMAL, r)] for r in train_reps]
        for spk in speakers
    }


def enroll(corpus: Corpus, cfg: ExperimentConfig, feats: dict | None = None):
    """Train per-speaker templates (DTW) or codebook + HMMs on Normal training reps.

    Returns a dict with ``kind`` plus ``templates`` or ``codebook``/``models``.
    """
    feats = corpus_features(corpus, cfg.features) if feats is None else feats
    speakers = corpus.speaker_ids
    for spk in speakers:
        missing = [r for r in cfg.train_repetitions if (spk, TalkingStyle.NORMAL, r) not in feats]
        if missing:
            raise VocalTractError(f"speaker {spk}: no Normal-style training repetitions {missing}")
    if cfg.recognizer == "dtw":
        return {"kind": "dtw", "templates": _enroll_dtw(feats, speakers, cfg.train_repetitions)}
    hc = cfg.hmm
    train = np.vstack([feats[(s, TalkingStyle.NORMAL, r)] for s in speakers for r in cfg.train_repetitions])
    n_distinct = len(np.unique(train, axis=0))
    cb = train_codebook(train, min(hc.codebook_size, n_distinct), _seed_rng(cfg.master_seed, _CODEBOOK_DOMAIN))
    models = {}
    for i, spk in enumerate(speakers):
        seqs = [quantize(feats[(spk, TalkingStyle.NORMAL, r)], cb) for r in cfg.train_repetitions]
        m = baum_welch_train(
            seqs, hc.n_states, cb.size, hc.iters, _seed_rng(cfg.master_seed, _HMM_DOMAIN, i),
            topology=hc.topology, floor=hc.emission_floor,
        )
        models[spk] = m
    return {"kind": "hmm", "codebook": cb, "models": models}


def rank(enrolled: dict, features, cfg: ExperimentConfig) -> list:
    """Speakers ranked best first for one feature matrix."""
    if enrolled["kind"] == "dtw":
        return dtw_rank(features, enrolled["templates"], cfg.dtw)
    return hmm_rank(quantize(features, enrolled["codebook"]), enrolled["models"])


def run_experiment(corpus: Corpus, cfg: ExperimentConfig, with_displacement: bool = True) -> StyleReport:
    feats = corpus_features(corpus, cfg.features)
    enrolled = enroll(corpus, cfg, feats)
    speakers = corpus.speaker_ids
    index = {s: i for i, s in enumerate(speakers)}
    rates, counts, confusion = {}, {}, {}
    for style in corpus.styles:
        conf = np.zeros((len(speakers), len(speakers)), dtype=int)
        for spk in speakers:
            for r in cfg.test_repetitions:
                key = (spk, style, r)
                if key not in feats:
                    raise VocalTractError(f"missing test utterance {spk}/{style}/{r}")
                guess = rank(enrolled, feats[key], cfg)[0][0]
                conf[index[spk], index[guess]] += 1
        total = int(conf.sum())
        correct = int(np.trace(conf))
        rates[style.value] = correct / total
        counts[style.value] = {"correct": correct, "total": total}
        confusion[style.value] = conf.tolist()
    disp = displacement_summary(corpus, cfg.analysis) if with_displacement else {}
    config = {"experiment": cfg.to_dict(), "corpus": corpus.config, "corpus_seed": corpus.seed}
    return StyleReport(speakers, rates, counts, confusion, disp, config)


# ---------------------------------------------------------------------------
# formant displacement


def utterance_formants(
    waveform,
    fc: FeatureConfig = ANALYSIS_CONFIG,
    filt: FormantFilterConfig = FormantFilterConfig(),
    return_polynomial: bool = False,
):
    """Formants from one LPC fit to the pooled autocorrelation of the central half of the frames."""
    frames = frame_ms(pre_emphasize(waveform, fc.pre_emphasis), fc.frame_ms, fc.hop_ms)
    if not frames:
        raise VocalTractError("waveform too short for formant analysis")
    n = len(frames)
    mid = frames[n // 4 : max(n // 4 + 1, (3 * n) // 4)]
    r = sum(autocorrelate(window_hamming(f), fc.order) for f in mid)
    poly, _, _ = levinson_durbin(r)
    fset = extract_formants(poly, waveform.sample_rate_hz, filt)
    return (fset, poly) if return_polynomial else fset


def _mean_formants(sets, sample_rate_hz):
    sets = [s for s in sets if len(s)]
    if not sets:
        return FormantSet((), sample_rate_hz)
    # average over the most common formant count (ties: larger count)
    common = max(Counter(len(s) for s in sets).items(), key=lambda kv: (kv[1], kv[0]))[0]
    same = [s for s in sets if len(s) == common]
    f = np.mean([s.frequencies for s in same], axis=0)
    b = np.mean([s.bandwidths for s in same], axis=0)
    return FormantSet(tuple(Formant(float(x), float(y)) for x, y in zip(f, b)), sample_rate_hz)


def displacement_summary(corpus: Corpus, fc: FeatureConfig = ANALYSIS_CONFIG, filt: FormantFilterConfig = FormantFilterConfig()) -> dict:
    """Per-style mean relative formant displacement from each speaker's Normal baseline."""
    if len(corpus) == 0:
        raise VocalTractError("empty corpus")
    fsets = {key: utterance_formants(u.waveform, fc, filt) for key, u in corpus.utterances.items()}
    baselines = {}
    for spk in corpus.speaker_ids:
        normal = [fsets[k] for k in fsets if k[0] == spk and k[1] == TalkingStyle.NORMAL]
        base = _mean_formants(normal, corpus.sample_rate_hz)
        if len(base) == 0:
            raise VocalTractError(f"speaker {spk}: no formants found in Normal-style utterances")
        baselines[spk] = base
    table = {}
    for style in corpus.styles:
        means, f1 = [], []
        for key in sorted(k for k in fsets if k[1] == style):
            fset = fsets[key]
            if len(fset) == 0:
                continue
            rep = formant_displacement(fset, baselines[key[0]])
            means.append(rep.mean_displacement)
            f1.append(float(rep.relative_displacement[0]))
        table[style.value] = {
            "mean_displacement": float(np.mean(means)) if means else float("nan"),
            "f1_displacement": float(np.mean(f1)) if f1 else float("nan"),
            "n_utterances": len(means),
        }
    return table
