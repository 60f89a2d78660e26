"""Synthetic five-style corpus.

Each talking style is a controlled random displacement of the poles of a
speaker's base vocal tract. Utterances are sustained voiced sounds: an
impulse train at the speaker's pitch through the displaced all-pole filter.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np
from scipy.signal import lfilter

from ._io import atomic_write_text, dump_json
from .exceptions import VocalTractError
from .formants import Pole, polynomial_from_poles, polynomial_roots
from .lpc import PredictorPolynomial, area_to_predictor
from .signals import Waveform, read_wav, write_wav

MAX_POLE_RADIUS = 0.998
PEAK_LEVEL = 0.9
DEFAULT_SAMPLE_RATE = 8000.0
DEFAULT_DURATION_S = 0.5
DEFAULT_SPEAKERS = 9
DEFAULT_REPETITIONS = 9


class TalkingStyle(str, Enum):
    NORMAL = "normal"
    SHOUT = "shout"
    SLOW = "slow"
    LOUD = "loud"
    SOFT = "soft"

    def __str__(self):
        return self.value

    @classmethod
    def parse(cls, name) -> "TalkingStyle":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            valid = ", ".join(s.value for s in cls)
            raise VocalTractError(f"unknown talking style {name!r} (expected one of {valid})") from None


STYLES = tuple(TalkingStyle)


@dataclass(frozen=True)
class StyleProfile:
    """How far a style moves the poles away from the speaker's normal tract.

    ``angle_jitter_rad`` bounds the per-pair angle shift, ``radius_jitter``
    the relative radius change; ``rate_factor`` scales utterance duration.
    """

    angle_jitter_rad: float
    radius_jitter: float
    rate_factor: float = 1.0
    gain_factor: float = 1.0

    def __post_init__(self):
        if self.angle_jitter_rad < 0 or self.radius_jitter < 0:
            raise VocalTractError("jitters must be non-negative")
        if not self.radius_jitter < 1:
            raise VocalTractError("radius_jitter must be < 1")
        if not self.rate_factor > 0 or not self.gain_factor > 0:
            raise VocalTractError("rate_factor and gain_factor must be positive")


DEFAULT_PROFILES = {
    TalkingStyle.NORMAL: StyleProfile(0.0, 0.0, 1.0, 1.0),
    TalkingStyle.SHOUT: StyleProfile(0.12, 0.06, 0.9, 2.5),
    TalkingStyle.LOUD: StyleProfile(0.08, 0.04, 0.95, 1.8),
    TalkingStyle.SOFT: StyleProfile(0.03, 0.02, 1.0, 0.6),
    TalkingStyle.SLOW: StyleProfile(0.015, 0.01, 1.5, 1.0),
}

# Loudest default style; output peak is 0.9 * gain_factor / REFERENCE_GAIN.
REFERENCE_GAIN = 2.5

# Nine-section area function (glottis first) of the shared test word. Its
# four resonances (about 460/1570/2540/3080 Hz, bandwidths 50-215 Hz at 8 kHz)
# stay inside the default formant filter under +-20% per-section scatter.
WORD_AREAS = (4.3, 4.2, 1.6, 2.5, 1.2, 3.3, 3.6, 3.0, 0.6)

# three adult males then six adult females
_PITCH_RANGES = ((100.0, 140.0),) * 3 + ((180.0, 250.0),) * 6

_SPEAKER_DOMAIN = 1
_UTTERANCE_DOMAIN = 2


@dataclass(frozen=True)
class SpeakerSpec:
    id: str
    base_areas: tuple
    pitch_hz: float
    intra_speaker_jitter: float = 0.02

    def __post_init__(self):
        areas = tuple(float(a) for a in self.base_areas)
        if len(areas) < 2 or any(not (a > 0 and math.isfinite(a)) for a in areas):
            raise VocalTractError(f"speaker {self.id}: areas must be >= 2 positive values")
        if not 60.0 <= self.pitch_hz <= 400.0:
            raise VocalTractError(f"speaker {self.id}: pitch {self.pitch_hz} Hz outside [60, 400]")
        if self.intra_speaker_jitter < 0:
            raise VocalTractError("intra_speaker_jitter must be non-negative")
        object.__setattr__(self, "base_areas", areas)
        object.__setattr__(self, "pitch_hz", float(self.pitch_hz))

    @property
    def base_polynomial(self) -> PredictorPolynomial:
        return area_to_predictor(self.base_areas)


@dataclass(frozen=True)
class Utterance:
    speaker_id: str
    style: TalkingStyle
    repetition: int
    waveform: Waveform
    filter: PredictorPolynomial  # exact synthesis filter


@dataclass
class Corpus:
    """Utterances keyed by ``(speaker_id, style, repetition)``."""

    sample_rate_hz: float
    speakers: list
    profiles: dict
    seed: int | None = None
    utterances: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def add(self, utt: Utterance) -> None:
        key = (utt.speaker_id, utt.style, utt.repetition)
        if key in self.utterances:
            raise VocalTractError(f"duplicate utterance {key}")
        self.utterances[key] = utt

    def __len__(self):
        return len(self.utterances)

    def __iter__(self):
        return iter(self.utterances[k] for k in sorted(self.utterances, key=_key_order))

    def get(self, speaker_id, style, repetition) -> Utterance:
        return self.utterances[(speaker_id, TalkingStyle.parse(style), repetition)]

    @property
    def speaker_ids(self) -> list:
        return sorted({k[0] for k in self.utterances})

    @property
    def styles(self) -> list:
        present = {k[1] for k in self.utterances}
        return [s for s in STYLES if s in present]

    def repetitions(self, speaker_id, style) -> list:
        style = TalkingStyle.parse(style)
        return sorted(k[2] for k in self.utterances if k[0] == speaker_id and k[1] == style)

    def select(self, speaker_id=None, style=None, repetitions=None) -> list:
        style = None if style is None else TalkingStyle.parse(style)
        reps = None if repetitions is None else set(repetitions)
        return [
            u
            for u in self
            if (speaker_id is None or u.speaker_id == speaker_id)
            and (style is None or u.style == style)
            and (reps is None or u.repetition in reps)
        ]


def _key_order(key):
    spk, style, rep = key
    return (spk, STYLES.index(style), rep)


def perturb_poles(poles, profile: StyleProfile, rng: np.random.Generator) -> list:
    """Displace each pole (conjugate pairs jointly) within the profile's bounds.

    Upper-half-plane poles get an angle shift in ``[-angle_jitter, +angle_jitter]``
    and a radius factor in ``[1 - radius_jitter, 1 + radius_jitter]``; their
    conjugates follow. Real poles only have their radius scaled. Radii are
    clamped to ``MAX_POLE_RADIUS``, angles kept inside ``(0, pi)``.
    """
    poles = [p if isinstance(p, Pole) else Pole.from_complex(p) for p in poles]
    if any(p.radius >= 1 for p in poles):
        raise VocalTractError("perturb_poles expects poles strictly inside the unit circle")
    upper = sorted((p for p in poles if p.imag_part > 0), key=lambda p: (p.angle_rad, p.radius))
    real = sorted((p for p in poles if p.imag_part == 0), key=lambda p: p.real_part)
    n_lower = sum(1 for p in poles if p.imag_part < 0)
    if n_lower != len(upper):
        raise VocalTractError("complex poles must come in conjugate pairs")
    if profile.angle_jitter_rad == 0 and profile.radius_jitter == 0:
        return list(poles)

    eps = 1e-3
    out = []
    for p in upper:
        d_theta = rng.uniform(-profile.angle_jitter_rad, profile.angle_jitter_rad)
        scale = 1.0 + rng.uniform(-profile.radius_jitter, profile.radius_jitter)
        theta = min(max(p.angle_rad + d_theta, eps), math.pi - eps)
        r = min(p.radius * scale, MAX_POLE_RADIUS)
        z = r * complex(math.cos(theta), math.sin(theta))
        while abs(z) > MAX_POLE_RADIUS:  # polar round trip can overshoot by an ulp
            z *= 1.0 - 2.0**-52
        out.append(Pole(z.real, z.imag))
        out.append(Pole(z.real, -z.imag))
    for p in real:
        scale = 1.0 + rng.uniform(-profile.radius_jitter, profile.radius_jitter)
        r = min(abs(p.real_part) * scale, MAX_POLE_RADIUS)
        out.append(Pole(math.copysign(r, p.real_part) if p.real_part else 0.0, 0.0))
    return out


def _impulse_train(n, pitch_hz, sample_rate_hz, rng, period_jitter):
    x = np.zeros(n)
    t = float(rng.uniform(0, sample_rate_hz / pitch_hz))
    period = sample_rate_hz / pitch_hz
    while t < n:
        x[int(t)] = 1.0
        t += period * (1.0 + (rng.uniform(-period_jitter, period_jitter) if period_jitter else 0.0))
    return x


def utterance_filter(
    spk: SpeakerSpec,
    profile: StyleProfile,
    rng: np.random.Generator,
    intra_jitter: float | None = None,
) -> PredictorPolynomial:
    """Synthesis filter for one utterance: jittered base tract, then displaced poles."""
    jitter = spk.intra_speaker_jitter if intra_jitter is None else intra_jitter
    areas = np.asarray(spk.base_areas)
    if jitter > 0:
        areas = areas * (1.0 + rng.uniform(-jitter, jitter, size=areas.size))
    base = area_to_predictor(areas)
    if profile.angle_jitter_rad == 0 and profile.radius_jitter == 0:
        return base
    displaced = perturb_poles(polynomial_roots(base), profile, rng)
    return polynomial_from_poles(displaced)


def synthesize_utterance(
    spk: SpeakerSpec,
    style,
    duration_s: float = DEFAULT_DURATION_S,
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE,
    rng: np.random.Generator | None = None,
    profiles: dict | None = None,
    pitch_jitter: float = 0.01,
    unvoiced: bool = False,
    noise_level: float = 0.0,
    return_filter: bool = False,
):
    """Render one utterance of ``spk`` in ``style``.

    Duration is ``duration_s * rate_factor``. The impulse train period varies
    by up to ``pitch_jitter`` (relative) pulse to pulse. ``unvoiced`` swaps in
    white-noise excitation; ``noise_level`` adds white noise relative to the
    output peak.
    """
    if not duration_s > 0:
        raise VocalTractError("duration_s must be positive")
    style = TalkingStyle.parse(style)
    profile = (profiles or DEFAULT_PROFILES)[style]
    rng = np.random.default_rng() if rng is None else rng
    poly = utterance_filter(spk, profile, rng)
    n = max(1, int(round(duration_s * profile.rate_factor * sample_rate_hz)))
    if unvoiced:
        excitation = rng.standard_normal(n)
    else:
        excitation = _impulse_train(n, spk.pitch_hz, sample_rate_hz, rng, pitch_jitter)
    y = lfilter([1.0], poly.denominator, excitation)
    peak = np.max(np.abs(y))
    if peak > 0:
        y = y / peak
    if noise_level > 0:
        y = y + noise_level * rng.standard_normal(n)
        y = y / np.max(np.abs(y))
    level = PEAK_LEVEL * min(1.0, profile.gain_factor / REFERENCE_GAIN)
    w = Waveform(level * y, sample_rate_hz)
    return (w, poly) if return_filter else w


def make_speakers(
    n: int,
    rng: np.random.Generator,
    scatter: float = 0.20,
    intra_speaker_jitter: float = 0.02,
    word_areas=WORD_AREAS,
) -> list:
    """Speaker tracts scattered by +-``scatter`` (relative, per section) around ``word_areas``.

    Every speaker says the same word, so identity lives in the scatter and
    in the pitch (three male-range speakers, then female-range ones).
    """
    template = np.asarray(word_areas, dtype=float)
    speakers = []
    width = max(2, len(str(n)))
    for i in range(n):
        areas = template * (1.0 + rng.uniform(-scatter, scatter, size=template.size))
        lo, hi = _PITCH_RANGES[i % len(_PITCH_RANGES)]
        speakers.append(
            SpeakerSpec(
                id=f"spk{i + 1:0{width}d}",
                base_areas=tuple(float(a) for a in areas),
                pitch_hz=float(rng.uniform(lo, hi)),
                intra_speaker_jitter=intra_speaker_jitter,
            )
        )
    return speakers


def utterance_rng(master_seed: int, speaker_index: int, style: TalkingStyle, repetition: int):
    """Generator that depends only on (seed, speaker, style, repetition)."""
    ss = np.random.SeedSequence(
        master_seed, spawn_key=(_UTTERANCE_DOMAIN, speaker_index, STYLES.index(style), repetition)
    )
    return np.random.default_rng(ss)


def generate_corpus(
    speakers: int = DEFAULT_SPEAKERS,
    repetitions: int = DEFAULT_REPETITIONS,
    styles=STYLES,
    seed: int = 0,
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE,
    duration_s: float = DEFAULT_DURATION_S,
    profiles: dict | None = None,
    speaker_scatter: float = 0.20,
    intra_speaker_jitter: float = 0.02,
    pitch_jitter: float = 0.01,
    noise_level: float = 0.0,
    unvoiced: bool = False,
    word_areas=WORD_AREAS,
) -> Corpus:
    """Synthesize ``speakers x styles x repetitions`` utterances from one master seed."""
    if speakers < 1 or repetitions < 1:
        # a single speaker/repetition is allowed for degenerate experiments
        raise VocalTractError("speakers and repetitions must be >= 1")
    styles = [TalkingStyle.parse(s) for s in styles]
    if len(set(styles)) != len(styles) or not styles:
        raise VocalTractError("styles must be a non-empty set")
    styles = [s for s in STYLES if s in styles]
    profiles = {**DEFAULT_PROFILES, **{TalkingStyle.parse(k): v for k, v in (profiles or {}).items()}}
    spk_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_SPEAKER_DOMAIN,)))
    specs = make_speakers(speakers, spk_rng, speaker_scatter, intra_speaker_jitter, word_areas)
    config = dict(
        speakers=speakers,
        repetitions=repetitions,
        styles=[s.value for s in styles],
        seed=seed,
        sample_rate_hz=sample_rate_hz,
        duration_s=duration_s,
        speaker_scatter=speaker_scatter,
        intra_speaker_jitter=intra_speaker_jitter,
        pitch_jitter=pitch_jitter,
        noise_level=noise_level,
        unvoiced=unvoiced,
        word_areas=[float(a) for a in word_areas],
    )
    corpus = Corpus(sample_rate_hz, specs, profiles, seed, config=config)
    for si, spk in enumerate(specs):
        for style in styles:
            for rep in range(repetitions):
                rng = utterance_rng(seed, si, style, rep)
                w, poly = synthesize_utterance(
                    spk,
                    style,
                    duration_s,
                    sample_rate_hz,
                    rng,
                    profiles=profiles,
                    pitch_jitter=pitch_jitter,
                    unvoiced=unvoiced,
                    noise_level=noise_level,
                    return_filter=True,
                )
                corpus.add(Utterance(spk.id, style, rep, w, poly))
    return corpus


# ---------------------------------------------------------------------------
# persistence: corpus/<speaker>/<style>/<rep>.wav + manifest.json


def manifest(corpus: Corpus) -> dict:
    return {
        "seed": corpus.seed,
        "sample_rate_hz": corpus.sample_rate_hz,
        "config": corpus.config,
        "profiles": {s.value: asdict(p) for s, p in sorted(corpus.profiles.items(), key=lambda kv: STYLES.index(kv[0]))},
        "speakers": [
            {
                "id": s.id,
                "base_areas": list(s.base_areas),
                "pitch_hz": s.pitch_hz,
                "intra_speaker_jitter": s.intra_speaker_jitter,
            }
            for s in corpus.speakers
        ],
        "utterances": [
            {
                "speaker": u.speaker_id,
                "style": u.style.value,
                "repetition": u.repetition,
                "path": f"{u.speaker_id}/{u.style.value}/{u.repetition}.wav",
                "num_samples": len(u.waveform),
                "filter_coeffs": u.filter.coeffs.tolist(),
            }
            for u in corpus
        ],
    }


def save_corpus(corpus: Corpus, root) -> str:
    """Write WAVs and ``manifest.json`` under ``root``; returns the manifest path."""
    root = os.fspath(root)
    for u in corpus:
        d = os.path.join(root, u.speaker_id, u.style.value)
        os.makedirs(d, exist_ok=True)
        write_wav(os.path.join(d, f"{u.repetition}.wav"), u.waveform)
    path = os.path.join(root, "manifest.json")
    atomic_write_text(path, dump_json(manifest(corpus)))
    return path


def load_corpus(root) -> Corpus:
    root = os.fspath(root)
    path = os.path.join(root, "manifest.json")
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise VocalTractError(f"{root}: no manifest.json (not a corpus directory)") from None
    speakers = [
        SpeakerSpec(s["id"], tuple(s["base_areas"]), s["pitch_hz"], s["intra_speaker_jitter"])
        for s in data["speakers"]
    ]
    profiles = {TalkingStyle.parse(k): StyleProfile(**v) for k, v in data["profiles"].items()}
    corpus = Corpus(data["sample_rate_hz"], speakers, profiles, data.get("seed"), config=data.get("config", {}))
    for u in data["utterances"]:
        w = read_wav(os.path.join(root, u["path"]))
        corpus.add(
            Utterance(
                u["speaker"],
                TalkingStyle.parse(u["style"]),
                int(u["repetition"]),
                w,
                PredictorPolynomial(u["filter_coeffs"]),
            )
        )
    return corpus
