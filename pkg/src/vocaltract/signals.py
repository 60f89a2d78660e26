"""Waveforms, framing, windowing and autocorrelation for LPC analysis.

Also holds the 16-bit PCM mono WAV reader/writer used by the corpus and CLI.
"""

from __future__ import annotations

import os
import tempfile
import wave
from dataclasses import dataclass

import numpy as np

from .exceptions import VocalTractError, WavFormatError

DEFAULT_FRAME_MS = 30.0
DEFAULT_HOP_MS = 10.0
DEFAULT_PRE_EMPHASIS = 0.95

_PCM_SCALE = 32768.0


@dataclass(frozen=True)
class Waveform:
    """Mono audio samples with their sample rate."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 1 or x.size < 1:
            raise VocalTractError("waveform must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(x)):
            raise VocalTractError("waveform samples must be finite")
        if not self.sample_rate_hz > 0:
            raise VocalTractError(f"sample rate must be positive, got {self.sample_rate_hz}")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self):
        return self.samples.size

    @property
    def duration_s(self):
        return self.samples.size / self.sample_rate_hz


@dataclass(frozen=True)
class Frame:
    """A fixed-length slice of a waveform starting at ``start_index``."""

    samples: np.ndarray
    start_index: int = 0

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 1 or x.size < 1:
            raise VocalTractError("frame must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(x)):
            raise VocalTractError("frame samples must be finite")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "start_index", int(self.start_index))

    def __len__(self):
        return self.samples.size


def pre_emphasize(w: Waveform, coeff: float = DEFAULT_PRE_EMPHASIS) -> Waveform:
    """First-order high-pass ``y[n] = x[n] - coeff * x[n-1]`` with ``y[0] = x[0]``."""
    if not 0.0 <= coeff <= 1.0:
        raise VocalTractError(f"pre-emphasis coefficient must lie in [0, 1], got {coeff}")
    x = w.samples
    y = np.empty_like(x)
    y[0] = x[0]
    y[1:] = x[1:] - coeff * x[:-1]
    return Waveform(y, w.sample_rate_hz)


def frame(w: Waveform, frame_len: int, hop: int) -> list[Frame]:
    """Cut ``w`` into frames at offsets 0, hop, 2*hop, ...; a trailing partial frame is dropped."""
    if frame_len < 1 or hop < 1:
        raise VocalTractError("frame_len and hop must be >= 1")
    n = len(w)
    if n < frame_len:
        return []
    count = (n - frame_len) // hop + 1
    return [Frame(w.samples[i * hop : i * hop + frame_len], i * hop) for i in range(count)]


def frame_ms(w: Waveform, frame_ms: float = DEFAULT_FRAME_MS, hop_ms: float = DEFAULT_HOP_MS):
    """Frame a waveform using durations in milliseconds."""
    frame_len = max(1, int(round(w.sample_rate_hz * frame_ms / 1000.0)))
    hop = max(1, int(round(w.sample_rate_hz * hop_ms / 1000.0)))
    return frame(w, frame_len, hop)


def hamming(n: int) -> np.ndarray:
    if n < 2:
        raise VocalTractError("Hamming window needs at least 2 points")
    k = np.arange(n)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * k / (n - 1))


def window_hamming(f: Frame) -> Frame:
    return Frame(f.samples * hamming(len(f)), f.start_index)


def autocorrelate(f: Frame, max_lag: int) -> np.ndarray:
    """Biased, unnormalised autocorrelation ``r[0..max_lag]`` of a frame."""
    x = f.samples
    if not 0 <= max_lag < x.size:
        raise VocalTractError(f"max_lag must be in [0, {x.size - 1}], got {max_lag}")
    return np.array([np.dot(x[: x.size - k], x[k:]) for k in range(max_lag + 1)])


# ---------------------------------------------------------------------------
# WAV I/O


def read_wav(path) -> Waveform:
    """Read a 16-bit signed PCM mono WAV file, scaling samples by 1/32768."""
    try:
        with wave.open(os.fspath(path), "rb") as wf:
            nchannels = wf.getnchannels()
            width = wf.getsampwidth()
            rate = wf.getframerate()
            comptype = wf.getcomptype()
            raw = wf.readframes(wf.getnframes())
    except wave.Error as exc:
        raise WavFormatError(f"{path}: not a PCM WAV file ({exc})") from exc
    except EOFError as exc:
        raise WavFormatError(f"{path}: truncated WAV file") from exc
    if comptype != "NONE":
        raise WavFormatError(f"{path}: compressed WAV ({comptype}) is not supported")
    if nchannels != 1:
        raise WavFormatError(f"{path}: expected mono, found {nchannels} channels")
    if width != 2:
        raise WavFormatError(f"{path}: expected 16-bit samples, found {8 * width}-bit")
    if rate <= 0:
        raise WavFormatError(f"{path}: invalid sample rate {rate}")
    data = np.frombuffer(raw, dtype="<i2")
    if data.size == 0:
        raise WavFormatError(f"{path}: WAV file contains no samples")
    return Waveform(data.astype(float) / _PCM_SCALE, rate)


def to_pcm16(samples) -> np.ndarray:
    x = np.round(np.asarray(samples, dtype=float) * _PCM_SCALE)
    return np.clip(x, -32768, 32767).astype("<i2")


def write_wav(path, w: Waveform) -> None:
    """Write ``w`` as 16-bit PCM mono; the file appears atomically."""
    rate = int(round(w.sample_rate_hz))
    if rate != w.sample_rate_hz:
        raise VocalTractError(f"WAV needs an integer sample rate, got {w.sample_rate_hz}")
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".wav.tmp")
    os.close(fd)
    try:
        with wave.open(tmp, "wb") as wf:
            wf.setnchannels(1)
            wf.setsampwidth(2)
            wf.setframerate(rate)
            wf.writeframes(to_pcm16(w.samples).tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
