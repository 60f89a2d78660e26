"""LPC-cepstral features.

Features exclude ``c_0`` so they do not depend on the model gain.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from .exceptions import UnstablePolynomialError, VocalTractError
from .lpc import PredictorPolynomial, analyze_frame, predictor_to_reflection
from .signals import DEFAULT_PRE_EMPHASIS, Waveform, frame_ms, pre_emphasize

DEFAULT_NUM_CEPS = 12


def lpc_to_cepstrum(poly: PredictorPolynomial, num_ceps: int = DEFAULT_NUM_CEPS) -> np.ndarray:
    """Cepstrum ``c_1..c_Q`` of the minimum-phase model ``1 / A(z)``.

    With ``A(z) = 1 + sum alpha_i z^-i``::

        c_n = -alpha_n - sum_{k=1}^{n-1} (k/n) c_k alpha_{n-k}

    where ``alpha_n = 0`` for ``n > p``.
    """
    if num_ceps < 1:
        raise VocalTractError("num_ceps must be >= 1")
    try:
        predictor_to_reflection(poly)
    except UnstablePolynomialError as exc:
        raise UnstablePolynomialError(f"cepstrum requires a stable model: {exc}") from None
    p = poly.order
    alpha = np.zeros(num_ceps + 1)
    alpha[1 : min(p, num_ceps) + 1] = poly.coeffs[:num_ceps]
    c = np.zeros(num_ceps + 1)
    for n in range(1, num_ceps + 1):
        acc = alpha[n]
        for k in range(1, n):
            acc += (k / n) * c[k] * alpha[n - k]
        c[n] = -acc
    return c[1:]


def waveform_features(
    w: Waveform,
    order: int = 8,
    num_ceps: int = DEFAULT_NUM_CEPS,
    frame_ms_: float = 30.0,
    hop_ms: float = 10.0,
    pre_emphasis: float = DEFAULT_PRE_EMPHASIS,
) -> np.ndarray:
    """Frame-by-frame LPC cepstra of a waveform, shape ``(n_frames, num_ceps)``.

    Silent frames (zero energy) are skipped.
    """
    frames = frame_ms(pre_emphasize(w, pre_emphasis), frame_ms_, hop_ms)
    rows = []
    for f in frames:
        if not np.any(f.samples):
            continue
        poly, _, _ = analyze_frame(f, order)
        rows.append(lpc_to_cepstrum(poly, num_ceps))
    if not rows:
        raise VocalTractError("waveform too short or silent: no analysable frames")
    return np.vstack(rows)


def features_to_csv(features) -> str:
    feats = np.atleast_2d(np.asarray(features, dtype=float))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"c{i}" for i in range(1, feats.shape[1] + 1)])
    for row in feats:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def features_from_csv(text: str) -> np.ndarray:
    rows = list(csv.reader(io.StringIO(text)))
    return np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
