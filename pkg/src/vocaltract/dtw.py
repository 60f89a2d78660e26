"""Dynamic time warping template matcher."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import VocalTractError


@dataclass(frozen=True)
class DtwConfig:
    """``step_pattern`` is always symmetric1: steps (1,0), (0,1), (1,1), unweighted."""

    band_radius: int | None = None
    normalize: bool = True
    step_pattern: str = "symmetric1"

    def __post_init__(self):
        if self.step_pattern != "symmetric1":
            raise VocalTractError(f"unsupported step pattern {self.step_pattern!r}")
        if self.band_radius is not None and self.band_radius < 0:
            raise VocalTractError("band_radius must be non-negative")


def as_sequence(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] < 1:
        raise VocalTractError("feature sequence must be a non-empty (frames, dim) array")
    return a


def local_distances(a, b) -> np.ndarray:
    """Euclidean distance between every frame of ``a`` and every frame of ``b``."""
    d2 = (a * a).sum(1)[:, None] + (b * b).sum(1)[None, :] - 2.0 * a @ b.T
    return np.sqrt(np.maximum(d2, 0.0))


def _exact_local_distances(a, b):
    return np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1))


def dtw_distance(a, b, cfg: DtwConfig = DtwConfig()) -> float:
    """Minimum cumulative Euclidean cost over monotone alignments of ``a`` and ``b``.

    Divided by ``len(a) + len(b)`` when ``cfg.normalize`` is set.
    """
    a, b = as_sequence(a), as_sequence(b)
    if a.shape[1] != b.shape[1]:
        raise VocalTractError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    n, m = len(a), len(b)
    band = cfg.band_radius
    if band is not None and band < abs(n - m):
        raise VocalTractError(f"band radius {band} cannot connect lengths {n} and {m}")
    cost = _exact_local_distances(a, b) if n * m <= 4096 else local_distances(a, b)
    inf = math.inf
    prev = [inf] * (m + 1)
    prev[0] = 0.0
    for i in range(1, n + 1):
        row = cost[i - 1].tolist()
        cur = [inf] * (m + 1)
        if band is None:
            lo, hi = 1, m
        else:
            lo, hi = max(1, i - band), min(m, i + band)
        left = inf
        for j in range(lo, hi + 1):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if left < best:
                best = left
            left = row[j - 1] + best
            cur[j] = left
        prev = cur
        prev[0] = inf
    total = prev[m]
    return total / (n + m) if cfg.normalize else total


def dtw_identify(test, templates: dict, cfg: DtwConfig = DtwConfig()):
    """Nearest-template speaker decision.

    ``templates`` maps speaker id to an iterable of template sequences. Returns
    ``(speaker_id, score)``; ties go to the lexicographically smallest id.
    """
    ranked = dtw_rank(test, templates, cfg)
    return ranked[0]


def dtw_rank(test, templates: dict, cfg: DtwConfig = DtwConfig()) -> list:
    """All speakers ordered by their best template distance."""
    if not templates:
        raise VocalTractError("no templates enrolled")
    scores = []
    for spk in templates:
        seqs = list(templates[spk])
        if not seqs:
            raise VocalTractError(f"speaker {spk!r} has no templates")
        scores.append((min(dtw_distance(test, t, cfg) for t in seqs), str(spk), spk))
    scores.sort(key=lambda s: (s[0], s[1]))
    return [(spk, score) for score, _, spk in scores]
