"""All-pole vocal-tract model.

Sign convention: the denominator is ``A(z) = 1 + sum_i alpha_i z^-i``, so a
one-pole resonator at ``z = 0.5`` has ``alpha = [-0.5]``. Most textbooks write
``1 - sum a_i z^-i``; every routine here uses the "+" form throughout, and the
reflection coefficients follow the same sign (``alpha_m == k_m`` at stage m).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .exceptions import AreaFileError, SingularRecursionError, UnstablePolynomialError, VocalTractError
from .signals import Frame, autocorrelate, window_hamming

DEFAULT_ORDER = 8


def default_order(sample_rate_hz: float) -> int:
    """Rule-of-thumb model order ``f_s / 1000`` rounded to an even number (min 2)."""
    return max(2, 2 * int(round(sample_rate_hz / 2000.0)))


@dataclass(frozen=True)
class PredictorPolynomial:
    """Gain ``K`` and coefficients ``alpha_1..alpha_p`` of ``K / A(z)``."""

    coeffs: np.ndarray
    gain: float = 1.0

    def __post_init__(self):
        a = np.asarray(self.coeffs, dtype=float).ravel()
        if a.size < 1:
            raise VocalTractError("predictor polynomial needs order >= 1")
        if not np.all(np.isfinite(a)):
            raise VocalTractError("predictor coefficients must be finite")
        if not (np.isfinite(self.gain) and self.gain > 0):
            raise VocalTractError(f"gain must be positive, got {self.gain}")
        a.setflags(write=False)
        object.__setattr__(self, "coeffs", a)
        object.__setattr__(self, "gain", float(self.gain))

    @property
    def order(self) -> int:
        return self.coeffs.size

    @property
    def denominator(self) -> np.ndarray:
        """``[1, alpha_1, ..., alpha_p]``, i.e. A(z) in powers of z^-1."""
        return np.concatenate(([1.0], self.coeffs))


def _check_areas(areas) -> np.ndarray:
    a = np.asarray(areas, dtype=float).ravel()
    if a.size < 2:
        raise VocalTractError("an area function needs at least two sections")
    if not np.all(np.isfinite(a)) or np.any(a <= 0):
        raise VocalTractError("all section areas must be positive and finite")
    return a


def levinson_durbin(r):
    """Solve the autocorrelation normal equations by the Levinson-Durbin recursion.

    Parameters
    ----------
    r : array_like
        Autocorrelation ``r[0..p]``, lag 0 first.

    Returns
    -------
    poly : PredictorPolynomial
        Coefficients in the ``1 + sum alpha_i z^-i`` convention with
        ``gain = sqrt(residual_energy)``.
    residual_energy : float
        ``r[0] * prod(1 - k_i**2)``.
    k : ndarray
        Reflection coefficients, one per stage.

    Raises
    ------
    SingularRecursionError
        If some stage produces ``|k| >= 1`` (perfectly predictable input).
    """
    r = np.asarray(r, dtype=float).ravel()
    p = r.size - 1
    if p < 1:
        raise VocalTractError("need at least r[0] and r[1]")
    if not r[0] > 0:
        raise VocalTractError(f"r[0] must be positive, got {r[0]}")
    a = np.zeros(p)
    k = np.zeros(p)
    err = r[0]
    for m in range(1, p + 1):
        acc = r[m] + np.dot(a[: m - 1], r[m - 1 : 0 : -1])
        km = -acc / err
        if not abs(km) < 1.0:
            raise SingularRecursionError(m, km)
        prev = a[: m - 1].copy()
        a[: m - 1] = prev + km * prev[::-1]
        a[m - 1] = km
        k[m - 1] = km
        err *= 1.0 - km * km
        if not err > 0:
            raise SingularRecursionError(m, km)
    return PredictorPolynomial(a, np.sqrt(err)), float(err), k


def analyze_frame(f: Frame, order: int = DEFAULT_ORDER, window: bool = True):
    """Autocorrelation-method LPC of one frame; returns ``levinson_durbin`` output."""
    if window:
        f = window_hamming(f)
    return levinson_durbin(autocorrelate(f, order))


def area_to_reflection(areas) -> np.ndarray:
    """``k_i = (A_i - A_{i+1}) / (A_i + A_{i+1})`` for areas listed glottis first."""
    a = _check_areas(areas)
    return (a[:-1] - a[1:]) / (a[:-1] + a[1:])


def reflection_to_predictor(k, gain: float = 1.0) -> PredictorPolynomial:
    """Step-up recursion from reflection coefficients to ``alpha``."""
    k = np.asarray(k, dtype=float).ravel()
    if k.size < 1:
        raise VocalTractError("need at least one reflection coefficient")
    if np.any(np.abs(k) >= 1.0):
        raise UnstablePolynomialError("reflection coefficients must satisfy |k| < 1")
    # extended precision keeps the step-up/step-down round trip near 1 ulp
    a = np.zeros(0, dtype=np.longdouble)
    for km in k.astype(np.longdouble):
        a = np.concatenate((a + km * a[::-1], [km]))
    return PredictorPolynomial(a.astype(float), gain)


def predictor_to_reflection(poly: PredictorPolynomial) -> np.ndarray:
    """Step-down recursion; raises if the polynomial is not minimum phase."""
    a = np.array(poly.coeffs, dtype=np.longdouble)
    p = a.size
    k = np.zeros(p)
    for m in range(p, 0, -1):
        km = a[m - 1]
        if not abs(km) < 1.0:
            raise UnstablePolynomialError(
                f"polynomial is not minimum phase: |k_{m}| = {abs(km):.6g} >= 1"
            )
        k[m - 1] = km
        prev = a[: m - 1]
        a = (prev - km * prev[::-1]) / (1.0 - km * km)
    return k


def area_to_predictor(areas, gain: float = 1.0) -> PredictorPolynomial:
    return reflection_to_predictor(area_to_reflection(areas), gain)


def reflection_to_area(k, lips_area: float = 1.0) -> np.ndarray:
    """Inverse of ``area_to_reflection`` given the last (lip) section area."""
    k = np.asarray(k, dtype=float).ravel()
    if np.any(np.abs(k) >= 1.0):
        raise UnstablePolynomialError("reflection coefficients must satisfy |k| < 1")
    areas = np.empty(k.size + 1)
    areas[-1] = lips_area
    # A_i = A_{i+1} (1 + k_i) / (1 - k_i)
    for i in range(k.size - 1, -1, -1):
        areas[i] = areas[i + 1] * (1.0 + k[i]) / (1.0 - k[i])
    return areas


def frequency_response(poly: PredictorPolynomial, n_points: int, sample_rate_hz: float):
    """Magnitude of ``K / A(e^jw)`` in dB on a uniform grid over ``[0, f_s/2]``.

    Returns ``(frequency_hz, magnitude_db)`` arrays.
    """
    if n_points < 2:
        raise VocalTractError("n_points must be >= 2")
    freqs = np.linspace(0.0, sample_rate_hz / 2.0, n_points)
    w = 2.0 * np.pi * freqs / sample_rate_hz
    z_inv = np.exp(-1j * np.outer(w, np.arange(poly.order + 1)))
    denom = z_inv @ poly.denominator
    mag = poly.gain / np.abs(denom)
    return freqs, 20.0 * np.log10(mag)


def read_area_file(path) -> np.ndarray:
    """Parse one positive decimal per line, glottis first; ``#`` lines are comments."""
    values = []
    with open(os.fspath(path)) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                v = float(text)
            except ValueError:
                raise AreaFileError(f"{path}:{lineno}: not a number: {text!r}") from None
            if not (np.isfinite(v) and v > 0):
                raise AreaFileError(f"{path}:{lineno}: area must be positive, got {text}")
            values.append(v)
    if len(values) < 2:
        raise AreaFileError(f"{path}: need at least two areas, found {len(values)}")
    return np.array(values)


def write_area_file(path, areas, comment: str | None = None) -> None:
    areas = _check_areas(areas)
    with open(os.fspath(path), "w") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        for v in areas:
            fh.write(f"{float(v)!r}\n")
