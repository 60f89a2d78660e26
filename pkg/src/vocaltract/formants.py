"""Pole extraction and the pole -> (formant frequency, bandwidth) mapping."""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field

import numpy as np

from ._io import atomic_write_text
from .exceptions import RootFindingError, VocalTractError
from .lpc import PredictorPolynomial

_ROOT_TOL = 1e-8


@dataclass(frozen=True)
class Pole:
    real_part: float
    imag_part: float

    @classmethod
    def from_complex(cls, z) -> "Pole":
        return cls(float(np.real(z)), float(np.imag(z)))

    @classmethod
    def polar(cls, radius, angle_rad) -> "Pole":
        return cls.from_complex(radius * np.exp(1j * angle_rad))

    @property
    def value(self) -> complex:
        return complex(self.real_part, self.imag_part)

    @property
    def radius(self) -> float:
        return math.hypot(self.real_part, self.imag_part)

    @property
    def angle_rad(self) -> float:
        """Angle in (-pi, pi]."""
        return math.atan2(self.imag_part, self.real_part)


@dataclass(frozen=True)
class Formant:
    frequency_hz: float
    bandwidth_hz: float


@dataclass(frozen=True)
class FormantFilterConfig:
    """Selection rules applied after mapping poles to formants."""

    min_freq_hz: float = 50.0
    nyquist_margin_hz: float = 50.0
    max_bandwidth_hz: float = 700.0


@dataclass(frozen=True)
class FormantSet:
    formants: tuple
    sample_rate_hz: float

    def __post_init__(self):
        object.__setattr__(self, "formants", tuple(self.formants))
        f = self.frequencies
        if np.any(np.diff(f) <= 0):
            raise VocalTractError("formant frequencies must be strictly ascending")

    def __len__(self):
        return len(self.formants)

    def __iter__(self):
        return iter(self.formants)

    def __getitem__(self, i):
        return self.formants[i]

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([f.frequency_hz for f in self.formants], dtype=float)

    @property
    def bandwidths(self) -> np.ndarray:
        return np.array([f.bandwidth_hz for f in self.formants], dtype=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["index", "frequency_hz", "bandwidth_hz"])
        for i, f in enumerate(self.formants, 1):
            writer.writerow([i, repr(f.frequency_hz), repr(f.bandwidth_hz)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, sample_rate_hz: float) -> "FormantSet":
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls(
            tuple(Formant(float(r["frequency_hz"]), float(r["bandwidth_hz"])) for r in rows),
            sample_rate_hz,
        )


@dataclass(frozen=True)
class DisplacementReport:
    """Per-index comparison of a styled formant set against a normal one."""

    relative_displacement: np.ndarray
    bandwidth_delta_hz: np.ndarray
    mean_displacement: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "mean_displacement", float(np.mean(self.relative_displacement)))


def _companion(coeffs: np.ndarray) -> np.ndarray:
    p = coeffs.size
    c = np.zeros((p, p))
    c[0, :] = -coeffs
    c[1:, :-1] = np.eye(p - 1)
    return c


def polynomial_roots(poly: PredictorPolynomial) -> list[Pole]:
    """Roots of ``z^p A(z) = z^p + alpha_1 z^(p-1) + ... + alpha_p``.

    Computed as eigenvalues of the companion matrix, then checked (and if
    needed polished with a few Newton steps) against ``|A(root)|``.
    """
    a = np.asarray(poly.coeffs, dtype=float)
    monic = poly.denominator
    roots = np.linalg.eigvals(_companion(a)).astype(complex)
    tol = _ROOT_TOL * max(1.0, np.max(np.abs(monic)))
    deriv = np.polyder(monic)
    for i, z in enumerate(roots):
        for _ in range(8):
            if abs(np.polyval(monic, z)) <= tol:
                break
            dz = np.polyval(deriv, z)
            if dz == 0:
                break
            z = z - np.polyval(monic, z) / dz
        if not abs(np.polyval(monic, z)) <= tol:
            raise RootFindingError(f"root finder did not converge for alpha={a.tolist()}")
        roots[i] = z
    # keep conjugate pairs exactly symmetric
    out = []
    for z in roots:
        if abs(z.imag) <= 1e-12 * max(1.0, abs(z)):
            z = complex(z.real, 0.0)
        out.append(Pole.from_complex(z))
    return out


def pole_to_formant(z: Pole, sample_rate_hz: float) -> Formant:
    """``F = theta f_s / (2 pi)`` and ``B = -ln|z| f_s / pi``."""
    r = z.radius
    if r == 0:
        raise VocalTractError("pole at the origin has no defined bandwidth")
    if r > 1:
        raise VocalTractError(f"pole radius {r} lies outside the unit circle")
    theta = z.angle_rad
    if not 0 < theta <= math.pi:
        raise VocalTractError(f"pole angle must be in (0, pi], got {theta}")
    return Formant(theta * sample_rate_hz / (2 * math.pi), -math.log(r) * sample_rate_hz / math.pi)


def extract_formants(
    poly: PredictorPolynomial,
    sample_rate_hz: float,
    cfg: FormantFilterConfig = FormantFilterConfig(),
) -> FormantSet:
    upper = sorted(
        (p for p in polynomial_roots(poly) if p.imag_part > 0 and p.radius > 0),
        key=lambda p: p.angle_rad,
    )
    hi = sample_rate_hz / 2.0 - cfg.nyquist_margin_hz
    kept = []
    for p in upper:
        f = pole_to_formant(p, sample_rate_hz)
        if not cfg.min_freq_hz <= f.frequency_hz <= hi:
            continue
        if f.bandwidth_hz > cfg.max_bandwidth_hz:
            continue
        if kept and f.frequency_hz <= kept[-1].frequency_hz:
            # repeated root: one resonance
            continue
        kept.append(f)
    return FormantSet(tuple(kept), sample_rate_hz)


def formant_displacement(styled: FormantSet, normal: FormantSet) -> DisplacementReport:
    """Relative frequency displacement ``|F_sty - F| / F`` over shared indices."""
    if len(styled) == 0 or len(normal) == 0:
        raise VocalTractError("formant displacement needs two non-empty formant sets")
    n = min(len(styled), len(normal))
    fs, fn = styled.frequencies[:n], normal.frequencies[:n]
    bs, bn = styled.bandwidths[:n], normal.bandwidths[:n]
    return DisplacementReport(np.abs(fs - fn) / fn, bs - bn)


def polynomial_from_poles(poles, gain: float = 1.0) -> PredictorPolynomial:
    """Build ``A(z)`` with the given roots; complex poles must come with conjugates."""
    z = np.array([p.value if isinstance(p, Pole) else complex(p) for p in poles])
    coeffs = np.poly(z)
    if np.max(np.abs(coeffs.imag)) > 1e-9 * max(1.0, np.max(np.abs(coeffs))):
        raise VocalTractError("poles do not form conjugate pairs")
    return PredictorPolynomial(coeffs.real[1:], gain)


def polynomial_from_formants(formants, sample_rate_hz: float, gain: float = 1.0) -> PredictorPolynomial:
    """All-pole polynomial with one conjugate pole pair per ``(frequency_hz, bandwidth_hz)``."""
    poles = []
    for f, b in formants:
        r = math.exp(-math.pi * b / sample_rate_hz)
        theta = 2 * math.pi * f / sample_rate_hz
        z = r * np.exp(1j * theta)
        poles.extend([z, np.conj(z)])
    return polynomial_from_poles(poles, gain)


def write_formant_csv(path, fset: FormantSet) -> None:
    atomic_write_text(os.fspath(path), fset.to_csv())
