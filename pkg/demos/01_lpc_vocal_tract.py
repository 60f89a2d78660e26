"""A vocal tract as a chain of tubes, and the all-pole filter it implies.

Run: python demos/01_lpc_vocal_tract.py
"""

import numpy as np
from scipy.signal import lfilter

from vocaltract.lpc import (
    area_to_reflection,
    frequency_response,
    levinson_durbin,
    predictor_to_reflection,
    reflection_to_predictor,
)
from vocaltract.signals import Frame, autocorrelate, window_hamming

# Nine cross-sections, glottis first (cm^2). Each junction reflects part of
# the travelling wave; the reflection coefficients fix the filter exactly.
areas = np.array([4.3, 4.2, 1.6, 2.5, 1.2, 3.3, 3.6, 3.0, 0.6])
k = area_to_reflection(areas)
print("reflection coefficients:", np.round(k, 4))

poly = reflection_to_predictor(k)
print("A(z) = 1 + sum alpha_i z^-i, alpha =", np.round(poly.coeffs, 4))

# Stepping back down recovers the junctions, and every |k| < 1 means the
# filter is stable.
print("step-down error:", np.max(np.abs(predictor_to_reflection(poly) - k)))

freqs, db = frequency_response(poly, 9, 8000)
for f, d in zip(freqs, db):
    print(f"  {f:6.0f} Hz  {d:6.1f} dB")

# The same polynomial comes back from data: drive the filter with noise and
# solve the autocorrelation normal equations.
rng = np.random.default_rng(0)
x = rng.standard_normal(20000)
y = lfilter([1.0], poly.denominator, x)
est, err, _ = levinson_durbin(autocorrelate(window_hamming(Frame(y)), poly.order))
print("estimated alpha:", np.round(est.coeffs, 3))
print("max coefficient error:", float(np.max(np.abs(est.coeffs - poly.coeffs))))
