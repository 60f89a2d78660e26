"""Formants are the angles and radii of the filter's poles.

Run: python demos/02_formants.py
"""

import math

from vocaltract.formants import Pole, extract_formants, pole_to_formant, polynomial_from_formants, polynomial_roots
from vocaltract.lpc import area_to_predictor

fs = 8000

# A quarter turn of the unit circle is a quarter of the sample rate.
print(pole_to_formant(Pole.polar(0.95, math.pi / 2), fs))

# Build a filter from chosen resonances and read them back off its roots.
poly = polynomial_from_formants([(500, 60), (1500, 90), (2500, 120)], fs)
for f in extract_formants(poly, fs):
    print(f"  F = {f.frequency_hz:7.2f} Hz   B = {f.bandwidth_hz:6.2f} Hz")

# For the tube model the roots are inside the unit circle.
tract = area_to_predictor([4.3, 4.2, 1.6, 2.5, 1.2, 3.3, 3.6, 3.0, 0.6])
print("largest pole radius:", max(p.radius for p in polynomial_roots(tract)))
print(extract_formants(tract, fs).to_csv())
