"""LPC cepstra: the recognizer's view of a vocal tract.

Run: python demos/03_cepstra.py
"""

import numpy as np

from vocaltract.cepstra import lpc_to_cepstrum, waveform_features
from vocaltract.lpc import PredictorPolynomial
from vocaltract.style import SpeakerSpec, synthesize_utterance

# One pole at z = 0.5: the cepstrum is 0.5^n / n.
print(lpc_to_cepstrum(PredictorPolynomial([-0.5]), 5))
print([0.5**n / n for n in range(1, 6)])

# The gain does not enter, so loudness alone cannot move the features.
a = [-1.2, 0.5]
print(np.allclose(lpc_to_cepstrum(PredictorPolynomial(a, 1.0)), lpc_to_cepstrum(PredictorPolynomial(a, 50.0))))

spk = SpeakerSpec("demo", (4.3, 4.2, 1.6, 2.5, 1.2, 3.3, 3.6, 3.0, 0.6), 120.0)
w = synthesize_utterance(spk, "normal", rng=np.random.default_rng(1))
feats = waveform_features(w)
print("feature matrix:", feats.shape, "(frames x cepstra)")
print("first frame:", np.round(feats[0], 3))
