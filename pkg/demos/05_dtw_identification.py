"""Nearest-template speaker identification with dynamic time warping.

Run: python demos/05_dtw_identification.py
"""

import numpy as np

from vocaltract.cepstra import waveform_features
from vocaltract.dtw import dtw_distance, dtw_identify
from vocaltract.style import generate_corpus

# A warping path may stretch either sequence, so a slowed copy stays close.
a = np.sin(np.linspace(0, 3, 20))[:, None]
slow = np.sin(np.linspace(0, 3, 35))[:, None]
print("distance to itself:", dtw_distance(a, a))
print("distance to a slowed copy:", round(dtw_distance(a, slow), 4))

corpus = generate_corpus(speakers=4, repetitions=4, styles=["normal", "shout"], seed=2)
feats = {key: waveform_features(u.waveform) for key, u in corpus.utterances.items()}
templates = {s: [feats[(s, "normal", r)] for r in (0, 1)] for s in corpus.speaker_ids}
for style in ("normal", "shout"):
    hits = 0
    for spk in corpus.speaker_ids:
        for rep in (2, 3):
            guess, score = dtw_identify(feats[(spk, style, rep)], templates)
            hits += guess == spk
    print(f"{style}: {hits}/8 identified")
