"""Vector quantization plus one discrete HMM per speaker.

Run: python demos/06_hmm_identification.py
"""

import numpy as np

from vocaltract.cepstra import waveform_features
from vocaltract.hmm import baum_welch_train, hmm_identify, quantize, train_codebook
from vocaltract.style import generate_corpus

corpus = generate_corpus(speakers=4, repetitions=6, styles=["normal", "loud"], seed=5)
feats = {key: waveform_features(u.waveform) for key, u in corpus.utterances.items()}
train = [(s, r) for s in corpus.speaker_ids for r in range(3)]

codebook = train_codebook(np.vstack([feats[(s, "normal", r)] for s, r in train]), 16, np.random.default_rng(0))
print("codebook distortion per k-means pass:", np.round(codebook.distortion_history, 4))

models = {}
for i, spk in enumerate(corpus.speaker_ids):
    seqs = [quantize(feats[(spk, "normal", r)], codebook) for r in range(3)]
    models[spk], history = baum_welch_train(seqs, 5, codebook.size, 10, np.random.default_rng(i), return_history=True)
    print(f"{spk}: training log-likelihood {history[0]:9.2f} -> {history[-1]:9.2f}")

for style in ("normal", "loud"):
    hits = sum(
        hmm_identify(quantize(feats[(spk, style, r)], codebook), models)[0] == spk
        for spk in corpus.speaker_ids
        for r in (3, 4, 5)
    )
    print(f"{style}: {hits}/12 identified")
