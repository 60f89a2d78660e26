import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vocaltract.cepstra import features_from_csv, features_to_csv, lpc_to_cepstrum, waveform_features
from vocaltract.exceptions import UnstablePolynomialError
from vocaltract.lpc import PredictorPolynomial
from vocaltract.signals import Waveform

from .oracles import random_stable_alpha, spectral_log_cepstrum


def test_flat_model_has_zero_cepstrum():
    np.testing.assert_array_equal(lpc_to_cepstrum(PredictorPolynomial([0.0, 0.0]), 5), np.zeros(5))


def test_one_pole_closed_form():
    # log 1/(1 - 0.5 z^-1) = sum 0.5^n / n z^-n
    c = lpc_to_cepstrum(PredictorPolynomial([-0.5]), 3)
    np.testing.assert_allclose(c, [0.5, 0.125, 0.5**3 / 3], rtol=1e-14)


def test_gain_does_not_change_cepstrum():
    a = [-1.2, 0.5]
    np.testing.assert_array_equal(
        lpc_to_cepstrum(PredictorPolynomial(a, 1.0), 12), lpc_to_cepstrum(PredictorPolynomial(a, 37.0), 12)
    )


def test_unstable_rejected():
    with pytest.raises(UnstablePolynomialError):
        lpc_to_cepstrum(PredictorPolynomial([-2.5, 1.0]), 4)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 12), st.integers(1, 24))
def test_matches_spectral_log_oracle(seed, p, q):
    alpha = random_stable_alpha(np.random.default_rng(seed), p)
    c = lpc_to_cepstrum(PredictorPolynomial(alpha), q)
    np.testing.assert_allclose(c, spectral_log_cepstrum(alpha, q), atol=1e-6)


def test_waveform_features_shape():
    rng = np.random.default_rng(0)
    w = Waveform(rng.standard_normal(8000) * 0.1, 8000)
    feats = waveform_features(w, order=8, num_ceps=12)
    assert feats.shape == (98, 12)
    assert np.all(np.isfinite(feats))


def test_features_csv_round_trip():
    feats = np.arange(6, dtype=float).reshape(2, 3) / 7
    text = features_to_csv(feats)
    assert text.splitlines()[0] == "c1,c2,c3"
    np.testing.assert_array_equal(features_from_csv(text), feats)
