import math

import numpy as np
import pytest

from vocaltract.exceptions import VocalTractError
from vocaltract.formants import Pole, extract_formants, polynomial_roots
from vocaltract.style import (
    DEFAULT_PROFILES,
    MAX_POLE_RADIUS,
    PEAK_LEVEL,
    STYLES,
    SpeakerSpec,
    StyleProfile,
    TalkingStyle,
    generate_corpus,
    load_corpus,
    make_speakers,
    perturb_poles,
    save_corpus,
    synthesize_utterance,
)

SPK = SpeakerSpec("s", (4.3, 4.2, 1.6, 2.5, 1.2, 3.3, 3.6, 3.0, 0.6), 120.0, intra_speaker_jitter=0.0)


def test_five_styles():
    assert [s.value for s in STYLES] == ["normal", "shout", "slow", "loud", "soft"]
    assert TalkingStyle.parse("Shout") is TalkingStyle.SHOUT
    with pytest.raises(VocalTractError):
        TalkingStyle.parse("whisper")


def test_default_profile_ordering():
    j = {s: DEFAULT_PROFILES[s].angle_jitter_rad for s in STYLES}
    assert j["shout"] > j["loud"] > j["soft"] > j["slow"] >= 0 == j["normal"]


def test_profile_validation():
    with pytest.raises(VocalTractError):
        StyleProfile(0.1, 1.0)
    with pytest.raises(VocalTractError):
        StyleProfile(0.1, 0.1, rate_factor=0.0)


def test_speaker_pitch_range():
    with pytest.raises(VocalTractError, match="pitch"):
        SpeakerSpec("x", (1.0, 2.0), 500.0)


def test_zero_jitter_is_identity():
    poles = polynomial_roots(SPK.base_polynomial)
    out = perturb_poles(poles, DEFAULT_PROFILES[TalkingStyle.NORMAL], np.random.default_rng(0))
    assert [p.value for p in out] == [p.value for p in poles]


def test_perturbation_stays_inside_unit_circle():
    rng = np.random.default_rng(0)
    violent = StyleProfile(1.0, 0.9)
    for _ in range(200):
        poles = [Pole.polar(0.997, 1.0), Pole.polar(0.997, -1.0), Pole(0.99, 0.0)]
        out = perturb_poles(poles, violent, rng)
        assert max(p.radius for p in out) <= MAX_POLE_RADIUS < 1


def test_perturbation_bounds_and_determinism():
    shout = DEFAULT_PROFILES[TalkingStyle.SHOUT]
    pole = [Pole.polar(0.9, math.pi / 4), Pole.polar(0.9, -math.pi / 4)]
    a = perturb_poles(pole, shout, np.random.default_rng(42))
    b = perturb_poles(pole, shout, np.random.default_rng(42))
    assert [p.value for p in a] == [p.value for p in b]
    upper = next(p for p in a if p.imag_part > 0)
    assert abs(upper.angle_rad - math.pi / 4) <= shout.angle_jitter_rad + 1e-15
    assert abs(upper.radius / 0.9 - 1) <= shout.radius_jitter + 1e-15
    # conjugate symmetry
    assert sorted(p.value for p in a if p.imag_part < 0)[0] == pytest.approx(upper.value.conjugate())


def test_perturb_requires_conjugate_pairs():
    with pytest.raises(VocalTractError):
        perturb_poles([Pole.polar(0.9, 1.0)], DEFAULT_PROFILES[TalkingStyle.SHOUT], np.random.default_rng(0))


def test_normal_synthesis_filter_is_base_tract():
    _, poly = synthesize_utterance(SPK, "normal", rng=np.random.default_rng(0), return_filter=True)
    ref = extract_formants(SPK.base_polynomial, 8000)
    got = extract_formants(poly, 8000)
    np.testing.assert_allclose(got.frequencies, ref.frequencies, rtol=1e-12)
    np.testing.assert_allclose(got.bandwidths, ref.bandwidths, rtol=1e-12)


def test_synthesis_deterministic_and_scaled():
    a = synthesize_utterance(SPK, "loud", rng=np.random.default_rng(3))
    b = synthesize_utterance(SPK, "loud", rng=np.random.default_rng(3))
    np.testing.assert_array_equal(a.samples, b.samples)
    assert np.max(np.abs(a.samples)) == pytest.approx(PEAK_LEVEL * 1.8 / 2.5)
    shout = synthesize_utterance(SPK, "shout", rng=np.random.default_rng(3))
    assert np.max(np.abs(shout.samples)) == pytest.approx(PEAK_LEVEL)


def test_rate_factor_sets_duration():
    slow = synthesize_utterance(SPK, "slow", duration_s=0.5, rng=np.random.default_rng(0))
    shout = synthesize_utterance(SPK, "shout", duration_s=0.5, rng=np.random.default_rng(0))
    assert len(slow) == 6000
    assert len(shout) == 3600


def test_shout_displaces_f1_more_than_slow():
    def mean_f1_shift(style):
        base = extract_formants(SPK.base_polynomial, 8000).frequencies[0]
        shifts = []
        for seed in range(100):
            _, poly = synthesize_utterance(SPK, style, rng=np.random.default_rng(seed), return_filter=True)
            shifts.append(abs(extract_formants(poly, 8000).frequencies[0] - base) / base)
        return np.mean(shifts)

    assert mean_f1_shift("shout") > mean_f1_shift("slow")


def test_default_corpus_size_and_stability():
    corpus = generate_corpus(duration_s=0.05)
    assert len(corpus) == 405
    assert len(corpus.speaker_ids) == 9
    for u in corpus:
        assert max(p.radius for p in polynomial_roots(u.filter)) < 1


def test_small_corpus_product():
    corpus = generate_corpus(speakers=2, repetitions=2, styles=["normal"], duration_s=0.05)
    assert len(corpus) == 4


def test_corpus_deterministic_and_order_independent():
    a = generate_corpus(speakers=3, repetitions=2, seed=5, duration_s=0.05)
    b = generate_corpus(speakers=3, repetitions=2, seed=5, duration_s=0.05)
    c = generate_corpus(speakers=3, repetitions=2, seed=5, styles=["soft"], duration_s=0.05)
    for key, u in a.utterances.items():
        np.testing.assert_array_equal(u.waveform.samples, b.utterances[key].waveform.samples)
    # an utterance's content does not depend on which other styles were generated
    key = ("spk01", TalkingStyle.SOFT, 1)
    np.testing.assert_array_equal(c.utterances[key].waveform.samples, a.utterances[key].waveform.samples)


def test_male_and_female_pitch():
    speakers = make_speakers(9, np.random.default_rng(0))
    pitches = [s.pitch_hz for s in speakers]
    assert all(100 <= p <= 140 for p in pitches[:3])
    assert all(180 <= p <= 250 for p in pitches[3:])


def test_duplicate_key_rejected():
    corpus = generate_corpus(speakers=1, repetitions=1, styles=["normal"], duration_s=0.05)
    with pytest.raises(VocalTractError, match="duplicate"):
        corpus.add(next(iter(corpus)))


def test_save_and_load(tmp_path):
    corpus = generate_corpus(speakers=2, repetitions=2, styles=["normal", "shout"], duration_s=0.05, seed=1)
    manifest_path = save_corpus(corpus, tmp_path)
    assert (tmp_path / "spk01" / "shout" / "1.wav").exists()
    back = load_corpus(tmp_path)
    assert len(back) == 8
    assert back.seed == 1
    u0 = corpus.get("spk02", "shout", 0)
    u1 = back.get("spk02", "shout", 0)
    np.testing.assert_allclose(u1.waveform.samples, u0.waveform.samples, atol=1 / 32767)
    np.testing.assert_array_equal(u1.filter.coeffs, u0.filter.coeffs)
    save_corpus(back, tmp_path / "again")
    assert (tmp_path / "again" / "manifest.json").read_text() == open(manifest_path).read()


def test_load_missing_manifest(tmp_path):
    with pytest.raises(VocalTractError, match="manifest"):
        load_corpus(tmp_path)
