import json

import numpy as np
import pytest

from vocaltract.evaluation import (
    ExperimentConfig,
    HmmConfig,
    displacement_summary,
    enroll,
    run_experiment,
    utterance_formants,
)
from vocaltract.exceptions import VocalTractError
from vocaltract.formants import extract_formants
from vocaltract.style import generate_corpus


@pytest.fixture(scope="module")
def small_corpus():
    return generate_corpus(speakers=3, repetitions=4, seed=3, duration_s=0.3)


SPLIT = dict(train_repetitions=(0, 1), test_repetitions=(2, 3))


def test_overlap_rejected():
    with pytest.raises(VocalTractError, match="overlap"):
        ExperimentConfig(train_repetitions=(0, 1), test_repetitions=(1, 2))


def test_unknown_recognizer():
    with pytest.raises(VocalTractError):
        ExperimentConfig(recognizer="gmm")


def test_config_round_trip():
    cfg = ExperimentConfig(recognizer="hmm", hmm=HmmConfig(n_states=3), master_seed=9, **SPLIT)
    assert ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


@pytest.mark.parametrize("recognizer", ["dtw", "hmm"])
def test_report_bounds_and_counts(small_corpus, recognizer):
    cfg = ExperimentConfig(recognizer=recognizer, hmm=HmmConfig(codebook_size=16, iters=5), **SPLIT)
    rep = run_experiment(small_corpus, cfg, with_displacement=False)
    assert list(rep.rates) == ["normal", "shout", "slow", "loud", "soft"]
    for style, rate in rep.rates.items():
        assert 0 <= rate <= 1
        conf = np.array(rep.confusion[style])
        np.testing.assert_array_equal(conf.sum(1), [2, 2, 2])
        assert rep.counts[style]["total"] == 3 * 2
        assert rate == pytest.approx(np.trace(conf) / conf.sum())


@pytest.mark.parametrize("recognizer", ["dtw", "hmm"])
def test_deterministic(small_corpus, recognizer):
    cfg = ExperimentConfig(recognizer=recognizer, hmm=HmmConfig(codebook_size=16, iters=5), **SPLIT)
    a = run_experiment(small_corpus, cfg).to_json()
    b = run_experiment(small_corpus, cfg).to_json()
    assert a == b


def test_training_set_as_test_set_gives_perfect_normal(small_corpus):
    cfg = ExperimentConfig(train_repetitions=(0, 1, 2, 3), test_repetitions=(0, 1, 2, 3), allow_overlap=True)
    rep = run_experiment(small_corpus, cfg, with_displacement=False)
    assert rep.rates["normal"] == 1.0


@pytest.mark.parametrize("recognizer", ["dtw", "hmm"])
def test_single_speaker_always_right(recognizer):
    corpus = generate_corpus(speakers=1, repetitions=3, seed=0, duration_s=0.3)
    cfg = ExperimentConfig(
        recognizer=recognizer, train_repetitions=(0,), test_repetitions=(1, 2), hmm=HmmConfig(codebook_size=8, iters=3)
    )
    rep = run_experiment(corpus, cfg, with_displacement=False)
    assert set(rep.rates.values()) == {1.0}


def test_missing_normal_training_data():
    corpus = generate_corpus(speakers=2, repetitions=2, styles=["shout"], duration_s=0.2)
    cfg = ExperimentConfig(train_repetitions=(0,), test_repetitions=(1,))
    with pytest.raises(VocalTractError, match="Normal"):
        enroll(corpus, cfg)


def test_missing_test_repetition(small_corpus):
    cfg = ExperimentConfig(train_repetitions=(0,), test_repetitions=(7,))
    with pytest.raises(VocalTractError, match="missing"):
        run_experiment(small_corpus, cfg, with_displacement=False)


def test_report_files(small_corpus, tmp_path):
    rep = run_experiment(small_corpus, ExperimentConfig(**SPLIT))
    rep.write(tmp_path)
    rows = (tmp_path / "report.csv").read_text().splitlines()
    assert rows[0] == "style,rate"
    assert len(rows) == 6
    assert (tmp_path / "displacement.csv").read_text().startswith("style,mean_displacement")
    data = json.loads((tmp_path / "report.json").read_text())
    assert data["config"]["experiment"]["train_repetitions"] == [0, 1]
    assert "Recognition rate" in rep.table()


def test_estimated_f1_tracks_synthesis_filter(small_corpus):
    for u in small_corpus.select(style="normal"):
        est = utterance_formants(u.waveform)
        true = extract_formants(u.filter, u.waveform.sample_rate_hz)
        assert abs(est.frequencies[0] - true.frequencies[0]) / true.frequencies[0] < 0.02


def test_displacement_ordering():
    corpus = generate_corpus(seed=0, repetitions=4)
    table = displacement_summary(corpus)
    d = {s: row["mean_displacement"] for s, row in table.items()}
    assert d["normal"] <= 0.01
    assert d["shout"] > d["slow"]
    assert d["shout"] >= d["loud"] > d["soft"] >= d["slow"]
    assert all(row["n_utterances"] == 36 for row in table.values())
