import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vocaltract.exceptions import VocalTractError
from vocaltract.hmm import (
    EMISSION_FLOOR,
    Codebook,
    HmmModel,
    baum_welch_step,
    baum_welch_train,
    distortion,
    forward_log_likelihood,
    hmm_identify,
    quantize,
    random_model,
    train_codebook,
)

from .oracles import brute_likelihood


def _random_model(rng, n, m):
    return HmmModel(
        rng.dirichlet(np.ones(n)),
        rng.dirichlet(np.ones(n), size=n),
        rng.dirichlet(np.ones(m), size=n),
    )


# -- codebook ---------------------------------------------------------------


def test_codebook_of_one_is_the_mean():
    x = np.random.default_rng(0).standard_normal((50, 3))
    cb = train_codebook(x, 1, np.random.default_rng(1))
    np.testing.assert_allclose(cb.centroids[0], x.mean(0), atol=1e-12)


def test_two_clouds_split():
    rng = np.random.default_rng(0)
    a = rng.uniform(0, 1, (40, 2))
    b = rng.uniform(100, 101, (40, 2))
    cb = train_codebook(np.vstack([a, b]), 2, np.random.default_rng(3))
    inside = [bool(np.all((c >= 0) & (c <= 1))) or bool(np.all((c >= 100) & (c <= 101))) for c in cb.centroids]
    assert all(inside)
    assert sorted(quantize([[0.5, 0.5], [100.5, 100.5]], cb).tolist()) == [0, 1]


def test_codebook_size_equals_distinct_vectors():
    x = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [5.0, 5.0], [1.0, 0.0]])
    cb = train_codebook(x, 4, np.random.default_rng(0))
    assert cb.size == 4
    assert distortion(x, cb) == pytest.approx(0.0, abs=1e-20)


def test_codebook_too_few_vectors():
    with pytest.raises(VocalTractError, match="distinct"):
        train_codebook(np.zeros((10, 2)), 2, np.random.default_rng(0))


def test_codebook_deterministic_and_history_non_increasing():
    x = np.random.default_rng(5).standard_normal((300, 4))
    c1 = train_codebook(x, 8, np.random.default_rng(9))
    c2 = train_codebook(x, 8, np.random.default_rng(9))
    np.testing.assert_array_equal(c1.centroids, c2.centroids)
    h = np.array(c1.distortion_history)
    assert np.all(np.diff(h) <= 1e-12)


def test_distortion_non_increasing_in_size():
    x = np.random.default_rng(2).standard_normal((400, 3))
    d = [distortion(x, train_codebook(x, m, np.random.default_rng(0))) for m in (1, 2, 4, 8, 16)]
    assert all(b <= a + 1e-12 for a, b in zip(d, d[1:]))


def test_codebook_rejects_duplicates():
    with pytest.raises(VocalTractError):
        Codebook(np.array([[1.0, 2.0], [1.0, 2.0]]))


def test_quantize_exact_and_ties():
    cb = Codebook(np.array([[0.0], [10.0], [20.0], [30.0], [2.0]]))
    assert quantize([[30.0]], cb).tolist() == [3]
    # 6.0 is 4 from centroid 4 (2.0) and 4 from centroid 1 (10.0): lowest index wins
    assert quantize([[6.0]], cb).tolist() == [1]


def test_quantize_hand_grid():
    cb = Codebook(np.array([[0.0, 0.0], [4.0, 4.0]]))
    frames = [[1.0, 1.0], [3.0, 3.5], [2.0, 2.0], [-1.0, 5.0]]
    # distances^2: (2, 18), (21.25, 1.25), (8, 8) tie, (26, 26) tie
    assert quantize(frames, cb).tolist() == [0, 1, 0, 0]


def test_quantize_dimension_mismatch():
    with pytest.raises(VocalTractError, match="dimension"):
        quantize([[1.0, 2.0, 3.0]], Codebook(np.array([[0.0, 0.0]])))


def test_codebook_dict_round_trip():
    cb = Codebook(np.array([[0.5, 1.5], [2.0, -1.0]]), (3.0, 1.0))
    assert Codebook.from_dict(json.loads(json.dumps(cb.to_dict()))).to_dict() == cb.to_dict()


# -- model and forward --------------------------------------------------------


def test_model_rejects_non_stochastic():
    with pytest.raises(VocalTractError, match="rows"):
        HmmModel([0.5, 0.6], np.eye(2), np.eye(2))
    with pytest.raises(VocalTractError, match="shapes"):
        HmmModel([1.0], np.eye(2), np.eye(2))


def test_single_state_is_sum_of_log_emissions():
    b = np.array([[0.2, 0.3, 0.5]])
    m = HmmModel([1.0], [[1.0]], b)
    obs = [0, 2, 2, 1]
    assert forward_log_likelihood(m, obs) == pytest.approx(sum(math.log(b[0, o]) for o in obs))


def test_uniform_two_state_two_symbol():
    m = HmmModel([0.5, 0.5], np.full((2, 2), 0.5), np.full((2, 2), 0.5))
    assert forward_log_likelihood(m, [0, 1, 1]) == pytest.approx(math.log(1 / 8), rel=1e-14)
    assert brute_likelihood(m.initial, m.transition, m.emission, [0, 1, 1]) == pytest.approx(1 / 8)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 6), st.integers(1, 8))
def test_forward_matches_path_enumeration(seed, n, m, t):
    rng = np.random.default_rng(seed)
    model = _random_model(rng, n, m)
    obs = rng.integers(0, m, t)
    p = brute_likelihood(model.initial, model.transition, model.emission, obs)
    assert math.exp(forward_log_likelihood(model, obs)) == pytest.approx(p, rel=0, abs=1e-10)
    assert math.exp(forward_log_likelihood(model, obs)) == pytest.approx(p, rel=1e-9)


def test_zero_probability_sequence():
    m = HmmModel([1.0], [[1.0]], [[1.0, 0.0]])
    assert forward_log_likelihood(m, [0, 1]) == -math.inf


def test_observation_range_checked():
    m = HmmModel([1.0], [[1.0]], [[0.5, 0.5]])
    with pytest.raises(VocalTractError):
        forward_log_likelihood(m, [0, 2])
    with pytest.raises(VocalTractError):
        forward_log_likelihood(m, [])


def test_long_sequence_does_not_underflow():
    m = HmmModel([1.0], [[1.0]], [[0.5, 0.5]])
    assert forward_log_likelihood(m, [0] * 5000) == pytest.approx(5000 * math.log(0.5))


# -- training ---------------------------------------------------------------


def _stochastic(m):
    for mat in (m.initial[None, :], m.transition, m.emission):
        assert np.all(mat >= 0)
        np.testing.assert_allclose(mat.sum(1), 1.0, atol=1e-12)


def test_iters_zero_returns_initialization():
    rng_a, rng_b = np.random.default_rng(4), np.random.default_rng(4)
    m = baum_welch_train([[0, 1, 2]], 3, 4, 0, rng_a)
    ref = random_model(3, 4, rng_b)
    np.testing.assert_array_equal(m.emission, ref.emission)
    _stochastic(m)


def test_point_mass_fixed_point():
    m = baum_welch_train([[2] * 20, [2] * 15], 1, 4, 30, np.random.default_rng(0))
    assert m.emission[0, 2] >= 1 - 4 * EMISSION_FLOOR
    assert np.all(m.emission[0] >= EMISSION_FLOOR * (1 - 1e-12))


@pytest.mark.parametrize("topology", ["left-right", "ergodic"])
def test_log_likelihood_monotone(topology):
    for run in range(10):
        rng = np.random.default_rng(run)
        seqs = [rng.integers(0, 6, rng.integers(5, 40)) for _ in range(4)]
        m, hist = baum_welch_train(seqs, 4, 6, 20, rng, topology=topology, return_history=True)
        assert all(b >= a - 1e-9 for a, b in zip(hist, hist[1:]))
        _stochastic(m)


def test_left_right_structure_preserved():
    rng = np.random.default_rng(0)
    seqs = [rng.integers(0, 5, 30) for _ in range(3)]
    m = baum_welch_train(seqs, 4, 5, 10, rng)
    assert np.all(np.tril(m.transition, -1) == 0)
    assert np.all(np.triu(m.transition, 2) == 0)
    assert m.initial[0] == pytest.approx(1.0)


def test_step_reports_likelihood_of_input_model():
    rng = np.random.default_rng(1)
    m = random_model(3, 4, rng, "ergodic")
    seqs = [rng.integers(0, 4, 12)]
    _, ll = baum_welch_step(m, seqs)
    assert ll == pytest.approx(forward_log_likelihood(m, seqs[0]))


def test_training_deterministic():
    seqs = [[0, 1, 1, 2, 3], [0, 0, 1, 3, 3, 3]]
    a = baum_welch_train(seqs, 3, 4, 5, np.random.default_rng(7))
    b = baum_welch_train(seqs, 3, 4, 5, np.random.default_rng(7))
    assert a.to_json() == b.to_json()


def test_model_json_round_trip():
    m = random_model(3, 5, np.random.default_rng(2))
    back = HmmModel.from_dict(json.loads(m.to_json()))
    np.testing.assert_array_equal(back.emission, m.emission)
    assert back.meta == {"topology": "left-right"}


# -- identification ---------------------------------------------------------


def test_identify_single_model():
    m = HmmModel([1.0], [[1.0]], [[0.5, 0.5]])
    assert hmm_identify([0, 1], {"solo": m})[0] == "solo"


def test_point_mass_beats_uniform():
    a = HmmModel([1.0], [[1.0]], [[0.0, 1.0, 0.0]])
    u = HmmModel([1.0], [[1.0]], [[1 / 3] * 3])
    spk, ll = hmm_identify([1] * 6, {"uniform": u, "A": a})
    assert spk == "A"
    assert ll == 0.0


def test_identical_models_tie_break():
    m = HmmModel([1.0], [[1.0]], [[0.5, 0.5]])
    assert hmm_identify([0, 1], {"c": m, "a2": m, "b": m})[0] == "a2"


def test_identify_empty():
    with pytest.raises(VocalTractError):
        hmm_identify([0], {})
