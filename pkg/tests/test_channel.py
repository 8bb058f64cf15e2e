import numpy as np
import pytest

import stcsim as st


def test_quasistatic_slots_equal_exactly():
    rng = st.make_rng(0)
    for _ in range(50):
        ch = st.sample_channel(rng, "quasistatic")
        assert np.array_equal(ch.h[..., 0], ch.h[..., 1])


def test_markov_endpoints_match_other_models():
    a = st.sample_channels(st.make_rng(5), "markov", 20, rho=1.0)
    b = st.sample_channels(st.make_rng(5), "quasistatic", 20)
    assert np.allclose(a, b, atol=1e-15)
    c = st.sample_channels(st.make_rng(5), "markov", 20, rho=0.0)
    d = st.sample_channels(st.make_rng(5), "rapid", 20)
    assert np.array_equal(c, d)


def test_markov_rho_validation():
    rng = st.make_rng(1)
    with pytest.raises(ValueError):
        st.sample_channel(rng, "markov", rho=1.5)
    with pytest.raises(ValueError):
        st.sample_channel(rng, "markov")
    with pytest.raises(ValueError):
        st.sample_channel(rng, "nonsense")


def test_coefficient_variance_within_two_percent():
    h = st.sample_channels(st.make_rng(2), "rapid", 100_000)
    var = np.mean(np.abs(h) ** 2, axis=0)
    assert np.all(np.abs(var - 1.0) < 0.02)


def test_markov_correlation_matches_rho():
    for rho in (0.3, 0.9):
        h = st.sample_channels(st.make_rng(3), "markov", 100_000, rho=rho)
        a = h[..., 0].ravel()
        b = h[..., 1].ravel()
        corr = np.mean(a * np.conj(b)).real  # unit-variance coefficients
        assert abs(corr - rho) < 0.02


def test_snr_to_n0():
    assert st.snr_to_n0(0.0) == 2.0
    assert st.snr_to_n0(3.0103) == pytest.approx(1.0, abs=1e-4)
    assert st.snr_to_n0(300.0) == pytest.approx(0.0, abs=1e-12)


def test_noise_mean_square_within_one_percent():
    n = st.sample_noise(st.make_rng(4), 1.0, 250_000)
    mean_sq = float(np.mean(np.abs(n) ** 2))
    assert 0.99 <= mean_sq <= 1.01


def test_noise_seed_determinism_and_scaling():
    a = st.sample_noise(st.make_rng(9, 1), 1.0, 100)
    b = st.sample_noise(st.make_rng(9, 1), 1.0, 100)
    assert np.array_equal(a, b)
    c = st.sample_noise(st.make_rng(9, 1), 4.0, 100)
    assert np.array_equal(c, 2.0 * a)
    with pytest.raises(ValueError):
        st.sample_noise(st.make_rng(9), 0.0)


def test_branch_streams_disjoint():
    a = st.sample_noise(st.make_rng(7, 0), 1.0, 10)
    b = st.sample_noise(st.make_rng(7, 1), 1.0, 10)
    assert not np.allclose(a, b)


def test_channel_seed_determinism_across_calls():
    h1 = st.sample_channels(st.make_rng(11, 2, 3), "markov", 50, rho=0.5)
    h2 = st.sample_channels(st.make_rng(11, 2, 3), "markov", 50, rho=0.5)
    assert np.array_equal(h1, h2)
