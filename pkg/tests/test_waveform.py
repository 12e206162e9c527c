"""Preamble construction and sensing-record synthesis."""
import numpy as np
import pytest

from mmdepth.waveform import (
    golay_pair_128,
    golay_pair,
    make_preamble,
    pi_half_rotate,
    synthesize_rx,
)
from mmdepth.channel import noise_variance


class TestGolay:
    def test_pair_128_complementarity(self):
        a, b = golay_pair_128()
        ra = np.correlate(a, a, "full")
        rb = np.correlate(b, b, "full")
        total = ra + rb
        assert total[127] == pytest.approx(256.0)
        assert np.allclose(np.delete(total, 127), 0.0, atol=1e-9)

    def test_pair_entries_are_binary(self):
        a, b = golay_pair_128()
        assert set(np.unique(a)) <= {-1.0, 1.0}
        assert set(np.unique(b)) <= {-1.0, 1.0}

    @pytest.mark.parametrize("length", [1, 2, 64, 256, 1024])
    def test_doubling_preserves_complementarity(self, length):
        a, b = golay_pair(length)
        total = np.correlate(a, a, "full") + np.correlate(b, b, "full")
        center = length - 1
        assert total[center] == pytest.approx(2.0 * length)
        assert np.allclose(np.delete(total, center), 0.0, atol=1e-9)

    def test_non_power_of_two_rejected(self):
        with pytest.raises(ValueError):
            golay_pair(96)


class TestPiHalfRotation:
    def test_quarter_turn_sequence(self):
        s = pi_half_rotate(np.ones(8))
        assert np.allclose(s[:4], [1, 1j, -1, -1j])
        assert np.allclose(s[4:], s[:4])

    def test_rotation_is_exact_unit_modulus(self):
        s = pi_half_rotate(np.ones(1000))
        assert np.all(np.abs(s) == 1.0)


class TestMakePreamble:
    def test_reference_preamble_shape(self, golay_preamble):
        assert golay_preamble.shape == (3328,)
        assert np.allclose(np.abs(golay_preamble), 1.0)

    def test_golay_prefix_and_length_cap(self, golay_preamble):
        prefix = make_preamble("golay_80211ad", 1000)
        assert np.array_equal(prefix, golay_preamble[:1000])
        with pytest.raises(ValueError):
            make_preamble("golay_80211ad", 5000)

    def test_pn_is_seeded_and_unit_modulus(self):
        a = make_preamble("pn", 256, seed=4)
        b = make_preamble("pn", 256, seed=4)
        c = make_preamble("pn", 256, seed=5)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)
        assert np.allclose(np.abs(a), 1.0)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            make_preamble("chirp", 256)


class TestSynthesizeRx:
    def test_noiseless_record_is_scaled_convolution(self, radio, pn_preamble):
        taps = np.zeros(40, dtype=complex)
        taps[7] = 0.5 - 0.25j
        rec = synthesize_rx(taps, pn_preamble, radio, 256.0, rng=None)
        n_p = len(pn_preamble)
        assert rec.samples.shape == (n_p + 40,)
        expected = np.sqrt(radio.symbol_energy_j) * np.convolve(pn_preamble, taps)
        assert np.allclose(rec.samples[: n_p + 39], expected)
        assert rec.samples[-1] == 0.0
        assert rec.n_p == n_p and rec.l_d == 40

    def test_noise_scales_with_combine_norm(self, radio, pn_preamble):
        taps = np.zeros(40, dtype=complex)
        rng = np.random.default_rng(0)
        rec = synthesize_rx(taps, pn_preamble, radio, 256.0, rng=rng)
        measured = np.mean(np.abs(rec.samples) ** 2)
        assert measured == pytest.approx(256.0 * noise_variance(radio), rel=0.1)

    def test_noise_is_reproducible_from_rng_state(self, radio, pn_preamble):
        taps = np.zeros(16, dtype=complex)
        a = synthesize_rx(taps, pn_preamble, radio, 1.0, rng=np.random.default_rng(42))
        b = synthesize_rx(taps, pn_preamble, radio, 1.0, rng=np.random.default_rng(42))
        assert np.array_equal(a.samples, b.samples)
