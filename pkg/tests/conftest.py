"""Shared fixtures: radio defaults, preambles, and a tap-line builder."""
import numpy as np
import pytest

from mmdepth.channel import RadioConfig, pulse_taps
from mmdepth.waveform import make_preamble


@pytest.fixture(scope="session")
def radio():
    return RadioConfig()


@pytest.fixture(scope="session")
def golay_preamble():
    """Full-length reference preamble; session-scoped, it is pure."""
    return make_preamble("golay_80211ad", 3328)


@pytest.fixture(scope="session")
def pn_preamble():
    """Short preamble for tests where correlation length is irrelevant."""
    return make_preamble("pn", 256, seed=11)


@pytest.fixture(scope="session")
def tapline(radio):
    """Build a complex tap line from (delays in samples, amplitudes)."""

    def build(delay_samples, amplitudes, l_d=160):
        ts = radio.sample_period_s
        delays = np.asarray(delay_samples, dtype=float) * ts
        idx, val = pulse_taps(delays, l_d, ts, radio.rolloff)
        h = np.zeros(l_d, dtype=complex)
        for p in range(idx.shape[0]):
            np.add.at(h, idx[p], amplitudes[p] * val[p])
        return h

    return build
