"""
Sensing preambles and per-beam receive-record synthesis.

The default preamble is the 3328-sample single-carrier PHY preamble: a short
training field of sixteen Ga128 repetitions closed by -Ga128, then a channel
estimation field built from Gu512 = [-Gb, -Ga, +Gb, -Ga] and
Gv512 = [-Gb, +Ga, -Gb, -Ga] followed by a trailing -Gb128, the whole thing
pi/2-BPSK rotated (sample n multiplied by j^n). Golay complementarity makes
its aperiodic autocorrelation essentially a delta, which is what lets a
single matched filter per beam resolve multipath taps.

synthesize_rx applies the tapped channel of mmdepth.channel to a preamble
and adds circular complex noise scaled by the combiner norm, producing the
length n_p + l_d record the estimators consume.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import RadioConfig, noise_variance

__all__ = [
    "golay_pair_128",
    "golay_pair",
    "make_preamble",
    "pi_half_rotate",
    "SensingRecord",
    "synthesize_rx",
]

PREAMBLE_LENGTH = 3328  # STF (17*128) + CEF (9*128) samples

# Delay and seed sequences of the length-128 Golay generator.
_GOLAY_D = (1, 8, 2, 4, 16, 32, 64)
_GOLAY_W = (-1, -1, -1, -1, 1, -1, -1)


def golay_pair_128() -> tuple[np.ndarray, np.ndarray]:
    """
    The binary complementary pair (Ga128, Gb128).

    Built by the seven-stage delay-and-weight recursion

        A_k(n) = W_k A_{k-1}(n) + B_{k-1}(n - D_k)
        B_k(n) = W_k A_{k-1}(n) - B_{k-1}(n - D_k)

    from A_0 = B_0 = delta, with D = (1, 8, 2, 4, 16, 32, 64) and
    W = (-1, -1, -1, -1, 1, -1, -1), reading the results out time-reversed.
    The pair satisfies corr(Ga) + corr(Gb) = 256 * delta.
    """
    n = 128
    a = np.zeros(n)
    b = np.zeros(n)
    a[0] = 1.0
    b[0] = 1.0
    for d, w in zip(_GOLAY_D, _GOLAY_W):
        a_new = w * a.copy()
        a_new[d:] += b[:-d]
        b_new = w * a.copy()
        b_new[d:] -= b[:-d]
        a, b = a_new, b_new
    return a[::-1].copy(), b[::-1].copy()


def golay_pair(length: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Binary complementary pair of any power-of-two length.

    Length 128 comes from the standard generator above; other powers of two
    use the doubling construction a' = [a, b], b' = [a, -b] which preserves
    complementarity at every step.
    """
    if length < 1 or length & (length - 1):
        raise ValueError("Golay pair length must be a power of two")
    if length == 128:
        return golay_pair_128()
    a = np.ones(1)
    b = np.ones(1)
    while len(a) < length:
        a, b = np.concatenate([a, b]), np.concatenate([a, -b])
    return a, b


_QUARTER_TURNS = np.array([1.0 + 0.0j, 0.0 + 1.0j, -1.0 + 0.0j, 0.0 - 1.0j])


def pi_half_rotate(symbols: np.ndarray) -> np.ndarray:
    """Apply the pi/2 rotation s[n] = x[n] * j^n (exact quarter turns)."""
    n = np.arange(len(symbols))
    return symbols * _QUARTER_TURNS[n % 4]


def _preamble_3328() -> np.ndarray:
    ga, gb = golay_pair_128()
    stf = np.concatenate([np.tile(ga, 16), -ga])
    gu = np.concatenate([-gb, -ga, gb, -ga])
    gv = np.concatenate([-gb, ga, -gb, -ga])
    cef = np.concatenate([gu, gv, -gb])
    return pi_half_rotate(np.concatenate([stf, cef]))


def make_preamble(
    kind: str = "golay_80211ad",
    length: int = PREAMBLE_LENGTH,
    seed: int | np.random.SeedSequence = 0,
) -> np.ndarray:
    """
    Unit-modulus complex sensing preamble of the given length.

    kind "golay_80211ad" is the 3328-sample structured preamble; shorter
    lengths take its prefix (the STF keeps its correlation structure under
    truncation at Ga128 boundaries), longer ones are rejected. kind "pn" is
    a seeded unit-modulus QPSK sequence of any positive length, useful for
    sweeps over preamble length.
    """
    if length < 1:
        raise ValueError("preamble length must be positive")
    if kind == "golay_80211ad":
        if length > PREAMBLE_LENGTH:
            raise ValueError(
                f"structured preamble has {PREAMBLE_LENGTH} samples; {length} requested"
            )
        return _preamble_3328()[:length]
    if kind == "pn":
        rng = np.random.default_rng(seed)
        quad = rng.integers(0, 4, size=length)
        return np.exp(1j * (np.pi / 4.0 + np.pi / 2.0 * quad))
    raise ValueError(f"unknown preamble kind {kind!r}")


@dataclass
class SensingRecord:
    """One beam's received record plus the shape facts estimators need."""

    beam: int                 # flattened beam index m
    n_p: int                  # preamble length in samples
    l_d: int                  # delay-window length in samples
    samples: np.ndarray       # complex record, length n_p + l_d

    def __post_init__(self):
        if len(self.samples) != self.n_p + self.l_d:
            raise ValueError(
                f"record length {len(self.samples)} != n_p + l_d = {self.n_p + self.l_d}"
            )


def synthesize_rx(
    taps: np.ndarray,
    preamble: np.ndarray,
    radio: RadioConfig,
    combine_norm_sq: float,
    rng: np.random.Generator | None = None,
    beam: int = 0,
) -> SensingRecord:
    """
    Form the received record of one beam,

        y[n] = sqrt(E_s) * sum_d taps[d] * s[n - d] + nu[n],

    with nu circular complex noise of variance sigma_n^2 * ||w||^2 per
    sample (combine_norm_sq = ||w||^2). The record spans n = 0 .. n_p+l_d-1.
    Pass rng=None for a noiseless record.
    """
    taps = np.asarray(taps)
    preamble = np.asarray(preamble)
    n_p = len(preamble)
    l_d = len(taps)
    y = np.zeros(n_p + l_d, dtype=complex)
    y[: n_p + l_d - 1] = np.sqrt(radio.symbol_energy_j) * np.convolve(preamble, taps)
    if rng is not None:
        var = noise_variance(radio) * combine_norm_sq
        scale = np.sqrt(var / 2.0)
        y += scale * (rng.standard_normal(len(y)) + 1j * rng.standard_normal(len(y)))
    return SensingRecord(beam=beam, n_p=n_p, l_d=l_d, samples=y)
