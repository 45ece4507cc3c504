from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dereverb import (
    FrameParams,
    ParameterError,
    Signal,
    Spectrogram,
    cumulative_tail_energy,
    psd,
    stft,
    t60_broadband,
    t60_per_bin,
)
from dereverb.t60 import load_t60_csv, save_t60_csv

FS = 8000.0


def geometric_crossing_exact(r: Fraction, threshold: Fraction, n_frames: int) -> int:
    """First eta with tail-ratio below threshold for S[eta] = r^eta, exact
    rational arithmetic over the finite frame count (the independent oracle).
    """
    total = sum(r**k for k in range(n_frames))
    for eta in range(n_frames):
        tail = sum(r**k for k in range(eta, n_frames))
        if tail / total < threshold:
            return eta
    return n_frames


def brute_force_tail(power):
    n_bins, n_frames = power.shape
    out = np.zeros_like(power, dtype=float)
    for mu in range(n_bins):
        total = sum(power[mu])
        for eta in range(n_frames):
            tail = sum(power[mu][eta:])
            out[mu, eta] = tail / total if total > 0 else 0.0
    return out


def params(n_dft=8, n_hop=4):
    return FrameParams(n_dft, n_hop, FS, "rectangular")


class TestPsd:
    def test_magnitude_arithmetic(self):
        g = Spectrogram(np.full((4, 1), 3 + 4j), params(4, 2))
        np.testing.assert_allclose(psd(g), 25.0)

    def test_zero_spectrogram(self):
        g = Spectrogram(np.zeros((4, 2), dtype=complex), params(4, 2))
        np.testing.assert_array_equal(psd(g), 0.0)

    def test_elementwise_oracle(self):
        rng = np.random.default_rng(0)
        bins = rng.standard_normal((8, 5)) + 1j * rng.standard_normal((8, 5))
        g = Spectrogram(bins, params())
        expected = np.array([[abs(z) ** 2 for z in row] for row in bins])
        np.testing.assert_allclose(psd(g), expected, rtol=1e-14)


class TestCumulativeTailEnergy:
    def test_energy_only_first_frame(self):
        power = np.zeros((1, 4))
        power[0, 0] = 2.5
        np.testing.assert_allclose(cumulative_tail_energy(power)[0], [1, 0, 0, 0])

    def test_uniform_energy(self):
        power = np.ones((1, 4))
        np.testing.assert_allclose(cumulative_tail_energy(power)[0], [1, 0.75, 0.5, 0.25])

    def test_zero_bin_is_all_zero(self):
        power = np.zeros((2, 3))
        power[1] = [1, 1, 1]
        energy = cumulative_tail_energy(power)
        np.testing.assert_array_equal(energy[0], 0.0)
        assert energy[1, 0] == 1.0

    def test_matches_brute_force(self):
        rng = np.random.default_rng(1)
        power = rng.uniform(0, 1, (8, 8))
        np.testing.assert_allclose(
            cumulative_tail_energy(power), brute_force_tail(power), atol=1e-12
        )

    def test_rejects_negative(self):
        with pytest.raises(ParameterError):
            cumulative_tail_energy(np.array([[1.0, -0.5]]))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_non_increasing_along_frames(self, seed):
        rng = np.random.default_rng(seed)
        power = rng.uniform(0, 1, (6, 10))
        energy = cumulative_tail_energy(power)
        assert np.all(np.diff(energy, axis=1) <= 1e-15)


def spectrogram_from_psd(power, p):
    """Spectrogram whose squared magnitudes reproduce `power` (up to fp)."""
    return Spectrogram(np.sqrt(power).astype(complex), p)


class TestT60PerBin:
    def test_single_hot_frame(self):
        power = np.zeros((8, 4))
        power[:, 0] = 1.0
        p = params()
        profile = t60_per_bin(spectrogram_from_psd(power, p), 0.001)
        np.testing.assert_array_equal(profile.crossing_frame, 1)
        np.testing.assert_allclose(profile.t60_per_bin, p.overlap * 1 / FS)
        np.testing.assert_allclose(profile.t60_hop_per_bin, 1 * p.n_hop / FS)

    def test_zero_energy_bin_is_fully_decayed(self):
        power = np.zeros((8, 4))
        power[1:, 0] = 1.0
        profile = t60_per_bin(spectrogram_from_psd(power, params()), 0.001)
        assert profile.crossing_frame[0] == 0
        assert profile.t60_per_bin[0] == 0.0
        assert not profile.censored[0]

    def test_censored_bin_reports_full_duration(self):
        power = np.ones((2, 5))  # uniform: tail ratio never below 0.001
        profile = t60_per_bin(spectrogram_from_psd(power, params(2, 1)), 0.001)
        assert profile.censored.all()
        np.testing.assert_array_equal(profile.crossing_frame, 5)

    @pytest.mark.parametrize("threshold", [1e-2, 1e-3, 1e-4])
    @pytest.mark.parametrize("ratio_str", ["3/10", "1/2", "9/10"])
    def test_geometric_decay_matches_exact_oracle(self, threshold, ratio_str):
        r = Fraction(ratio_str)
        n_frames = 256
        n_bins = 4
        scale = np.array([2.0, 0.5, 1.0, 7.0])[:, None]
        power = scale * (float(r) ** np.arange(n_frames))[None, :]
        profile = t60_per_bin(spectrogram_from_psd(power, params(4, 2)), threshold)
        expected = geometric_crossing_exact(
            r, Fraction(threshold).limit_denominator(10**12), n_frames
        )
        np.testing.assert_array_equal(profile.crossing_frame, expected)

    def test_scale_invariance(self):
        rng = np.random.default_rng(2)
        power = rng.uniform(0, 1, (8, 16))
        p = params()
        a = t60_per_bin(spectrogram_from_psd(power, p), 0.01)
        b = t60_per_bin(spectrogram_from_psd(1e6 * power, p), 0.01)
        np.testing.assert_array_equal(a.crossing_frame, b.crossing_frame)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_lower_threshold_never_decreases_crossing(self, seed):
        rng = np.random.default_rng(seed)
        power = rng.uniform(0, 1, (6, 12))
        p = params(6, 3)
        hi = t60_per_bin(spectrogram_from_psd(power, p), 0.01)
        lo = t60_per_bin(spectrogram_from_psd(power, p), 0.001)
        assert np.all(lo.crossing_frame >= hi.crossing_frame)

    def test_single_full_frame_spectrogram(self):
        # with only one frame the threshold is never crossed inside the
        # observation window: every nonzero bin reports the full frame count
        # (1) and is flagged censored
        rng = np.random.default_rng(3)
        power = rng.uniform(0.1, 1, (8, 1))
        profile = t60_per_bin(spectrogram_from_psd(power, params()), 0.001)
        np.testing.assert_array_equal(profile.crossing_frame, 1)
        assert profile.censored.all()


class TestT60Broadband:
    def test_delta_signal(self):
        p = FrameParams(16, 8, FS, "rectangular")
        s = Signal(np.r_[1.0, np.zeros(15)], FS)
        assert t60_broadband(s, p, 0.001) == pytest.approx(p.overlap * 1 / FS)

    def test_silence_is_zero(self):
        p = FrameParams(16, 8, FS, "rectangular")
        assert t60_broadband(Signal(np.zeros(64), FS), p, 0.001) == 0.0

    def test_geometric_noise_burst_matches_closed_form(self):
        # exponentially decaying white noise built in hop-length blocks with
        # exactly geometric per-block energy; at 50% overlap frame eta covers
        # blocks eta and eta+1, so the per-frame energies are known in closed
        # form and the expected crossing is computed with exact rationals
        hop, n_dft = 16, 32
        p = FrameParams(n_dft, hop, FS, "rectangular")
        q = Fraction(1, 4)
        n_blocks = 24
        rng = np.random.default_rng(4)
        blocks = []
        for eta in range(n_blocks):
            b = rng.standard_normal(hop)
            blocks.append(b * np.sqrt(float(q) ** eta / np.sum(b**2)))
        s = Signal(np.concatenate(blocks), FS)

        frame_energies = [
            q**eta + (q ** (eta + 1) if eta + 1 < n_blocks else 0)
            for eta in range(n_blocks)
        ]
        total = sum(frame_energies)
        expected_eta = next(
            eta
            for eta in range(n_blocks)
            if sum(frame_energies[eta:]) / total < Fraction(1, 1000)
        )
        assert t60_broadband(s, p, 0.001) == pytest.approx(
            p.overlap * expected_eta / FS, rel=1e-12
        )


class TestCsvRoundTrip:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        power = rng.uniform(0, 1, (16, 12))
        p = FrameParams(16, 8, FS, "rectangular")
        profile = t60_per_bin(spectrogram_from_psd(power, p), 0.001)
        path = tmp_path / "t60.csv"
        save_t60_csv(path, profile)
        header = path.read_text().splitlines()[0]
        assert header == "bin_index,frequency_hz,t60_paper_s,t60_hop_s,censored"
        back = load_t60_csv(path, p, 0.001)
        np.testing.assert_allclose(back.t60_per_bin, profile.t60_per_bin)
        np.testing.assert_allclose(back.t60_hop_per_bin, profile.t60_hop_per_bin)
        np.testing.assert_array_equal(back.censored, profile.censored)
        np.testing.assert_array_equal(back.crossing_frame, profile.crossing_frame)

    def test_wrong_bin_count_rejected(self, tmp_path):
        rng = np.random.default_rng(6)
        power = rng.uniform(0, 1, (16, 4))
        p = FrameParams(16, 8, FS, "rectangular")
        profile = t60_per_bin(spectrogram_from_psd(power, p), 0.001)
        path = tmp_path / "t60.csv"
        save_t60_csv(path, profile)
        with pytest.raises(ParameterError, match="bins"):
            load_t60_csv(path, FrameParams(32, 16, FS, "rectangular"), 0.001)
