"""Blind per-bin reverberation time from cumulative spectral tail energy.

For every frequency bin, the fraction of that bin's energy remaining from
frame eta onward is tracked; the decay time is the first frame index where
this fraction falls below a threshold (0.001 by default, the -60 dB figure
read on magnitude). Two time scalings are reported: the primary
`t60_per_bin` multiplies the crossing index by overlap/sample_rate, and the
conventional hop-time variant `t60_hop_per_bin` multiplies by
n_hop/sample_rate. Downstream shaping consumes ratios of these values, so
the constant factor between the two conventions cancels there.

Bins whose total energy is zero are treated as fully decayed (crossing index
0, T60 = 0): they carry no reverberant energy to shape. Bins that never
cross the threshold are reported at the full frame count and flagged as
censored, keeping every profile entry finite.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .signal_core import Signal
from .spectral import FrameParams, Spectrogram, stft

__all__ = [
    "T60Profile",
    "psd",
    "cumulative_tail_energy",
    "t60_per_bin",
    "t60_broadband",
    "save_t60_csv",
    "load_t60_csv",
]


@dataclass(frozen=True)
class T60Profile:
    """Per-bin decay times, both time conventions, and censoring flags."""

    t60_per_bin: np.ndarray
    t60_hop_per_bin: np.ndarray
    crossing_frame: np.ndarray
    censored: np.ndarray
    params: FrameParams
    threshold: float

    def __post_init__(self):
        if not (0.0 < self.threshold < 1.0):
            raise ParameterError(f"threshold must lie in (0, 1), got {self.threshold}")
        n = len(self.t60_per_bin)
        if n != self.params.n_dft:
            raise ParameterError(
                f"profile has {n} bins but params.n_dft={self.params.n_dft}"
            )
        for name in ("t60_hop_per_bin", "crossing_frame", "censored"):
            if len(getattr(self, name)) != n:
                raise ParameterError(f"{name} length does not match t60_per_bin")
        if np.any(self.t60_per_bin < 0):
            raise ParameterError("negative T60 entries")

    @property
    def n_dft(self) -> int:
        return self.params.n_dft

    def frequencies_hz(self) -> np.ndarray:
        return np.arange(self.n_dft) * self.params.sample_rate / self.n_dft


def psd(g: Spectrogram) -> np.ndarray:
    """Power spectral density: elementwise squared magnitude."""
    return np.abs(g.bins) ** 2


def cumulative_tail_energy(power: np.ndarray) -> np.ndarray:
    """Remaining-energy fraction per bin and frame.

    E[mu, eta] = sum of power[mu, eta:]) / sum of power[mu, :]. Column 0 is 1
    for every bin with nonzero total energy; rows of zero-energy bins are all
    zeros (treated as fully decayed). Values are non-increasing along frames.
    """
    power = np.asarray(power, dtype=np.float64)
    if power.ndim != 2:
        raise ParameterError(f"PSD must be 2-D, got shape {power.shape}")
    if np.any(power < 0):
        raise ParameterError("PSD entries must be nonnegative")
    tail = np.cumsum(power[:, ::-1], axis=1)[:, ::-1]
    total = tail[:, :1]
    out = np.zeros_like(power)
    nonzero = total[:, 0] > 0
    out[nonzero] = tail[nonzero] / total[nonzero]
    return out


def _crossing_indices(energy: np.ndarray, threshold: float) -> tuple[np.ndarray, np.ndarray]:
    """First frame where remaining energy drops below threshold, per bin.

    Returns (crossing, censored); censored bins never cross and get the full
    frame count.
    """
    below = energy < threshold
    crossing = np.argmax(below, axis=1)
    censored = ~below[np.arange(len(energy)), crossing]
    crossing = np.where(censored, energy.shape[1], crossing)
    return crossing.astype(np.int64), censored


def t60_per_bin(g: Spectrogram, threshold: float = 0.001) -> T60Profile:
    """Blind decay-time profile over all bins of a spectrogram."""
    if not (0.0 < threshold < 1.0):
        raise ParameterError(f"threshold must lie in (0, 1), got {threshold}")
    energy = cumulative_tail_energy(psd(g))
    crossing, censored = _crossing_indices(energy, threshold)
    p = g.params
    return T60Profile(
        t60_per_bin=p.overlap * crossing / p.sample_rate,
        t60_hop_per_bin=crossing * p.n_hop / p.sample_rate,
        crossing_frame=crossing,
        censored=censored,
        params=p,
        threshold=threshold,
    )


def t60_broadband(s: Signal, p: FrameParams, threshold: float = 0.001) -> float:
    """Scalar decay time from the PSD summed across all bins.

    The same crossing rule is applied to the single summed energy curve and
    scaled by overlap/sample_rate (the primary convention).
    """
    if not (0.0 < threshold < 1.0):
        raise ParameterError(f"threshold must lie in (0, 1), got {threshold}")
    power = psd(stft(s, p)).sum(axis=0, keepdims=True)
    energy = cumulative_tail_energy(power)
    crossing, _ = _crossing_indices(energy, threshold)
    return float(p.overlap * crossing[0] / p.sample_rate)


_CSV_HEADER = ["bin_index", "frequency_hz", "t60_paper_s", "t60_hop_s", "censored"]


def save_t60_csv(path, profile: T60Profile) -> None:
    """Write a profile as CSV: bin_index,frequency_hz,t60_paper_s,t60_hop_s,censored."""
    freqs = profile.frequencies_hz()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        for mu in range(profile.n_dft):
            writer.writerow(
                [
                    mu,
                    repr(float(freqs[mu])),
                    repr(float(profile.t60_per_bin[mu])),
                    repr(float(profile.t60_hop_per_bin[mu])),
                    int(profile.censored[mu]),
                ]
            )


def load_t60_csv(path, params: FrameParams, threshold: float = 0.001) -> T60Profile:
    """Read a profile CSV back, validating it against the expected framing.

    The CSV stores per-bin values only; the framing grid comes from the
    caller (the pipeline config) and is cross-checked against the row count
    and the frequency column.
    """
    rows = list(csv.reader(Path(path).open()))
    if not rows or rows[0] != _CSV_HEADER:
        raise ParameterError(f"{path}: missing or wrong T60 CSV header")
    body = rows[1:]
    if len(body) != params.n_dft:
        raise ParameterError(
            f"{path}: {len(body)} bins but expected n_dft={params.n_dft}"
        )
    t60_paper = np.array([float(r[2]) for r in body])
    t60_hop = np.array([float(r[3]) for r in body])
    censored = np.array([bool(int(r[4])) for r in body])
    if params.n_dft > 1:
        expected_f1 = params.sample_rate / params.n_dft
        if abs(float(body[1][1]) - expected_f1) > 1e-6 * max(1.0, expected_f1):
            raise ParameterError(
                f"{path}: frequency axis does not match sample_rate={params.sample_rate}"
            )
    # Crossing indices are recoverable from the hop-scaled column.
    crossing = np.rint(t60_hop * params.sample_rate / params.n_hop).astype(np.int64)
    return T60Profile(
        t60_per_bin=t60_paper,
        t60_hop_per_bin=t60_hop,
        crossing_frame=crossing,
        censored=censored,
        params=params,
        threshold=threshold,
    )
