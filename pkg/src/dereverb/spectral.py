"""Short-time analysis and constant-overlap-add resynthesis.

Frames advance forward in time: frame eta covers samples
[eta*n_hop, eta*n_hop + n_dft) of the right-zero-padded source. The forward
transform uses the e^{-j*2*pi*mu*nu/N} kernel without a scale factor and the
inverse carries the 1/N factor, matching numpy's FFT convention.

Resynthesis multiplies each inverse-transformed frame by a periodic Hann
synthesis window, overlap-adds at hop spacing and divides by the accumulated
product of analysis and synthesis windows wherever that envelope exceeds a
small floor. With the periodic Hann pair at 50% hop this reconstructs every
doubly-covered sample exactly; positions whose envelope falls below the
floor (the first few samples of a stream, where only a near-zero window tail
ever lands) are left unnormalized rather than amplified.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ParameterError
from .signal_core import Signal

__all__ = [
    "FrameParams",
    "Spectrogram",
    "make_window",
    "stft",
    "istft",
    "regularized_magnitude",
]

ENVELOPE_FLOOR = 1e-8

_WINDOW_NAMES = ("rectangular", "hann")


def make_window(name: str, n_dft: int) -> np.ndarray:
    """Analysis/synthesis window of length n_dft.

    The Hann window is the periodic variant 0.5*(1 - cos(2*pi*nu/n_dft)),
    which sums to a constant under 50% overlap; the symmetric variant does
    not.
    """
    if name == "rectangular":
        return np.ones(n_dft)
    if name == "hann":
        nu = np.arange(n_dft)
        return 0.5 * (1.0 - np.cos(2.0 * np.pi * nu / n_dft))
    raise ParameterError(f"unknown window {name!r}, expected one of {_WINDOW_NAMES}")


@dataclass(frozen=True)
class FrameParams:
    """Framing grid shared by analysis, shaping and synthesis."""

    n_dft: int
    n_hop: int
    sample_rate: float
    analysis_window: str = "hann"

    def __post_init__(self):
        if self.n_dft < 1:
            raise ParameterError(f"n_dft must be >= 1, got {self.n_dft}")
        if not (1 <= self.n_hop <= self.n_dft):
            raise ParameterError(
                f"n_hop must satisfy 1 <= n_hop <= n_dft, got n_hop={self.n_hop}, n_dft={self.n_dft}"
            )
        if self.sample_rate <= 0:
            raise ParameterError(f"sample_rate must be > 0, got {self.sample_rate}")
        if self.analysis_window not in _WINDOW_NAMES:
            raise ParameterError(
                f"analysis_window must be one of {_WINDOW_NAMES}, got {self.analysis_window!r}"
            )

    @property
    def overlap(self) -> float:
        """Overlap fraction 1 - n_hop/n_dft, in [0, 1)."""
        return 1.0 - self.n_hop / self.n_dft

    def n_frames_for(self, n_samples: int) -> int:
        return int(np.ceil(n_samples / self.n_hop))


@dataclass(frozen=True)
class Spectrogram:
    """Complex short-time spectrum, shape (n_dft, n_frames)."""

    bins: np.ndarray
    params: FrameParams

    def __post_init__(self):
        bins = np.asarray(self.bins, dtype=np.complex128)
        object.__setattr__(self, "bins", bins)
        if bins.ndim != 2:
            raise ParameterError(f"spectrogram must be 2-D, got shape {bins.shape}")
        if bins.shape[0] != self.params.n_dft:
            raise ParameterError(
                f"spectrogram has {bins.shape[0]} bins but params.n_dft={self.params.n_dft}"
            )
        if bins.shape[1] < 1:
            raise ParameterError("spectrogram must contain at least one frame")
        if not np.all(np.isfinite(bins)):
            raise NumericalError("spectrogram contains NaN or Inf entries")

    @property
    def n_frames(self) -> int:
        return self.bins.shape[1]


def frame_signal(samples: np.ndarray, p: FrameParams) -> np.ndarray:
    """Slice a signal into forward-advancing frames, shape (n_dft, n_frames).

    The source is zero-padded on the right so the final frame is full and no
    input sample is discarded. This is the single place that fixes the frame
    direction convention for the whole package.
    """
    n_frames = p.n_frames_for(len(samples))
    padded_len = (n_frames - 1) * p.n_hop + p.n_dft
    padded = np.zeros(padded_len)
    padded[: len(samples)] = samples
    idx = np.arange(p.n_dft)[:, None] + p.n_hop * np.arange(n_frames)[None, :]
    return padded[idx]


def stft(s: Signal, p: FrameParams) -> Spectrogram:
    """Windowed short-time spectrum of a signal."""
    frames = frame_signal(s.samples, p)
    window = make_window(p.analysis_window, p.n_dft)
    return Spectrogram(np.fft.fft(frames * window[:, None], axis=0), p)


def istft(g: Spectrogram, synthesis_window: str = "hann") -> Signal:
    """Resynthesize a signal from a (possibly modified) spectrogram.

    Output length is (n_frames-1)*n_hop + n_dft, i.e. the padded analysis
    span; callers trim to their original length. Exact reconstruction needs
    n_hop = n_dft/2 (warned otherwise); the envelope division still gives a
    consistent resynthesis at other hops.
    """
    p = g.params
    if synthesis_window != "hann":
        raise ParameterError("only the Hann synthesis window is supported")
    if p.n_hop * 2 != p.n_dft:
        warnings.warn(
            f"n_hop={p.n_hop} is not n_dft/2={p.n_dft // 2}; overlap-add is "
            "envelope-compensated but not the exact Hann COLA configuration",
            stacklevel=2,
        )

    w_synth = make_window("hann", p.n_dft)
    w_analysis = make_window(p.analysis_window, p.n_dft)
    frames = np.real(np.fft.ifft(g.bins, axis=0)) * w_synth[:, None]

    n_frames = g.n_frames
    out_len = (n_frames - 1) * p.n_hop + p.n_dft
    out = np.zeros(out_len)
    envelope = np.zeros(out_len)
    w_product = w_analysis * w_synth
    for eta in range(n_frames):
        start = eta * p.n_hop
        out[start : start + p.n_dft] += frames[:, eta]
        envelope[start : start + p.n_dft] += w_product

    compensate = envelope > ENVELOPE_FLOOR
    out[compensate] /= envelope[compensate]
    return Signal(out, p.sample_rate)


def regularized_magnitude(g: Spectrogram, epsilon: float) -> np.ndarray:
    """Elementwise max(|bin|, epsilon); the floor keeps later logs finite."""
    if epsilon <= 0:
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")
    return np.maximum(np.abs(g.bins), epsilon)
