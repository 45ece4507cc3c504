"""Spectral division of a recording by a (shaped) impulse response.

The response defines a time-invariant filterbank: its full-length spectrum
is computed once and divided into every STFT frame of the input signal. The
frame size equals the response length and the hop is half of it, so the
Hann/COLA resynthesis from `spectral` applies directly.

Division is regularized by flooring the denominator magnitude at epsilon
while preserving its phase, which bounds the gain at 1/epsilon without
introducing phase discontinuities. (A plain max() on complex values would
be meaningless.)
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ParameterError, SampleRateMismatchError
from .signal_core import ImpulseResponse, Signal, normalize_peak
from .spectral import FrameParams, Spectrogram, istft, stft

__all__ = ["FilterBank", "build_filterbank", "filter_signal"]


@dataclass(frozen=True)
class FilterBank:
    """Single-frame spectrum of a response, broadcast over signal frames."""

    response: np.ndarray
    epsilon: float
    params: FrameParams

    def __post_init__(self):
        response = np.asarray(self.response, dtype=np.complex128)
        object.__setattr__(self, "response", response)
        if self.epsilon <= 0:
            raise ParameterError(f"epsilon must be > 0, got {self.epsilon}")
        if response.ndim != 1 or len(response) != self.params.n_dft:
            raise ParameterError(
                f"response spectrum must have length n_dft={self.params.n_dft}"
            )
        if not np.all(np.isfinite(response)):
            raise NumericalError("filterbank response contains NaN or Inf")

    def regularized_response(self) -> np.ndarray:
        """Denominator with magnitude floored at epsilon, phase preserved.

        Bins with zero magnitude have no phase to preserve and get the
        positive-real floor.
        """
        mag = np.abs(self.response)
        out = self.response.copy()
        weak = (mag > 0) & (mag < self.epsilon)
        out[weak] = self.response[weak] / mag[weak] * self.epsilon
        out[mag == 0] = self.epsilon
        return out


def build_filterbank(h: ImpulseResponse, epsilon: float = 1e-6) -> FilterBank:
    """Filterbank from a response: frame size = response length, hop = half.

    The response occupies exactly one frame; its unwindowed spectrum is the
    divisor for every signal frame (the only self-consistent reading for a
    time-invariant system).
    """
    if epsilon <= 0:
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")
    n_dft = len(h)
    if n_dft < 2:
        raise ParameterError("response must have at least 2 taps to define framing")
    params = FrameParams(
        n_dft=n_dft,
        n_hop=max(1, n_dft // 2),
        sample_rate=h.sample_rate,
        analysis_window="hann",
    )
    if n_dft % 2:
        warnings.warn(
            f"response length {n_dft} is odd; hop {params.n_hop} is not exactly half",
            stacklevel=2,
        )
    return FilterBank(np.fft.fft(h.taps), epsilon, params)


def filter_signal(z: Signal, fb: FilterBank) -> Signal:
    """Deconvolve a recording by the filterbank response.

    STFT the input on the bank's Hann grid, divide every frame by the
    regularized response, resynthesize, trim to the input length and apply
    lenient peak normalization (divide only if the peak exceeds 1).

    The input is advanced by one hop before framing and trimmed after
    resynthesis so that the leading samples are fully window-covered; this
    makes the delta-response bank an exact identity instead of losing the
    first few samples to the Hann onset.
    """
    if z.sample_rate != fb.params.sample_rate:
        raise SampleRateMismatchError(
            f"sample rates differ: signal {z.sample_rate} Hz vs filterbank {fb.params.sample_rate} Hz"
        )
    if np.all(np.abs(fb.response) < fb.epsilon):
        warnings.warn(
            "filter uninformative: every response bin is below epsilon", stacklevel=2
        )

    hop = fb.params.n_hop
    shifted = np.concatenate([np.zeros(hop), z.samples])
    g = stft(Signal(shifted, z.sample_rate), fb.params)
    denom = fb.regularized_response()
    filtered = Spectrogram(g.bins / denom[:, None], fb.params)
    out = istft(filtered).samples[hop : hop + len(z)]
    return normalize_peak(Signal(out, z.sample_rate))
