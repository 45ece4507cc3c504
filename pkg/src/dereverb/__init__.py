"""Sweep-calibrated single-channel dereverberation toolkit.

Identify a recording chain from a periodic linear sweep by frame-wise
cepstral deconvolution, fade the identified response per frequency bin
using blind decay-time ratios, and apply the result as an inverse spectral
filterbank to dry out arbitrary recordings made through the same chain.
"""

from .config import PipelineConfig
from .errors import (
    DereverbError,
    InsufficientExcitationError,
    NumericalError,
    ParameterError,
    SampleRateMismatchError,
)
from .cepstrum import estimate_ir, real_cepstrum_frame
from .inverse_filter import FilterBank, build_filterbank, filter_signal
from .metrics import SignalStats, d50, lpa, signal_stats
from .shaping import DecayMatrix, T60Ratio, apply_global_decay, build_decay_matrix, shape_ir, t60_ratio
from .signal_core import ChirpSpec, ImpulseResponse, Signal, convolve, generate_chirp, normalize_peak
from .simulate import BandTailSpec, ChannelSpec, EchoSpec, simulate_recording, synthesize_channel
from .spectral import FrameParams, Spectrogram, istft, regularized_magnitude, stft
from .t60 import T60Profile, cumulative_tail_energy, psd, t60_broadband, t60_per_bin
from .wavio import read_wav, write_wav

__version__ = "0.1.0"

__all__ = [
    "BandTailSpec",
    "ChannelSpec",
    "ChirpSpec",
    "DecayMatrix",
    "DereverbError",
    "EchoSpec",
    "FilterBank",
    "FrameParams",
    "ImpulseResponse",
    "InsufficientExcitationError",
    "NumericalError",
    "ParameterError",
    "PipelineConfig",
    "SampleRateMismatchError",
    "Signal",
    "SignalStats",
    "Spectrogram",
    "T60Profile",
    "T60Ratio",
    "apply_global_decay",
    "build_decay_matrix",
    "build_filterbank",
    "convolve",
    "cumulative_tail_energy",
    "d50",
    "estimate_ir",
    "filter_signal",
    "generate_chirp",
    "istft",
    "lpa",
    "normalize_peak",
    "psd",
    "read_wav",
    "real_cepstrum_frame",
    "regularized_magnitude",
    "shape_ir",
    "signal_stats",
    "simulate_recording",
    "stft",
    "synthesize_channel",
    "t60_broadband",
    "t60_per_bin",
    "t60_ratio",
    "write_wav",
]
