"""Frame-wise cepstral deconvolution of a recording chain.

Given the excitation x and the recorded signal y, each frame's real cepstrum
is the inverse transform of the log of the regularized magnitude spectrum.
Convolution is additive in this domain, so subtracting the excitation
cepstrum from the recording cepstrum isolates the chain. Exponentiating the
forward transform of that difference gives the per-frame magnitude response,
whose inverse transform (real part) is a per-frame time-domain response. The
per-frame responses are averaged arithmetically and peak-normalized.

Because only log-magnitudes enter, the recovered response is the zero-phase
response with the estimated magnitude: delays and non-minimum-phase
structure are not recovered. The downstream inverse filter divides by the
magnitude-dominated spectrum, so this is sufficient for its purpose, but it
is a known limitation of the method.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InsufficientExcitationError, ParameterError, SampleRateMismatchError
from .signal_core import ImpulseResponse, Signal
from .spectral import FrameParams, frame_signal, make_window
from . import wavio

__all__ = [
    "real_cepstrum_frame",
    "estimate_ir",
    "save_ir",
    "load_ir",
]


def real_cepstrum_frame(spectrum_frame: np.ndarray, epsilon: float) -> np.ndarray:
    """Real cepstrum of one complex spectrum frame.

    Computes Re{ifft(ln(max(|frame|, epsilon)))}. The output has the frame's
    length and is even-symmetric about index 0, since it is the inverse
    transform of a real, even log-magnitude.
    """
    if epsilon <= 0:
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")
    log_mag = np.log(np.maximum(np.abs(np.asarray(spectrum_frame)), epsilon))
    return np.real(np.fft.ifft(log_mag))


def _silent_frame_mask(frames: np.ndarray, floor: float) -> np.ndarray:
    """True for frames whose peak falls below `floor`."""
    return np.max(np.abs(frames), axis=0) < floor


def estimate_ir(
    x: Signal, y: Signal, p: FrameParams, epsilon: float = 1e-10
) -> ImpulseResponse:
    """Identify the chain between excitation x and recording y.

    Framing uses the rectangular analysis window at 50% overlap; both
    signals are zero-padded to a common frame grid. Frame pairs where either
    side is silent are excluded from the average: a silent frame carries no
    excitation, only the regularization floor, and its log-ratio would
    swamp the informative frames. (With no silent frames the average runs
    over exactly the full frame count.)

    Returns the averaged response, strictly peak-normalized to 1.
    """
    if x.sample_rate != y.sample_rate:
        raise SampleRateMismatchError(
            f"sample rates differ: x {x.sample_rate} Hz vs y {y.sample_rate} Hz"
        )
    if p.analysis_window != "rectangular":
        raise ParameterError(
            "identification requires the rectangular analysis window, "
            f"got {p.analysis_window!r}"
        )
    if p.n_hop != p.n_dft // 2:
        raise ParameterError(
            f"identification requires 50% overlap (n_hop={p.n_dft // 2}), got n_hop={p.n_hop}"
        )
    if epsilon <= 0:
        raise ParameterError(f"epsilon must be > 0, got {epsilon}")
    if len(x) < p.n_hop or len(y) < p.n_hop:
        raise ParameterError("both signals must be at least one hop long")

    # Silence is judged against nominal full scale: a signal whose peak sits
    # at or below the regularization floor cannot be deconvolved.
    if x.peak() <= epsilon:
        raise InsufficientExcitationError("excitation signal x is silent")
    if y.peak() <= epsilon:
        raise InsufficientExcitationError("recorded signal y is silent")

    common_len = max(len(x), len(y))
    x_padded = np.zeros(common_len)
    x_padded[: len(x)] = x.samples
    y_padded = np.zeros(common_len)
    y_padded[: len(y)] = y.samples

    x_frames = frame_signal(x_padded, p)
    y_frames = frame_signal(y_padded, p)

    frame_floor = epsilon * max(x.peak(), y.peak())
    silent = _silent_frame_mask(x_frames, frame_floor) | _silent_frame_mask(
        y_frames, frame_floor
    )
    keep = ~silent
    if not np.any(keep):
        raise InsufficientExcitationError(
            "no frame contains excitation in both signals"
        )

    window = make_window("rectangular", p.n_dft)[:, None]
    x_spec = np.fft.fft(x_frames[:, keep] * window, axis=0)
    y_spec = np.fft.fft(y_frames[:, keep] * window, axis=0)

    cep_x = np.real(np.fft.ifft(np.log(np.maximum(np.abs(x_spec), epsilon)), axis=0))
    cep_y = np.real(np.fft.ifft(np.log(np.maximum(np.abs(y_spec), epsilon)), axis=0))
    cep_h = cep_y - cep_x

    response_spec = np.exp(np.fft.fft(cep_h, axis=0))
    h_frames = np.real(np.fft.ifft(response_spec, axis=0))

    h_mean = np.mean(h_frames, axis=1)
    peak = np.max(np.abs(h_mean))
    if peak == 0.0:
        raise InsufficientExcitationError("averaged response is identically zero")
    return ImpulseResponse(h_mean / peak, x.sample_rate)


def save_ir(path, ir: ImpulseResponse, meta: dict | None = None) -> None:
    """Persist an impulse response as float32 WAV plus a JSON sidecar.

    The sidecar (same path with .json appended) records sample_rate plus any
    provenance the caller supplies (n_dft, n_hop, epsilon, created_from).
    """
    path = Path(path)
    wavio.write_wav(path, ir.as_signal(), encoding="float32")
    sidecar = {"sample_rate": ir.sample_rate}
    if meta:
        sidecar.update(meta)
    path.with_suffix(path.suffix + ".json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n"
    )


def load_ir(path) -> ImpulseResponse:
    """Load an impulse response written by save_ir (sidecar optional)."""
    s = wavio.read_wav(path)
    return ImpulseResponse(s.samples, s.sample_rate)
