"""Per-bin exponential fading of an impulse response's short-time spectrum.

The fade rate of each frequency bin is set by the ratio of blind decay
times between the recorded and the original test signal. Frame eta of the
response's spectrogram is multiplied by exp(-tau/rho) with
tau = eta*n_hop/sample_rate, then the frames are resynthesized with the
Hann/COLA machinery from `spectral`. Bins whose ratio is large keep their
late structure; bins whose ratio is near the floor are faded fast.

Note a ratio of exactly 1 still fades (decay constant of one second): the
fade always runs, it is only slowed where the recording rings longer than
the excitation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .signal_core import ImpulseResponse, Signal
from .spectral import FrameParams, Spectrogram, istft, stft
from .t60 import T60Profile

__all__ = [
    "T60Ratio",
    "DecayMatrix",
    "t60_ratio",
    "build_decay_matrix",
    "shape_ir",
    "apply_global_decay",
    "save_decay_csv",
]


@dataclass(frozen=True)
class T60Ratio:
    """Per-bin decay-time ratio recorded/original, floored away from zero."""

    rho_per_bin: np.ndarray
    floor: float

    def __post_init__(self):
        rho = np.asarray(self.rho_per_bin, dtype=np.float64)
        object.__setattr__(self, "rho_per_bin", rho)
        if self.floor <= 0:
            raise ParameterError(f"floor must be > 0, got {self.floor}")
        if rho.ndim != 1:
            raise ParameterError("rho_per_bin must be a vector")
        if np.any(rho < self.floor):
            raise ParameterError("ratio entries below the floor")


@dataclass(frozen=True)
class DecayMatrix:
    """Per-bin, per-frame attenuation factors in (0, 1]."""

    values: np.ndarray
    params: FrameParams

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.ndim != 2:
            raise ParameterError("decay matrix must be 2-D")
        if values.shape[0] != self.params.n_dft:
            raise ParameterError(
                f"decay matrix has {values.shape[0]} bins, params.n_dft={self.params.n_dft}"
            )
        if np.any(values <= 0) or np.any(values > 1):
            raise ParameterError("decay entries must lie in (0, 1]")

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]


def t60_ratio(profile_y: T60Profile, profile_x: T60Profile, floor: float = 1e-6) -> T60Ratio:
    """Per-bin ratio T60(y)/T60(x) with numerator, denominator and result floored.

    A floored denominator corresponds to a bin that was already dry in the
    excitation; flooring keeps the division finite there.
    """
    if floor <= 0:
        raise ParameterError(f"floor must be > 0, got {floor}")
    if profile_y.params != profile_x.params:
        raise ParameterError("T60 profiles were computed on different framing grids")
    num = np.maximum(profile_y.t60_per_bin, floor)
    den = np.maximum(profile_x.t60_per_bin, floor)
    return T60Ratio(np.maximum(num / den, floor), floor)


def build_decay_matrix(rho: T60Ratio, p: FrameParams, n_frames: int) -> DecayMatrix:
    """Attenuation exp(-tau/rho) with tau = eta*n_hop/sample_rate per frame."""
    if n_frames < 1:
        raise ParameterError(f"n_frames must be >= 1, got {n_frames}")
    if len(rho.rho_per_bin) != p.n_dft:
        raise ParameterError(
            f"ratio has {len(rho.rho_per_bin)} bins but params.n_dft={p.n_dft}"
        )
    tau = np.arange(n_frames) * p.n_hop / p.sample_rate
    values = np.exp(-tau[None, :] / rho.rho_per_bin[:, None])
    return DecayMatrix(values, p)


def shape_ir(h: ImpulseResponse, d: DecayMatrix, p: FrameParams) -> ImpulseResponse:
    """Fade the response's short-time spectrum by the decay matrix.

    The decay matrix must have been built with `p` and with
    n_frames = ceil(len(h)/n_hop), the response's own frame count.

    Internally the response is advanced by one hop before framing and the
    decay columns are advanced with it. The identified response carries its
    peak at tap 0, exactly where the periodic Hann analysis window is zero;
    framing it in place would annihilate the direct path regardless of the
    decay values. With the one-hop shift every tap is covered by at least
    two window positions, so a unit decay matrix reconstructs the input
    exactly and fading applies at the intended tap times. The output is
    trimmed back to len(h) and deliberately NOT renormalized: shaping is
    supposed to remove energy and the metrics must see that.
    """
    if d.params != p:
        raise ParameterError("decay matrix was built with different frame params")
    expected_frames = p.n_frames_for(len(h))
    if d.n_frames != expected_frames:
        raise ParameterError(
            f"decay matrix has {d.n_frames} frames but the response frames to "
            f"{expected_frames} under these params"
        )
    if h.sample_rate != p.sample_rate:
        raise ParameterError(
            f"sample rates differ: response {h.sample_rate} Hz vs params {p.sample_rate} Hz"
        )

    shifted = np.concatenate([np.zeros(p.n_hop), h.taps])
    g = stft(Signal(shifted, p.sample_rate), p)
    # Frame 0 holds only the shift pad and leading taps at lag ~0; it keeps
    # decay column 0 (which is identically 1), frame eta >= 1 takes column
    # eta-1 so each column still acts at its nominal tap time.
    columns = np.concatenate([[0], np.arange(d.n_frames)])
    if g.n_frames != len(columns):
        raise ParameterError(
            f"internal framing mismatch: {g.n_frames} frames vs {len(columns)} decay columns"
        )
    faded = Spectrogram(g.bins * d.values[:, columns], p)
    out = istft(faded).samples[p.n_hop : p.n_hop + len(h)]
    return ImpulseResponse(out, h.sample_rate)


def apply_global_decay(h: ImpulseResponse, dk: float) -> ImpulseResponse:
    """Overall exponential fade exp(-dk*n) per tap; dk = 0 is the identity."""
    if dk < 0:
        raise ParameterError(f"dk must be >= 0, got {dk}")
    if dk == 0.0:
        return h
    n = np.arange(len(h))
    return ImpulseResponse(h.taps * np.exp(-dk * n), h.sample_rate)


def save_decay_csv(path, d: DecayMatrix) -> None:
    """Write the decay matrix as CSV, one row per bin, with a params header."""
    p = d.params
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                f"n_dft={p.n_dft}",
                f"n_hop={p.n_hop}",
                f"sample_rate={p.sample_rate}",
                f"n_frames={d.n_frames}",
            ]
        )
        for row in d.values:
            writer.writerow([repr(float(v)) for v in row])
