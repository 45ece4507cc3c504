"""Time-domain types, the calibration sweep generator, and linear convolution.

Everything here is pure and operates on immutable values, so any function
may be called concurrently from multiple threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.signal

from .errors import NumericalError, ParameterError, SampleRateMismatchError

__all__ = [
    "Signal",
    "ChirpSpec",
    "ImpulseResponse",
    "generate_chirp",
    "convolve",
    "normalize_peak",
]


def _as_readonly_f64(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ParameterError(f"expected a 1-D sample array, got shape {arr.shape}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Signal:
    """Mono sampled audio.

    Samples are dimensionless amplitudes, nominally in [-1, 1]; sample_rate
    is in Hz. Every sample must be finite and the signal must be nonempty.
    """

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        object.__setattr__(self, "samples", _as_readonly_f64(self.samples))
        if self.sample_rate <= 0:
            raise ParameterError(f"sample_rate must be > 0, got {self.sample_rate}")
        if len(self.samples) < 1:
            raise ParameterError("signal must contain at least one sample")
        if not np.all(np.isfinite(self.samples)):
            raise NumericalError("signal contains NaN or Inf samples")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def peak(self) -> float:
        return float(np.max(np.abs(self.samples)))


@dataclass(frozen=True)
class ImpulseResponse:
    """Time-domain estimate of a recording chain.

    Finalized identification output is peak-normalized to 1; shaped or
    decayed variants deliberately keep a smaller peak, so only finiteness
    is enforced here.
    """

    taps: np.ndarray
    sample_rate: float

    def __post_init__(self):
        object.__setattr__(self, "taps", _as_readonly_f64(self.taps))
        if self.sample_rate <= 0:
            raise ParameterError(f"sample_rate must be > 0, got {self.sample_rate}")
        if len(self.taps) < 1:
            raise ParameterError("impulse response must contain at least one tap")
        if not np.all(np.isfinite(self.taps)):
            raise NumericalError("impulse response contains NaN or Inf taps")

    def __len__(self) -> int:
        return len(self.taps)

    def peak(self) -> float:
        return float(np.max(np.abs(self.taps)))

    def as_signal(self) -> Signal:
        return Signal(self.taps, self.sample_rate)


@dataclass(frozen=True)
class ChirpSpec:
    """Parameters of the periodic linear sine sweep used for calibration.

    One period sweeps f0 -> f1 Hz over `duration` seconds; the sweep is
    repeated `periods` times. Both corner frequencies must respect Nyquist.
    """

    f0: float
    f1: float
    duration: float
    periods: int
    sample_rate: float

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ParameterError(f"sample_rate must be > 0, got {self.sample_rate}")
        nyquist = self.sample_rate / 2.0
        if not (0.0 <= self.f0 <= nyquist):
            raise ParameterError(
                f"f0 must lie in [0, sample_rate/2] = [0, {nyquist}], got {self.f0}"
            )
        if not (0.0 <= self.f1 <= nyquist):
            raise ParameterError(
                f"f1 must lie in [0, sample_rate/2] = [0, {nyquist}], got {self.f1}"
            )
        if self.duration <= 0:
            raise ParameterError(f"duration must be > 0, got {self.duration}")
        if int(self.periods) != self.periods or self.periods < 1:
            raise ParameterError(f"periods must be an integer >= 1, got {self.periods}")

    @property
    def samples_per_period(self) -> int:
        """Period length in samples, rounded to the nearest integer.

        Rounding uses banker's rounding (ties to even); non-integer
        duration*sample_rate products are legal but the period is then
        only approximately `duration` seconds.
        """
        n = round(self.duration * self.sample_rate)
        if n < 1:
            raise ParameterError(
                "duration * sample_rate rounds to zero samples; increase duration"
            )
        return n


def generate_chirp(spec: ChirpSpec) -> Signal:
    """Generate the periodic linear sweep described by `spec`.

    Sample n is sin(2*pi*(f0*t + (f1-f0)/(2*duration)*t^2)) with
    t = (n mod N)/sample_rate and N the rounded period length; the result
    is exactly N-periodic and contains periods*N samples. The phase is
    evaluated from the closed form at each sample (no running-phase
    accumulation), so there is no drift across periods.
    """
    n_period = spec.samples_per_period
    n = np.arange(spec.periods * n_period, dtype=np.float64)
    t = np.mod(n, n_period) / spec.sample_rate
    sweep_rate = (spec.f1 - spec.f0) / (2.0 * spec.duration)
    phase = 2.0 * np.pi * (spec.f0 * t + sweep_rate * t * t)
    return Signal(np.sin(phase), spec.sample_rate)


def convolve(x: Signal, h: ImpulseResponse) -> Signal:
    """Full linear convolution of a signal with an impulse response.

    Output length is len(x) + len(h) - 1. This is the ground-truth forward
    model for every identification test: synthetic "recordings" are made by
    convolving a known excitation with a known response.
    """
    if x.sample_rate != h.sample_rate:
        raise SampleRateMismatchError(
            f"sample rates differ: signal {x.sample_rate} Hz vs response {h.sample_rate} Hz"
        )
    out = scipy.signal.fftconvolve(x.samples, h.taps, mode="full")
    return Signal(out, x.sample_rate)


def normalize_peak(s: Signal, strict: bool = False) -> Signal:
    """Peak-normalize a signal.

    Lenient mode (default) divides by the peak only when it exceeds 1, i.e.
    it prevents clipping but never boosts. Strict mode always divides so the
    result has peak exactly 1; a silent input is then an error because the
    division is undefined (and silently returning zeros would mask upstream
    failures). Lenient mode returns silent input unchanged.
    """
    peak = s.peak()
    if strict:
        if peak == 0.0:
            raise ParameterError("cannot strictly normalize a signal with zero peak")
        return Signal(s.samples / peak, s.sample_rate)
    if peak > 1.0:
        return Signal(s.samples / peak, s.sample_rate)
    return s
