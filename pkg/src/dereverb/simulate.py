"""Synthetic recording chains for end-to-end testing.

A channel is a direct path plus optional discrete echoes plus optional
per-band exponential noise tails. Tails are bandlimited white noise under an
exponential envelope whose -60 dB point is the requested decay time; the
bandlimiting is a hard spectral mask, which is plenty for a test channel.
Everything is seeded and deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .signal_core import ImpulseResponse, Signal, convolve

__all__ = ["EchoSpec", "BandTailSpec", "ChannelSpec", "synthesize_channel", "simulate_recording"]


@dataclass(frozen=True)
class EchoSpec:
    delay_s: float
    gain: float

    def __post_init__(self):
        if self.delay_s < 0:
            raise ParameterError(f"echo delay must be >= 0, got {self.delay_s}")


@dataclass(frozen=True)
class BandTailSpec:
    """Exponentially decaying noise confined to [f_lo_hz, f_hi_hz].

    The band mask has raised-cosine transitions of `taper_hz` on each side;
    a soft edge keeps the tail's spectrum estimable at finite frame
    resolution instead of hiding energy in an infinitely sharp skirt.
    """

    f_lo_hz: float
    f_hi_hz: float
    t60_s: float
    amplitude: float
    taper_hz: float = 0.0

    def __post_init__(self):
        if not (0 <= self.f_lo_hz < self.f_hi_hz):
            raise ParameterError(
                f"band edges must satisfy 0 <= f_lo < f_hi, got [{self.f_lo_hz}, {self.f_hi_hz}]"
            )
        if self.t60_s <= 0:
            raise ParameterError(f"tail t60 must be > 0, got {self.t60_s}")
        if self.amplitude < 0:
            raise ParameterError(f"tail amplitude must be >= 0, got {self.amplitude}")
        if self.taper_hz < 0:
            raise ParameterError(f"taper must be >= 0, got {self.taper_hz}")


@dataclass(frozen=True)
class ChannelSpec:
    duration_s: float
    direct_gain: float = 1.0
    echoes: tuple[EchoSpec, ...] = ()
    bands: tuple[BandTailSpec, ...] = ()
    seed: int = 0

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ParameterError(f"channel duration must be > 0, got {self.duration_s}")
        for echo in self.echoes:
            if echo.delay_s >= self.duration_s:
                raise ParameterError(
                    f"echo at {echo.delay_s}s falls outside the {self.duration_s}s channel"
                )

    @classmethod
    def from_json(cls, path) -> "ChannelSpec":
        raw = json.loads(Path(path).read_text())
        return cls(
            duration_s=raw["duration_s"],
            direct_gain=raw.get("direct_gain", 1.0),
            echoes=tuple(EchoSpec(e["delay_s"], e["gain"]) for e in raw.get("echoes", [])),
            bands=tuple(
                BandTailSpec(
                    b["f_lo_hz"],
                    b["f_hi_hz"],
                    b["t60_s"],
                    b["amplitude"],
                    b.get("taper_hz", 0.0),
                )
                for b in raw.get("bands", [])
            ),
            seed=raw.get("seed", 0),
        )


def _band_mask(freqs: np.ndarray, spec: BandTailSpec) -> np.ndarray:
    mask = ((freqs >= spec.f_lo_hz) & (freqs <= spec.f_hi_hz)).astype(np.float64)
    if spec.taper_hz > 0:
        rising = (freqs >= spec.f_lo_hz - spec.taper_hz) & (freqs < spec.f_lo_hz)
        mask[rising] = 0.5 * (
            1 + np.cos(np.pi * (spec.f_lo_hz - freqs[rising]) / spec.taper_hz)
        )
        falling = (freqs > spec.f_hi_hz) & (freqs <= spec.f_hi_hz + spec.taper_hz)
        mask[falling] = 0.5 * (
            1 + np.cos(np.pi * (freqs[falling] - spec.f_hi_hz) / spec.taper_hz)
        )
    return mask


def _band_tail(spec: BandTailSpec, n: int, sample_rate: float, rng) -> np.ndarray:
    noise = rng.standard_normal(n)
    freqs = np.abs(np.fft.fftfreq(n, d=1.0 / sample_rate))
    banded = np.real(np.fft.ifft(np.fft.fft(noise) * _band_mask(freqs, spec)))
    rms = np.sqrt(np.mean(banded**2))
    if rms > 0:
        banded /= rms
    t = np.arange(n) / sample_rate
    envelope = 10.0 ** (-3.0 * t / spec.t60_s)  # -60 dB of amplitude at t60_s
    return spec.amplitude * banded * envelope


def synthesize_channel(spec: ChannelSpec, sample_rate: float) -> ImpulseResponse:
    """Build the channel's impulse response at the given rate."""
    n = int(round(spec.duration_s * sample_rate))
    if n < 1:
        raise ParameterError("channel duration rounds to zero samples")
    taps = np.zeros(n)
    taps[0] += spec.direct_gain
    for echo in spec.echoes:
        taps[int(round(echo.delay_s * sample_rate))] += echo.gain
    rng = np.random.default_rng(spec.seed)
    for band in spec.bands:
        taps += _band_tail(band, n, sample_rate, rng)
    return ImpulseResponse(taps, sample_rate)


def simulate_recording(dry: Signal, spec: ChannelSpec) -> tuple[Signal, ImpulseResponse]:
    """Convolve a dry signal with a synthetic channel.

    Returns (wet, true_channel); the wet signal is peak-limited to 1 the
    same way a careful recording would be leveled.
    """
    channel = synthesize_channel(spec, dry.sample_rate)
    wet = convolve(dry, channel)
    peak = wet.peak()
    if peak > 1.0:
        wet = Signal(wet.samples / peak, wet.sample_rate)
    return wet, channel
