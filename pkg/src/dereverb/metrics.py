"""Objective measures for filtered-vs-unfiltered signals and responses."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .signal_core import ImpulseResponse, Signal

__all__ = ["SignalStats", "lpa", "d50", "signal_stats", "stats_to_dict", "dump_metrics_json"]


def _db_amplitude(value: float) -> float:
    """20*log10(|value|); silent input maps to -inf."""
    if value == 0.0:
        return -math.inf
    return 20.0 * math.log10(abs(value))


@dataclass(frozen=True)
class SignalStats:
    """Sample extremes, peak/DC levels and windowed RMS summary, in dB."""

    min_sample: float
    max_sample: float
    peak_amplitude_db: float
    dc_offset_db: float
    min_rms_db: float
    max_rms_db: float
    avg_rms_db: float


def lpa(z: Signal, z_filtered: Signal) -> float:
    """Log power attenuation: 10*log10(var(filtered)/var(original)) in dB.

    Powers are mean-removed, so the measure ignores DC offsets; negative
    values mean the filter attenuated the signal.
    """
    n = min(len(z), len(z_filtered))
    if n != len(z) or n != len(z_filtered):
        warnings.warn(
            f"length mismatch ({len(z)} vs {len(z_filtered)}), comparing first {n} samples",
            stacklevel=2,
        )
    a = z.samples[:n]
    b = z_filtered.samples[:n]
    var_a = float(np.mean((a - np.mean(a)) ** 2))
    var_b = float(np.mean((b - np.mean(b)) ** 2))
    if var_a == 0.0:
        raise ParameterError("silent reference: variance of the original signal is zero")
    if var_b == 0.0:
        return -math.inf
    return 10.0 * math.log10(var_b / var_a)


def d50(h: ImpulseResponse) -> float:
    """Early-to-total energy ratio within 50 ms of onset, in percent.

    The onset is the first tap whose magnitude reaches 1% of the peak; the
    identified zero-phase responses peak at tap 0, so the onset is usually 0,
    but the rule keeps the measure meaningful for delayed responses too. The
    denominator is the energy of the whole response.
    """
    energy = h.taps**2
    total = float(energy.sum())
    if total == 0.0:
        raise ParameterError("cannot compute D50 of an all-zero response")
    onset = int(np.argmax(np.abs(h.taps) >= 0.01 * h.peak()))
    early_end = onset + int(round(0.05 * h.sample_rate))
    early = float(energy[onset:early_end].sum())
    return 100.0 * early / total


def signal_stats(s: Signal, rms_window: float = 0.05) -> SignalStats:
    """Basic sample statistics with windowed RMS power.

    RMS is taken over non-overlapping windows of `rms_window` seconds (a
    trailing partial window is included); silent windows are excluded from
    the minimum. The average is the dB value of the mean window RMS.
    """
    if rms_window <= 0:
        raise ParameterError(f"rms_window must be > 0, got {rms_window}")
    x = s.samples
    min_sample = float(x.min())
    max_sample = float(x.max())
    peak_db = _db_amplitude(max(abs(min_sample), abs(max_sample)))
    dc_db = _db_amplitude(float(np.mean(x)))

    win = max(1, int(round(rms_window * s.sample_rate)))
    rms_values = [
        float(np.sqrt(np.mean(x[start : start + win] ** 2)))
        for start in range(0, len(x), win)
    ]
    nonsilent = [v for v in rms_values if v > 0.0]
    min_rms_db = _db_amplitude(min(nonsilent)) if nonsilent else -math.inf
    max_rms_db = _db_amplitude(max(rms_values))
    avg_rms_db = _db_amplitude(float(np.mean(rms_values)))
    return SignalStats(
        min_sample=min_sample,
        max_sample=max_sample,
        peak_amplitude_db=peak_db,
        dc_offset_db=dc_db,
        min_rms_db=min_rms_db,
        max_rms_db=max_rms_db,
        avg_rms_db=avg_rms_db,
    )


def _json_safe(value: float):
    """JSON has no infinities; serialize them as strings."""
    if value == -math.inf:
        return "-inf"
    if value == math.inf:
        return "inf"
    return value


def stats_to_dict(stats: SignalStats) -> dict:
    return {
        "min_sample": stats.min_sample,
        "max_sample": stats.max_sample,
        "peak_amplitude_db": _json_safe(stats.peak_amplitude_db),
        "dc_offset_db": _json_safe(stats.dc_offset_db),
        "min_rms_db": _json_safe(stats.min_rms_db),
        "max_rms_db": _json_safe(stats.max_rms_db),
        "avg_rms_db": _json_safe(stats.avg_rms_db),
    }


def dump_metrics_json(
    path,
    lpa_db: float,
    stats_before: SignalStats,
    stats_after: SignalStats,
    t60_broadband_before_s: float,
    t60_broadband_after_s: float,
    d50_percent_before: float | None = None,
    d50_percent_after: float | None = None,
) -> dict:
    """Write the metrics report; returns the dict that was serialized."""
    report = {
        "lpa_db": _json_safe(lpa_db),
        "d50_percent_before": d50_percent_before,
        "d50_percent_after": d50_percent_after,
        "t60_broadband_before_s": t60_broadband_before_s,
        "t60_broadband_after_s": t60_broadband_after_s,
        "stats_before": stats_to_dict(stats_before),
        "stats_after": stats_to_dict(stats_after),
    }
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report
