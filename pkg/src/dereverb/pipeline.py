"""End-to-end wiring: identify -> T60 -> shape -> filter -> metrics.

Every stage writes its artifact to disk so any step can be re-run and
inspected; the composed run and the individual CLI commands share these
functions, which keeps their outputs byte-identical.

Framing grids per stage:
  identification  n_dft x n_dft/2, rectangular window (fixed by the method)
  T60 profiles    n_dft x n_hop, rectangular window
  shaping         n_dft x n_hop, Hann analysis (pairs with Hann synthesis)
  filtering       frame size = shaped-response length, hop = half, Hann
"""

from __future__ import annotations

from pathlib import Path

from . import cepstrum, metrics, shaping, t60, wavio
from .config import PipelineConfig
from .errors import ParameterError
from .inverse_filter import build_filterbank, filter_signal
from .signal_core import ImpulseResponse, Signal
from .spectral import FrameParams, stft

__all__ = [
    "identify_params",
    "analysis_params",
    "shaping_params",
    "run_identify",
    "run_t60_profile",
    "run_shape",
    "run_filter",
    "run_metrics",
    "run_pipeline",
]


def identify_params(config: PipelineConfig) -> FrameParams:
    n_dft = config.resolved_n_dft
    return FrameParams(n_dft, max(1, n_dft // 2), config.sample_rate, "rectangular")


def analysis_params(config: PipelineConfig) -> FrameParams:
    return FrameParams(
        config.resolved_n_dft, config.resolved_n_hop, config.sample_rate, "rectangular"
    )


def shaping_params(config: PipelineConfig) -> FrameParams:
    return FrameParams(
        config.resolved_n_dft, config.resolved_n_hop, config.sample_rate, "hann"
    )


def _require_rate(s: Signal, config: PipelineConfig, label: str) -> None:
    if s.sample_rate != config.sample_rate:
        raise ParameterError(
            f"{label} has sample rate {s.sample_rate} Hz but the config says "
            f"{config.sample_rate} Hz; pass --fs or fix the config"
        )


def run_identify(
    x: Signal, y: Signal, config: PipelineConfig, out_ir: Path, provenance: dict | None = None
) -> ImpulseResponse:
    _require_rate(x, config, "excitation")
    p = identify_params(config)
    ir = cepstrum.estimate_ir(x, y, p, config.epsilon_analysis)
    meta = {
        "n_dft": p.n_dft,
        "n_hop": p.n_hop,
        "epsilon": config.epsilon_analysis,
    }
    if provenance:
        meta["created_from"] = provenance
    cepstrum.save_ir(out_ir, ir, meta)
    return ir


def run_t60_profile(
    s: Signal, config: PipelineConfig, out_csv: Path | None = None
) -> t60.T60Profile:
    _require_rate(s, config, "input")
    profile = t60.t60_per_bin(stft(s, analysis_params(config)), config.t60_threshold)
    if out_csv is not None:
        t60.save_t60_csv(out_csv, profile)
    return profile


def run_shape(
    ir: ImpulseResponse,
    profile_x: t60.T60Profile,
    profile_y: t60.T60Profile,
    config: PipelineConfig,
    out_ir: Path | None = None,
    out_decay: Path | None = None,
) -> ImpulseResponse:
    rho = shaping.t60_ratio(profile_y, profile_x, config.rho_floor)
    p = shaping_params(config)
    d = shaping.build_decay_matrix(rho, p, p.n_frames_for(len(ir)))
    shaped = shaping.shape_ir(ir, d, p)
    shaped = shaping.apply_global_decay(shaped, config.dk)
    if out_decay is not None:
        shaping.save_decay_csv(out_decay, d)
    if out_ir is not None:
        cepstrum.save_ir(
            out_ir,
            shaped,
            {
                "n_dft": p.n_dft,
                "n_hop": p.n_hop,
                "rho_floor": config.rho_floor,
                "dk": config.dk,
            },
        )
    return shaped


def run_filter(
    z: Signal, ir: ImpulseResponse, config: PipelineConfig, out_wav: Path | None = None
) -> Signal:
    _require_rate(z, config, "input")
    fb = build_filterbank(ir, config.epsilon_filter)
    filtered = filter_signal(z, fb)
    if out_wav is not None:
        wavio.write_wav(out_wav, filtered, encoding="float32")
    return filtered


def run_metrics(
    before: Signal,
    after: Signal,
    config: PipelineConfig,
    out_json: Path,
    ir_before: ImpulseResponse | None = None,
    ir_after: ImpulseResponse | None = None,
) -> dict:
    p = analysis_params(config)
    return metrics.dump_metrics_json(
        out_json,
        lpa_db=metrics.lpa(before, after),
        stats_before=metrics.signal_stats(before),
        stats_after=metrics.signal_stats(after),
        t60_broadband_before_s=t60.t60_broadband(before, p, config.t60_threshold),
        t60_broadband_after_s=t60.t60_broadband(after, p, config.t60_threshold),
        d50_percent_before=metrics.d50(ir_before) if ir_before is not None else None,
        d50_percent_after=metrics.d50(ir_after) if ir_after is not None else None,
    )


def run_pipeline(
    x: Signal, y: Signal, z: Signal, config: PipelineConfig, outdir: Path
) -> dict:
    """Full run; writes every intermediate artifact into outdir.

    Artifacts: ir_raw.wav(+.json), t60_x.csv, t60_y.csv, decay.csv,
    ir_shaped.wav(+.json), filtered.wav, metrics.json. Each stage consumes
    the artifact written by the previous one (not the in-memory value), so a
    composed run is byte-identical to running the stage commands by hand.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    run_identify(x, y, config, outdir / "ir_raw.wav")
    ir_raw = cepstrum.load_ir(outdir / "ir_raw.wav")
    run_t60_profile(x, config, outdir / "t60_x.csv")
    run_t60_profile(y, config, outdir / "t60_y.csv")
    p_analysis = analysis_params(config)
    profile_x = t60.load_t60_csv(outdir / "t60_x.csv", p_analysis, config.t60_threshold)
    profile_y = t60.load_t60_csv(outdir / "t60_y.csv", p_analysis, config.t60_threshold)
    run_shape(
        ir_raw,
        profile_x,
        profile_y,
        config,
        out_ir=outdir / "ir_shaped.wav",
        out_decay=outdir / "decay.csv",
    )
    shaped = cepstrum.load_ir(outdir / "ir_shaped.wav")
    filtered = run_filter(z, shaped, config, outdir / "filtered.wav")
    report = run_metrics(
        z,
        filtered,
        config,
        outdir / "metrics.json",
        ir_before=ir_raw,
        ir_after=shaped,
    )
    return report
