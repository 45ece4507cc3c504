"""Command-line front end.

Subcommands: chirp, identify, t60, shape, filter, metrics, simulate,
pipeline. Exit codes: 0 success, 2 I/O error, 3 validation error,
4 numerical failure (NaN/Inf detected).

Config precedence is flags > --config file > built-in defaults.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import cepstrum, pipeline, shaping, t60, wavio
from .config import PipelineConfig, load_config, merge_overrides
from .errors import NumericalError, ParameterError
from .signal_core import generate_chirp
from .simulate import ChannelSpec, simulate_recording, synthesize_channel

EXIT_OK = 0
EXIT_IO = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON config file")
    parser.add_argument("--fs", type=float, dest="sample_rate", help="sample rate, Hz")
    parser.add_argument("--n-dft", type=int, dest="n_dft", help="frame length, samples")
    parser.add_argument("--n-hop", type=int, dest="n_hop", help="hop length, samples")
    parser.add_argument("--eps-analysis", type=float, dest="epsilon_analysis")
    parser.add_argument("--eps-filter", type=float, dest="epsilon_filter")
    parser.add_argument("--t60-threshold", type=float, dest="t60_threshold")
    parser.add_argument("--rho-floor", type=float, dest="rho_floor")
    parser.add_argument("--dk", type=float, dest="dk", help="per-sample global decay")


_CONFIG_KEYS = (
    "sample_rate",
    "n_dft",
    "n_hop",
    "epsilon_analysis",
    "epsilon_filter",
    "t60_threshold",
    "rho_floor",
    "dk",
    "chirp_f0",
    "chirp_f1",
    "chirp_duration",
    "chirp_periods",
)


def _resolve_config(args: argparse.Namespace) -> PipelineConfig:
    config = load_config(args.config) if args.config else PipelineConfig()
    overrides = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
    return merge_overrides(config, **overrides)


def _adopt_file_rate(config: PipelineConfig, args, rate: float) -> PipelineConfig:
    """Input files define the rate when neither --fs nor a config file pinned it."""
    if args.sample_rate is None and args.config is None:
        return merge_overrides(config, sample_rate=rate)
    return config


def _warn_if_short(n_samples: int, config: PipelineConfig) -> None:
    n_dft = config.resolved_n_dft
    if n_samples < 2 * n_dft:
        print(
            f"warning: input has {n_samples} samples, fewer than two frames of "
            f"n_dft={n_dft}; consider a smaller --n-dft",
            file=sys.stderr,
        )


def _cmd_chirp(args) -> int:
    config = _resolve_config(args)
    spec = config.chirp_spec()
    n_exact = spec.duration * spec.sample_rate
    n_period = spec.samples_per_period
    if abs(n_exact - n_period) > 1e-9:
        print(
            f"warning: duration*fs = {n_exact} is not an integer; using N = {n_period}",
            file=sys.stderr,
        )
    sweep = generate_chirp(spec)
    wavio.write_wav(args.out, sweep, encoding="float32")
    print(
        f"wrote {args.out}: {len(sweep)} samples "
        f"({len(sweep) / spec.sample_rate:.6g} s at {spec.sample_rate:.6g} Hz, "
        f"N={n_period}, periods={spec.periods})"
    )
    return EXIT_OK


def _cmd_identify(args) -> int:
    config = _resolve_config(args)
    x = wavio.read_wav(args.x_wav)
    y = wavio.read_wav(args.y_wav)
    config = _adopt_file_rate(config, args, x.sample_rate)
    _warn_if_short(max(len(x), len(y)), config)
    ir = pipeline.run_identify(
        x, y, config, Path(args.out),
        provenance={"x_path": str(args.x_wav), "y_path": str(args.y_wav)},
    )
    print(f"wrote {args.out}: {len(ir)} taps at {ir.sample_rate:.6g} Hz")
    return EXIT_OK


def _cmd_t60(args) -> int:
    config = _resolve_config(args)
    s = wavio.read_wav(args.in_wav)
    config = _adopt_file_rate(config, args, s.sample_rate)
    profile = pipeline.run_t60_profile(s, config, Path(args.out))
    censored = int(profile.censored.sum())
    print(f"wrote {args.out}: {profile.n_dft} bins, {censored} censored")
    return EXIT_OK


def _cmd_shape(args) -> int:
    config = _resolve_config(args)
    ir = cepstrum.load_ir(args.ir_wav)
    config = _adopt_file_rate(config, args, ir.sample_rate)
    p = pipeline.analysis_params(config)
    profile_x = t60.load_t60_csv(args.t60_x_csv, p, config.t60_threshold)
    profile_y = t60.load_t60_csv(args.t60_y_csv, p, config.t60_threshold)
    shaped = pipeline.run_shape(
        ir, profile_x, profile_y, config,
        out_ir=Path(args.out), out_decay=Path(args.out_decay),
    )
    print(
        f"wrote {args.out} ({len(shaped)} taps, peak {shaped.peak():.4g}) "
        f"and {args.out_decay}"
    )
    return EXIT_OK


def _cmd_filter(args) -> int:
    config = _resolve_config(args)
    z = wavio.read_wav(args.z_wav)
    ir = cepstrum.load_ir(args.ir_wav)
    config = _adopt_file_rate(config, args, z.sample_rate)
    filtered = pipeline.run_filter(z, ir, config, Path(args.out))
    print(f"wrote {args.out}: {len(filtered)} samples, peak {filtered.peak():.4g}")
    return EXIT_OK


def _cmd_metrics(args) -> int:
    config = _resolve_config(args)
    before = wavio.read_wav(args.before_wav)
    after = wavio.read_wav(args.after_wav)
    config = _adopt_file_rate(config, args, before.sample_rate)
    ir_before = cepstrum.load_ir(args.ir_before) if args.ir_before else None
    ir_after = cepstrum.load_ir(args.ir_after) if args.ir_after else None
    report = pipeline.run_metrics(
        before, after, config, Path(args.out), ir_before=ir_before, ir_after=ir_after
    )
    print(f"wrote {args.out}: LPA {report['lpa_db']} dB")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    dry = wavio.read_wav(args.dry_wav)
    spec = ChannelSpec.from_json(args.channel_spec)
    if args.seed is not None:
        spec = ChannelSpec(
            duration_s=spec.duration_s,
            direct_gain=spec.direct_gain,
            echoes=spec.echoes,
            bands=spec.bands,
            seed=args.seed,
        )
    wet, channel = simulate_recording(dry, spec)
    wavio.write_wav(args.out_wet, wet, encoding="float32")
    wavio.write_wav(args.out_ir, channel.as_signal(), encoding="float32")
    print(
        f"wrote {args.out_wet} ({len(wet)} samples) and {args.out_ir} "
        f"({len(channel)} taps)"
    )
    return EXIT_OK


def _cmd_pipeline(args) -> int:
    config = _resolve_config(args)
    x = wavio.read_wav(args.x_wav)
    y = wavio.read_wav(args.y_wav)
    z = wavio.read_wav(args.z_wav)
    config = _adopt_file_rate(config, args, x.sample_rate)
    _warn_if_short(max(len(x), len(y)), config)
    report = pipeline.run_pipeline(x, y, z, config, Path(args.outdir))
    print(
        f"pipeline complete in {args.outdir}: LPA {report['lpa_db']} dB, "
        f"T60 {report['t60_broadband_before_s']:.6g} -> "
        f"{report['t60_broadband_after_s']:.6g} s"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dereverb",
        description="Sweep-calibrated single-channel dereverberation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chirp", help="write the calibration sweep")
    _add_config_flags(p)
    p.add_argument("--f0", type=float, dest="chirp_f0")
    p.add_argument("--f1", type=float, dest="chirp_f1")
    p.add_argument("--duration", type=float, dest="chirp_duration")
    p.add_argument("--periods", type=int, dest="chirp_periods")
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=_cmd_chirp)

    p = sub.add_parser("identify", help="estimate the impulse response from a test pair")
    _add_config_flags(p)
    p.add_argument("x_wav", type=Path, help="excitation (played) signal")
    p.add_argument("y_wav", type=Path, help="recorded signal")
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=_cmd_identify)

    p = sub.add_parser("t60", help="per-bin decay-time profile as CSV")
    _add_config_flags(p)
    p.add_argument("in_wav", type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=_cmd_t60)

    p = sub.add_parser("shape", help="fade a response using two T60 profiles")
    _add_config_flags(p)
    p.add_argument("ir_wav", type=Path)
    p.add_argument("t60_x_csv", type=Path, help="profile of the excitation")
    p.add_argument("t60_y_csv", type=Path, help="profile of the recording")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--out-decay", required=True, type=Path)
    p.set_defaults(func=_cmd_shape)

    p = sub.add_parser("filter", help="deconvolve a recording by a response")
    _add_config_flags(p)
    p.add_argument("z_wav", type=Path)
    p.add_argument("ir_wav", type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("metrics", help="objective before/after measures as JSON")
    _add_config_flags(p)
    p.add_argument("before_wav", type=Path)
    p.add_argument("after_wav", type=Path)
    p.add_argument("--ir-before", type=Path)
    p.add_argument("--ir-after", type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("simulate", help="synthesize a wet recording and its true channel")
    p.add_argument("dry_wav", type=Path)
    p.add_argument("channel_spec", type=Path, help="channel description, JSON")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-wet", required=True, type=Path)
    p.add_argument("--out-ir", required=True, type=Path)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("pipeline", help="identify, shape, filter and measure in one run")
    _add_config_flags(p)
    p.add_argument("x_wav", type=Path)
    p.add_argument("y_wav", type=Path)
    p.add_argument("z_wav", type=Path)
    p.add_argument("--outdir", required=True, type=Path)
    p.set_defaults(func=_cmd_pipeline)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
