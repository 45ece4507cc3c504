"""Pipeline configuration: defaults, JSON round-trip, flag overrides.

Precedence is flags > config file > defaults. n_dft defaults to five seconds
of samples (5 * sample_rate) and n_hop to half of n_dft; both are resolved
lazily so that overriding the sample rate moves the derived defaults with
it unless they were pinned explicitly.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from .errors import ParameterError
from .signal_core import ChirpSpec

__all__ = ["PipelineConfig", "load_config", "merge_overrides"]


@dataclass(frozen=True)
class PipelineConfig:
    sample_rate: float = 48000.0
    chirp_f0: float = 20.0
    chirp_f1: float = 20000.0
    chirp_duration: float = 2.0
    chirp_periods: int = 3
    n_dft: int | None = None
    n_hop: int | None = None
    epsilon_analysis: float = 1e-10
    epsilon_filter: float = 1e-6
    t60_threshold: float = 0.001
    rho_floor: float = 1e-6
    dk: float = 0.0

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ParameterError(f"sample_rate must be > 0, got {self.sample_rate}")
        for name in ("epsilon_analysis", "epsilon_filter", "rho_floor"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be > 0, got {getattr(self, name)}")
        if not (0.0 < self.t60_threshold < 1.0):
            raise ParameterError(
                f"t60_threshold must lie in (0, 1), got {self.t60_threshold}"
            )
        if self.dk < 0:
            raise ParameterError(f"dk must be >= 0, got {self.dk}")
        if self.n_dft is not None and self.n_dft < 2:
            raise ParameterError(f"n_dft must be >= 2, got {self.n_dft}")
        if self.n_hop is not None and self.n_hop < 1:
            raise ParameterError(f"n_hop must be >= 1, got {self.n_hop}")

    @property
    def resolved_n_dft(self) -> int:
        if self.n_dft is not None:
            return self.n_dft
        return int(round(5 * self.sample_rate))

    @property
    def resolved_n_hop(self) -> int:
        if self.n_hop is not None:
            return self.n_hop
        return max(1, self.resolved_n_dft // 2)

    def chirp_spec(self) -> ChirpSpec:
        return ChirpSpec(
            f0=self.chirp_f0,
            f1=self.chirp_f1,
            duration=self.chirp_duration,
            periods=self.chirp_periods,
            sample_rate=self.sample_rate,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)


def load_config(path) -> PipelineConfig:
    return PipelineConfig.from_dict(json.loads(Path(path).read_text()))


def merge_overrides(config: PipelineConfig, **overrides) -> PipelineConfig:
    """New config with non-None override values applied on top."""
    data = config.to_dict()
    for key, value in overrides.items():
        if value is not None:
            if key not in data:
                raise ParameterError(f"unknown config key {key!r}")
            data[key] = value
    return PipelineConfig.from_dict(data)
