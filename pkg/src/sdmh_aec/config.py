"""Run configuration, loadable from a JSON file where every key is optional."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

from .controller import ControlConfig
from .errors import ConfigError
from .stats import DEFAULT_SEED, init_smoother


@dataclass
class RunConfig:
    sample_rate: int = 48000
    frame: int = 512
    bands: int = 512
    stats_bands: int = 100
    taps: int = 20
    mic_delay_frames: int = 2
    pnlms_rho: float = 0.01
    pnlms_delta: float = 0.01
    control: ControlConfig = field(default_factory=ControlConfig)
    t_c: float = 0.2
    truncate_s: float = 5.0
    smoother_seed: tuple = DEFAULT_SEED
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.control, dict):
            self.control = ControlConfig(**self.control)
        self.smoother_seed = tuple(self.smoother_seed)
        if self.sample_rate <= 0 or self.frame <= 0 or self.taps <= 0:
            raise ConfigError("sample_rate, frame and taps must be positive")
        if not 0 <= self.mic_delay_frames < self.taps:
            raise ConfigError("mic_delay_frames must lie in 0..taps-1")
        if self.bands != self.frame:
            raise ConfigError("bands must equal frame")
        if not 0 < self.stats_bands <= self.bands:
            raise ConfigError("stats_bands must lie in 1..bands")
        if self.t_c <= 0 or self.truncate_s < 0:
            raise ConfigError("t_c must be positive and truncate_s non-negative")
        init_smoother(self.smoother_seed)  # validates the seed

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["smoother_seed"] = list(self.smoother_seed)
        return d

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")
