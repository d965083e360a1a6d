"""Run configuration: one JSON document with ``mode``, ``lattice``, ``encoder``, ``surrogate``."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .encoder import EncoderConfig
from .lattice import LatticeParams, lemniscatic_preset
from .surrogate import SurrogateConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    mode: str = "pretrain"
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    surrogate: SurrogateConfig = field(default_factory=SurrogateConfig)

    @property
    def active(self) -> EncoderConfig | SurrogateConfig:
        return self.surrogate if self.mode == "finetune" else self.encoder

    def to_dict(self) -> dict:
        enc = self.encoder.to_dict()
        lattice = enc.pop("lattice")
        return {"mode": self.mode, "lattice": lattice, "encoder": enc,
                "surrogate": self.surrogate.to_dict()}


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - {"mode", "lattice", "encoder", "surrogate"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    mode = doc.get("mode", "pretrain")
    if mode not in ("pretrain", "finetune"):
        raise ConfigError(f"mode must be 'pretrain' or 'finetune', got {mode!r}")
    try:
        lattice = lemniscatic_preset()
        if "lattice" in doc:
            lattice = LatticeParams.from_dict({**lattice.to_dict(), **doc["lattice"]})
        enc = dict(doc.get("encoder", {}))
        enc["lattice"] = lattice.to_dict()
        encoder = EncoderConfig.from_dict(enc)
        surrogate = SurrogateConfig.from_dict(doc.get("surrogate", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(mode, encoder, surrogate)


def load_config(path: str | Path | None) -> RunConfig:
    """Read a config file; ``None`` gives the defaults."""
    if path is None:
        return RunConfig()
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return parse_config(doc)
