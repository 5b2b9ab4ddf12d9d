"""JSON experiment configuration shared by the CLI subcommands."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from .correlations import DEFAULT_EPS_BIN, GridSpec
from .errors import ConfigError
from .network import NetworkUnitary
from .scattershot import FrequencyBins, SpdcSource
from .spectra import PhotonInput, check_photons


@dataclass
class ExperimentConfig:
    """Everything a CLI run needs besides command-line overrides.

    ``grid`` is ``{"start", "stop", "num", "slots"}`` with 1-based slots;
    ``slice`` maps the remaining 1-based slots to fixed offsets.
    """

    network: dict
    photons: list = field(default_factory=list)
    detectors: Optional[list] = None
    bin_width: Optional[float] = None
    eps_bin: float = DEFAULT_EPS_BIN
    omega_ref: float = 0.0
    grid: Optional[dict] = None
    slice: Optional[dict] = None
    symmetry: Optional[dict] = None
    entanglement: Optional[dict] = None
    sources: Optional[list] = None
    n_photons: Optional[int] = None
    bins: Optional[int] = None
    trials: Optional[int] = None
    samples: Optional[int] = None
    seed: Optional[int] = None
    out: Optional[str] = None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown configuration keys {unknown}")
        if "network" not in data:
            raise ConfigError("configuration needs a 'network' descriptor")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"configuration file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def validate(self):
        net = self.build_network()
        photons = self.build_photons()
        check_photons(photons, net.dim)
        if self.detectors is not None:
            if len(set(self.detectors)) != len(self.detectors):
                raise ConfigError(f"detectors must be distinct, got {self.detectors}")
            if any(not 1 <= d <= net.dim for d in self.detectors):
                raise ConfigError(f"detectors {self.detectors} outside network of dimension {net.dim}")
        if self.sources:
            for s in self.build_sources():
                if s.port > net.dim:
                    raise ConfigError(f"source port {s.port} outside network of dimension {net.dim}")

    def build_network(self) -> NetworkUnitary:
        return NetworkUnitary.from_dict(self.network)

    def build_photons(self) -> list:
        return [PhotonInput.from_dict(p) for p in self.photons]

    def build_sources(self) -> list:
        return [SpdcSource.from_dict(s) for s in (self.sources or [])]

    def detector_ports(self) -> list:
        if self.detectors is not None:
            return list(self.detectors)
        return list(range(1, len(self.photons) + 1))

    def build_grid(self) -> GridSpec:
        g = self.grid or {}
        n = len(self.photons)
        try:
            slots = [int(s) - 1 for s in g.get("slots", range(1, min(n, 3) + 1))]
            axis = np.linspace(float(g.get("start", -3.0)), float(g.get("stop", 3.0)), int(g.get("num", 61)))
            fixed = {int(k) - 1: float(v) for k, v in (self.slice or {}).items()}
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed grid/slice spec: {exc}") from None
        return GridSpec(tuple(axis for _ in slots), tuple(slots), fixed)

    def build_bins(self, count=None, width=None) -> FrequencyBins:
        count = count if count is not None else self.bins
        width = width if width is not None else self.bin_width
        if count is None or width is None:
            raise ConfigError("sampling needs a bin count and a bin width")
        return FrequencyBins(int(count), float(width), self.omega_ref)
