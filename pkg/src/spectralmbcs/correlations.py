"""Frequency-resolved N-photon coincidence probabilities.

For photons in input ports ``S`` detected in output ports ``D`` at
frequencies ``omega_d`` the coincidence density is ``|Perm(A)|**2`` with

    A[i, j] = U[D_i, S_j] * xi_j(omega_i) * exp(i omega_i t_j),

and the probability of a click in bins of width ``dw`` around each
frequency is ``dw**N`` times the density. The proportionality constant is
fixed to exactly ``dw**N`` for unit-normalized spectra.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import BinConditionError, ConfigError, DimensionError
from .network import NetworkUnitary, interferometric_amplitude, permutations
from .permanent import permanent_batch, permanent_ryser
from .spectra import PhotonInput, check_photons

DEFAULT_EPS_BIN = 0.1
CHUNK_SIZE = 4096


@dataclass(frozen=True)
class DetectionEvent:
    """N clicks in distinct output ports, one frequency per port."""

    ports: tuple
    frequencies: tuple
    bin_width: float

    def __post_init__(self):
        ports = tuple(int(p) for p in self.ports)
        freqs = tuple(float(w) for w in self.frequencies)
        if len(ports) != len(freqs):
            raise DimensionError(f"{len(ports)} ports but {len(freqs)} frequencies")
        if len(set(ports)) != len(ports):
            raise ConfigError(f"detection ports must be distinct, got {ports}")
        if min(ports, default=1) < 1:
            raise ConfigError(f"detection ports are 1-based, got {ports}")
        if not self.bin_width > 0:
            raise ConfigError(f"bin width must be positive, got {self.bin_width}")
        object.__setattr__(self, "ports", ports)
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "bin_width", float(self.bin_width))

    @property
    def n(self) -> int:
        return len(self.ports)


@dataclass(frozen=True)
class BinReport:
    """Check that a bin of width ``dw`` resolves the spectral beating.

    ``time_spread`` is ``max dw |t_s - t_s'|`` and ``bandwidth_ratio`` is
    ``max dw / bandwidth_s``; each must stay at or below ``threshold``.
    """

    time_spread: float
    bandwidth_ratio: float
    threshold: float

    @property
    def time_ok(self) -> bool:
        return self.time_spread <= self.threshold

    @property
    def bandwidth_ok(self) -> bool:
        return self.bandwidth_ratio <= self.threshold

    @property
    def ok(self) -> bool:
        return self.time_ok and self.bandwidth_ok

    @property
    def failed(self) -> tuple:
        out = []
        if not self.time_ok:
            out.append("time_spread")
        if not self.bandwidth_ok:
            out.append("bandwidth_ratio")
        return tuple(out)

    def to_dict(self) -> dict:
        return {
            "time_spread": self.time_spread,
            "bandwidth_ratio": self.bandwidth_ratio,
            "threshold": self.threshold,
            "pass": self.ok,
            "failed": list(self.failed),
        }

    def raise_if_failed(self):
        if not self.ok:
            msg = []
            if not self.time_ok:
                msg.append(f"dw*|t_s - t_s'| = {self.time_spread:.4g} > {self.threshold}")
            if not self.bandwidth_ok:
                msg.append(f"dw/bandwidth = {self.bandwidth_ratio:.4g} > {self.threshold}")
            raise BinConditionError("bin width averages over correlations: " + "; ".join(msg), self.failed)


def validate_bins(photons: Sequence[PhotonInput], bin_width: float, eps_bin: float = DEFAULT_EPS_BIN) -> BinReport:
    """Report how well a bin width satisfies the no-averaging conditions.

    ``bin_width`` may also be a :class:`DetectionEvent`.
    """
    if isinstance(bin_width, DetectionEvent):
        bin_width = bin_width.bin_width
    times = [p.t for p in photons]
    spread = bin_width * (max(times) - min(times)) if times else 0.0
    ratio = max((bin_width / p.spectrum.bandwidth for p in photons), default=0.0)
    return BinReport(float(spread), float(ratio), float(eps_bin))


def _check_sizes(photons, network, ports):
    n = len(photons)
    if len(ports) != n:
        raise DimensionError(f"{n} photons but {len(ports)} detection ports")
    if len(set(ports)) != len(ports):
        raise ConfigError(f"detection ports must be distinct, got {tuple(ports)}")
    check_photons(photons, network.dim)
    if any(not 1 <= d <= network.dim for d in ports):
        raise ConfigError(f"detection ports {tuple(ports)} outside network of dimension {network.dim}")


def spectral_factors(photons, frequencies) -> np.ndarray:
    """``xi_j(omega_i) exp(i omega_i t_j)`` for frequencies ``(..., N)``; result ``(..., N, N)``."""
    freqs = np.asarray(frequencies, dtype=float)
    n = len(photons)
    if freqs.shape[-1:] != (n,):
        raise DimensionError(f"frequency array must end in an axis of length {n}, got {freqs.shape}")
    cols = [photon.spectrum.amplitude(freqs) * np.exp(1j * freqs * photon.t) for photon in photons]
    return np.stack(cols, axis=-1)


def amplitude_matrix_batch(photons, network: NetworkUnitary, ports, frequencies) -> np.ndarray:
    """Amplitude matrices for frequencies of shape ``(..., N)``; result ``(..., N, N)``."""
    sub = network.submatrix(ports, [p.port for p in photons])
    return sub * spectral_factors(photons, frequencies)


def amplitude_matrix(photons, network: NetworkUnitary, event: DetectionEvent) -> np.ndarray:
    _check_sizes(photons, network, event.ports)
    return amplitude_matrix_batch(photons, network, event.ports, event.frequencies)


def _density_chunk(photons, network, ports, freqs):
    return np.abs(permanent_batch(amplitude_matrix_batch(photons, network, ports, freqs))) ** 2


def detection_density(photons, network: NetworkUnitary, ports, frequencies, threads: Optional[int] = None) -> np.ndarray:
    """Coincidence density ``|Perm(A)|**2`` on an array of frequency tuples.

    ``frequencies`` has shape ``(..., N)``. Points are split into fixed-size
    chunks, so the result is bit-identical for any ``threads``.
    """
    _check_sizes(photons, network, ports)
    freqs = np.asarray(frequencies, dtype=float)
    shape = freqs.shape[:-1]
    flat = freqs.reshape(-1, len(photons))
    chunks = [flat[i : i + CHUNK_SIZE] for i in range(0, len(flat), CHUNK_SIZE)]
    if threads is not None and threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _density_chunk(photons, network, ports, c), chunks))
    else:
        parts = [_density_chunk(photons, network, ports, c) for c in chunks]
    out = np.concatenate(parts) if parts else np.zeros(0)
    return out.reshape(shape)


def detection_probability(
    photons: Sequence[PhotonInput],
    network: NetworkUnitary,
    event: DetectionEvent,
    eps_bin: float = DEFAULT_EPS_BIN,
    check_bins: bool = True,
) -> float:
    """Probability ``dw**N |Perm(A)|**2`` of the detection event.

    Raises :class:`BinConditionError` when the bin width violates the
    no-averaging conditions, unless ``check_bins`` is false.
    """
    _check_sizes(photons, network, event.ports)
    if check_bins:
        validate_bins(photons, event.bin_width, eps_bin).raise_if_failed()
    perm = permanent_ryser(amplitude_matrix(photons, network, event))
    return event.bin_width**event.n * abs(perm) ** 2


def spectral_amplitude(photons, frequencies, sigma) -> complex:
    """Spectral factor of path ``sigma`` (density normalization, no bin width)."""
    out = 1.0 + 0j
    for i, s in enumerate(sigma):
        photon = photons[s]
        w = frequencies[i]
        out *= photon.spectrum.amplitude(w) * np.exp(1j * w * photon.t)
    return complex(out)


def path_terms(photons, network: NetworkUnitary, ports, frequencies) -> dict:
    """Map each path ``sigma`` to its (interferometric, spectral) amplitude pair."""
    inputs = [p.port for p in photons]
    return {
        sigma: (
            interferometric_amplitude(network, ports, inputs, sigma),
            spectral_amplitude(photons, frequencies, sigma),
        )
        for sigma in permutations(len(photons))
    }


def incoherent_density(photons, network, ports, frequencies) -> float:
    """Sum of ``|A_sigma B_sigma|**2`` over paths, i.e. no interference."""
    return float(sum(abs(a * b) ** 2 for a, b in path_terms(photons, network, ports, frequencies).values()))


@dataclass(frozen=True)
class GridSpec:
    """Frequency sweep: ``axes[k]`` is swept at detection slot ``slots[k]``.

    Slots are 0-based here; remaining slots take their value from
    ``fixed``. All values are offsets ``nu = omega - omega_ref``.
    """

    axes: tuple
    slots: tuple
    fixed: Mapping[int, float] = field(default_factory=dict)

    @classmethod
    def uniform(cls, start, stop, num, slots, fixed=None) -> "GridSpec":
        axis = np.linspace(start, stop, num)
        return cls(tuple(axis for _ in slots), tuple(slots), dict(fixed or {}))

    def points(self, n: int) -> np.ndarray:
        """Frequency offsets with shape ``(*len(axes), n)``."""
        if not 1 <= len(self.axes) <= 3 or len(self.axes) != len(self.slots):
            raise ConfigError("a sweep needs 1 to 3 axes, one slot per axis")
        slots = list(self.slots)
        if len(set(slots)) != len(slots) or any(not 0 <= s < n for s in slots):
            raise ConfigError(f"invalid swept slots {slots} for {n} detectors")
        missing = [s for s in range(n) if s not in slots]
        if sorted(self.fixed) != missing:
            raise ConfigError(f"slice must fix exactly slots {missing}, got {sorted(self.fixed)}")
        mesh = np.meshgrid(*[np.asarray(a, dtype=float) for a in self.axes], indexing="ij")
        out = np.empty(mesh[0].shape + (n,))
        for slot, m in zip(slots, mesh):
            out[..., slot] = m
        for slot in missing:
            out[..., slot] = float(self.fixed[slot])
        return out


@dataclass(frozen=True, eq=False)
class Landscape:
    """Coincidence density on a rectilinear grid of frequency offsets."""

    axes: tuple
    names: tuple
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def rows(self):
        """``(coordinates..., value)`` in lexicographic grid-index order."""
        for idx in np.ndindex(self.values.shape):
            yield tuple(float(self.axes[k][i]) for k, i in enumerate(idx)) + (float(self.values[idx]),)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(list(self.names) + ["probability_density"])
            for row in self.rows():
                writer.writerow([repr(x) for x in row])

    def to_json(self, path):
        payload = {
            "metadata": self.metadata,
            "columns": list(self.names) + ["probability_density"],
            "rows": [list(r) for r in self.rows()],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")


def landscape_sweep(
    photons: Sequence[PhotonInput],
    network: NetworkUnitary,
    ports: Sequence[int],
    grid: GridSpec,
    omega_ref: float = 0.0,
    bin_width: Optional[float] = None,
    threads: Optional[int] = None,
) -> Landscape:
    """Evaluate the coincidence density over ``grid`` (offsets from ``omega_ref``)."""
    n = len(photons)
    _check_sizes(photons, network, ports)
    nu = grid.points(n)
    values = detection_density(photons, network, ports, nu + omega_ref, threads=threads)
    names = tuple(f"nu{s + 1}" for s in grid.slots)
    meta = {
        "network": network.to_dict(),
        "photons": [p.to_dict() for p in photons],
        "detectors": list(ports),
        "omega_ref": omega_ref,
        "bin_width": bin_width,
        "fixed": {str(k + 1): v for k, v in sorted(grid.fixed.items())},
    }
    return Landscape(tuple(np.asarray(a, dtype=float) for a in grid.axes), names, values, meta)


def hom_dip_analytic(bandwidth: float, delay: float) -> float:
    """Frequency-integrated coincidence probability of two Gaussian photons
    on a balanced beam splitter: ``(1 - exp(-(bandwidth * delay)**2)) / 2``."""
    return 0.5 * (1.0 - math.exp(-((bandwidth * delay) ** 2)))
