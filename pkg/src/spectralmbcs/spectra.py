"""Single-photon spectral states.

Units are dimensionless: frequencies are measured in a reference bandwidth
(``bandwidth == 1`` for the reference photon) and times in its inverse.
Spectral amplitudes are real and normalized so that the integral of the
squared amplitude is one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, UnsupportedKindError

GAUSSIAN = "gaussian"
TABULATED = "tabulated"

_POLARIZATIONS = (None, "H", "V")


def trapezoid_norm(omega, values):
    """Trapezoidal quadrature of ``values**2`` on a grid."""
    omega = np.asarray(omega, dtype=float)
    values = np.asarray(values, dtype=float)
    return float(np.trapezoid(values**2, omega))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Real frequency amplitude ``xi(omega)`` of a single photon.

    Use :meth:`gaussian` or :meth:`tabulated` rather than the raw
    constructor. For tabulated spectra ``omega0`` and ``bandwidth`` are the
    mean and standard deviation of ``xi**2`` unless given explicitly.
    """

    kind: str
    omega0: float
    bandwidth: float
    omega_grid: Optional[np.ndarray] = field(default=None, repr=False)
    values: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in (GAUSSIAN, TABULATED):
            raise UnsupportedKindError(f"unknown spectrum kind {self.kind!r}")
        if not np.isfinite(self.bandwidth) or self.bandwidth <= 0:
            raise ConfigError(f"bandwidth must be positive, got {self.bandwidth}")
        if self.kind == TABULATED:
            if self.omega_grid is None or self.values is None:
                raise ConfigError("tabulated spectrum needs a grid and values")

    @classmethod
    def gaussian(cls, omega0: float = 0.0, bandwidth: float = 1.0) -> "Spectrum":
        return cls(GAUSSIAN, float(omega0), float(bandwidth))

    @classmethod
    def tabulated(cls, omega, values, omega0=None, bandwidth=None) -> "Spectrum":
        """Build a spectrum from samples on a uniform grid.

        The samples are rescaled so that the trapezoidal quadrature of
        ``values**2`` is exactly one.
        """
        omega = np.array(omega, dtype=float)
        values = np.array(values, dtype=float)
        if omega.ndim != 1 or omega.shape != values.shape or omega.size < 2:
            raise ConfigError("tabulated grid and values must be 1-d of equal length >= 2")
        steps = np.diff(omega)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise ConfigError("tabulated grid must be uniform and increasing")
        norm = trapezoid_norm(omega, values)
        if norm <= 0:
            raise ConfigError("tabulated spectrum is identically zero")
        values = values / np.sqrt(norm)
        weights = values**2
        if omega0 is None:
            omega0 = float(np.trapezoid(omega * weights, omega))
        if bandwidth is None:
            bandwidth = float(np.sqrt(np.trapezoid((omega - omega0) ** 2 * weights, omega)))
        omega.flags.writeable = False
        values.flags.writeable = False
        return cls(TABULATED, float(omega0), float(bandwidth), omega, values)

    def amplitude(self, omega):
        """Evaluate ``xi`` at ``omega`` (scalar or array).

        Tabulated spectra are linearly interpolated and vanish outside
        their grid.
        """
        if self.kind == GAUSSIAN:
            return _gaussian(self.omega0, self.bandwidth, omega)
        out = np.interp(omega, self.omega_grid, self.values, left=0.0, right=0.0)
        return out if np.ndim(out) else float(out)

    def norm(self, lo=None, hi=None, step=0.01) -> float:
        """Quadrature of ``xi**2``; defaults to +-8 bandwidths around omega0."""
        if self.kind == TABULATED and lo is None and hi is None:
            return trapezoid_norm(self.omega_grid, self.values)
        lo = self.omega0 - 8 * self.bandwidth if lo is None else lo
        hi = self.omega0 + 8 * self.bandwidth if hi is None else hi
        grid = np.arange(lo, hi + step / 2, step)
        return trapezoid_norm(grid, self.amplitude(grid))

    def is_symmetric(self, center=None, atol=1e-12) -> bool:
        """True if ``xi(center + nu) == xi(center - nu)``."""
        center = self.omega0 if center is None else center
        if self.kind == GAUSSIAN:
            return abs(center - self.omega0) <= atol
        nu = self.omega_grid - center
        return bool(np.allclose(self.amplitude(center + nu), self.amplitude(center - nu), atol=atol))

    def same_as(self, other: "Spectrum") -> bool:
        if self.kind != other.kind:
            return False
        if self.kind == GAUSSIAN:
            return self.omega0 == other.omega0 and self.bandwidth == other.bandwidth
        return bool(
            np.array_equal(self.omega_grid, other.omega_grid)
            and np.array_equal(self.values, other.values)
        )

    def to_dict(self) -> dict:
        if self.kind == GAUSSIAN:
            return {"kind": GAUSSIAN, "omega0": self.omega0, "bandwidth": self.bandwidth}
        return {
            "kind": TABULATED,
            "omega": self.omega_grid.tolist(),
            "xi": self.values.tolist(),
            "omega0": self.omega0,
            "bandwidth": self.bandwidth,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Spectrum":
        kind = data.get("kind", GAUSSIAN)
        try:
            if kind == GAUSSIAN:
                return cls.gaussian(data["omega0"], data["bandwidth"])
            if kind == TABULATED:
                return cls.tabulated(
                    data["omega"], data["xi"], data.get("omega0"), data.get("bandwidth")
                )
        except KeyError as exc:
            raise ConfigError(f"spectrum descriptor missing field {exc}") from None
        raise UnsupportedKindError(f"unknown spectrum kind {kind!r}")


def _gaussian(omega0, bandwidth, omega):
    nu = np.asarray(omega, dtype=float) - omega0
    out = (2 * np.pi * bandwidth**2) ** -0.25 * np.exp(-(nu**2) / (4 * bandwidth**2))
    return out if out.ndim else float(out)


def gaussian_amplitude(spectrum: Spectrum, omega):
    """Normalized Gaussian amplitude ``(2 pi dw^2)^(-1/4) exp(-(w-w0)^2 / 4dw^2)``.

    Note the squared amplitude has standard deviation ``bandwidth``.
    """
    if spectrum.kind != GAUSSIAN:
        raise UnsupportedKindError(f"expected a gaussian spectrum, got {spectrum.kind!r}")
    return _gaussian(spectrum.omega0, spectrum.bandwidth, omega)


@dataclass(frozen=True)
class PhotonInput:
    """A single photon injected into input ``port`` (1-based) at time ``t``."""

    port: int
    spectrum: Spectrum
    t: float = 0.0
    polarization: Optional[str] = None

    def __post_init__(self):
        if int(self.port) != self.port or self.port < 1:
            raise ConfigError(f"input port must be a positive integer, got {self.port!r}")
        if self.polarization not in _POLARIZATIONS:
            raise ConfigError(f"polarization must be 'H', 'V' or null, got {self.polarization!r}")

    def with_time(self, t: float) -> "PhotonInput":
        return PhotonInput(self.port, self.spectrum, float(t), self.polarization)

    def to_dict(self) -> dict:
        out = {"port": self.port}
        out.update(self.spectrum.to_dict())
        out["t"] = self.t
        out["polarization"] = self.polarization
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "PhotonInput":
        if "port" not in data:
            raise ConfigError("photon descriptor missing field 'port'")
        return cls(
            int(data["port"]),
            Spectrum.from_dict(data),
            float(data.get("t", 0.0)),
            data.get("polarization"),
        )


def temporal_phase(photon: PhotonInput, omega):
    """``xi_s(omega) * exp(i omega t_s)``."""
    omega = np.asarray(omega, dtype=float)
    out = photon.spectrum.amplitude(omega) * np.exp(1j * omega * photon.t)
    return out if np.ndim(out) else complex(out)


def check_photons(photons, dim=None):
    """Validate a product input state: distinct ports inside the network."""
    ports = [p.port for p in photons]
    if len(set(ports)) != len(ports):
        raise ConfigError(f"at most one photon per input port, got ports {ports}")
    if dim is not None:
        bad = [p for p in ports if p > dim]
        if bad:
            raise ConfigError(f"input ports {bad} outside network of dimension {dim}")
