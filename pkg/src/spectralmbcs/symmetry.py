"""Symmetries of frequency correlation landscapes.

A permutation ``tau`` of the detected frequencies acts as
``omega_d -> omega_{tau(d)}``. Summed over all paths this is the same as
replacing every interferometric amplitude ``A_sigma`` by ``A_{sigma o tau}``
(see :func:`permuted_density_from_amplitudes`), which is why symmetries of
the landscape can be traced back to the network, the input spectra, or both.

Checks are numerical: the density is evaluated on a grid of offsets
``nu = omega - omega_ref`` and on its image under the symmetry operation,
and the largest difference relative to the peak density is compared to a
tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .correlations import DetectionEvent, detection_density, path_terms
from .errors import DimensionError, PreconditionError
from .network import NetworkUnitary, compose, from_cycles, interferometric_amplitude, permutations
from .spectra import GAUSSIAN

DEFAULT_TOL = 1e-10

INTERFEROMETER_ONLY = "interferometer-only"
INTERFEROMETER_SPECTRA = "interferometer+spectra"
STATE_ONLY = "state-only"

EVEN_3 = (from_cycles("(123)", 3), from_cycles("(132)", 3))
ODD_3 = (from_cycles("(12)(3)", 3), from_cycles("(23)(1)", 3), from_cycles("(13)(2)", 3))
_ODD_NAMES = {t: name for t, name in zip(ODD_3, ("(12)(3)", "(23)(1)", "(13)(2)"))}

MIRROR = np.array([[1, -2, -2], [-2, 1, -2], [-2, -2, 1]]) / 3.0


@dataclass(frozen=True)
class FrequencyPermutation:
    """Permutation of detection slots, optionally preceded by ``nu -> -nu``."""

    tau: tuple
    parity: bool = False

    def __post_init__(self):
        tau = tuple(int(x) for x in self.tau)
        if sorted(tau) != list(range(len(tau))):
            raise DimensionError(f"{tau} is not a permutation of 0..{len(tau) - 1}")
        object.__setattr__(self, "tau", tau)

    @classmethod
    def from_cycles(cls, notation: str, n: int, parity: bool = False):
        return cls(from_cycles(notation, n), parity)

    def apply(self, nu: np.ndarray) -> np.ndarray:
        """Act on offsets of shape ``(..., N)``: ``out[..., d] = +-nu[..., tau(d)]``."""
        nu = np.asarray(nu, dtype=float)
        if nu.shape[-1] != len(self.tau):
            raise DimensionError(f"permutation of order {len(self.tau)} applied to {nu.shape[-1]} frequencies")
        out = nu[..., list(self.tau)]
        return -out if self.parity else out


def apply_permutation(event: DetectionEvent, p: FrequencyPermutation, omega_ref: float = 0.0) -> DetectionEvent:
    """Reindex detected frequencies by ``tau``; ports stay in place.

    Composition follows ``apply(apply(e, t1), t2) == apply(e, compose(t1, t2))``.
    """
    if len(p.tau) != event.n:
        raise DimensionError(f"permutation of order {len(p.tau)} applied to {event.n} frequencies")
    nu = np.array(event.frequencies) - omega_ref
    return DetectionEvent(event.ports, tuple(p.apply(nu) + omega_ref), event.bin_width)


def permuted_density_from_amplitudes(photons, network, ports, frequencies, tau) -> float:
    """``|sum_sigma A_{sigma o tau} B_sigma(omega)|**2`` evaluated term by term."""
    inputs = [p.port for p in photons]
    terms = path_terms(photons, network, ports, frequencies)
    total = 0j
    for sigma, (_, b) in terms.items():
        total += interferometric_amplitude(network, ports, inputs, compose(sigma, tau)) * b
    return abs(total) ** 2


@dataclass(frozen=True)
class SymmetryReport:
    name: str
    max_deviation: float
    tolerance: float
    passed: bool
    origin: str
    precondition_met: bool = True
    note: Optional[str] = None

    @property
    def status(self) -> str:
        if not self.precondition_met:
            return "precondition-unmet"
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "origin": self.origin,
            "status": self.status,
        }
        if self.note:
            out["note"] = self.note
        return out


def default_grid(num: int = 21, span: float = 3.0, n: int = 3) -> np.ndarray:
    """Cube of offsets in ``[-span, span]**n`` with ``num`` points per axis."""
    axis = np.linspace(-span, span, num)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _max_relative_deviation(photons, network, ports, nu, images, omega_ref, threads):
    base = detection_density(photons, network, ports, nu + omega_ref, threads=threads)
    peak = float(base.max(initial=0.0))
    dev = 0.0
    for img in images:
        moved = detection_density(photons, network, ports, img + omega_ref, threads=threads)
        peak = max(peak, float(moved.max(initial=0.0)))
        dev = max(dev, float(np.max(np.abs(moved - base), initial=0.0)))
    return dev / peak if peak > 0 else dev


def check_invariance(
    photons,
    network: NetworkUnitary,
    ports,
    transforms,
    name: str,
    origin: str,
    grid=None,
    tol: float = DEFAULT_TOL,
    omega_ref: float = 0.0,
    threads=None,
) -> SymmetryReport:
    """Compare the density at ``nu`` and ``T(nu)`` for each transform ``T``."""
    n = len(photons)
    nu = default_grid(n=n) if grid is None else np.asarray(grid, dtype=float).reshape(-1, n)
    images = [t(nu) for t in transforms]
    dev = _max_relative_deviation(photons, network, ports, nu, images, omega_ref, threads)
    return SymmetryReport(name, dev, tol, dev <= tol, origin)


def _require_three(photons, ports):
    if len(photons) != 3 or len(ports) != 3:
        raise DimensionError(f"this check is defined for three photons, got {len(photons)}")


def check_threefold(photons, network, ports, grid=None, tol=DEFAULT_TOL, omega_ref=0.0, threads=None) -> SymmetryReport:
    """Invariance under the cyclic permutations (123) and (132)."""
    _require_three(photons, ports)
    transforms = [FrequencyPermutation(t).apply for t in EVEN_3]
    return check_invariance(
        photons, network, ports, transforms, "threefold", INTERFEROMETER_ONLY, grid, tol, omega_ref, threads
    )


def check_twofold(
    photons,
    network,
    ports,
    grid=None,
    tol=DEFAULT_TOL,
    transposition: Optional[str] = None,
    parity: bool = True,
    omega_ref: float = 0.0,
    threads=None,
) -> SymmetryReport:
    """Invariance under a transposition combined with ``nu -> -nu``.

    ``transposition`` selects one of ``"(12)(3)"``, ``"(23)(1)"``,
    ``"(13)(2)"``; by default all three are checked in one report.
    ``parity=False`` checks the bare transposition, which is not a symmetry
    of the tritter landscape for generic times.
    """
    _require_three(photons, ports)
    taus = ODD_3 if transposition is None else (from_cycles(transposition, 3),)
    name = "twofold" if transposition is None else f"twofold{_ODD_NAMES.get(taus[0], transposition)}"
    if not parity:
        name += "-noparity"
    transforms = [FrequencyPermutation(t, parity).apply for t in taus]
    report = check_invariance(
        photons, network, ports, transforms, name, INTERFEROMETER_SPECTRA, grid, tol, omega_ref, threads
    )
    if not all(p.spectrum.is_symmetric(omega_ref) for p in photons):
        report = _with_note(report, "spectra not all symmetric about omega_ref")
    return report


def _with_note(report, note, precondition_met=True):
    return SymmetryReport(
        report.name, report.max_deviation, report.tolerance, report.passed, report.origin, precondition_met, note
    )


def check_mirror(
    photons, network, ports, grid=None, tol=DEFAULT_TOL, omega_ref=0.0, enforce_precondition=True, threads=None
) -> SymmetryReport:
    """Invariance under reflection through the plane ``nu1 + nu2 + nu3 = 0``.

    Holds for any network when all photons share one Gaussian spectrum
    centred at ``omega_ref``. With ``enforce_precondition`` false the sweep
    runs anyway, which is how counterexamples are probed.
    """
    _require_three(photons, ports)
    first = photons[0].spectrum
    identical = all(p.spectrum.same_as(first) for p in photons)
    gaussian = first.kind == GAUSSIAN and first.omega0 == omega_ref
    if enforce_precondition and not (identical and gaussian):
        raise PreconditionError("mirror symmetry needs identical Gaussian spectra centred at omega_ref")
    report = check_invariance(
        photons, network, ports, [lambda nu: nu @ MIRROR.T], "mirror", STATE_ONLY, grid, tol, omega_ref, threads
    )
    if not (identical and gaussian):
        report = _with_note(report, "photons do not share one Gaussian spectrum")
    return report


def amplitude_phases(network, ports, inputs, atol=1e-14):
    """Phases of the non-vanishing interferometric amplitudes."""
    out = {}
    for sigma in permutations(len(ports)):
        a = interferometric_amplitude(network, ports, inputs, sigma)
        if abs(a) > atol:
            out[sigma] = float(np.angle(a))
    return out


def common_phase(network, ports, inputs, atol=1e-12) -> bool:
    phases = list(amplitude_phases(network, ports, inputs).values())
    if not phases:
        return True
    ref = phases[0]
    return all(abs(np.angle(np.exp(1j * (p - ref)))) <= atol for p in phases)


def check_parity(photons, network, ports, grid=None, tol=DEFAULT_TOL, omega_ref=0.0, threads=None) -> SymmetryReport:
    """Invariance under ``nu -> -nu``.

    Requires all interferometric amplitudes to share one complex phase;
    otherwise the report carries ``precondition_met=False``.
    """
    inputs = [p.port for p in photons]
    if not common_phase(network, ports, inputs):
        return SymmetryReport(
            "parity", float("nan"), tol, False, INTERFEROMETER_SPECTRA, False,
            "interferometric amplitudes do not share a common phase",
        )
    identity = tuple(range(len(photons)))
    return check_invariance(
        photons, network, ports, [FrequencyPermutation(identity, True).apply], "parity",
        INTERFEROMETER_SPECTRA, grid, tol, omega_ref, threads,
    )


def check_full_permutation(photons, network, ports, grid=None, tol=DEFAULT_TOL, omega_ref=0.0, threads=None) -> SymmetryReport:
    """Invariance under every permutation of the frequencies.

    This is what remains for identical photons: the finer symmetry classes
    collapse into the full symmetric group.
    """
    transforms = [FrequencyPermutation(t).apply for t in permutations(len(photons))[1:]]
    return check_invariance(
        photons, network, ports, transforms, "full-permutation", STATE_ONLY, grid, tol, omega_ref, threads
    )


def figure_checks(photons, network, ports, grid=None, tol=DEFAULT_TOL, omega_ref=0.0, threads=None) -> list:
    """Threefold, the three twofold, and mirror checks as a list of reports."""
    reports = [check_threefold(photons, network, ports, grid, tol, omega_ref, threads)]
    for name in ("(12)(3)", "(23)(1)", "(13)(2)"):
        reports.append(check_twofold(photons, network, ports, grid, tol, name, omega_ref=omega_ref, threads=threads))
    try:
        reports.append(check_mirror(photons, network, ports, grid, tol, omega_ref, threads=threads))
    except PreconditionError as exc:
        reports.append(SymmetryReport("mirror", float("nan"), tol, False, STATE_ONLY, False, str(exc)))
    return reports


def redraw_times(photons: Sequence, rng, low: float = 0.0, high: float = 20.0) -> list:
    return [p.with_time(t) for p, t in zip(photons, rng.uniform(low, high, len(photons)))]
