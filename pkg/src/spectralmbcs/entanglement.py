"""Frequency-parametrized W states behind a symmetric tritter.

Two H-polarized photons (times ``t1``, ``t2``) and one V-polarized photon
(time ``t3``) with identical spectra enter the tritter. Conditioned on one
click per output port at frequencies ``omega_1..3`` the polarization state
is ``a|VHH> + b|HVH> + c|HHV>``, where ``a`` collects the paths that route
the V photon to detector 1, ``b`` to detector 2 and ``c`` to detector 3.
The coefficients depend only on ``delta13 = omega_1 - omega_3`` and
``delta23 = omega_2 - omega_3``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from .correlations import DetectionEvent
from .errors import ConfigError, DegeneratePointError, DimensionError, NumericalError
from .network import NetworkUnitary, interferometric_amplitude, permutations

MAX_E = 4.0 / 9.0
_PREFACTOR = 2.0 / 3.0**1.5
_SIGMA_Y2 = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


@dataclass(frozen=True)
class WStateCoefficients:
    a: complex
    b: complex
    c: complex
    raw: tuple = ()
    delta13: float = float("nan")
    delta23: float = float("nan")
    times: tuple = ()

    @property
    def moduli_squared(self) -> tuple:
        return (abs(self.a) ** 2, abs(self.b) ** 2, abs(self.c) ** 2)


@dataclass(frozen=True)
class EntanglementPoint:
    """Squared pairwise concurrences with their average and minimum."""

    c_ab2: float
    c_bc2: float
    c_ac2: float

    @property
    def e_av(self) -> float:
        return (self.c_ab2 + self.c_bc2 + self.c_ac2) / 3.0

    @property
    def e_min(self) -> float:
        return min(self.c_ab2, self.c_bc2, self.c_ac2)


def normalize_coefficients(raw, **meta) -> WStateCoefficients:
    """Scale ``(a, b, c)`` to unit norm; ``meta`` fills the remaining fields."""
    norm = math.sqrt(sum(abs(z) ** 2 for z in raw))
    if norm == 0.0:
        raise DegeneratePointError("all W-state coefficients vanish; normalization undefined")
    a, b, c = (complex(z / norm) for z in raw)
    return WStateCoefficients(a, b, c, tuple(complex(z) for z in raw), **meta)


def w_coefficients(t1: float, t2: float, t3: float, delta13: float, delta23: float) -> WStateCoefficients:
    """Closed-form W coefficients for the symmetric tritter."""
    s, d = t1 + t2, t1 - t2
    third = 2 * math.pi / 3
    a = _PREFACTOR * np.exp(1j * (delta13 * t3 + 0.5 * delta23 * s)) * math.cos(0.5 * delta23 * d - third)
    b = _PREFACTOR * np.exp(1j * (0.5 * delta13 * s + delta23 * t3)) * math.cos(0.5 * delta13 * d + third)
    c = _PREFACTOR * np.exp(0.5j * (delta13 + delta23) * s) * math.cos(0.5 * (delta13 - delta23) * d - third)
    return normalize_coefficients((a, b, c), delta13=float(delta13), delta23=float(delta23), times=(t1, t2, t3))


def w_coefficients_batch(t1, t2, t3, delta13, delta23):
    """Vectorized closed form; returns the unnormalized ``(a, b, c)`` arrays."""
    d13 = np.asarray(delta13, dtype=float)
    d23 = np.asarray(delta23, dtype=float)
    s, d = t1 + t2, t1 - t2
    third = 2 * np.pi / 3
    a = _PREFACTOR * np.exp(1j * (d13 * t3 + 0.5 * d23 * s)) * np.cos(0.5 * d23 * d - third)
    b = _PREFACTOR * np.exp(1j * (0.5 * d13 * s + d23 * t3)) * np.cos(0.5 * d13 * d + third)
    c = _PREFACTOR * np.exp(0.5j * (d13 + d23) * s) * np.cos(0.5 * (d13 - d23) * d - third)
    return a, b, c


def w_coefficients_from_amplitudes(photons, network: NetworkUnitary, event: DetectionEvent) -> WStateCoefficients:
    """W coefficients from the path sum, grouped by where the V photon lands.

    Each coefficient sums ``A_sigma prod_d exp(i omega_d t_sigma(d))`` over
    the two paths that send the V photon to the given detector. The common
    spectral factor is dropped and the global phase
    ``exp(-i omega_3 (t1 + t2 + t3))`` is removed so the result matches
    :func:`w_coefficients` for the tritter.
    """
    if len(photons) != 3 or event.n != 3 or network.dim != 3:
        raise DimensionError("W coefficients need three photons, three detectors and a 3x3 network")
    pols = [p.polarization for p in photons]
    if sorted(pols, key=str) != ["H", "H", "V"]:
        raise ConfigError(f"need exactly two H and one V photon, got {pols}")
    first = photons[0].spectrum
    if not all(p.spectrum.same_as(first) for p in photons):
        raise ConfigError("W coefficients assume identical spectra")
    v = pols.index("V")
    inputs = [p.port for p in photons]
    omega = event.frequencies
    raw = [0j, 0j, 0j]
    for sigma in permutations(3):
        amp = interferometric_amplitude(network, event.ports, inputs, sigma)
        phase = sum(omega[i] * photons[s].t for i, s in enumerate(sigma))
        raw[sigma.index(v)] += amp * np.exp(1j * phase)
    total_t = sum(p.t for p in photons)
    raw = [z * np.exp(-1j * omega[2] * total_t) for z in raw]
    h = [p.t for p in photons if p.polarization == "H"]
    return normalize_coefficients(
        raw,
        delta13=omega[0] - omega[2],
        delta23=omega[1] - omega[2],
        times=(h[0], h[1], photons[v].t),
    )


def concurrences(w: WStateCoefficients) -> EntanglementPoint:
    """Closed form ``C_AB = 2|a||b|`` etc., returned squared."""
    a2, b2, c2 = w.moduli_squared
    return EntanglementPoint(4 * a2 * b2, 4 * b2 * c2, 4 * a2 * c2)


def w_state_vector(w: WStateCoefficients) -> np.ndarray:
    """``a|100> + b|010> + c|001>`` with qubit A most significant, V = 1."""
    psi = np.zeros(8, dtype=complex)
    psi[0b100], psi[0b010], psi[0b001] = w.a, w.b, w.c
    return psi


def reduced_density_matrix(psi: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Two-qubit reduced state of a three-qubit pure state."""
    t = psi.reshape(2, 2, 2)
    traced = [q for q in range(3) if q not in keep][0]
    t = np.moveaxis(t, traced, -1).reshape(4, 2)
    return t @ t.conj().T


def _psd_sqrt(m, rel_floor=1e-13):
    vals, vecs = np.linalg.eigh(m)
    vals = np.where(vals > rel_floor * max(vals.max(), 0.0), vals, 0.0)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def wootters_concurrence(rho: np.ndarray, rel_floor: float = 1e-13) -> float:
    """Concurrence ``max(0, l1 - l2 - l3 - l4)`` of a two-qubit state.

    The ``l_i`` are the eigenvalues of ``sqrt(sqrt(rho) rho~ sqrt(rho))``
    with ``rho~ = (sy x sy) rho* (sy x sy)``. Eigenvalues of the inner
    product below ``rel_floor * tr(rho)**2`` are rounding noise and are
    set to zero before the square root, which would otherwise amplify them
    to ~1e-8.
    """
    root = _psd_sqrt(rho)
    flipped = _SIGMA_Y2 @ rho.conj() @ _SIGMA_Y2
    inner = root @ flipped @ root
    inner = 0.5 * (inner + inner.conj().T)
    try:
        mu = np.linalg.eigvalsh(inner)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue solver failed: {exc}") from exc
    floor = rel_floor * np.trace(rho).real ** 2
    mu = np.where(mu > floor, mu, 0.0)
    lam = np.sort(np.sqrt(mu))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence_general(w: WStateCoefficients) -> EntanglementPoint:
    """Squared concurrences from reduced density matrices (cross-check)."""
    psi = w_state_vector(w)
    c_ab = wootters_concurrence(reduced_density_matrix(psi, (0, 1)))
    c_bc = wootters_concurrence(reduced_density_matrix(psi, (1, 2)))
    c_ac = wootters_concurrence(reduced_density_matrix(psi, (0, 2)))
    return EntanglementPoint(c_ab**2, c_bc**2, c_ac**2)


@dataclass(frozen=True, eq=False)
class EntanglementLandscape:
    """Grids indexed ``[i, j]`` for ``delta13[i]``, ``delta23[j]``.

    Degenerate points (all raw coefficients zero) hold NaN.
    """

    delta13: np.ndarray
    delta23: np.ndarray
    abs_a2: np.ndarray
    abs_b2: np.ndarray
    abs_c2: np.ndarray
    times: tuple

    @property
    def e_av(self) -> np.ndarray:
        a2, b2, c2 = self.abs_a2, self.abs_b2, self.abs_c2
        return 4.0 * (a2 * b2 + b2 * c2 + a2 * c2) / 3.0

    @property
    def e_min(self) -> np.ndarray:
        a2, b2, c2 = self.abs_a2, self.abs_b2, self.abs_c2
        return 4.0 * np.minimum(np.minimum(a2 * b2, b2 * c2), a2 * c2)

    def to_csv(self, path):
        e_av, e_min = self.e_av, self.e_min
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["delta13", "delta23", "abs_a2", "abs_b2", "abs_c2", "E_av", "E_min"])
            for i, d13 in enumerate(self.delta13):
                for j, d23 in enumerate(self.delta23):
                    row = (d13, d23, self.abs_a2[i, j], self.abs_b2[i, j], self.abs_c2[i, j], e_av[i, j], e_min[i, j])
                    writer.writerow([repr(float(x)) for x in row])


def entanglement_landscape(t1, t2, t3, delta13, delta23) -> EntanglementLandscape:
    d13 = np.asarray(delta13, dtype=float)
    d23 = np.asarray(delta23, dtype=float)
    g13, g23 = np.meshgrid(d13, d23, indexing="ij")
    a, b, c = w_coefficients_batch(t1, t2, t3, g13, g23)
    a2, b2, c2 = np.abs(a) ** 2, np.abs(b) ** 2, np.abs(c) ** 2
    norm = a2 + b2 + c2
    with np.errstate(invalid="ignore", divide="ignore"):
        a2, b2, c2 = (np.where(norm > 0, x / norm, np.nan) for x in (a2, b2, c2))
    return EntanglementLandscape(d13, d23, a2, b2, c2, (t1, t2, t3))


def _objective(kind, target, t1, t2, t3):
    def f(x):
        point = concurrences(w_coefficients(t1, t2, t3, x[0], x[1]))
        return abs(getattr(point, kind) - target)

    return f


def locate_entanglement(
    target: float,
    landscape: EntanglementLandscape,
    kind: str = "e_av",
    refine: bool = True,
) -> tuple:
    """Find ``(delta13, delta23)`` where ``kind`` is closest to ``target``.

    Starts from the nearest grid point and polishes it with Nelder-Mead.
    Returns ``(delta13, delta23, value)``.
    """
    if kind not in ("e_av", "e_min"):
        raise ValueError(f"kind must be 'e_av' or 'e_min', got {kind!r}")
    values = getattr(landscape, kind)
    i, j = np.unravel_index(np.nanargmin(np.abs(values - target)), values.shape)
    x0 = np.array([landscape.delta13[i], landscape.delta23[j]])
    if refine:
        res = optimize.minimize(
            _objective(kind, target, *landscape.times), x0, method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000},
        )
        if res.fun <= abs(values[i, j] - target):
            x0 = res.x
    point = concurrences(w_coefficients(*landscape.times, x0[0], x0[1]))
    return float(x0[0]), float(x0[1]), float(getattr(point, kind))


def modulus_period(t1: float, t2: float) -> Optional[float]:
    """Period ``4 pi / |t1 - t2|`` of the coefficient moduli along one axis."""
    if t1 == t2:
        return None
    return 4 * math.pi / abs(t1 - t2)
