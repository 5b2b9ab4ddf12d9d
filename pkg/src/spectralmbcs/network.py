"""Passive lossless linear networks.

Row ``d`` of a network matrix is an output port and column ``s`` an input
port. Ports are 1-based in every public function; permutations are tuples
of 0-based images, ``sigma[i] == sigma(i)``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DimensionError

UNITARITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class NetworkUnitary:
    matrix: np.ndarray
    kind: str = "explicit"
    seed: Optional[int] = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ConfigError(f"network matrix must be square and non-empty, got shape {m.shape}")
        dev = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        if dev > UNITARITY_TOL:
            raise ConfigError(f"network matrix is not unitary (max |U^dag U - 1| = {dev:.3g})")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def entry(self, d: int, s: int) -> complex:
        return complex(self.matrix[d - 1, s - 1])

    def submatrix(self, outputs: Sequence[int], inputs: Sequence[int]) -> np.ndarray:
        """Rows ``outputs`` and columns ``inputs`` (1-based)."""
        rows = _indices(outputs, self.dim, "output")
        cols = _indices(inputs, self.dim, "input")
        return self.matrix[np.ix_(rows, cols)]

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "dim": self.dim}
        if self.kind == "haar":
            out["seed"] = self.seed
        elif self.kind == "explicit":
            out["entries"] = [
                [{"re": float(z.real), "im": float(z.imag)} for z in row] for row in self.matrix
            ]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkUnitary":
        kind = data.get("kind")
        if kind == "tritter":
            if data.get("dim", 3) != 3:
                raise ConfigError("the symmetric tritter has dimension 3")
            return symmetric_tritter()
        if kind == "beamsplitter":
            if data.get("dim", 2) != 2:
                raise ConfigError("the balanced beam splitter has dimension 2")
            return balanced_beam_splitter()
        if kind == "identity":
            return identity(int(data["dim"]))
        if kind == "haar":
            if "dim" not in data or "seed" not in data:
                raise ConfigError("haar network needs 'dim' and 'seed'")
            return haar_random(int(data["dim"]), int(data["seed"]))
        if kind == "explicit":
            try:
                entries = [[complex(z["re"], z["im"]) for z in row] for row in data["entries"]]
            except (KeyError, TypeError) as exc:
                raise ConfigError(f"malformed explicit network entries: {exc}") from None
            net = cls(np.array(entries))
            if "dim" in data and data["dim"] != net.dim:
                raise ConfigError(f"declared dim {data['dim']} but entries are {net.dim}x{net.dim}")
            return net
        raise ConfigError(f"unknown network kind {kind!r}")


def _indices(ports, dim, what):
    idx = []
    for p in ports:
        if int(p) != p or not 1 <= p <= dim:
            raise ConfigError(f"{what} port {p!r} outside 1..{dim}")
        idx.append(int(p) - 1)
    return idx


def symmetric_tritter() -> NetworkUnitary:
    d = np.arange(1, 4)
    u = np.exp(2j * np.pi * np.outer(d, d) / 3) / np.sqrt(3)
    return NetworkUnitary(u, kind="tritter")


def balanced_beam_splitter() -> NetworkUnitary:
    return NetworkUnitary(np.array([[1, 1], [1, -1]]) / np.sqrt(2), kind="beamsplitter")


def identity(dim: int) -> NetworkUnitary:
    if dim < 1:
        raise ConfigError(f"invalid network dimension {dim}")
    return NetworkUnitary(np.eye(dim), kind="identity")


def permutation_network(images: Sequence[int]) -> NetworkUnitary:
    """Network sending input port ``s`` to output port ``images[s-1]`` (1-based)."""
    n = len(images)
    m = np.zeros((n, n))
    for s, d in enumerate(images):
        m[d - 1, s] = 1.0
    return NetworkUnitary(m)


def haar_random(dim: int, seed: int) -> NetworkUnitary:
    """Haar-distributed unitary from QR of a complex Ginibre matrix.

    The phases of ``diag(R)`` are moved into ``Q`` so the result is exactly
    Haar distributed rather than biased by the QR sign convention.
    """
    if dim < 1:
        raise ConfigError(f"invalid network dimension {dim}")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    q = q * (diag / np.abs(diag))
    return NetworkUnitary(q, kind="haar", seed=seed)


_CYCLE = re.compile(r"\(([^()]*)\)")


def from_cycles(notation: str, n: int) -> tuple:
    """Parse cycle notation such as ``"(12)(3)"`` or ``"(1 3)"`` (1-based).

    Returns the permutation as a tuple of 0-based images.
    """
    images = list(range(n))
    seen = set()
    for body in _CYCLE.findall(notation):
        elems = [int(x) - 1 for x in (body.split() if " " in body.strip() else list(body.strip()))]
        for a, b in zip(elems, elems[1:] + elems[:1]):
            if not 0 <= a < n or a in seen:
                raise DimensionError(f"bad cycle notation {notation!r} for n={n}")
            seen.add(a)
            images[a] = b
    return tuple(images)


def compose(sigma: Sequence[int], tau: Sequence[int]) -> tuple:
    """``(sigma o tau)(i) = sigma(tau(i))``."""
    if len(sigma) != len(tau):
        raise DimensionError("cannot compose permutations of different order")
    return tuple(sigma[t] for t in tau)


def inverse(sigma: Sequence[int]) -> tuple:
    out = [0] * len(sigma)
    for i, s in enumerate(sigma):
        out[s] = i
    return tuple(out)


def permutations(n: int):
    return list(itertools.permutations(range(n)))


def interferometric_amplitude(
    network: NetworkUnitary, outputs: Sequence[int], inputs: Sequence[int], sigma: Sequence[int]
) -> complex:
    """Product of ``U[D_i, S_sigma(i)]`` over detection slots ``i``."""
    n = len(outputs)
    if len(inputs) != n or len(sigma) != n or sorted(sigma) != list(range(n)):
        raise DimensionError(
            f"need |D| = |S| = order of sigma, got {len(outputs)}, {len(inputs)}, {len(sigma)}"
        )
    sub = network.submatrix(outputs, inputs)
    out = 1.0 + 0j
    for i, s in enumerate(sigma):
        out *= sub[i, s]
    return complex(out)
