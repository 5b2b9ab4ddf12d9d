"""Heralded SPDC sources, feed-forward blocking and scattershot sampling.

Each source is pumped by ``k`` pulses at times ``i * period`` (``i = 1..k``).
A single pulse creates ``n`` photon pairs with probability
``(1 - gamma2) * gamma2**n``. A source is usable when at least one pulse
produced a pair and no pulse produced more than one; its photon is the one
heralded in the earliest single-pair pulse and later photons are blocked.
Across sources, the first ``N`` usable ones (earliest herald, then lowest
port) feed the network and the rest are blocked.

Output sampling enumerates every collision-free outcome (a set of ``N``
output ports and one frequency bin per port), weights it by the midpoint
coincidence density times ``bin_width**N`` and renormalizes over that set.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize, special

from .correlations import CHUNK_SIZE, DEFAULT_EPS_BIN, BinReport, spectral_factors, validate_bins
from .errors import (
    ConfigError,
    DimensionError,
    DomainError,
    PreconditionError,
    SizeLimitError,
    StateUnavailableError,
)
from .network import NetworkUnitary
from .permanent import permanent_batch
from .spectra import PhotonInput, Spectrum

NO_PAIR = "no-pair"
SINGLE_PAIR = "single-pair"
MULTI_PAIR = "multi-pair"
BLOCKED = "blocked"

MAX_SAMPLED_PHOTONS = 4
MAX_OUTCOMES = 10**7


def _check_gamma2(gamma2):
    if not 0.0 <= gamma2 < 1.0:
        raise DomainError(f"squeezing parameter gamma^2 must lie in [0, 1), got {gamma2}")


def single_pulse_probs(gamma2: float) -> tuple:
    """Probabilities ``(p0, p1)`` of zero and exactly one pair per pulse."""
    _check_gamma2(gamma2)
    return 1.0 - gamma2, (1.0 - gamma2) * gamma2


def pair_number_probability(gamma2: float, n: int) -> float:
    _check_gamma2(gamma2)
    return (1.0 - gamma2) * gamma2**n


def multiplexed_prob(gamma2: float, k: int) -> float:
    """Probability of at least one pair in ``k`` pulses and at most one per pulse."""
    _check_gamma2(gamma2)
    if k < 1:
        raise DomainError(f"number of pulses must be >= 1, got {k}")
    return (1.0 - gamma2) ** k * ((1.0 + gamma2) ** k - 1.0)


def multiplexed_prob_sum(gamma2: float, k: int) -> float:
    """Binomial-sum form of :func:`multiplexed_prob`."""
    p0, p1 = single_pulse_probs(gamma2)
    if k < 1:
        raise DomainError(f"number of pulses must be >= 1, got {k}")
    return sum(math.comb(k, l) * p1**l * p0 ** (k - l) for l in range(1, k + 1))


def optimal_squeezing(k: int) -> tuple:
    """``(gamma2, p)`` maximizing :func:`multiplexed_prob` for ``k`` pulses.

    Setting the derivative to zero gives ``2 g (1 + g)**(k-1) = 1``.
    """
    if k < 1:
        raise DomainError(f"number of pulses must be >= 1, got {k}")
    g = optimize.brentq(lambda g: 2 * g * (1 + g) ** (k - 1) - 1, 0.0, 0.5, xtol=1e-15)
    return g, multiplexed_prob(g, k)


def _check_success_args(p, n_sources, n_photons):
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"single-photon probability must lie in [0, 1], got {p}")
    if not 1 <= n_photons <= n_sources:
        raise DomainError(f"need 1 <= N <= L, got N={n_photons}, L={n_sources}")


def success_probability(p: float, n_sources: int, n_photons: int) -> float:
    """Probability that at least ``n_photons`` of ``n_sources`` sources fire."""
    _check_success_args(p, n_sources, n_photons)
    miss = sum(
        math.comb(n_sources, l) * p**l * (1.0 - p) ** (n_sources - l) for l in range(n_photons)
    )
    return 1.0 - miss


def success_probability_beta(p: float, n_sources: int, n_photons: int) -> float:
    """Same quantity as the regularized incomplete beta ``I_p(N, L - N + 1)``."""
    _check_success_args(p, n_sources, n_photons)
    return float(special.betainc(n_photons, n_sources - n_photons + 1, p))


def min_single_photon_prob(n_photons: int, n_sources: int, target: float = 0.99) -> float:
    """Smallest per-source probability reaching success probability ``target``."""
    if not 0.0 < target < 1.0:
        raise DomainError(f"target success probability must lie in (0, 1), got {target}")
    _check_success_args(0.5, n_sources, n_photons)
    return optimize.brentq(
        lambda p: success_probability(p, n_sources, n_photons) - target, 0.0, 1.0, xtol=1e-14
    )


@dataclass(frozen=True)
class SpdcSource:
    port: int
    gamma2: float
    pulses: int = 1
    period: float = 1.0
    signal: Spectrum = field(default_factory=Spectrum.gaussian)
    idler: Optional[Spectrum] = None

    def __post_init__(self):
        _check_gamma2(self.gamma2)
        if self.pulses < 1:
            raise ConfigError(f"pulses must be >= 1, got {self.pulses}")
        if not self.period > 0:
            raise ConfigError(f"pulse period must be positive, got {self.period}")
        if int(self.port) != self.port or self.port < 1:
            raise ConfigError(f"source port must be a positive integer, got {self.port}")

    def pulse_time(self, i: int) -> float:
        """Time of pulse ``i`` (1-based)."""
        return i * self.period

    @property
    def single_photon_prob(self) -> float:
        return multiplexed_prob(self.gamma2, self.pulses)

    def to_dict(self) -> dict:
        out = {"port": self.port, "gamma2": self.gamma2, "pulses": self.pulses, "period": self.period}
        out.update(self.signal.to_dict())
        if self.idler is not None:
            out["idler"] = self.idler.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SpdcSource":
        try:
            idler = data.get("idler")
            return cls(
                int(data["port"]),
                float(data["gamma2"]),
                int(data.get("pulses", 1)),
                float(data.get("period", 1.0)),
                Spectrum.from_dict(data) if "bandwidth" in data or "xi" in data else Spectrum.gaussian(),
                Spectrum.from_dict(idler) if idler else None,
            )
        except KeyError as exc:
            raise ConfigError(f"source descriptor missing field {exc}") from None


@dataclass(frozen=True)
class HeraldRecord:
    """Heralding outcome of one source in one trial.

    ``pulse`` is the 1-based index of the retained pulse (``None`` unless
    the source had a usable single pair).
    """

    source: SpdcSource
    outcome: str
    pairs: tuple
    pulse: Optional[int] = None
    selected: bool = False

    @property
    def port(self) -> int:
        return self.source.port

    @property
    def time(self) -> Optional[float]:
        return None if self.pulse is None else self.source.pulse_time(self.pulse)


@dataclass(frozen=True)
class HeraldTrial:
    records: tuple
    n_photons: int

    @property
    def n_heralded(self) -> int:
        """Usable sources before the global cut to ``n_photons``."""
        return sum(r.pulse is not None for r in self.records)

    @property
    def success(self) -> bool:
        return self.n_heralded >= self.n_photons

    @property
    def selected(self) -> list:
        return [r for r in self.records if r.selected]


def _check_sources(sources, n_photons):
    ports = [s.port for s in sources]
    if len(set(ports)) != len(ports):
        raise ConfigError(f"source ports must be distinct, got {ports}")
    if not 1 <= n_photons <= len(sources):
        raise DomainError(f"need 1 <= N <= L, got N={n_photons}, L={len(sources)}")


def herald_trial(sources: Sequence[SpdcSource], n_photons: int, rng) -> HeraldTrial:
    """Draw pair numbers for every pulse and apply the blocking rules.

    ``rng`` is a seed or a :class:`numpy.random.Generator`. Pair numbers
    come from the exact geometric distribution, so no truncation is needed.
    """
    _check_sources(sources, n_photons)
    rng = np.random.default_rng(rng)
    probs = np.repeat([1.0 - s.gamma2 for s in sources], [s.pulses for s in sources])
    draws = (rng.geometric(probs) - 1).tolist()
    pairs, start = [], 0
    for src in sources:
        pairs.append(draws[start : start + src.pulses])
        start += src.pulses
    return herald_from_pairs(sources, n_photons, pairs)


def herald_from_pairs(sources: Sequence[SpdcSource], n_photons: int, pairs) -> HeraldTrial:
    """Apply per-source and global blocking to given per-pulse pair counts."""
    _check_sources(sources, n_photons)
    staged = []
    for src, counts in zip(sources, pairs, strict=True):
        counts = tuple(int(x) for x in counts)
        if len(counts) != src.pulses:
            raise DimensionError(f"source at port {src.port} has {src.pulses} pulses, got {len(counts)} counts")
        if max(counts) >= 2:
            staged.append([src, MULTI_PAIR, counts, None])
        elif 1 in counts:
            staged.append([src, SINGLE_PAIR, counts, counts.index(1) + 1])
        else:
            staged.append([src, NO_PAIR, counts, None])
    usable = sorted(
        (entry for entry in staged if entry[3] is not None),
        key=lambda e: (e[0].pulse_time(e[3]), e[3], e[0].port),
    )
    success = len(usable) >= n_photons
    chosen = {id(e) for e in usable[:n_photons]} if success else set()
    records = []
    for entry in staged:
        src, outcome, counts, pulse = entry
        selected = id(entry) in chosen
        if pulse is not None and success and not selected:
            outcome = BLOCKED
        records.append(HeraldRecord(src, outcome, counts, pulse, selected))
    return HeraldTrial(tuple(records), n_photons)


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for trial ``index`` derived from a root seed."""
    return np.random.default_rng([int(seed), int(index)])


def run_herald_trials(sources, n_photons, trials, seed) -> list:
    return [herald_trial(sources, n_photons, trial_rng(seed, i)) for i in range(trials)]


def pre_herald_state(k: int, mixture: str = "fixed") -> np.ndarray:
    """Pulse-basis density matrix of one pair spread over ``k`` pulses.

    ``"fixed"`` is the coherent superposition produced by a phase-stable
    pump, ``"random"`` the incoherent mixture from random pump phases.
    """
    if mixture == "fixed":
        return np.full((k, k), 1.0 / k, dtype=complex)
    if mixture == "random":
        return np.eye(k, dtype=complex) / k
    raise ValueError(f"mixture must be 'fixed' or 'random', got {mixture!r}")


def reduce_on_herald(rho: np.ndarray, pulse: int) -> np.ndarray:
    """Signal state after an idler click in the time bin of ``pulse`` (1-based).

    The idler pulses do not overlap in time, so the click projects onto a
    single pulse and every coherence between pulses drops out.
    """
    proj = np.zeros(rho.shape[0])
    proj[pulse - 1] = 1.0
    out = np.outer(proj, proj) @ rho @ np.outer(proj, proj)
    weight = np.trace(out).real
    if weight <= 0:
        raise StateUnavailableError(f"no amplitude in pulse {pulse}")
    return out / weight


def heralded_state(record: HeraldRecord) -> PhotonInput:
    if not record.selected:
        raise StateUnavailableError(f"source at port {record.port} was not selected in this trial")
    return PhotonInput(record.port, record.source.signal, record.time)


@dataclass(frozen=True)
class FrequencyBins:
    """``count`` contiguous bins of equal ``width`` centred on ``center``."""

    count: int
    width: float
    center: float = 0.0

    def __post_init__(self):
        if self.count < 1 or not self.width > 0:
            raise ConfigError(f"need count >= 1 and width > 0, got {self.count}, {self.width}")

    @property
    def centers(self) -> np.ndarray:
        return self.center + (np.arange(self.count) - (self.count - 1) / 2.0) * self.width


@dataclass(frozen=True, eq=False)
class ExactDistribution:
    """Renormalized outcome distribution in lexicographic outcome order.

    ``raw_mass`` is the total un-normalized probability of the enumerated
    collision-free outcomes, i.e. the probability being conditioned on.
    """

    port_sets: tuple
    outcome_ports: np.ndarray
    outcome_bins: np.ndarray
    probabilities: np.ndarray
    raw_mass: float
    bins: FrequencyBins

    @property
    def cdf(self) -> np.ndarray:
        cdf = np.cumsum(self.probabilities)
        cdf[-1] = 1.0
        return cdf

    def sample_indices(self, rng, size) -> np.ndarray:
        """Inverse-CDF sampling of outcome indices."""
        u = rng.random(size)
        return np.minimum(np.searchsorted(self.cdf, u, side="right"), len(self.probabilities) - 1)

    def outcome(self, index: int) -> tuple:
        ports = self.port_sets[self.outcome_ports[index]]
        bins = tuple(int(b) for b in self.outcome_bins[index])
        return ports, bins


def exact_distribution(
    photons: Sequence[PhotonInput],
    network: NetworkUnitary,
    bins: FrequencyBins,
    eps_bin: float = DEFAULT_EPS_BIN,
    check_bins: bool = True,
) -> ExactDistribution:
    n, m = len(photons), network.dim
    if n > MAX_SAMPLED_PHOTONS:
        raise SizeLimitError(f"exact sampling limited to N <= {MAX_SAMPLED_PHOTONS}, got {n}")
    total = math.comb(m, n) * bins.count**n
    if total > MAX_OUTCOMES:
        raise SizeLimitError(
            f"{total} outcomes exceed the enumeration limit {MAX_OUTCOMES}; use fewer or coarser bins"
        )
    if check_bins:
        validate_bins(photons, bins.width, eps_bin).raise_if_failed()
    port_sets = tuple(itertools.combinations(range(1, m + 1), n))
    grid = np.array(list(itertools.product(range(bins.count), repeat=n)), dtype=np.int64).reshape(-1, n)
    freqs = bins.centers[grid]
    spectral = spectral_factors(photons, freqs)
    inputs = [p.port for p in photons]
    subs = np.stack([network.submatrix(ports, inputs) for ports in port_sets])
    step = max(1, CHUNK_SIZE // len(grid))
    densities = np.concatenate(
        [
            (np.abs(permanent_batch(subs[i : i + step, None] * spectral[None])) ** 2).ravel()
            for i in range(0, len(port_sets), step)
        ]
    )
    probs = densities * bins.width**n
    raw_mass = float(probs.sum())
    if not raw_mass > 0:
        raise PreconditionError("no collision-free outcome has nonzero probability (the photons always bunch)")
    outcome_ports = np.repeat(np.arange(len(port_sets)), len(grid))
    outcome_bins = np.tile(grid, (len(port_sets), 1))
    return ExactDistribution(port_sets, outcome_ports, outcome_bins, probs / raw_mass, raw_mass, bins)


@dataclass(frozen=True)
class SamplingOutcome:
    success: bool
    input_ports: tuple = ()
    times: tuple = ()
    output_ports: tuple = ()
    bins: tuple = ()
    frequencies: tuple = ()

    def key(self) -> tuple:
        return (self.input_ports, self.times, self.output_ports, self.bins)

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "input_ports": list(self.input_ports),
            "times": list(self.times),
            "output_ports": list(self.output_ports),
            "bins": list(self.bins),
            "frequencies": list(self.frequencies),
        }


def _outcomes(dist, photons, indices):
    inputs = tuple(p.port for p in photons)
    times = tuple(float(p.t) for p in photons)
    centers = dist.bins.centers
    out = []
    for idx in np.atleast_1d(indices):
        ports, b = dist.outcome(int(idx))
        out.append(SamplingOutcome(True, inputs, times, ports, b, tuple(float(centers[i]) for i in b)))
    return out


def mbcs_sample(photons, network, bins: FrequencyBins, rng, size=None, eps_bin=DEFAULT_EPS_BIN, check_bins=True):
    """Draw output samples ``(D, bins)`` for a fixed input state.

    Returns one :class:`SamplingOutcome`, or a list when ``size`` is given.
    """
    rng = np.random.default_rng(rng)
    dist = exact_distribution(photons, network, bins, eps_bin, check_bins)
    idx = dist.sample_indices(rng, 1 if size is None else size)
    out = _outcomes(dist, photons, idx)
    return out[0] if size is None else out


@dataclass(frozen=True, eq=False)
class ScattershotResult:
    outcomes: list
    n_photons: int
    predicted_success: Optional[float]
    heralded_counts: np.ndarray

    @property
    def trials(self) -> int:
        return len(self.outcomes)

    @property
    def successes(self) -> int:
        return sum(o.success for o in self.outcomes)

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials if self.trials else float("nan")

    def counts(self) -> dict:
        """Outcome counts keyed by ``(S, times, D, bins)``."""
        out = {}
        for o in self.outcomes:
            if o.success:
                out[o.key()] = out.get(o.key(), 0) + 1
        return out

    def summary(self) -> dict:
        sigma = None
        if self.predicted_success is not None and self.trials:
            p = self.predicted_success
            sigma = math.sqrt(p * (1 - p) / self.trials)
        return {
            "trials": self.trials,
            "successes": self.successes,
            "empirical_success_rate": self.success_rate if self.trials else None,
            "predicted_success_probability": self.predicted_success,
            "binomial_sigma": sigma,
            "n_photons": self.n_photons,
            "conditioning": "collision-free events with all photons detected",
        }


def worst_case_bin_report(sources, bin_width, eps_bin=DEFAULT_EPS_BIN) -> BinReport:
    """Bin check against the largest possible spread of heralded times."""
    first = min(s.pulse_time(1) for s in sources)
    last = max(s.pulse_time(s.pulses) for s in sources)
    ratio = max(bin_width / s.signal.bandwidth for s in sources)
    return BinReport(float(bin_width * (last - first)), float(ratio), float(eps_bin))


def predicted_success(sources, n_photons) -> Optional[float]:
    """Success probability when all sources share ``gamma2`` and ``pulses``."""
    if len({(s.gamma2, s.pulses) for s in sources}) != 1:
        return None
    return success_probability(sources[0].single_photon_prob, len(sources), n_photons)


def scattershot_run(
    sources: Sequence[SpdcSource],
    network: NetworkUnitary,
    bins: FrequencyBins,
    trials: int,
    seed: int,
    n_photons: int,
    eps_bin: float = DEFAULT_EPS_BIN,
    check_bins: bool = True,
) -> ScattershotResult:
    """Herald, block, then sample the network output, once per trial.

    Trial ``i`` draws everything from ``trial_rng(seed, i)``, so results do
    not depend on the order in which trials are processed.
    """
    _check_sources(sources, n_photons)
    if any(s.port > network.dim for s in sources):
        raise ConfigError(f"source ports outside network of dimension {network.dim}")
    first = sources[0].signal
    if not all(s.signal.same_as(first) for s in sources):
        raise ConfigError("scattershot sampling assumes identical signal spectra")
    if check_bins:
        worst_case_bin_report(sources, bins.width, eps_bin).raise_if_failed()
    cache = {}
    outcomes = []
    counts = np.zeros(trials, dtype=np.int64)
    for i in range(trials):
        rng = trial_rng(seed, i)
        trial = herald_trial(sources, n_photons, rng)
        counts[i] = trial.n_heralded
        if not trial.success:
            outcomes.append(SamplingOutcome(False))
            continue
        photons = sorted((heralded_state(r) for r in trial.selected), key=lambda p: p.port)
        key = tuple((p.port, p.t) for p in photons)
        if key not in cache:
            cache[key] = exact_distribution(photons, network, bins, eps_bin, check_bins=False)
        dist = cache[key]
        outcomes.extend(_outcomes(dist, photons, dist.sample_indices(rng, 1)))
    return ScattershotResult(outcomes, n_photons, predicted_success(sources, n_photons), counts)
