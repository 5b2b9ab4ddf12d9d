import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fig2_photons
from spectralmbcs import scattershot as sc
from spectralmbcs.errors import (
    BinConditionError,
    ConfigError,
    DimensionError,
    DomainError,
    PreconditionError,
    SizeLimitError,
    StateUnavailableError,
)
from spectralmbcs.network import balanced_beam_splitter, haar_random, identity, symmetric_tritter
from spectralmbcs.spectra import PhotonInput, Spectrum

GAMMAS = np.round(np.arange(0.05, 0.91, 0.05), 2)


def test_single_pulse_examples():
    assert sc.single_pulse_probs(0.0) == (1.0, 0.0)
    assert sc.single_pulse_probs(0.5) == (0.5, 0.25)


@pytest.mark.parametrize("g2", GAMMAS)
def test_pair_statistics_close(g2):
    p0, p1 = sc.single_pulse_probs(g2)
    assert p0 + p1 + g2**2 == pytest.approx(1.0, abs=1e-15)
    tail = sum(sc.pair_number_probability(g2, n) for n in range(2, 2000))
    assert tail == pytest.approx(g2**2, abs=1e-12)


def test_domain_errors():
    for bad in (-0.1, 1.0):
        with pytest.raises(DomainError):
            sc.single_pulse_probs(bad)
    with pytest.raises(DomainError):
        sc.multiplexed_prob(0.1, 0)
    with pytest.raises(DomainError):
        sc.success_probability(0.5, 3, 4)


def test_multiplexed_examples():
    assert sc.multiplexed_prob(0.3, 1) == pytest.approx(0.7 * 0.3)
    assert sc.multiplexed_prob(0.0, 7) == 0.0
    g, p = sc.optimal_squeezing(10)
    assert p == pytest.approx(0.600, abs=1e-3)
    grid = np.linspace(0.001, 0.999, 20001)
    assert max(sc.multiplexed_prob(x, 10) for x in grid) <= p + 1e-12


@pytest.mark.parametrize("k", range(1, 21))
def test_multiplexed_closed_form_equals_binomial_sum(k):
    for g2 in GAMMAS:
        assert abs(sc.multiplexed_prob(g2, k) - sc.multiplexed_prob_sum(g2, k)) <= 1e-12


def test_success_examples():
    assert sc.success_probability(1.0, 5, 3) == pytest.approx(1.0)
    assert sc.success_probability(0.37, 1, 1) == pytest.approx(0.37)


@pytest.mark.parametrize("n, L", [(2, 4), (3, 9), (10, 100)])
def test_success_sum_equals_incomplete_beta(n, L):
    for p in np.linspace(0.01, 0.99, 99):
        assert abs(sc.success_probability(p, L, n) - sc.success_probability_beta(p, L, n)) <= 1e-12


def test_paper_thresholds():
    assert sc.min_single_photon_prob(10, 100) == pytest.approx(0.179, abs=1e-3)
    assert sc.min_single_photon_prob(30, 900) == pytest.approx(0.049, abs=1e-3)
    assert sc.min_single_photon_prob(10, 40) <= 0.414


def test_success_grows_with_n_when_supercritical():
    a, p = 4, 0.3
    values = [sc.success_probability(p, a * n, n) for n in (5, 10, 20, 40)]
    assert all(x < y for x, y in zip(values, values[1:]))


def _sources(g2, k, L, period=1.0):
    return [sc.SpdcSource(port, g2, k, period) for port in range(1, L + 1)]


def test_zero_squeezing_always_fails():
    for i in range(50):
        trial = sc.herald_trial(_sources(0.0, 3, 4), 2, sc.trial_rng(0, i))
        assert not trial.success
        assert all(r.outcome == sc.NO_PAIR for r in trial.records)


@settings(max_examples=25, deadline=None)
@given(
    g2=st.floats(0.05, 0.8),
    k=st.integers(1, 6),
    L=st.integers(2, 8),
    data=st.data(),
)
def test_herald_invariants(g2, k, L, data):
    n = data.draw(st.integers(1, L))
    trial = sc.herald_trial(_sources(g2, k, L), n, data.draw(st.integers(0, 2**32)))
    selected = trial.selected
    assert len(selected) == (n if trial.success else 0)
    for r in trial.records:
        assert len(r.pairs) == k
        if r.selected:
            assert r.outcome == sc.SINGLE_PAIR
            assert r.pairs[r.pulse - 1] == 1 and max(r.pairs) <= 1
            assert r.pulse == r.pairs.index(1) + 1
        if max(r.pairs) >= 2:
            assert r.outcome == sc.MULTI_PAIR and not r.selected
        if r.outcome == sc.BLOCKED:
            assert trial.success and r.pulse is not None
    if trial.success:
        usable = [r for r in trial.records if r.pulse is not None]
        order = sorted(usable, key=lambda r: (r.time, r.pulse, r.port))
        assert selected == sorted(order[:n], key=lambda r: r.port)


def test_herald_is_deterministic():
    sources = _sources(0.2, 4, 6)
    assert sc.run_herald_trials(sources, 2, 200, seed=5) == sc.run_herald_trials(sources, 2, 200, seed=5)
    assert sc.run_herald_trials(sources, 2, 200, seed=5) != sc.run_herald_trials(sources, 2, 200, seed=6)


def test_earliest_herald_wins_then_port():
    pairs = [(0, 0, 0), (0, 1, 0), (1, 0, 0), (0, 1, 0)]
    trial = sc.herald_from_pairs(_sources(0.3, 3, 4), 2, pairs)
    assert [r.port for r in trial.selected] == [2, 3]
    assert [r.outcome for r in trial.records] == [sc.NO_PAIR, sc.SINGLE_PAIR, sc.SINGLE_PAIR, sc.BLOCKED]


def test_earliest_time_beats_earlier_pulse_index():
    sources = [sc.SpdcSource(1, 0.3, 3, 10.0), sc.SpdcSource(2, 0.3, 3, 1.0)]
    trial = sc.herald_from_pairs(sources, 1, [(1, 0, 0), (0, 0, 1)])
    assert trial.selected[0].port == 2 and trial.selected[0].time == 3.0


def test_multi_pair_source_is_never_usable():
    trial = sc.herald_from_pairs(_sources(0.3, 2, 3), 1, [(1, 0), (1, 2), (0, 0)])
    assert [r.outcome for r in trial.records] == [sc.SINGLE_PAIR, sc.MULTI_PAIR, sc.NO_PAIR]
    assert trial.selected[0].port == 1 and trial.n_heralded == 1


def test_surplus_sources_are_blocked():
    trial = sc.herald_from_pairs(_sources(0.3, 2, 3), 1, [(0, 1), (1, 0), (1, 0)])
    assert [r.outcome for r in trial.records] == [sc.BLOCKED, sc.SINGLE_PAIR, sc.BLOCKED]
    assert trial.n_heralded == 3 and trial.success


def test_failed_trial_blocks_nothing():
    trial = sc.herald_from_pairs(_sources(0.3, 1, 3), 2, [(1,), (0,), (2,)])
    assert not trial.success and trial.selected == []
    assert [r.outcome for r in trial.records] == [sc.SINGLE_PAIR, sc.NO_PAIR, sc.MULTI_PAIR]


def test_pair_count_shape_checked():
    with pytest.raises(DimensionError):
        sc.herald_from_pairs(_sources(0.3, 2, 2), 1, [(0, 1), (1,)])


def test_heralded_state_time():
    src = sc.SpdcSource(2, 0.2, 4, 10.0, Spectrum.gaussian(0.0, 1.5))
    trial = sc.herald_from_pairs([src], 1, [(0, 0, 1, 0)])
    photon = sc.heralded_state(trial.selected[0])
    assert photon.t == 30.0 and photon.port == 2 and photon.spectrum.same_as(src.signal)


def test_different_pulses_give_different_times_same_spectrum():
    src = sc.SpdcSource(1, 0.2, 4, 10.0)
    a = sc.heralded_state(sc.herald_from_pairs([src], 1, [(1, 0, 0, 0)]).selected[0])
    b = sc.heralded_state(sc.herald_from_pairs([src], 1, [(0, 0, 0, 1)]).selected[0])
    assert a.spectrum.same_as(b.spectrum) and (a.t, b.t) == (10.0, 40.0)


def test_heralded_state_requires_selection():
    trial = sc.herald_trial(_sources(0.0, 1, 2), 1, 0)
    with pytest.raises(StateUnavailableError):
        sc.heralded_state(trial.records[0])


@pytest.mark.parametrize("pulse", [1, 3, 5])
def test_reduction_independent_of_pump_phase(pulse):
    k = 5
    fixed = sc.reduce_on_herald(sc.pre_herald_state(k, "fixed"), pulse)
    random = sc.reduce_on_herald(sc.pre_herald_state(k, "random"), pulse)
    assert np.allclose(fixed, random)
    target = np.zeros(k)
    target[pulse - 1] = 1
    assert (target @ fixed @ target).real == pytest.approx(1.0)


def test_herald_success_rate_matches_prediction():
    g2, k, L, n, trials = 0.25, 3, 8, 3, 20_000
    results = sc.run_herald_trials(_sources(g2, k, L), n, trials, seed=42)
    P = sc.success_probability(sc.multiplexed_prob(g2, k), L, n)
    rate = np.mean([r.success for r in results])
    assert abs(rate - P) <= 3 * math.sqrt(P * (1 - P) / trials)


def test_exact_distribution_guard():
    photons = [PhotonInput(i + 1, Spectrum.gaussian(), 0.0) for i in range(5)]
    with pytest.raises(SizeLimitError):
        sc.exact_distribution(photons, haar_random(5, 0), sc.FrequencyBins(3, 0.01))
    with pytest.raises(SizeLimitError):
        sc.exact_distribution(fig2_photons(), haar_random(12, 0), sc.FrequencyBins(50, 0.001))


def test_exact_distribution_enforces_bins():
    with pytest.raises(BinConditionError):
        sc.exact_distribution(fig2_photons(), symmetric_tritter(), sc.FrequencyBins(5, 0.1))


def test_exact_distribution_ordering_and_mass():
    dist = sc.exact_distribution(fig2_photons(), haar_random(4, 2), sc.FrequencyBins(3, 0.008))
    assert dist.port_sets == tuple(itertools.combinations(range(1, 5), 3))
    assert len(dist.probabilities) == 4 * 27
    assert dist.outcome(0) == ((1, 2, 3), (0, 0, 0))
    assert dist.outcome(1) == ((1, 2, 3), (0, 0, 1))
    assert dist.outcome(27) == ((1, 2, 4), (0, 0, 0))
    assert dist.probabilities.sum() == pytest.approx(1.0)
    assert 0 < dist.raw_mass < 1


def test_hom_sampling_never_yields_equal_bins():
    photons = [PhotonInput(1, Spectrum.gaussian(), 0.0), PhotonInput(2, Spectrum.gaussian(), 0.5)]
    out = sc.mbcs_sample(photons, balanced_beam_splitter(), sc.FrequencyBins(5, 0.1), 1, size=5000)
    assert all(o.bins[0] != o.bins[1] for o in out)


def test_complete_bunching_is_a_precondition_failure():
    photons = [PhotonInput(1, Spectrum.gaussian(), 0.0), PhotonInput(2, Spectrum.gaussian(), 0.0)]
    with pytest.raises(PreconditionError):
        sc.mbcs_sample(photons, balanced_beam_splitter(), sc.FrequencyBins(5, 0.1), 1)


def test_single_photon_identity_network():
    photon = [PhotonInput(2, Spectrum.gaussian(), 0.0)]
    bins = sc.FrequencyBins(21, 0.1)
    out = sc.mbcs_sample(photon, identity(3), bins, 9, size=40_000)
    assert {o.output_ports for o in out} == {(2,)}
    hist = np.bincount([o.bins[0] for o in out], minlength=21) / len(out)
    expected = Spectrum.gaussian().amplitude(bins.centers) ** 2
    expected /= expected.sum()
    assert 0.5 * np.abs(hist - expected).sum() < 0.02


def test_sampler_deterministic_per_seed():
    a = sc.mbcs_sample(fig2_photons(), symmetric_tritter(), sc.FrequencyBins(5, 0.008), 3, size=100)
    b = sc.mbcs_sample(fig2_photons(), symmetric_tritter(), sc.FrequencyBins(5, 0.008), 3, size=100)
    assert a == b
    one = sc.mbcs_sample(fig2_photons(), symmetric_tritter(), sc.FrequencyBins(5, 0.008), 3)
    assert one == a[0]


def test_sampler_tracks_exact_distribution_at_large_sample_size():
    # The ideal-sampler TV at n samples scales like sqrt(outcomes / n); with
    # 3375 outcomes it drops below 0.01 only near 1e7 samples.
    bins = sc.FrequencyBins(15, 0.008)
    dist = sc.exact_distribution(fig2_photons(), symmetric_tritter(), bins)
    idx = dist.sample_indices(np.random.default_rng(1), 10_000_000)
    freq = np.bincount(idx, minlength=len(dist.probabilities)) / len(idx)
    assert 0.5 * np.abs(freq - dist.probabilities).sum() <= 0.01


def test_sampler_tv_at_1e5_matches_ideal_sampler_floor():
    bins = sc.FrequencyBins(15, 0.008)
    dist = sc.exact_distribution(fig2_photons(), symmetric_tritter(), bins)
    n = 100_000
    rng = np.random.default_rng(2)
    ideal = [0.5 * np.abs(rng.multinomial(n, dist.probabilities) / n - dist.probabilities).sum() for _ in range(20)]
    idx = dist.sample_indices(np.random.default_rng(3), n)
    tv = 0.5 * np.abs(np.bincount(idx, minlength=len(dist.probabilities)) / n - dist.probabilities).sum()
    lo, hi = min(ideal), max(ideal)
    spread = hi - lo
    assert lo - spread <= tv <= hi + spread


def test_sampler_chi_square_goodness_of_fit():
    from scipy.stats import chisquare

    bins = sc.FrequencyBins(5, 0.008)
    dist = sc.exact_distribution(fig2_photons(), symmetric_tritter(), bins)
    n = 200_000
    idx = dist.sample_indices(np.random.default_rng(4), n)
    counts = np.bincount(idx, minlength=len(dist.probabilities))
    assert chisquare(counts, dist.probabilities * n).pvalue > 1e-3


def test_scattershot_limit_of_certain_heralding():
    sources = [sc.SpdcSource(p, 0.005, 2000, 1e-4) for p in (1, 2, 3)]
    result = sc.scattershot_run(sources, symmetric_tritter(), sc.FrequencyBins(3, 0.1), 60, 1, 3)
    p = sources[0].single_photon_prob
    assert p > 0.9
    ok = [o for o in result.outcomes if o.success]
    assert len(ok) > 40 and {o.input_ports for o in ok} == {(1, 2, 3)}
    assert len({o.times for o in ok}) > 1


def test_scattershot_success_fraction():
    sources = _sources(0.3, 2, 6, period=0.05)
    result = sc.scattershot_run(sources, haar_random(6, 1), sc.FrequencyBins(3, 0.05), 3000, 8, 2)
    P = result.predicted_success
    assert P == pytest.approx(sc.success_probability(sc.multiplexed_prob(0.3, 2), 6, 2))
    assert abs(result.success_rate - P) <= 3 * math.sqrt(P * (1 - P) / result.trials)
    summary = result.summary()
    assert summary["trials"] == 3000 and summary["successes"] == result.successes


def test_scattershot_conditional_distribution():
    sources = [sc.SpdcSource(1, 0.5, 1, 1.0), sc.SpdcSource(2, 0.5, 1, 1.5)]
    net, bins = balanced_beam_splitter(), sc.FrequencyBins(3, 0.1)
    result = sc.scattershot_run(sources, net, bins, 160_000, 3, 2)
    cond = [o for o in result.outcomes if o.success]
    assert len(cond) >= 10_000
    photons = [PhotonInput(1, Spectrum.gaussian(), 1.0), PhotonInput(2, Spectrum.gaussian(), 1.5)]
    dist = sc.exact_distribution(photons, net, bins)
    index = {dist.outcome(i): i for i in range(len(dist.probabilities))}
    counts = np.bincount([index[(o.output_ports, o.bins)] for o in cond], minlength=len(dist.probabilities))
    assert 0.5 * np.abs(counts / len(cond) - dist.probabilities).sum() <= 0.02


def test_scattershot_trials_are_independent_of_run_length():
    sources = _sources(0.3, 2, 4, period=0.05)
    short = sc.scattershot_run(sources, haar_random(4, 3), sc.FrequencyBins(3, 0.05), 40, 11, 2)
    long = sc.scattershot_run(sources, haar_random(4, 3), sc.FrequencyBins(3, 0.05), 80, 11, 2)
    assert long.outcomes[:40] == short.outcomes


def test_scattershot_zero_trials():
    result = sc.scattershot_run(_sources(0.3, 2, 4, 0.05), haar_random(4, 3), sc.FrequencyBins(3, 0.05), 0, 1, 2)
    assert result.outcomes == [] and result.summary()["empirical_success_rate"] is None


def test_scattershot_rejects_mixed_spectra():
    sources = [sc.SpdcSource(1, 0.2), sc.SpdcSource(2, 0.2, signal=Spectrum.gaussian(0.0, 2.0))]
    with pytest.raises(ConfigError):
        sc.scattershot_run(sources, balanced_beam_splitter(), sc.FrequencyBins(3, 0.05), 5, 0, 1)


def test_source_round_trip():
    src = sc.SpdcSource(4, 0.15, 10, 2.5, Spectrum.gaussian(0.1, 0.9))
    again = sc.SpdcSource.from_dict(src.to_dict())
    assert (again.port, again.gamma2, again.pulses, again.period) == (4, 0.15, 10, 2.5)
    assert again.signal.same_as(src.signal)
