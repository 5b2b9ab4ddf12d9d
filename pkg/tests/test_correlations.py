import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fig2_photons
from spectralmbcs.correlations import (
    CHUNK_SIZE,
    DetectionEvent,
    GridSpec,
    amplitude_matrix,
    detection_density,
    detection_probability,
    landscape_sweep,
    path_terms,
    validate_bins,
)
from spectralmbcs.errors import BinConditionError, ConfigError, DimensionError
from spectralmbcs.network import balanced_beam_splitter, haar_random, identity, permutations, symmetric_tritter
from spectralmbcs.permanent import permanent_naive
from spectralmbcs.spectra import PhotonInput, Spectrum
from spectralmbcs.symmetry import FrequencyPermutation, permuted_density_from_amplitudes


def _pair(t1=0.0, t2=0.0):
    g = Spectrum.gaussian()
    return [PhotonInput(1, g, t1), PhotonInput(2, g, t2)]


@pytest.mark.parametrize("w", [-1.3, 0.0, 0.4, 2.2])
def test_hom_zero_probability(w):
    event = DetectionEvent((1, 2), (w, w), 0.01)
    assert detection_probability(_pair(), balanced_beam_splitter(), event) == pytest.approx(0.0, abs=1e-30)


def test_tritter_equal_frequencies():
    photons = fig2_photons(times=(2.0, 2.0, 2.0))
    w, dw = 0.3, 0.01
    event = DetectionEvent((1, 2, 3), (w, w, w), dw)
    xi2 = Spectrum.gaussian().amplitude(w) ** 2
    expected = dw**3 * (1 / 3) * xi2**3
    assert detection_probability(photons, symmetric_tritter(), event) == pytest.approx(expected, rel=1e-12)


def test_permanent_equals_explicit_path_sum():
    photons = fig2_photons()
    net = haar_random(3, 17)
    freqs = (0.2, -0.7, 1.1)
    perm = permanent_naive(amplitude_matrix(photons, net, DetectionEvent((1, 2, 3), freqs, 0.005)))
    total = sum(a * b for a, b in path_terms(photons, net, (1, 2, 3), freqs).values())
    assert perm == pytest.approx(total, abs=1e-15)


def test_eq5_identity_four_photons():
    g = Spectrum.gaussian()
    photons = [PhotonInput(s, g, t) for s, t in zip((1, 2, 3, 4), (0.0, 1.7, 4.2, 6.0))]
    net = haar_random(5, 21)
    ports = (1, 3, 4, 5)
    rng = np.random.default_rng(0)
    for nu in rng.uniform(-2, 2, size=(5, 4)):
        for tau in permutations(4):
            direct = detection_density(photons, net, ports, FrequencyPermutation(tau).apply(nu))
            assert abs(direct - permuted_density_from_amplitudes(photons, net, ports, nu, tau)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(0, 10_000),
    times=st.lists(st.floats(-20, 20, allow_nan=False), min_size=3, max_size=3),
    freqs=st.lists(st.floats(-4, 4, allow_nan=False), min_size=3, max_size=3),
)
def test_density_nonnegative(seed, times, freqs):
    photons = fig2_photons(times=tuple(times))
    assert detection_density(photons, haar_random(4, seed), (1, 2, 4), np.array(freqs)) >= 0.0


def test_validate_bins_fig2_example():
    report = validate_bins(_pair(0.0, 7.4), 0.01)
    assert report.time_spread == pytest.approx(0.074)
    assert report.bandwidth_ratio == pytest.approx(0.01)
    assert report.ok and report.failed == ()


def test_validate_bins_coarse_bin_fails_bandwidth_condition():
    report = validate_bins(_pair(0.0, 0.0), 1.0)
    assert not report.bandwidth_ok and report.time_ok
    with pytest.raises(BinConditionError) as info:
        report.raise_if_failed()
    assert len(info.value.failed) == 1


def test_validate_bins_single_photon():
    report = validate_bins([PhotonInput(1, Spectrum.gaussian(), 5.0)], 0.01)
    assert report.time_spread == 0.0 and report.time_ok


def test_detection_probability_enforces_bins():
    event = DetectionEvent((1, 2), (0.0, 0.1), 0.5)
    with pytest.raises(BinConditionError):
        detection_probability(_pair(0.0, 3.0), balanced_beam_splitter(), event)
    value = detection_probability(_pair(0.0, 3.0), balanced_beam_splitter(), event, check_bins=False)
    assert value > 0


def test_event_validation():
    with pytest.raises(DimensionError):
        DetectionEvent((1, 2), (0.0,), 0.01)
    with pytest.raises(ConfigError):
        DetectionEvent((1, 1), (0.0, 0.0), 0.01)
    with pytest.raises(ConfigError):
        DetectionEvent((1, 2), (0.0, 0.0), 0.0)
    with pytest.raises(DimensionError):
        detection_density(_pair(), balanced_beam_splitter(), (1,), [0.0])
    with pytest.raises(ConfigError):
        detection_density(_pair(), balanced_beam_splitter(), (1, 3), [0.0, 0.0])


def test_identical_photons_landscape_symmetric_under_axis_permutation():
    photons = fig2_photons(times=(1.5, 1.5, 1.5))
    grid = GridSpec.uniform(-2, 2, 13, (0, 1, 2))
    values = landscape_sweep(photons, haar_random(3, 8), (1, 2, 3), grid).values
    for axes in permutations(3):
        assert np.allclose(values, values.transpose(axes), rtol=1e-12, atol=1e-17)


def test_zero_spectrum_region_has_zero_density():
    box = Spectrum.tabulated(np.linspace(-1, 1, 41), np.ones(41))
    photons = [PhotonInput(1, box, 0.0), PhotonInput(2, box, 0.4)]
    assert detection_density(photons, balanced_beam_splitter(), (1, 2), [3.0, 0.2]) == 0.0


def test_thread_count_does_not_change_results():
    photons = fig2_photons()
    grid = GridSpec.uniform(-3, 3, 25, (0, 1, 2)).points(3)
    assert grid.size // 3 > 2 * CHUNK_SIZE
    single = detection_density(photons, symmetric_tritter(), (1, 2, 3), grid)
    many = detection_density(photons, symmetric_tritter(), (1, 2, 3), grid, threads=4)
    assert np.array_equal(single, many)


def test_grid_slice_validation():
    with pytest.raises(ConfigError):
        GridSpec.uniform(-1, 1, 5, (0, 1)).points(3)
    with pytest.raises(ConfigError):
        GridSpec.uniform(-1, 1, 5, (0, 0)).points(2)
    with pytest.raises(ConfigError):
        GridSpec.uniform(-1, 1, 5, (0, 1), fixed={0: 0.0}).points(3)
    pts = GridSpec.uniform(-1, 1, 5, (0, 2), fixed={1: 0.25}).points(3)
    assert pts.shape == (5, 5, 3) and np.all(pts[..., 1] == 0.25)


def test_landscape_csv_and_json(tmp_path):
    photons = fig2_photons()
    grid = GridSpec.uniform(-1, 1, 3, (0, 1), fixed={2: 0.5})
    land = landscape_sweep(photons, symmetric_tritter(), (1, 2, 3), grid, bin_width=0.008)
    path = tmp_path / "land.csv"
    land.to_csv(path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["nu1", "nu2", "probability_density"]
    assert [tuple(map(float, r[:2])) for r in rows[1:4]] == [(-1.0, -1.0), (-1.0, 0.0), (-1.0, 1.0)]
    assert float(rows[5][2]) == land.values[1, 1]
    land.to_json(tmp_path / "land.json")
    payload = json.loads((tmp_path / "land.json").read_text())
    assert payload["metadata"]["fixed"] == {"3": 0.5}
    assert payload["rows"][4][2] == land.values[1, 1]
    assert np.all(land.values >= 0)


def test_landscape_in_offsets_from_reference():
    g = Spectrum.gaussian(5.0, 1.0)
    photons = [PhotonInput(1, g, 0.0), PhotonInput(2, g, 0.0)]
    grid = GridSpec.uniform(-1, 1, 5, (0, 1))
    land = landscape_sweep(photons, identity(2), (1, 2), grid, omega_ref=5.0)
    assert land.values[2, 2] == pytest.approx(Spectrum.gaussian().amplitude(0.0) ** 4)
