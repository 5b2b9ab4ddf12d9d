import numpy as np
import pytest

from spectralmbcs import PhotonInput, Spectrum, symmetric_tritter

FIG2_TIMES = (0.0, 7.4, 11.3)

_acceptance_lines = []


def record_acceptance(line: str):
    _acceptance_lines.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


def fig2_photons(times=FIG2_TIMES, bandwidth=1.0, polarizations=(None, None, None)):
    g = Spectrum.gaussian(0.0, bandwidth)
    return [PhotonInput(i + 1, g, t, pol) for i, (t, pol) in enumerate(zip(times, polarizations))]


@pytest.fixture
def tritter():
    return symmetric_tritter()


@pytest.fixture
def fig2():
    return fig2_photons()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
