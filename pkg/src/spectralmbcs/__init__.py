"""Frequency-resolved multiphoton interference in linear optical networks."""

from .correlations import (
    DetectionEvent,
    GridSpec,
    Landscape,
    detection_density,
    detection_probability,
    landscape_sweep,
    validate_bins,
)
from .network import (
    NetworkUnitary,
    balanced_beam_splitter,
    haar_random,
    interferometric_amplitude,
    symmetric_tritter,
)
from .permanent import permanent_batch, permanent_naive, permanent_ryser
from .spectra import PhotonInput, Spectrum, gaussian_amplitude, temporal_phase

__version__ = "0.1.0"

__all__ = [
    "DetectionEvent",
    "GridSpec",
    "Landscape",
    "NetworkUnitary",
    "PhotonInput",
    "Spectrum",
    "balanced_beam_splitter",
    "detection_density",
    "detection_probability",
    "gaussian_amplitude",
    "haar_random",
    "interferometric_amplitude",
    "landscape_sweep",
    "permanent_batch",
    "permanent_naive",
    "permanent_ryser",
    "symmetric_tritter",
    "temporal_phase",
    "validate_bins",
]
