"""Stimulated Raman spectra and relaxation dynamics of molecular polaritons."""

__version__ = "0.1.0"

from .bath import BathSpec, Propagator, build_generator  # noqa: E402
from .config import ScenarioConfig, build_config, load_config  # noqa: E402
from .model import ConfigurationError, SystemSpec, build_polariton_basis  # noqa: E402
from .resolver import compare_with_master, resolve  # noqa: E402
from .response import PulseSpec  # noqa: E402
from .signals import SpectrumGrid, build_model, signal_1d, signal_2d, signal_ct, split_channels  # noqa: E402

__all__ = [
    "BathSpec", "ConfigurationError", "Propagator", "PulseSpec", "ScenarioConfig", "SpectrumGrid", "SystemSpec",
    "build_config", "build_generator", "build_model", "build_polariton_basis", "compare_with_master",
    "load_config", "resolve", "signal_1d", "signal_2d", "signal_ct", "split_channels",
]
