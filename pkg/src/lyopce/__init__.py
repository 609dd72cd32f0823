"""Continuous freeze-drying models with polynomial-chaos uncertainty studies."""

from .distributions import Beta, Gamma, Gaussian, UncertainInput, Uniform
from .pce import PceSurrogate, evaluate_surrogate, fit_surrogate
from .physics import (
    ModelParameters,
    ProcessConditions,
    default_conditions,
    default_parameters,
    load_conditions,
    load_parameters,
)
from .primary import simulate_primary
from .secondary import simulate_secondary
from .studies import StudyConfig, case_config

__version__ = "0.1.0"
