"""SVIRS epidemic model with vaccination and recovery-age-dependent immunity loss.

Steady states and thresholds, the delay characteristic equation and its
Hopf crossings, and a characteristic-aligned simulator.
"""

from .equilibria import (
    Equilibrium,
    Kind,
    basic_reproduction_number,
    disease_free_equilibrium,
    endemic_equilibrium,
    thresholds,
)
from .errors import (
    CoefficientMismatch,
    ConfigError,
    DomainError,
    HypothesisError,
    NoCriticalDelay,
    ParameterError,
    SimulationUnstable,
    SvirsError,
    UsageError,
)
from .hopf import Classification, HopfAnalysis, classify, critical_delays
from .model import (
    Parameters,
    baseline_parameters,
    immunity_feedback,
    immunity_feedback_lambda,
    theta,
)
from .simulate import (
    AgeGrid,
    SimState,
    Trajectory,
    detect_regime,
    init,
    run,
    step,
    total_population,
)
from .stability import CharCoefficients, char_coefficients, routh_hurwitz_H

__version__ = "0.1.0"

__all__ = [
    "Equilibrium",
    "Kind",
    "basic_reproduction_number",
    "disease_free_equilibrium",
    "endemic_equilibrium",
    "thresholds",
    "CoefficientMismatch",
    "ConfigError",
    "DomainError",
    "HypothesisError",
    "NoCriticalDelay",
    "ParameterError",
    "SimulationUnstable",
    "SvirsError",
    "UsageError",
    "Classification",
    "HopfAnalysis",
    "classify",
    "critical_delays",
    "Parameters",
    "baseline_parameters",
    "immunity_feedback",
    "immunity_feedback_lambda",
    "theta",
    "AgeGrid",
    "SimState",
    "Trajectory",
    "detect_regime",
    "init",
    "run",
    "step",
    "total_population",
    "CharCoefficients",
    "char_coefficients",
    "routh_hurwitz_H",
]
