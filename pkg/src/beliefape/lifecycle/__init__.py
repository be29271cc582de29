"""Finite-horizon consumption-savings model with subjective income beliefs."""
from .model import (KAPPA_PROFILES, Adaptive, GridSpec, LifecycleModel, PensionRule,
                    Rational, default_kappa, gross_from_net, pension_benefit,
                    pension_income)
from .simulate import CORE_COLUMNS, SimulatedPanel, simulate
from .solve import PolicySolution, solve
from .structural import StructuralEffects, structural_tape

__all__ = [
    "KAPPA_PROFILES", "Adaptive", "GridSpec", "LifecycleModel", "PensionRule", "Rational",
    "default_kappa", "gross_from_net", "pension_benefit", "pension_income",
    "CORE_COLUMNS", "SimulatedPanel", "simulate", "PolicySolution", "solve",
    "StructuralEffects", "structural_tape",
]
