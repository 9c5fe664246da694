"""Energy-harvesting rectifier models."""

from .eh_model import EhKind, EhModel, Rectifier, calibrate_steepness, check_monotone

__all__ = ["EhKind", "EhModel", "Rectifier", "calibrate_steepness", "check_monotone"]
