"""Evolving random multigraph with preferential attachment and edge deletion."""
from .params import DerivedConstants, ModelParams, Regime, classify, derive, validate

__version__ = "0.1.0"

__all__ = ["DerivedConstants", "ModelParams", "Regime", "classify", "derive", "validate"]
