"""Gauge-field model of market dynamics: choice solitons, field kernels and checks."""

from .soliton import (
    ChoiceComponents,
    DerivedFields,
    SolitonParams,
    choice_components,
    choice_magnitude_pq,
    curvature,
    demand_curve_family,
    demand_radius,
    derived_fields,
    hasimoto_psi,
)

__version__ = "0.1.0"

__all__ = [
    "ChoiceComponents",
    "DerivedFields",
    "SolitonParams",
    "choice_components",
    "choice_magnitude_pq",
    "curvature",
    "demand_curve_family",
    "demand_radius",
    "derived_fields",
    "hasimoto_psi",
]
