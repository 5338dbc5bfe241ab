"""Numerical side: manifold models, reduced functionals and critical points."""

from .critical import (
    CritPointAtInfinity,
    SearchConfig,
    energy_at_infinity,
    find_critical_points,
    nd_check,
    search_critical_points,
    to_summary,
)
from .models import FlatSlabModel, GridModel, ManifoldModel, load_model
from .reduced import Configuration, f_boundary, f_interior, f_pq, grad_f_pq, lk, l_k, partial_f

__all__ = [
    "Configuration",
    "CritPointAtInfinity",
    "FlatSlabModel",
    "GridModel",
    "ManifoldModel",
    "SearchConfig",
    "energy_at_infinity",
    "f_boundary",
    "f_interior",
    "f_pq",
    "find_critical_points",
    "grad_f_pq",
    "l_k",
    "lk",
    "load_model",
    "nd_check",
    "partial_f",
    "search_critical_points",
    "to_summary",
]
