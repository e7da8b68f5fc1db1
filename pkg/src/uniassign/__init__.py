"""Exact-arithmetic toolkit for random assignment under uniform weak preferences."""

from .core import (
    AssignmentMatrix,
    Matching,
    Profile,
    Rational,
    SdOrder,
    UniformPreference,
    assignments_equivalent,
    class_prefix_sums,
    enumerate_uniform_prefs,
    matrix_sd_dominates,
    rat,
    sd_compare,
)
from .mechanisms import eps_assign, ps_strict, rp_assign

__all__ = [
    "AssignmentMatrix",
    "Matching",
    "Profile",
    "Rational",
    "SdOrder",
    "UniformPreference",
    "assignments_equivalent",
    "class_prefix_sums",
    "enumerate_uniform_prefs",
    "eps_assign",
    "matrix_sd_dominates",
    "ps_strict",
    "rat",
    "rp_assign",
    "sd_compare",
]
