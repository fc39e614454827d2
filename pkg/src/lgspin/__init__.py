"""Leggett-Garg, Wigner-form LGI and NSIT violations for a precessing spin j.

Quick start::

    >>> from lgspin import evaluate_point
    >>> round(evaluate_point(1, "lgi").violation, 6)
    0.5
"""

from .closed_form import asymptotic_limit, closed_form_value, ratio_r
from .errors import (
    ClosedFormUnavailable,
    DimensionOverflowError,
    DomainError,
    LGSpinError,
    NumericalDegeneracyError,
)
from .measurement import GroupingScheme, MeasurementSetting, collapse_group, group_outcome, make_setting, measure_levels
from .quantities import Engine, Pair, Protocol, Quantity, ViolationReport, evaluate
from .spin_core import SpinContext, Step, basis_state, build_spin_context, evolve, spin_context
from .sweep import (
    ThresholdQuery,
    Variable,
    evaluate_point,
    find_threshold,
    lgi_extreme_coarse_check,
    reproduce_table,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "ClosedFormUnavailable",
    "DimensionOverflowError",
    "DomainError",
    "Engine",
    "GroupingScheme",
    "LGSpinError",
    "MeasurementSetting",
    "NumericalDegeneracyError",
    "Pair",
    "Protocol",
    "Quantity",
    "SpinContext",
    "Step",
    "ThresholdQuery",
    "Variable",
    "ViolationReport",
    "asymptotic_limit",
    "basis_state",
    "build_spin_context",
    "closed_form_value",
    "collapse_group",
    "evaluate",
    "evaluate_point",
    "evolve",
    "find_threshold",
    "group_outcome",
    "lgi_extreme_coarse_check",
    "make_setting",
    "measure_levels",
    "ratio_r",
    "reproduce_table",
    "spin_context",
    "sweep",
]
