"""Closed-form LGI / WLGI / NSIT values for the ``x = 0`` grouping.

Every expression is built around

    r(j) = (4j)! / (4^{2j} ((2j)!)^2) = C(4j, 2j) / 16^j,

which is evaluated through log-gamma, since ``(4j)!`` overflows a double once
``j >= 43``.  The long unsharp and mixed-state expressions are kept
term-for-term in their original arrangement but divided through by ``16^j``
so that no power of two larger than one is ever formed; that rescaling is
the only change.

Closed forms exist for pure states with any sharpness and for sharp
measurements with any visibility.  Anything else raises
:class:`~lgspin.errors.ClosedFormUnavailable`.
"""

from __future__ import annotations

import math

from .errors import ClosedFormUnavailable, DomainError
from .quantities import Quantity
from .spin_core import as_spin

__all__ = [
    "log_ratio_r",
    "ratio_r",
    "cf_lgi_sharp",
    "cf_wlgi_sharp",
    "cf_nsit_sharp",
    "cf_lgi_unsharp",
    "cf_wlgi_unsharp",
    "cf_nsit_unsharp",
    "cf_lgi_mixed",
    "cf_wlgi_mixed",
    "cf_nsit_mixed",
    "closed_form_value",
    "asymptotic_limit",
]


def _spin(j) -> float:
    return float(as_spin(j))


def _unit(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise DomainError(name, f"{value} is outside [0, 1]")
    return value


def log_ratio_r(j) -> float:
    """Natural log of ``(4j)! / (16^j ((2j)!)^2)``."""
    j = _spin(j)
    return math.lgamma(4 * j + 1) - 2 * math.lgamma(2 * j + 1) - 4 * j * math.log(2.0)


def ratio_r(j) -> float:
    return math.exp(log_ratio_r(j))


def cf_lgi_sharp(j) -> float:
    j = _spin(j)
    return 3 + 4.0 ** (1 - 2 * j) - 4.0 ** (1 - j) - 2 * ratio_r(j)


def cf_wlgi_sharp(j) -> float:
    j = _spin(j)
    return 1 + 4.0 ** (-2 * j) - 4.0 ** (-j) - ratio_r(j)


def cf_nsit_sharp(j) -> float:
    return 1 - ratio_r(j)


def _root_term(j: float, lam: float) -> float:
    return math.sqrt(1 - lam) * math.sqrt(1 + 2 * j * lam)


def cf_lgi_unsharp(j, lam) -> float:
    j, lam = _spin(j), _unit("lambda", lam)
    s = _root_term(j, lam)
    q4 = 4.0 ** (-j)  # 4^j / 16^j
    # bracket multiplying ((2j)!)^2, already divided by 16^j
    bracket = (
        1
        + 2 * (-2 * 16.0 ** (-j) + 1) * lam**2
        + 4 * j**2 * (1 - 4 * q4 * lam + 2 * (2 * 16.0 ** (-j) + 1) * lam**2)
        - 4 * lam * (-2 * 16.0 ** (-j) + q4 + 2 * s * 16.0 ** (-j) - 2 * q4 * s + s)
        - 4 * j * (1 + 2 * lam * (-2 * 16.0 ** (-j) + 2 * q4 - 2 + 2 * s * 16.0 ** (-j) - 2 * q4 * s + s))
    )
    tail = 2 * (1 + 2 * j) * lam * (-2 + lam - 2 * j * lam + 2 * s) * ratio_r(j)
    return (bracket + tail) / (1 + 2 * j) ** 2


def cf_wlgi_unsharp(j, lam) -> float:
    j, lam = _spin(j), _unit("lambda", lam)
    s = _root_term(j, lam)
    q4 = 4.0 ** (-j)
    q16 = 16.0 ** (-j)
    bracket = (
        4 * j**2 * lam * (-q4 + lam * q16 + lam)
        - lam * (-2 * q16 + q4 - 1 + lam * q16 + 2 * s * q16 - 2 * q4 * s + 2 * s)
        - 2 * j * (1 + lam * (-2 * q16 + 2 * q4 - 3 + 2 * s * q16 - 2 * q4 * s + 2 * s))
    )
    tail = (1 + 2 * j) * lam * (-2 + lam - 2 * j * lam + 2 * s) * ratio_r(j)
    return (bracket + tail) / (1 + 2 * j) ** 2


def cf_nsit_unsharp(j, lam) -> float:
    j, lam = _spin(j), _unit("lambda", lam)
    s = _root_term(j, lam)
    return lam / (1 + 2 * j) * (2 + (2 * j - 1) * lam - 2 * s) * (1 - ratio_r(j))


def cf_lgi_mixed(j, v) -> float:
    j, v = _spin(j), _unit("v", v)
    q4 = 4.0 ** (-j)
    q16 = 16.0 ** (-j)
    bracket = (
        8 * q4
        - 3
        + 2 * (2 * q16 - 6 * q4 + 3) * v
        + 2 * j * (1 + 2 * (2 * q16 - 2 * q4 + 1) * v)
    )
    return bracket / (1 + 2 * j) - 2 * v * ratio_r(j)


def cf_wlgi_mixed(j, v) -> float:
    j, v = _spin(j), _unit("v", v)
    q4 = 4.0 ** (-j)
    q16 = 16.0 ** (-j)
    bracket = -(1 - 2 * q4) + (q16 + 2 - 3 * q4 + 2 * (q16 - q4 + 1) * j) * v
    return bracket / (1 + 2 * j) - v * ratio_r(j)


def cf_nsit_mixed(j, v) -> float:
    v = _unit("v", v)
    return v - v * ratio_r(j)


_SHARP = {Quantity.LGI: cf_lgi_sharp, Quantity.WLGI: cf_wlgi_sharp, Quantity.NSIT: cf_nsit_sharp}
_UNSHARP = {Quantity.LGI: cf_lgi_unsharp, Quantity.WLGI: cf_wlgi_unsharp, Quantity.NSIT: cf_nsit_unsharp}
_MIXED = {Quantity.LGI: cf_lgi_mixed, Quantity.WLGI: cf_wlgi_mixed, Quantity.NSIT: cf_nsit_mixed}


def closed_form_value(quantity, j, lam: float = 1.0, v: float = 1.0, x: int = 0) -> float:
    """Dispatch to the closed form matching ``(lam, v, x)``.

    Raises ClosedFormUnavailable for ``x > 0`` or when both ``lam`` and ``v``
    are below one.
    """
    quantity = Quantity(quantity)
    lam, v = _unit("lambda", lam), _unit("v", v)
    if x != 0:
        raise ClosedFormUnavailable(f"no closed form for grouping x = {x}; use the simulation engine")
    if lam == 1.0 and v == 1.0:
        return _SHARP[quantity](j)
    if v == 1.0:
        return _UNSHARP[quantity](j, lam)
    if lam == 1.0:
        return _MIXED[quantity](j, v)
    raise ClosedFormUnavailable(
        f"no closed form for lambda = {lam} together with v = {v}; use the simulation engine"
    )


def asymptotic_limit(quantity, lam: float = 1.0, v: float = 1.0) -> float:
    """Violation (value minus bound) approached as ``j -> infinity``.

    ``2 v lam^2`` for LGI and ``v lam^2`` for WLGI and NSIT.  Each quantity
    is affine in ``v`` and the maximally mixed state gives no violation in
    the limit, so the pure-state limit scales by ``v``.
    """
    quantity = Quantity(quantity)
    lam, v = _unit("lambda", lam), _unit("v", v)
    scale = 2.0 if quantity is Quantity.LGI else 1.0
    return scale * v * lam**2
