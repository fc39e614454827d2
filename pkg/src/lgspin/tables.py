"""Grids and target values of the ten reference tables.

Each table is a list of :class:`Cell` objects.  ``target=None`` marks a cell
whose expected entry is "no violation" (violation <= 0) rather than a
number.  ``decimals`` is the number of decimals the target is quoted to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .quantities import Quantity

__all__ = ["Cell", "TABLES", "TABLE_TITLES", "table_cells"]

VIOLATION = "violation"
LAMBDA_THRESHOLD = "lambda_threshold"
VISIBILITY_THRESHOLD = "visibility_threshold"
LIMIT = "limit"

L, W, N = Quantity.LGI, Quantity.WLGI, Quantity.NSIT


@dataclass(frozen=True)
class Cell:
    quantity: Quantity
    kind: str
    j: float
    target: float | None
    lam: float = 1.0
    v: float = 1.0
    x: int = 0
    decimals: int = 2


def _grid(kind, rows, columns, targets, decimals=2, **fixed):
    """Expand a row-major target grid; ``columns`` is a list of (quantity, overrides)."""
    cells = []
    for j, row in zip(rows, targets):
        for (quantity, extra), target in zip(columns, row):
            cells.append(Cell(quantity, kind, j, target, decimals=decimals, **{**fixed, **extra}))
    return cells


TABLE_TITLES = {
    1: "LGI and WLGI violations, sharp measurement, pure state",
    2: "Lower end of the sharpness range with LGI / WLGI violation",
    3: "LGI and WLGI violations for unsharp measurement",
    4: "Threshold visibilities of LGI and WLGI, sharp measurement",
    5: "LGI and WLGI violations for a noisy initial state",
    6: "NSIT violation, sharp measurement, pure state",
    7: "NSIT violation for unsharp measurement",
    8: "NSIT violation for a noisy initial state",
    9: "LGI, WLGI and NSIT violations for coarse groupings x",
    10: "Lower end of the sharpness range with LGI / WLGI violation, coarse groupings x",
}

TABLES: dict[int, list[Cell]] = {
    1: _grid(VIOLATION, (1, 10, 100), [(L, {}), (W, {})], [(0.50, 0.44), (1.75, 0.87), (1.92, 0.96)]),
    2: _grid(LAMBDA_THRESHOLD, (1, 10, 100), [(L, {}), (W, {})], [(0.85, 0.71), (0.35, 0.28), (0.12, 0.08)]),
    3: _grid(
        VIOLATION,
        (10, 50, 100),
        [(L, {"lam": 0.7}), (L, {"lam": 0.5}), (W, {"lam": 0.7}), (W, {"lam": 0.5})],
        [(0.59, 0.19, 0.31, 0.12), (0.80, 0.37, 0.40, 0.19), (0.85, 0.41, 0.43, 0.21)],
    ),
    4: _grid(
        VISIBILITY_THRESHOLD,
        (1, 10, 100),
        [(L, {}), (W, {})],
        [(0.571, 0.276), (0.098, 0.052), (0.010, 0.005)],
        decimals=3,
    ),
    5: _grid(
        VIOLATION,
        (1, 10, 100),
        [(L, {"v": 0.8}), (L, {"v": 0.6}), (L, {"v": 0.4}), (W, {"v": 0.8}), (W, {"v": 0.6}), (W, {"v": 0.4})],
        [
            (0.27, 0.03, None, 0.32, 0.20, 0.08),
            (1.36, 0.97, 0.58, 0.69, 0.51, 0.32),
            (1.53, 1.14, 0.76, 0.77, 0.57, 0.38),
        ],
    ),
    6: _grid(VIOLATION, (1, 10, 100), [(N, {})], [(0.63,), (0.87,), (0.96,)]),
    7: _grid(
        VIOLATION,
        (1, 10, 100),
        [(N, {"lam": 0.1}), (N, {"lam": 0.5}), (N, {"lam": 0.8})],
        [(0.0004, 0.0521, 0.2263), (0.0026, 0.1418, 0.4502), (0.0063, 0.2085, 0.5726)],
        decimals=4,
    )
    + _grid(
        LIMIT,
        (math.inf,),
        [(N, {"lam": 0.1}), (N, {"lam": 0.5}), (N, {"lam": 0.8})],
        [(0.0100, 0.2500, 0.6400)],
        decimals=4,
    ),
    8: _grid(
        VIOLATION,
        (1, 10, 100),
        [(N, {"v": 0.8}), (N, {"v": 0.4}), (N, {"v": 0.2})],
        [(0.50, 0.25, 0.13), (0.70, 0.35, 0.17), (0.77, 0.38, 0.19)],
    ),
    9: _grid(
        VIOLATION,
        (40, 60, 80, 100),
        [(L, {"x": 10}), (L, {"x": 20}), (W, {"x": 10}), (W, {"x": 20}), (N, {"x": 10}), (N, {"x": 20})],
        [
            (1.52, 1.32, 0.76, 0.66, 0.76, 0.66),
            (1.61, 1.46, 0.81, 0.73, 0.81, 0.72),
            (1.67, 1.53, 0.83, 0.77, 0.83, 0.76),
            (1.70, 1.58, 0.85, 0.79, 0.85, 0.79),
        ],
    ),
    10: _grid(
        LAMBDA_THRESHOLD,
        (10, 20, 30, 40),
        [(L, {"x": 5}), (L, {"x": 7}), (L, {"x": 9}), (W, {"x": 5}), (W, {"x": 7}), (W, {"x": 9})],
        [
            (0.64, 0.75, 0.92, 0.53, 0.61, 0.72),
            (0.49, 0.55, 0.59, 0.40, 0.44, 0.48),
            (0.42, 0.47, 0.51, 0.33, 0.37, 0.40),
            (0.38, 0.42, 0.45, 0.29, 0.33, 0.36),
        ],
    ),
}


def table_cells(n: int) -> list[Cell]:
    try:
        return TABLES[int(n)]
    except (KeyError, ValueError, TypeError):
        raise DomainError("table", f"no table {n!r}; choose 1-10") from None
