"""Brute-force tile-level simulation of a faulty weight-stationary array.

Used as an independent oracle for the mask semantics in ``masks.py``: no
masks are built here, every product is routed through the PE that holds it.
"""

from __future__ import annotations

import math

import numpy as np

from reduce_sim.errors import ShapeMismatchError
from reduce_sim.faultsim.array import FaultMap


class ProcessingElement:
    """One multiply-accumulate cell holding a stationary weight."""
    __slots__ = ("row", "col", "faulty", "weight")

    def __init__(self, row: int, col: int, faulty: bool) -> None:
        self.row = row
        self.col = col
        self.faulty = faulty
        self.weight = 0.0

    def load_weight(self, weight: float) -> None:
        self.weight = weight

    def compute(self, activation: float, partial_sum: float) -> float:
        # A bypassed PE forwards the partial sum and contributes no product
        if self.faulty:
            return partial_sum
        return partial_sum + activation * self.weight


class SystolicArray:
    """R x C grid of PEs; activations enter per row, partial sums flow down columns."""

    def __init__(self, fault_map: FaultMap) -> None:
        self.rows = fault_map.rows
        self.cols = fault_map.cols
        self.cells = [
            [ProcessingElement(r, c, fault_map.is_faulty(r, c)) for c in range(self.cols)]
            for r in range(self.rows)
        ]

    def load_tile(self, tile: np.ndarray) -> None:
        """Load a weight tile (at most R x C); unused PEs hold zero."""
        for r in range(self.rows):
            for c in range(self.cols):
                inside = r < tile.shape[0] and c < tile.shape[1]
                self.cells[r][c].load_weight(float(tile[r, c]) if inside else 0.0)

    def run_tile(self, activations: np.ndarray) -> np.ndarray:
        """Stream one activation per row and collect the column sums."""
        out = np.zeros(self.cols)
        for c in range(self.cols):
            partial_sum = 0.0
            for r in range(self.rows):
                activation = float(activations[r]) if r < activations.shape[0] else 0.0
                partial_sum = self.cells[r][c].compute(activation, partial_sum)
            out[c] = partial_sum
        return out


def systolic_matmul_oracle(weights: np.ndarray, x: np.ndarray, fault_map: FaultMap) -> np.ndarray:
    """Compute ``W^T x`` by folding W onto the array tile by tile."""
    weights = np.asarray(weights, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if weights.ndim != 2 or weights.shape[0] != x.shape[0]:
        raise ShapeMismatchError(
            f"weights {weights.shape} incompatible with input vector of length {x.shape[0]}"
        )

    in_dim, out_dim = weights.shape
    rows, cols = fault_map.rows, fault_map.cols
    array = SystolicArray(fault_map)
    result = np.zeros(out_dim)
    for tile_row in range(math.ceil(in_dim / rows)):
        i0 = tile_row * rows
        for tile_col in range(math.ceil(out_dim / cols)):
            j0 = tile_col * cols
            tile = weights[i0:i0 + rows, j0:j0 + cols]
            array.load_tile(tile)
            column_sums = array.run_tile(x[i0:i0 + rows])
            result[j0:j0 + tile.shape[1]] += column_sums[: tile.shape[1]]
    return result
