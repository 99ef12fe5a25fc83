"""Fault-aware pruning masks induced by a fault map."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from reduce_sim.errors import ShapeMismatchError
from reduce_sim.faultsim.array import FaultMap

if TYPE_CHECKING:
    from reduce_sim.numnet.network import NetworkParams, NetworkSpec


class MaskSet:
    """One 0/1 matrix per weight matrix (1 = keep, 0 = pruned)."""
    __slots__ = ("layers",)

    def __init__(self, layers: list[np.ndarray]) -> None:
        checked = []
        for layer, mask in enumerate(layers):
            mask = np.asarray(mask)
            if mask.ndim != 2:
                raise ShapeMismatchError(f"mask {layer} must be 2-D, got shape {mask.shape}")
            if not np.isin(mask, (0, 1)).all():
                raise ValueError(f"mask {layer} has entries outside {{0, 1}}")
            mask = mask.astype(np.uint8)
            mask.flags.writeable = False
            checked.append(mask)
        self.layers = checked

    @classmethod
    def ones(cls, spec: NetworkSpec) -> MaskSet:
        return cls([np.ones(shape, dtype=np.uint8) for shape in spec.weight_shapes()])

    @property
    def shapes(self) -> list[tuple[int, int]]:
        return [m.shape for m in self.layers]

    def density(self) -> float:
        """Fraction of weights kept across all layers."""
        total = sum(m.size for m in self.layers)
        return float(sum(int(m.sum()) for m in self.layers) / total) if total else 1.0

    def check_compatible(self, params: NetworkParams) -> None:
        shapes = [w.shape for w in params.weights]
        if self.shapes != shapes:
            raise ShapeMismatchError(f"mask shapes {self.shapes} do not match weights {shapes}")


def derive_mask(input_dim: int, output_dim: int, fault_map: FaultMap) -> np.ndarray:
    """Mask for an I x J weight matrix.

    Weight (i, j) lives on PE (i mod R, j mod C); its entry is 0 iff that PE
    is faulty.
    """
    if input_dim < 1 or output_dim < 1:
        raise ValueError(f"mask dims must be >= 1, got {input_dim}x{output_dim}")
    pe_rows = np.arange(input_dim) % fault_map.rows
    pe_cols = np.arange(output_dim) % fault_map.cols
    return (~fault_map.grid[np.ix_(pe_rows, pe_cols)]).astype(np.uint8)


def derive_maskset(spec: NetworkSpec, fault_map: FaultMap) -> MaskSet:
    return MaskSet([derive_mask(i, j, fault_map) for i, j in spec.weight_shapes()])
