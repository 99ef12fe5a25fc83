"""PE grid of a weight-stationary systolic array and its permanent faults."""

from __future__ import annotations

from typing import Any, Iterable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from reduce_sim.config import ARRAY_COLS, ARRAY_ROWS


class ArrayConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    rows: int = Field(default=ARRAY_ROWS, ge=1)
    cols: int = Field(default=ARRAY_COLS, ge=1)

    @property
    def num_pes(self) -> int:
        return self.rows * self.cols


class PE:
    """Coordinate of one processing element."""
    __slots__ = ("row", "col")

    def __init__(self, row: int, col: int) -> None:
        self.row = row
        self.col = col

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PE):
            return NotImplemented
        return self.row == other.row and self.col == other.col

    def __lt__(self, other: PE) -> bool:
        return self.to_tuple() < other.to_tuple()

    def __hash__(self) -> int:
        return hash((self.row, self.col))

    def __repr__(self) -> str:
        return f"PE({self.row}, {self.col})"

    def to_tuple(self) -> tuple[int, int]:
        return (self.row, self.col)


class FaultMap:
    """Which PEs of one chip are permanently faulty.

    Backed by a read-only boolean grid indexed as [row, col]. ``seed`` records
    how the map was generated and is carried into reports.
    """

    def __init__(
        self,
        config: ArrayConfig,
        faulty: Iterable[tuple[int, int] | PE] = (),
        seed: int | None = None,
    ) -> None:
        self.config = config
        self.seed = seed
        grid = np.zeros((config.rows, config.cols), dtype=bool)
        for pe in faulty:
            row, col = pe.to_tuple() if isinstance(pe, PE) else pe
            if not self.in_bounds(row, col):
                raise ValueError(
                    f"PE ({row}, {col}) outside {config.rows}x{config.cols} array"
                )
            grid[row, col] = True
        grid.flags.writeable = False
        self._grid = grid

    @property
    def rows(self) -> int:
        return self.config.rows

    @property
    def cols(self) -> int:
        return self.config.cols

    @property
    def grid(self) -> np.ndarray:
        return self._grid

    def in_bounds(self, row: int, col: int) -> bool:
        return 0 <= row < self.config.rows and 0 <= col < self.config.cols

    def is_faulty(self, row: int, col: int) -> bool:
        return bool(self._grid[row, col])

    @property
    def fault_count(self) -> int:
        return int(self._grid.sum())

    def faulty_pes(self) -> list[PE]:
        """Faulty PEs in lexicographic (row, col) order."""
        return [PE(int(r), int(c)) for r, c in np.argwhere(self._grid)]

    def is_subset(self, other: FaultMap) -> bool:
        """True if every faulty PE here is also faulty in ``other``."""
        if self.config != other.config:
            return False
        return not bool((self._grid & ~other.grid).any())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FaultMap):
            return NotImplemented
        return (
            self.config == other.config
            and self.seed == other.seed
            and np.array_equal(self._grid, other.grid)
        )

    def __repr__(self) -> str:
        return (
            f"FaultMap({self.rows}x{self.cols}, faults={self.fault_count}, seed={self.seed})"
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "seed": self.seed,
            "faulty": [list(pe.to_tuple()) for pe in self.faulty_pes()],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> FaultMap:
        config = ArrayConfig(rows=data["rows"], cols=data["cols"])
        return cls(config, [(int(r), int(c)) for r, c in data["faulty"]], data.get("seed"))


def fault_rate(fault_map: FaultMap) -> float:
    """Fraction of PEs that are faulty."""
    return fault_map.fault_count / fault_map.config.num_pes
